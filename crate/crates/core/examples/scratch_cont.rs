use semidot::dynamics::{continue_in_energy, find_orbits, SearchBudget};
use semidot::interp::Bicubic;
use semidot::model::ProblemConfig;
use semidot::tf2d;

fn main() {
    let mut cfg = ProblemConfig::chaotic_dot(1.2).unwrap();
    cfg.grid_n = 128;
    let tf = tf2d::solve_tf(&cfg).unwrap();
    let pot = Bicubic::new(tf.w.clone());
    let budget = SearchBudget {
        max_orbits: 4,
        closure_tol: 1e-10,
        max_period: 35.0,
        random_seeds: 0,
        returns_per_seed: 2,
        ring_seeds: 4,
        ..SearchBudget::default()
    };
    let report = find_orbits(&pot, tf.mu, &budget).unwrap();
    println!("orbits={}", report.orbits.len());
    let o = &report.orbits[0];
    println!("T={:.6} S={:.6} e={:.9}", o.period, o.action, o.energy);
    let de = 1e-3 * tf.mu;
    std::env::set_var("ORBIT_DEBUG", "1");
    match continue_in_energy(&pot, o, o.energy + de, &budget) {
        Ok(hi) => println!("hi: T={:.6} S={:.6} e={:.9}", hi.period, hi.action, hi.energy),
        Err(e) => println!("hi err: {e}"),
    }

    // probe the closure landscape transverse to the converged orbit
    use semidot::dynamics::{flow, PhaseState};
    let z0 = o.initial;
    let t0 = o.period;
    let dirs: [[f64; 4]; 2] = [[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
    for (di, w) in dirs.iter().enumerate() {
        println!("dir {di}:");
        for k in [-5i32, -4, -3, -2, 2, 3, 4, 5] {
            let s = if k < 0 {
                -(10f64).powi(k.abs() - 9)
            } else {
                (10f64).powi(k - 9)
            };
            let a = z0.to_array();
            let zp = PhaseState::from_array([
                a[0] + s * w[0],
                a[1] + s * w[1],
                a[2] + s * w[2],
                a[3] + s * w[3],
            ]);
            match flow(&pot, zp, t0, t0 / 4096.0) {
                Ok(zt) => {
                    let d = zt.distance(&zp);
                    println!("  s={s:+.1e} closure={d:.4e} ratio={:.3}", d / s.abs());
                }
                Err(e) => println!("  s={s:+.1e} err {e}"),
            }
        }
    }
}
