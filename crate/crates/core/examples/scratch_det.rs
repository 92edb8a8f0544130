use nalgebra::{Matrix2, Matrix4, Vector4};
use semidot::dynamics::{find_orbits, SearchBudget};
use semidot::dynamics::{variational_flow, Hamiltonian, Potential};
use semidot::interp::Bicubic;
use semidot::model::ProblemConfig;
use semidot::tf2d;

// Probe: how does the reduced-monodromy determinant error scale with the
// integration step, and how big is the energy leak of the tangent map?

fn reduce(m: &Matrix4<f64>, zdot: [f64; 4], grad_h: [f64; 4]) -> (Matrix2<f64>, f64, f64) {
    let v1 = Vector4::from(zdot).normalize();
    let v2 = Vector4::from(grad_h).normalize();
    let omega =
        |u: &Vector4<f64>, v: &Vector4<f64>| u[0] * v[2] + u[1] * v[3] - u[2] * v[0] - u[3] * v[1];
    let jv = |u: &Vector4<f64>| Vector4::new(u[2], u[3], -u[0], -u[1]);
    let w1 = (0..4)
        .map(|i| {
            let mut e = Vector4::zeros();
            e[i] = 1.0;
            e - v1 * v1.dot(&e) - v2 * v2.dot(&e)
        })
        .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
        .unwrap()
        .normalize();
    let w2 = jv(&w1);
    let mw1 = m * w1;
    let mw2 = m * w2;
    // energy leak: grad H component of M w (should vanish for the exact flow)
    let leak = v2.dot(&mw1).abs().max(v2.dot(&mw2).abs());
    // time-shear component along zdot
    let shear = v1.dot(&mw1).abs().max(v1.dot(&mw2).abs());
    (
        Matrix2::new(
            omega(&w2, &mw1),
            omega(&w2, &mw2),
            omega(&mw1, &w1),
            omega(&mw2, &w1),
        ),
        leak,
        shear,
    )
}

fn main() {
    let mut cfg = ProblemConfig::chaotic_dot(1.2).unwrap();
    cfg.grid_n = 128;
    let tf = tf2d::solve_tf(&cfg).unwrap();
    let pot = Bicubic::new(tf.w.clone());
    let budget = SearchBudget {
        max_orbits: 10,
        closure_tol: 1e-11,
        max_period: 50.0,
        random_seeds: 128,
        returns_per_seed: 8,
        ring_seeds: 24,
        ..SearchBudget::default()
    };
    let report = find_orbits(&pot, tf.mu, &budget).unwrap();
    println!("orbits={}", report.orbits.len());
    let ham = Hamiltonian::new(&pot);
    for o in &report.orbits {
        println!(
            "T={:.4} tr={:+.3e} res={:.1e} (stored det-1={:+.1e})",
            o.period,
            o.trace,
            o.closure_residual,
            o.monodromy.determinant() - 1.0
        );
        let zdot = ham.rhs(&o.initial).unwrap();
        let g = Potential::grad(&pot, o.initial.x).unwrap();
        let grad_h = [g[0], g[1], 2.0 * o.initial.p[0], 2.0 * o.initial.p[1]];
        for steps in [65536usize, 262144, 1048576, 4194304] {
            let (zt, m) =
                variational_flow(&pot, o.initial, o.period, o.period / steps as f64).unwrap();
            let res = zt.distance(&o.initial);
            let (red, leak, shear) = reduce(&m, zdot, grad_h);
            println!(
                "  steps={steps:7}: res={res:.1e} det4-1={:+.1e} det2-1={:+.1e} tr={:+.6e} leak={:.1e} shear={:.1e}",
                m.determinant() - 1.0,
                red.determinant() - 1.0,
                red.trace(),
                leak,
                shear
            );
        }
    }
}
