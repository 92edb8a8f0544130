use semidot::dynamics::{continue_in_energy, find_orbits, SearchBudget};
use semidot::interp::Bicubic;
use semidot::model::ProblemConfig;
use semidot::tf2d;

fn main() {
    let mut cfg = ProblemConfig::chaotic_dot(1.2).unwrap();
    cfg.grid_n = 128;
    let tf = tf2d::solve_tf(&cfg).unwrap();
    let pot = Bicubic::new(tf.w.clone());
    let tol: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1e-10);
    let max_period: f64 = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(120.0);
    let budget = SearchBudget {
        max_orbits: 40,
        closure_tol: tol,
        max_period,
        random_seeds: 1024,
        returns_per_seed: 10,
        ring_seeds: 24,
        ..SearchBudget::default()
    };
    println!(
        "axis periods: Tx={:.3} Ty={:.3}",
        axis_period(&pot, tf.mu, 0),
        axis_period(&pot, tf.mu, 1)
    );
    symmetry_error(&pot);
    let t0 = std::time::Instant::now();
    let report = find_orbits(&pot, tf.mu, &budget).unwrap();
    println!(
        "orbits={} seeds={} polishes={}/{} dropped maslov={} frame={} ({:.1?})",
        report.orbits.len(),
        report.seeds_tried,
        report.polishes_converged,
        report.polishes_attempted,
        report.dropped_maslov,
        report.dropped_frame,
        t0.elapsed()
    );
    let de = 1e-3 * tf.mu;
    for (k, o) in report.orbits.iter().enumerate() {
        let dsde = match (
            continue_in_energy(&pot, o, o.energy + de, &budget),
            continue_in_energy(&pot, o, o.energy - de, &budget),
        ) {
            (Ok(hi), Ok(lo)) => (hi.action - lo.action) / (hi.energy - lo.energy),
            (a, b) => {
                if let Err(e) = a {
                    eprintln!("  cont(+de) failed: {e}");
                }
                if let Err(e) = b {
                    eprintln!("  cont(-de) failed: {e}");
                }
                f64::NAN
            }
        };
        println!(
            "{k:2}: T={:.6} S={:.6} tr={:+.3e} sigma={} g={} res={:.1e} det-1={:+.1e} dS/de-T={:+.2e}",
            o.period,
            o.action,
            o.trace,
            o.maslov,
            o.multiplicity,
            o.closure_residual,
            o.monodromy.determinant() - 1.0,
            (dsde - o.period) / o.period
        );
    }
}

// estimate of axis libration periods via the turning-point quadrature
// T = int dx / sqrt(mu - W) (velocity = 2p)
#[allow(dead_code)]
fn axis_period(pot: &Bicubic, mu: f64, axis: usize) -> f64 {
    let mut lo = 0.0;
    let mut hi = 7.9;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let x = if axis == 0 { [mid, 0.0] } else { [0.0, mid] };
        if pot.eval(x[0], x[1]).map(|w| w < mu).unwrap_or(false) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let xt = lo;
    let m = 20000;
    let mut t = 0.0;
    for k in 0..m {
        // substitution x = xt sin(u) removes the endpoint singularity
        let u = (k as f64 + 0.5) / m as f64 * std::f64::consts::PI - std::f64::consts::PI / 2.0;
        let x = xt * u.sin();
        let p = if axis == 0 { [x, 0.0] } else { [0.0, x] };
        let w = pot.eval(p[0], p[1]).unwrap();
        t += xt * u.cos() / (mu - w).max(1e-14).sqrt();
    }
    t * std::f64::consts::PI / m as f64
}

#[allow(dead_code)]
fn symmetry_error(pot: &Bicubic) {
    for q in [[2.48, 1.36], [4.16, 3.52], [1.04, 4.88]] {
        let a = pot.eval(q[0], q[1]).unwrap();
        let b = pot.eval(-q[0], q[1]).unwrap();
        let c = pot.eval(q[0], -q[1]).unwrap();
        println!("W{q:?}={a:.9}  dx={:.2e} dy={:.2e}", (a - b).abs(), (a - c).abs());
    }
}
