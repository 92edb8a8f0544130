use semidot::model::ProblemConfig;
use semidot::oracle::{eigensolve, exchange_pair_sum, OracleConfig};
use semidot::tf2d;

// Quantum cross-check of the smooth coefficients: diagonalize
// h = -eps^2 Lap + W for the self-consistent W and compare the band sum
// 2 sum (mu - e_i)_+ and the exchange pair sum against the two candidate
// coefficient sets.
fn main() {
    let mut cfg = ProblemConfig::chaotic_dot(1.2).unwrap();
    cfg.grid_n = 128;
    let tf = tf2d::solve_tf(&cfg).unwrap();
    let int2 = tf.mu_plus.integrate_map(|v| v * v);
    let int32 = tf.mu_plus.integrate_map(|v| v.powf(1.5));
    println!("mu={:.6} int2={:.6} int32={:.6}", tf.mu, int2, int32);

    for &(eps, nev) in &[(0.15, 36), (0.125, 44), (0.1, 62)] {
        let oc = OracleConfig {
            eps,
            nev,
            ..OracleConfig::default()
        };
        let t0 = std::time::Instant::now();
        let spec = eigensolve(&tf.w, &oc).unwrap();
        let z = 1.0 / (eps * eps);
        let occ = spec.eigenvalues.iter().filter(|&&e| e < tf.mu).count();
        assert!(occ < nev, "need more eigenpairs: occ={occ} nev={nev}");
        let band: f64 = 2.0
            * spec.eigenvalues[..occ]
                .iter()
                .map(|&e| tf.mu - e)
                .sum::<f64>();
        let x = exchange_pair_sum(&spec, occ).unwrap();
        println!(
            "eps={eps}: occ={occ} (Z/2={:.1})  band/Z={:.6} [mine {:.6}]  X*eps^3={:.6} [mine {:.6} | printed {:.6}]  ({:.1?})",
            z / 2.0,
            band / z,
            int2 / (4.0 * std::f64::consts::PI),
            x * eps.powi(3),
            2.0 / (3.0 * std::f64::consts::PI.powi(2)) * int32,
            2.0 / (3.0 * std::f64::consts::PI.powi(3)) * int32,
            t0.elapsed()
        );
    }
}
