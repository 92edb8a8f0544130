use semidot::model::ProblemConfig;
use semidot::smooth;
use semidot::tf2d::{self, CoulombKernel};
use std::f64::consts::PI;

fn main() {
    let lambda = 1.2;
    let n = 128;
    let mut cfg = ProblemConfig::chaotic_dot(lambda).unwrap();
    cfg.grid_n = n;
    let tf = tf2d::solve_tf(&cfg).unwrap();
    let h = tf.w.spacing();

    let int_mu = tf.mu_plus.integrate();
    let int_mu2 = tf.mu_plus.integrate_map(|v| v * v);
    let int_mu32 = tf.mu_plus.integrate_map(|v| v.powf(1.5));
    let kernel = CoulombKernel::new(tf.w.n(), h);
    let g = kernel.convolve(&tf.mu_plus).unwrap();
    let i2: f64 = 2.0
        * PI
        * h
        * h
        * tf
            .mu_plus
            .values()
            .iter()
            .zip(g.values().iter())
            .map(|(a, b)| a * b)
            .sum::<f64>();

    // direct TF functional with rho = mu_+ / 2pi
    let rho = tf.mu_plus.map(|v| v / (2.0 * PI));
    let kin = rho.integrate_map(|v| PI * v * v);
    let mut pot = 0.0;
    for ((i, j), &r) in rho.values().indexed_iter() {
        let (x, y) = rho.node(i, j);
        pot += r * cfg.potential.eval([x, y]).unwrap();
    }
    pot *= h * h;
    let gr = kernel.convolve(&rho).unwrap();
    let hart: f64 = PI
        * h
        * h
        * rho
            .values()
            .iter()
            .zip(gr.values().iter())
            .map(|(a, b)| a * b)
            .sum::<f64>();

    // support radius along the axes
    let mut rmax: f64 = 0.0;
    for ((i, j), &v) in tf.mu_plus.values().indexed_iter() {
        if v > 0.0 {
            let (x, y) = tf.mu_plus.node(i, j);
            rmax = rmax.max((x * x + y * y).sqrt());
        }
    }

    println!("mu           = {:.6}", tf.mu);
    println!("int mu_+     = {:.6}  (2pi = {:.6})", int_mu, 2.0 * PI);
    println!("int mu_+^2   = {:.6}  -> band/(4pi) = {:.6}", int_mu2, int_mu2 / (4.0 * PI));
    println!("int mu_+^3/2 = {:.6}  -> A32 = {:.6}", int_mu32, -2.0 / (3.0 * PI.powi(3)) * int_mu32);
    println!("I2           = {:.6}  -> I2/(8pi^2) = {:.6}", i2, i2 / (8.0 * PI * PI));
    println!("A2 (mine)    = {:.6}", tf.mu - int_mu2 / (4.0 * PI) - i2 / (8.0 * PI * PI));
    println!("A2 (literal) = {:.6}", tf.mu - int_mu / (4.0 * PI) - i2 / (8.0 * PI * PI));
    println!("TF func: kin = {kin:.6} pot = {pot:.6} hart = {hart:.6} sum = {:.6}", kin + pot + hart);
    println!("support rmax = {rmax:.3}, mu_+ max = {:.4}", tf.mu_plus.values().iter().cloned().fold(0.0, f64::max));
    let a = smooth::solve_a(&tf).unwrap();
    let c2 = smooth::compute_c2(&tf, &a).unwrap();
    let c1 = smooth::compute_c1(&tf).unwrap();
    println!("c1 = {c1:.5} c2 = {c2:.5}");
    let lap = tf.w.laplacian();
    let mut lap_sum = 0.0;
    for ((i, j), &mp) in tf.mu_plus.values().indexed_iter() {
        if mp > 0.0 {
            lap_sum += lap.values()[[i, j]];
        }
    }
    println!("lapW term = {:.5}", lap_sum * h * h / (24.0 * PI));
}
