use semidot::grid::Grid2D;
use semidot::model::ConfinementPotential;
use semidot::tf2d::CoulombKernel;
use std::f64::consts::PI;

// Generalized TF fixed point: W = V + q * (1/2pi) int mu_+ / |x-y|,
// with (1/2pi) int mu_+ = m. Reports the raw integrals so different
// coefficient conventions can be compared.
fn mu_for_mass(w: &Grid2D, m: f64) -> f64 {
    let h2 = w.spacing() * w.spacing();
    let mass = |mu: f64| {
        w.values()
            .iter()
            .map(|&v| (mu - v).max(0.0))
            .sum::<f64>()
            * h2
            / (2.0 * PI)
    };
    let mut lo = w.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let mut hi = lo + 1.0;
    while mass(hi) < m {
        hi = lo + (hi - lo) * 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) < m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn main() {
    let pot = ConfinementPotential::chaotic_dot(1.2).unwrap();
    let l = 8.0;
    let n = 128;
    let v = Grid2D::from_fn(l, n, |x, y| pot.eval([x, y]).unwrap()).unwrap();
    let kernel = CoulombKernel::new(n, v.spacing());
    let h2 = v.spacing() * v.spacing();

    for &q in &[0.5, 1.0, 2.0] {
        for &m in &[0.5, 1.0, 2.0] {
            let mut w = v.clone();
            let mut mu = 0.0;
            let mut ok = true;
            for _ in 0..400 {
                mu = mu_for_mass(&w, m);
                let mut mp = w.map(|wv| (mu - wv).max(0.0));
                // zero the boundary ring for the FFT path
                let nn = mp.n();
                {
                    let vals = mp.values_mut();
                    for i in 0..nn {
                        vals[[i, 0]] = 0.0;
                        vals[[i, nn - 1]] = 0.0;
                        vals[[0, i]] = 0.0;
                        vals[[nn - 1, i]] = 0.0;
                    }
                }
                let g = kernel.convolve(&mp).unwrap();
                let mut target = v.clone();
                {
                    let tv = target.values_mut();
                    for ((i, j), val) in tv.indexed_iter_mut() {
                        *val += q * g.values()[[i, j]];
                    }
                }
                let mut res = 0.0f64;
                {
                    let wv = w.values_mut();
                    for ((i, j), val) in wv.indexed_iter_mut() {
                        let t = target.values()[[i, j]];
                        res = res.max((t - *val).abs());
                        *val += 0.5 * (t - *val);
                    }
                }
                if res < 1e-9 {
                    ok = true;
                    break;
                }
                ok = res < 1e-6;
            }
            let mp = w.map(|wv| (mu - wv).max(0.0));
            let i1 = mp.integrate();
            let i2 = mp.integrate_map(|x| x * x);
            let i32 = mp.integrate_map(|x| x.powf(1.5));
            let g = kernel.convolve(&{
                let mut z = mp.clone();
                let nn = z.n();
                let vals = z.values_mut();
                for i in 0..nn {
                    vals[[i, 0]] = 0.0;
                    vals[[i, nn - 1]] = 0.0;
                    vals[[0, i]] = 0.0;
                    vals[[nn - 1, i]] = 0.0;
                }
                z
            })
            .unwrap();
            let icoul: f64 = 2.0
                * PI
                * h2
                * mp.values()
                    .iter()
                    .zip(g.values().iter())
                    .map(|(a, b)| a * b)
                    .sum::<f64>();
            println!(
                "q={q} m={m} ok={ok}: mu={mu:.5} int={i1:.4} int2={i2:.5} int32={i32:.5} coul={icoul:.5}"
            );
            println!(
                "   A2a=mu-(1/4pi)int2-(q/8pi^2)coul = {:.5}   A32(pi3)={:.5} A32(pi2)={:.5}",
                mu - i2 / (4.0 * PI) - q * icoul / (8.0 * PI * PI),
                -2.0 / (3.0 * PI.powi(3)) * i32,
                -2.0 / (3.0 * PI.powi(2)) * i32
            );
        }
    }
}
