use semidot::dynamics::{continue_in_energy, find_orbits, PeriodicOrbit, SearchBudget};
use semidot::grid::Grid2D;
use semidot::interp::Bicubic;
use semidot::model::ProblemConfig;
use semidot::oracle::{eigensolve, filled_energy, local_extrema, oscillation_extract, OracleConfig};
use semidot::tf2d::{self, TfSolution};
use std::f64::consts::PI;

// Prototype of the fixed-eps trace-formula vs oracle comparison:
// continuation knots in energy, Weyl inversion e_F(N), extrema matching,
// and the one-time Maslov phase sign check.

fn weyl_count(tf: &TfSolution, e: f64) -> f64 {
    tf.w.integrate_map(|w| (e - w).max(0.0)) / (2.0 * PI)
}

fn weyl_invert(tf: &TfSolution, nu: f64) -> f64 {
    let mut lo = tf.w.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let mut hi = tf.mu + 2.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if weyl_count(tf, mid) < nu {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

struct Family {
    energies: Vec<f64>,
    s: Vec<f64>,
    t: Vec<f64>,
    tr: Vec<f64>,
    maslov: u32,
    mult: u32,
}

impl Family {
    // Hermite cubic for S with dS/de = T; linear for T and tr.
    fn at(&self, e: f64) -> (f64, f64, f64) {
        let k = match self.energies.iter().position(|&ek| ek >= e) {
            Some(0) => 0,
            Some(k) => k - 1,
            None => self.energies.len() - 2,
        };
        let (e0, e1) = (self.energies[k], self.energies[k + 1]);
        let h = e1 - e0;
        let u = ((e - e0) / h).clamp(-0.5, 1.5);
        let (s0, s1, t0, t1) = (self.s[k], self.s[k + 1], self.t[k], self.t[k + 1]);
        let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
        let h10 = u * (1.0 - u) * (1.0 - u);
        let h01 = u * u * (3.0 - 2.0 * u);
        let h11 = u * u * (u - 1.0);
        let s = h00 * s0 + h10 * h * t0 + h01 * s1 + h11 * h * t1;
        let t = t0 + (t1 - t0) * u;
        let tr = self.tr[k] + (self.tr[k + 1] - self.tr[k]) * u;
        (s, t, tr)
    }
}

fn tr_power(tr: f64, r: u32) -> f64 {
    let mut prev = 2.0;
    let mut cur = tr;
    for _ in 1..r {
        let next = tr * cur - prev;
        prev = cur;
        cur = next;
    }
    if r == 0 {
        2.0
    } else {
        cur
    }
}

fn trace_curve(families: &[Family], e: f64, eps: f64, sign: f64) -> f64 {
    let mut osc = 0.0;
    for f in families {
        let (s, t, tr) = f.at(e);
        for r in 1..=3u32 {
            let stab = tr_power(tr, r) - 2.0;
            if stab.abs() < 1e-6 {
                continue;
            }
            let rf = r as f64;
            let amp = 2.0 * f.mult as f64 / (PI * rf * rf * t * stab.abs().sqrt());
            let phase = rf * s / eps + sign * (rf * f.maslov as f64) * PI / 2.0;
            osc += amp * phase.cos();
        }
    }
    osc
}

fn main() {
    let mut cfg = ProblemConfig::chaotic_dot(1.2).unwrap();
    cfg.grid_n = 128;
    let tf = tf2d::solve_tf(&cfg).unwrap();
    let pot = Bicubic::new(tf.w.clone());
    let budget = SearchBudget {
        max_orbits: 30,
        closure_tol: 1e-11,
        max_period: 100.0,
        random_seeds: 512,
        returns_per_seed: 8,
        ring_seeds: 24,
        ..SearchBudget::default()
    };
    let t0 = std::time::Instant::now();
    let report = find_orbits(&pot, tf.mu, &budget).unwrap();
    println!("orbits={} ({:.1?})", report.orbits.len(), t0.elapsed());

    // Continuation knots spanning the Weyl window nu in [0.6, 1.3].
    let e_lo = weyl_invert(&tf, 0.6);
    let e_hi = weyl_invert(&tf, 1.3);
    println!("mu={:.6} e_F window [{:.6}, {:.6}]", tf.mu, e_lo, e_hi);
    let n_knots = 7;
    let knot_e: Vec<f64> = (0..n_knots)
        .map(|k| e_lo + (e_hi - e_lo) * k as f64 / (n_knots - 1) as f64)
        .collect();
    let t1 = std::time::Instant::now();
    let mut families = Vec::new();
    'orbit: for (idx, o) in report.orbits.iter().enumerate() {
        // chain outward from the knot nearest the orbit energy
        let start = knot_e
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (a.1 - o.energy)
                    .abs()
                    .partial_cmp(&(b.1 - o.energy).abs())
                    .unwrap()
            })
            .unwrap()
            .0;
        let mut knots: Vec<Option<PeriodicOrbit>> = vec![None; n_knots];
        let mut cur = o.clone();
        for k in (0..=start).rev() {
            match continue_in_energy(&pot, &cur, knot_e[k], &budget) {
                Ok(c) => {
                    cur = c.clone();
                    knots[k] = Some(c);
                }
                Err(e) => {
                    println!("  orbit {idx} (T={:.3}): knot {k} failed: {e}", o.period);
                    continue 'orbit;
                }
            }
        }
        cur = knots[start].clone().unwrap();
        for (k, &ke) in knot_e.iter().enumerate().skip(start + 1) {
            match continue_in_energy(&pot, &cur, ke, &budget) {
                Ok(c) => {
                    cur = c.clone();
                    knots[k] = Some(c);
                }
                Err(e) => {
                    println!("  orbit {idx} (T={:.3}): knot {k} failed: {e}", o.period);
                    continue 'orbit;
                }
            }
        }
        let knots: Vec<PeriodicOrbit> = knots.into_iter().map(Option::unwrap).collect();
        if knots.iter().any(|c| c.maslov != o.maslov) {
            println!("  orbit {idx} (T={:.3}): maslov varies, dropped", o.period);
            continue;
        }
        families.push(Family {
            energies: knots.iter().map(|c| c.energy).collect(),
            s: knots.iter().map(|c| c.action).collect(),
            t: knots.iter().map(|c| c.period).collect(),
            tr: knots.iter().map(|c| c.trace).collect(),
            maslov: o.maslov,
            mult: o.multiplicity,
        });
    }
    println!(
        "families kept: {}/{} ({:.1?})",
        families.len(),
        report.orbits.len(),
        t1.elapsed()
    );

    for &eps in &[0.15f64, 0.125, 0.1] {
        let z = 1.0 / (eps * eps);
        let n_lo = (0.65 * z / 2.0).ceil() as usize * 2;
        let n_hi = (1.25 * z / 2.0).floor() as usize * 2;
        let nev = n_hi / 2 + 10;
        for &ngrid in &[128usize, 256] {
            let t2 = std::time::Instant::now();
            let w = if ngrid == tf.w.n() {
                tf.w.clone()
            } else {
                let l = tf.w.extent();
                Grid2D::from_fn(l, ngrid, |x, y| pot.eval(x, y).unwrap_or(5.0)).unwrap()
            };
            let oc = OracleConfig {
                eps,
                nev,
                ..OracleConfig::default()
            };
            let spec = match eigensolve(&w, &oc) {
                Ok(s) => s,
                Err(e) => {
                    println!("eps={eps} n={ngrid}: eigensolve failed: {e}");
                    continue;
                }
            };
            let mut ns = Vec::new();
            let mut es = Vec::new();
            let mut n = n_lo;
            while n <= n_hi {
                if let Some(e) = filled_energy(&spec.eigenvalues, n) {
                    ns.push(n as f64);
                    es.push(e);
                }
                n += 2;
            }
            let ext = oscillation_extract(&ns, &es).unwrap();
            let rx: Vec<f64> = ext.residuals.iter().map(|&(x, _)| x).collect();
            let ry: Vec<f64> = ext.residuals.iter().map(|&(_, y)| y).collect();
            let ex_or = local_extrema(&rx, &ry);
            let amp = ry.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
            println!(
                "eps={eps} n={ngrid}: {} levels, N window [{n_lo},{n_hi}], resid amp {:.3e}, {} extrema ({:.1?})",
                spec.eigenvalues.len(),
                amp,
                ex_or.len(),
                t2.elapsed()
            );

            for sign in [-1.0f64, 1.0] {
                // dense trace curve over the same window
                let m = 600;
                let mut tx = Vec::with_capacity(m);
                let mut ty = Vec::with_capacity(m);
                for k in 0..m {
                    let nf = n_lo as f64 + (n_hi - n_lo) as f64 * k as f64 / (m - 1) as f64;
                    let e = weyl_invert(&tf, nf / z);
                    tx.push(nf);
                    ty.push(trace_curve(&families, e, eps, sign));
                }
                let ex_tr = local_extrema(&tx, &ty);
                // match each interior oracle extremum to the nearest trace extremum
                let mut offsets = Vec::new();
                for &(p, _) in &ex_or {
                    if p < rx[0] + 2.0 || p > rx[rx.len() - 1] - 2.0 {
                        continue;
                    }
                    let (j, &(q, _)) = ex_tr
                        .iter()
                        .enumerate()
                        .min_by(|a, b| {
                            (a.1 .0 - p).abs().partial_cmp(&(b.1 .0 - p).abs()).unwrap()
                        })
                        .unwrap();
                    // local full period around the matched trace extremum
                    let period = if j > 0 && j + 1 < ex_tr.len() {
                        ex_tr[j + 1].0 - ex_tr[j - 1].0
                    } else if j + 1 < ex_tr.len() {
                        2.0 * (ex_tr[j + 1].0 - ex_tr[j].0)
                    } else if j > 0 {
                        2.0 * (ex_tr[j].0 - ex_tr[j - 1].0)
                    } else {
                        continue;
                    };
                    offsets.push(((q - p).abs(), period));
                }
                let worst = offsets
                    .iter()
                    .map(|&(d, p)| d / p)
                    .fold(0.0f64, f64::max);
                let mean = if offsets.is_empty() {
                    f64::NAN
                } else {
                    offsets.iter().map(|&(d, p)| d / p).sum::<f64>() / offsets.len() as f64
                };
                println!(
                    "  sign={sign:+.0}: trace extrema {}, matched {}, offset/period mean {:.3} worst {:.3}",
                    ex_tr.len(),
                    offsets.len(),
                    mean,
                    worst
                );
            }
        }
    }
}
