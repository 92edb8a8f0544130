//! Self-consistent 2D Thomas-Fermi solver.
//!
//! Solves W = V + (1/2pi) int mu_+(y)/|x-y| dy with the chemical potential
//! mu fixed by (1/2pi) int mu_+ = 1, on a uniform grid. The Coulomb
//! convolution is evaluated as a lattice convolution with an analytic
//! correction for the 1/r singularity in the self cell; an FFT fast path
//! reproduces the direct sum to roundoff.

use crate::grid::{Grid2D, GridError};
use crate::model::ProblemConfig;
use ndarray::Array2;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TfError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("source density is nonzero on the boundary ring (max |f| = {0:.3e})")]
    SupportViolation(f64),
    #[error("grid extent too small: the allowed region reaches the boundary ring")]
    ExtentTooSmall,
    #[error("no self-consistency after {iterations} iterations; last residual {residual:.3e}")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },
    #[error("chemical potential bracket failed to close")]
    MuBracket,
}

/// Integral of 1/r over one h x h grid cell centered on the singularity.
fn self_cell_integral(h: f64) -> f64 {
    4.0 * h * (1.0 + std::f64::consts::SQRT_2).ln()
}

/// Precomputed Coulomb lattice kernel with an FFT fast path.
pub struct CoulombKernel {
    n: usize,
    h: f64,
    m: usize,
    kernel_hat: Vec<Complex64>,
}

impl CoulombKernel {
    pub fn new(n: usize, h: f64) -> Self {
        // Zero-padded circular convolution needs >= 2n-1 points per axis.
        let m = (2 * n).next_power_of_two();
        let mut kernel = vec![Complex64::new(0.0, 0.0); m * m];
        for di in -(n as isize - 1)..n as isize {
            for dj in -(n as isize - 1)..n as isize {
                let w = if di == 0 && dj == 0 {
                    self_cell_integral(h)
                } else {
                    let r = ((di * di + dj * dj) as f64).sqrt();
                    h / r
                };
                let i = di.rem_euclid(m as isize) as usize;
                let j = dj.rem_euclid(m as isize) as usize;
                kernel[i * m + j] = Complex64::new(w, 0.0);
            }
        }
        fft2(&mut kernel, m, false);
        Self {
            n,
            h,
            m,
            kernel_hat: kernel,
        }
    }

    /// `g(x) = (1/2pi) int f(y)/|x-y| dy` by padded FFT convolution.
    pub fn convolve(&self, f: &Grid2D) -> Result<Grid2D, TfError> {
        let b = f.boundary_ring_max();
        if b != 0.0 {
            return Err(TfError::SupportViolation(b));
        }
        let n = self.n;
        let m = self.m;
        let mut buf = vec![Complex64::new(0.0, 0.0); m * m];
        for i in 0..n {
            for j in 0..n {
                buf[i * m + j] = Complex64::new(f.values()[[i, j]], 0.0);
            }
        }
        fft2(&mut buf, m, false);
        for (b, k) in buf.iter_mut().zip(self.kernel_hat.iter()) {
            *b *= k;
        }
        fft2(&mut buf, m, true);
        let scale = 1.0 / (2.0 * PI) / (m * m) as f64;
        let values = Array2::from_shape_fn((n, n), |(i, j)| buf[i * m + j].re * scale);
        Ok(Grid2D::new(f.extent(), values)?)
    }

    /// Reference direct O(n^4) sum; defines correctness of the fast path.
    pub fn convolve_direct(&self, f: &Grid2D) -> Result<Grid2D, TfError> {
        let b = f.boundary_ring_max();
        if b != 0.0 {
            return Err(TfError::SupportViolation(b));
        }
        let n = self.n;
        let h = self.h;
        let self_w = self_cell_integral(h);
        let fv = f.values();
        let mut values = Array2::zeros((n, n));
        values
            .outer_iter_mut()
            .into_par_iter()
            .enumerate()
            .for_each(|(i, mut row)| {
                for j in 0..n {
                    let mut s = 0.0;
                    for k in 0..n {
                        for l in 0..n {
                            let v = fv[[k, l]];
                            if v == 0.0 {
                                continue;
                            }
                            let w = if k == i && l == j {
                                self_w
                            } else {
                                let di = k as f64 - i as f64;
                                let dj = l as f64 - j as f64;
                                h / (di * di + dj * dj).sqrt()
                            };
                            s += v * w;
                        }
                    }
                    row[j] = s / (2.0 * PI);
                }
            });
        Ok(Grid2D::new(f.extent(), values)?)
    }
}

/// In-place 2D FFT (rows then columns) on an m x m buffer.
fn fft2(buf: &mut [Complex64], m: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(m)
    } else {
        planner.plan_fft_forward(m)
    };
    for row in buf.chunks_mut(m) {
        fft.process(row);
    }
    // transpose, transform rows again, transpose back
    transpose(buf, m);
    for row in buf.chunks_mut(m) {
        fft.process(row);
    }
    transpose(buf, m);
}

fn transpose(buf: &mut [Complex64], m: usize) {
    for i in 0..m {
        for j in 0..i {
            buf.swap(i * m + j, j * m + i);
        }
    }
}

/// Converged self-consistent Thomas-Fermi field.
#[derive(Debug, Clone)]
pub struct TfSolution {
    pub w: Grid2D,
    pub mu: f64,
    /// `(mu - W)_+`
    pub mu_plus: Grid2D,
    /// `mu_plus / 2pi`
    pub rho0: Grid2D,
    /// Sup-norm change of W at the accepted iteration.
    pub residual: f64,
    pub iterations: usize,
}

impl TfSolution {
    /// `(1/2pi) int mu_plus`, which the constraint pins to 1.
    pub fn mass(&self) -> f64 {
        self.mu_plus.integrate() / (2.0 * PI)
    }

    /// Rebuilds the derived fields from `w` and `mu` (used after IO).
    pub fn from_w(w: Grid2D, mu: f64, residual: f64, iterations: usize) -> Self {
        let mu_plus = w.map(|v| (mu - v).max(0.0));
        let rho0 = mu_plus.map(|v| v / (2.0 * PI));
        Self {
            w,
            mu,
            mu_plus,
            rho0,
            residual,
            iterations,
        }
    }
}

/// Smallest mu with unit normalized mass, by bisection.
pub fn chemical_potential(w: &Grid2D) -> Result<f64, TfError> {
    let mass = |mu: f64| w.integrate_map(|v| (mu - v).max(0.0)) / (2.0 * PI);
    let w_min = w.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let mut lo = w_min;
    let mut hi = w_min + 1.0;
    let mut grew = 0;
    while mass(hi) < 1.0 {
        hi = w_min + (hi - w_min) * 2.0;
        grew += 1;
        if grew > 200 {
            return Err(TfError::MuBracket);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * (1.0 + hi.abs()) {
            break;
        }
    }
    // polish: mass is piecewise linear in mu; one secant step lands on 1
    let (m_lo, m_hi) = (mass(lo), mass(hi));
    let mu = if m_hi > m_lo {
        lo + (hi - lo) * (1.0 - m_lo) / (m_hi - m_lo)
    } else {
        hi
    };
    Ok(mu)
}

/// Runs the damped fixed-point iteration from `W = V` (or a warm start).
pub fn solve_tf(config: &ProblemConfig) -> Result<TfSolution, TfError> {
    solve_tf_from(config, None)
}

pub fn solve_tf_from(config: &ProblemConfig, warm: Option<Grid2D>) -> Result<TfSolution, TfError> {
    let n = config.grid_n;
    let l = config.extent;
    let v = Grid2D::from_fn(l, n, |x, y| {
        config
            .potential
            .eval([x, y])
            .expect("confinement potential defined on its own grid")
    })?;

    if !config.coulomb {
        let mu = chemical_potential(&v)?;
        let sol = TfSolution::from_w(v, mu, 0.0, 0);
        check_extent(&sol)?;
        return Ok(sol);
    }

    let kernel = CoulombKernel::new(n, v.spacing());
    let mut w = warm.unwrap_or_else(|| v.clone());
    let mut eta = config.mixing;
    let tol = config.tolerances.tf_w;
    let mut history = Vec::new();
    let mut prev_residual = f64::INFINITY;

    for iter in 1..=config.tolerances.tf_max_iter {
        let mu = chemical_potential(&w)?;
        let mut mu_plus = w.map(|v| (mu - v).max(0.0));
        if mu_plus.boundary_ring_max() > 0.0 {
            return Err(TfError::ExtentTooSmall);
        }
        // The kernel requires exact zeros on the ring; enforce them.
        zero_ring(&mut mu_plus);
        let coul = kernel.convolve(&mu_plus)?;
        let target = Grid2D::new(
            l,
            v.values() + coul.values(),
        )?;
        let residual = w.sup_distance(&target)?;
        history.push(residual);
        if residual < tol {
            let mu = chemical_potential(&target)?;
            let sol = TfSolution::from_w(target, mu, residual, iter);
            check_extent(&sol)?;
            return Ok(sol);
        }
        if residual > prev_residual {
            eta = (eta * 0.5).max(0.01);
        }
        prev_residual = residual;
        let mixed = Array2::from_shape_fn((n, n), |(i, j)| {
            (1.0 - eta) * w.values()[[i, j]] + eta * target.values()[[i, j]]
        });
        w = Grid2D::new(l, mixed)?;
    }

    Err(TfError::NoConvergence {
        iterations: config.tolerances.tf_max_iter,
        residual: *history.last().unwrap_or(&f64::NAN),
        history,
    })
}

fn zero_ring(g: &mut Grid2D) {
    let n = g.n();
    let v = g.values_mut();
    for i in 0..n {
        v[[i, 0]] = 0.0;
        v[[i, n - 1]] = 0.0;
        v[[0, i]] = 0.0;
        v[[n - 1, i]] = 0.0;
    }
}

fn check_extent(sol: &TfSolution) -> Result<(), TfError> {
    if sol.mu_plus.boundary_ring_max() > 0.0 {
        return Err(TfError::ExtentTooSmall);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ProblemConfig;
    use approx::assert_relative_eq;

    #[test]
    fn convolution_of_zero_is_zero() {
        let f = Grid2D::zeros(2.0, 64).unwrap();
        let kernel = CoulombKernel::new(64, f.spacing());
        let g = kernel.convolve(&f).unwrap();
        assert_eq!(g.values().sum(), 0.0);
    }

    #[test]
    fn convolution_is_linear() {
        let f = Grid2D::from_fn(2.0, 64, |x, y| {
            let r2 = x * x + y * y;
            if r2 < 1.0 {
                (1.0 - r2).powi(2)
            } else {
                0.0
            }
        })
        .unwrap();
        let kernel = CoulombKernel::new(64, f.spacing());
        let g1 = kernel.convolve(&f).unwrap();
        let g2 = kernel.convolve(&f.map(|v| 2.0 * v)).unwrap();
        let d = g2.sup_distance(&g1.map(|v| 2.0 * v)).unwrap();
        assert!(d < 1e-12, "doubling the source must double the potential: {d}");
    }

    #[test]
    fn fft_path_matches_direct_sum() {
        let f = Grid2D::from_fn(2.0, 64, |x, y| (-(x * x + y * y) * 4.0).exp())
            .unwrap()
            .map(|v| if v < 1e-10 { 0.0 } else { v });
        let mut f = f;
        super::zero_ring(&mut f);
        let kernel = CoulombKernel::new(64, f.spacing());
        let fast = kernel.convolve(&f).unwrap();
        let direct = kernel.convolve_direct(&f).unwrap();
        assert!(fast.sup_distance(&direct).unwrap() < 1e-10);
    }

    #[test]
    fn uniform_disk_center_value() {
        // f = uniform disk, mass m, radius R: g(0) = m / (pi R).
        let (r, m) = (1.0, 3.0);
        let density = m / (PI * r * r);
        let f = Grid2D::from_fn(2.5, 201, |x, y| {
            if x * x + y * y <= r * r {
                density
            } else {
                0.0
            }
        })
        .unwrap();
        let kernel = CoulombKernel::new(201, f.spacing());
        let g = kernel.convolve(&f).unwrap();
        let center = g.values()[[100, 100]];
        assert_relative_eq!(center, m / (PI * r), max_relative = 5e-3);
    }

    #[test]
    fn boundary_support_is_rejected() {
        let f = Grid2D::from_fn(2.0, 64, |_, _| 1.0).unwrap();
        let kernel = CoulombKernel::new(64, f.spacing());
        assert!(matches!(
            kernel.convolve(&f),
            Err(TfError::SupportViolation(_))
        ));
    }

    #[test]
    fn harmonic_chemical_potential() {
        // W = |x|^2 gives mass(mu) = mu^2/4, so mu = 2.
        let w = Grid2D::from_fn(3.0, 257, |x, y| x * x + y * y).unwrap();
        let mu = chemical_potential(&w).unwrap();
        assert_relative_eq!(mu, 2.0, max_relative = 2e-3);
    }

    #[test]
    fn chemical_potential_shift_covariance() {
        let w = Grid2D::from_fn(3.0, 101, |x, y| x * x + 0.5 * y * y).unwrap();
        let mu = chemical_potential(&w).unwrap();
        let mu_shift = chemical_potential(&w.map(|v| v + 0.7)).unwrap();
        assert_relative_eq!(mu_shift, mu + 0.7, epsilon = 1e-10);
    }

    #[test]
    fn chemical_potential_defining_property() {
        let w = Grid2D::from_fn(3.0, 101, |x, y| (x * x + y * y).sqrt()).unwrap();
        let mu = chemical_potential(&w).unwrap();
        let mass = w.integrate_map(|v| (mu - v).max(0.0)) / (2.0 * PI);
        assert_relative_eq!(mass, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn coulomb_disabled_returns_bare_potential() {
        let config = ProblemConfig::harmonic_test();
        let sol = solve_tf(&config).unwrap();
        assert_relative_eq!(sol.mu, 2.0, max_relative = 2e-3);
        let v = Grid2D::from_fn(config.extent, config.grid_n, |x, y| x * x + y * y).unwrap();
        assert!(sol.w.sup_distance(&v).unwrap() < 1e-14);
    }

    #[test]
    fn chaotic_dot_converges_and_normalizes() {
        let mut config = ProblemConfig::chaotic_dot(1.2).unwrap();
        config.grid_n = 96;
        let sol = solve_tf(&config).unwrap();
        assert!(sol.residual < config.tolerances.tf_w);
        assert_relative_eq!(sol.mass(), 1.0, epsilon = 1e-6);
        // W >= V pointwise: the Coulomb term is nonnegative.
        let v = Grid2D::from_fn(config.extent, config.grid_n, |x, y| {
            config.potential.eval([x, y]).unwrap()
        })
        .unwrap();
        let min_gap = sol
            .w
            .values()
            .iter()
            .zip(v.values().iter())
            .map(|(w, v)| w - v)
            .fold(f64::INFINITY, f64::min);
        assert!(min_gap >= -1e-12, "W >= V violated by {min_gap}");
    }

    #[test]
    fn quartic_solution_inherits_parity() {
        let mut config = ProblemConfig::chaotic_dot(1.2).unwrap();
        config.grid_n = 96;
        let sol = solve_tf(&config).unwrap();
        let n = config.grid_n;
        let mut asym: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let w = sol.w.values()[[i, j]];
                asym = asym.max((w - sol.w.values()[[n - 1 - i, j]]).abs());
                asym = asym.max((w - sol.w.values()[[i, n - 1 - j]]).abs());
            }
        }
        assert!(asym < 10.0 * config.tolerances.tf_w, "parity asymmetry {asym}");
    }

    #[test]
    fn warm_start_reconverges_quickly() {
        let mut config = ProblemConfig::chaotic_dot(1.2).unwrap();
        config.grid_n = 96;
        let sol = solve_tf(&config).unwrap();
        let again = solve_tf_from(&config, Some(sol.w.clone())).unwrap();
        assert!(again.iterations <= 2, "took {} iterations", again.iterations);
    }
}
