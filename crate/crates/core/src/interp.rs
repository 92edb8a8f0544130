//! C1 bicubic interpolation of grid data.
//!
//! Node derivatives are taken by finite differences, which gives the
//! classic Catmull-Rom-style bicubic: continuous values and gradients
//! across cell boundaries, as required by the symplectic flow.

use crate::grid::Grid2D;
use ndarray::Array2;

/// Bicubic interpolant with per-cell coefficients precomputed up front,
/// so evaluation inside the flow is a small polynomial kernel.
#[derive(Debug, Clone)]
pub struct Bicubic {
    extent: f64,
    n: usize,
    h: f64,
    /// Coefficient blocks, 16 per cell, row-major over (n-1)^2 cells.
    coeffs: Vec<[f64; 16]>,
}

// p(u,v) = U A M A^T V with the standard cubic Hermite basis matrix.
const A: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [-3.0, 3.0, -2.0, -1.0],
    [2.0, -2.0, 1.0, 1.0],
];

impl Bicubic {
    pub fn new(grid: Grid2D) -> Self {
        let n = grid.n();
        let h = grid.spacing();
        let f = grid.values();

        // Node derivatives in cell units (already multiplied by h).
        let d = |v: &Array2<f64>, i: usize, n: usize| -> (usize, usize, f64) {
            // central in the interior, one-sided at the edges
            let _ = v;
            if i == 0 {
                (0, 1, 1.0)
            } else if i == n - 1 {
                (n - 2, n - 1, 1.0)
            } else {
                (i - 1, i + 1, 0.5)
            }
        };
        let mut fx = Array2::zeros((n, n));
        let mut fy = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let (a, b, w) = d(f, i, n);
                fx[[i, j]] = w * (f[[b, j]] - f[[a, j]]);
                let (a, b, w) = d(f, j, n);
                fy[[i, j]] = w * (f[[i, b]] - f[[i, a]]);
            }
        }
        let mut fxy = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let (a, b, w) = d(f, j, n);
                fxy[[i, j]] = w * (fx[[i, b]] - fx[[i, a]]);
            }
        }

        let nc = n - 1;
        let mut coeffs = vec![[0.0; 16]; nc * nc];
        for ci in 0..nc {
            for cj in 0..nc {
                // M holds values/derivatives at the 4 cell corners.
                let mut m = [[0.0; 4]; 4];
                for (r, c, src) in [
                    (0, 0, &f.view()),
                    (2, 0, &fx.view()),
                    (0, 2, &fy.view()),
                    (2, 2, &fxy.view()),
                ] {
                    m[r][c] = src[[ci, cj]];
                    m[r + 1][c] = src[[ci + 1, cj]];
                    m[r][c + 1] = src[[ci, cj + 1]];
                    m[r + 1][c + 1] = src[[ci + 1, cj + 1]];
                }
                // C = A M A^T
                let mut am = [[0.0; 4]; 4];
                for r in 0..4 {
                    for c in 0..4 {
                        am[r][c] = (0..4).map(|k| A[r][k] * m[k][c]).sum();
                    }
                }
                let block = &mut coeffs[ci * nc + cj];
                for r in 0..4 {
                    for c in 0..4 {
                        block[r * 4 + c] = (0..4).map(|k| am[r][k] * A[c][k]).sum();
                    }
                }
            }
        }

        Self {
            extent: grid.extent(),
            n,
            h,
            coeffs,
        }
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    #[inline]
    fn locate(&self, x: f64, y: f64) -> Option<(usize, f64, f64)> {
        let l = self.extent;
        if !(x >= -l && x <= l && y >= -l && y <= l) {
            return None;
        }
        let nc = self.n - 1;
        let ci = (((x + l) / self.h) as usize).min(nc - 1);
        let cj = (((y + l) / self.h) as usize).min(nc - 1);
        let u = (x + l) / self.h - ci as f64;
        let v = (y + l) / self.h - cj as f64;
        Some((ci * nc + cj, u, v))
    }

    pub fn eval(&self, x: f64, y: f64) -> Option<f64> {
        let (cell, u, v) = self.locate(x, y)?;
        let c = &self.coeffs[cell];
        let vp = [1.0, v, v * v, v * v * v];
        let up = [1.0, u, u * u, u * u * u];
        let mut s = 0.0;
        for r in 0..4 {
            let row: f64 = (0..4).map(|k| c[r * 4 + k] * vp[k]).sum();
            s += up[r] * row;
        }
        Some(s)
    }

    pub fn grad(&self, x: f64, y: f64) -> Option<[f64; 2]> {
        let (cell, u, v) = self.locate(x, y)?;
        let c = &self.coeffs[cell];
        let vp = [1.0, v, v * v, v * v * v];
        let up = [1.0, u, u * u, u * u * u];
        let dup = [0.0, 1.0, 2.0 * u, 3.0 * u * u];
        let dvp = [0.0, 1.0, 2.0 * v, 3.0 * v * v];
        let mut gx = 0.0;
        let mut gy = 0.0;
        for r in 0..4 {
            let mut row = 0.0;
            let mut drow = 0.0;
            for k in 0..4 {
                row += c[r * 4 + k] * vp[k];
                drow += c[r * 4 + k] * dvp[k];
            }
            gx += dup[r] * row;
            gy += up[r] * drow;
        }
        Some([gx / self.h, gy / self.h])
    }

    /// Second derivatives of the cell polynomial; discontinuous across
    /// cell edges, which the tangent flow tolerates.
    pub fn hess(&self, x: f64, y: f64) -> Option<[[f64; 2]; 2]> {
        let (cell, u, v) = self.locate(x, y)?;
        let c = &self.coeffs[cell];
        let vp = [1.0, v, v * v, v * v * v];
        let up = [1.0, u, u * u, u * u * u];
        let dup = [0.0, 1.0, 2.0 * u, 3.0 * u * u];
        let dvp = [0.0, 1.0, 2.0 * v, 3.0 * v * v];
        let ddup = [0.0, 0.0, 2.0, 6.0 * u];
        let ddvp = [0.0, 0.0, 2.0, 6.0 * v];
        let mut dxx = 0.0;
        let mut dyy = 0.0;
        let mut dxy = 0.0;
        for r in 0..4 {
            let mut row = 0.0;
            let mut drow = 0.0;
            let mut ddrow = 0.0;
            for k in 0..4 {
                row += c[r * 4 + k] * vp[k];
                drow += c[r * 4 + k] * dvp[k];
                ddrow += c[r * 4 + k] * ddvp[k];
            }
            dxx += ddup[r] * row;
            dyy += up[r] * ddrow;
            dxy += dup[r] * drow;
        }
        let h2 = self.h * self.h;
        Some([[dxx / h2, dxy / h2], [dxy / h2, dyy / h2]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample() -> Bicubic {
        let g = Grid2D::from_fn(2.0, 129, |x, y| (x * 1.3).sin() * (0.7 * y).cos()).unwrap();
        Bicubic::new(g)
    }

    #[test]
    fn reproduces_nodes() {
        let b = sample();
        for (x, y) in [(-2.0, -2.0), (0.0, 0.0), (1.0, -0.5)] {
            assert_relative_eq!(
                b.eval(x, y).unwrap(),
                (x * 1.3_f64).sin() * (0.7 * y).cos(),
                epsilon = 1e-5
            );
        }
    }

    #[test]
    fn gradient_matches_finite_difference_of_interpolant() {
        let b = sample();
        let (x, y) = (0.37, -1.12);
        let g = b.grad(x, y).unwrap();
        let e = 1e-6;
        let gx = (b.eval(x + e, y).unwrap() - b.eval(x - e, y).unwrap()) / (2.0 * e);
        let gy = (b.eval(x, y + e).unwrap() - b.eval(x, y - e).unwrap()) / (2.0 * e);
        assert_relative_eq!(g[0], gx, max_relative = 1e-6, epsilon = 1e-9);
        assert_relative_eq!(g[1], gy, max_relative = 1e-6, epsilon = 1e-9);
    }

    #[test]
    fn gradient_is_continuous_across_cell_edges() {
        let b = sample();
        let h = 4.0 / 128.0;
        // straddle the vertical edge between two cells
        let x_edge = -2.0 + 17.0 * h;
        let g_left = b.grad(x_edge - 1e-10, 0.3).unwrap();
        let g_right = b.grad(x_edge + 1e-10, 0.3).unwrap();
        assert_relative_eq!(g_left[0], g_right[0], epsilon = 1e-6);
        assert_relative_eq!(g_left[1], g_right[1], epsilon = 1e-6);
    }

    #[test]
    fn out_of_domain_is_none() {
        assert!(sample().eval(2.5, 0.0).is_none());
        assert!(sample().grad(0.0, -2.0001).is_none());
    }

    #[test]
    fn hessian_matches_finite_difference_inside_cell() {
        let b = sample();
        let (x, y) = (0.251, 0.502);
        let hm = b.hess(x, y).unwrap();
        let e = 1e-5;
        let gxp = b.grad(x + e, y).unwrap();
        let gxm = b.grad(x - e, y).unwrap();
        assert_relative_eq!(hm[0][0], (gxp[0] - gxm[0]) / (2.0 * e), max_relative = 1e-3, epsilon = 1e-6);
        assert_relative_eq!(hm[1][0], (gxp[1] - gxm[1]) / (2.0 * e), max_relative = 1e-3, epsilon = 1e-6);
    }
}
