//! Uniform, origin-centered square grids and midpoint-rule quadrature.

use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid resolution {0} below minimum of 64")]
    TooCoarse(usize),
    #[error("non-finite value at node ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("grid shapes differ: {0}x{0} vs {1}x{1}")]
    ShapeMismatch(usize, usize),
}

/// Scalar field sampled on the n x n nodes of `[-L, L]^2`.
///
/// Node (i, j) sits at `(-L + i*h, -L + j*h)` with `h = 2L / (n - 1)`,
/// so the first index runs along x1 and the second along x2.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    extent: f64,
    values: Array2<f64>,
}

impl Grid2D {
    pub fn new(extent: f64, values: Array2<f64>) -> Result<Self, GridError> {
        let n = values.nrows();
        if n < 64 || values.ncols() != n {
            return Err(GridError::TooCoarse(n.min(values.ncols())));
        }
        if let Some(((i, j), _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(GridError::NonFinite(i, j));
        }
        Ok(Self { extent, values })
    }

    /// Builds a grid by sampling `f` at every node.
    pub fn from_fn(extent: f64, n: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self, GridError> {
        let h = 2.0 * extent / (n - 1) as f64;
        let values = Array2::from_shape_fn((n, n), |(i, j)| {
            f(-extent + i as f64 * h, -extent + j as f64 * h)
        });
        Self::new(extent, values)
    }

    pub fn zeros(extent: f64, n: usize) -> Result<Self, GridError> {
        Self::new(extent, Array2::zeros((n, n)))
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / (self.n() - 1) as f64
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<f64> {
        &mut self.values
    }

    /// Position of node (i, j).
    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        let h = self.spacing();
        (-self.extent + i as f64 * h, -self.extent + j as f64 * h)
    }

    /// Midpoint-rule integral `h^2 * sum(values)`.
    pub fn integrate(&self) -> f64 {
        let h = self.spacing();
        h * h * self.values.sum()
    }

    /// Midpoint-rule integral of `f(value)` over the grid.
    pub fn integrate_map(&self, f: impl Fn(f64) -> f64) -> f64 {
        let h = self.spacing();
        h * h * self.values.iter().map(|&v| f(v)).sum::<f64>()
    }

    /// Sup-norm distance to another grid of identical layout.
    pub fn sup_distance(&self, other: &Grid2D) -> Result<f64, GridError> {
        if self.n() != other.n() {
            return Err(GridError::ShapeMismatch(self.n(), other.n()));
        }
        Ok(self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Largest |value| on the outermost ring of nodes.
    pub fn boundary_ring_max(&self) -> f64 {
        let n = self.n();
        let mut m: f64 = 0.0;
        for i in 0..n {
            m = m.max(self.values[[i, 0]].abs());
            m = m.max(self.values[[i, n - 1]].abs());
            m = m.max(self.values[[0, i]].abs());
            m = m.max(self.values[[n - 1, i]].abs());
        }
        m
    }

    /// Applies `f` to every node value, returning a new grid.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Grid2D {
        Grid2D {
            extent: self.extent,
            values: self.values.map(|&v| f(v)),
        }
    }

    /// 5-point finite-difference Laplacian; boundary ring is set to zero.
    pub fn laplacian(&self) -> Grid2D {
        let n = self.n();
        let h2 = self.spacing() * self.spacing();
        let v = &self.values;
        let mut out = Array2::zeros((n, n));
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                out[[i, j]] =
                    (v[[i + 1, j]] + v[[i - 1, j]] + v[[i, j + 1]] + v[[i, j - 1]]
                        - 4.0 * v[[i, j]])
                        / h2;
            }
        }
        Grid2D {
            extent: self.extent,
            values: out,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn node_layout_is_centered() {
        let g = Grid2D::zeros(2.0, 65).unwrap();
        assert_eq!(g.node(0, 0), (-2.0, -2.0));
        assert_eq!(g.node(64, 64), (2.0, 2.0));
        let (x, y) = g.node(32, 32);
        assert_relative_eq!(x, 0.0, epsilon = 1e-14);
        assert_relative_eq!(y, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_coarse_grid() {
        assert!(Grid2D::zeros(1.0, 32).is_err());
    }

    #[test]
    fn integrates_constant() {
        let g = Grid2D::from_fn(1.0, 101, |_, _| 3.0).unwrap();
        // 101 midpoints of spacing h cover (2L + h) per axis.
        let h = g.spacing();
        let side = 2.0 + h;
        assert_relative_eq!(g.integrate(), 3.0 * side * side, epsilon = 1e-12);
    }

    #[test]
    fn laplacian_of_quadratic() {
        let g = Grid2D::from_fn(1.0, 101, |x, y| x * x + 2.0 * y * y).unwrap();
        let lap = g.laplacian();
        // Exact for quadratics away from the boundary ring.
        assert_relative_eq!(lap.values()[[50, 50]], 6.0, epsilon = 1e-9);
        assert_relative_eq!(lap.values()[[20, 70]], 6.0, epsilon = 1e-9);
    }
}
