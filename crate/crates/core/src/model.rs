//! Confinement potentials, their derivatives, and problem configuration.

use crate::grid::Grid2D;
use crate::interp::Bicubic;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("quartic coefficients must satisfy alpha > 0, beta > 0 (got alpha={alpha}, beta={beta})")]
    BadQuartic { alpha: f64, beta: f64 },
    #[error("quartic coupling lambda={0} is not confining (requires lambda < 2)")]
    NotConfining(f64),
    #[error("point ({0}, {1}) outside the tabulated domain")]
    OutOfDomain(f64, f64),
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
}

/// External confinement V(x).
#[derive(Debug, Clone)]
pub enum ConfinementPotential {
    /// `V = (w1 x1)^2 + (w2 x2)^2`.
    Harmonic { omega1: f64, omega2: f64 },
    /// `V = alpha (x1^4/beta + beta x2^4 - lambda x1^2 x2^2)`.
    Quartic { alpha: f64, beta: f64, lambda: f64 },
    /// Bicubic interpolant of grid samples.
    Tabulated(Box<Bicubic>),
}

impl ConfinementPotential {
    pub fn harmonic(omega1: f64, omega2: f64) -> Self {
        Self::Harmonic { omega1, omega2 }
    }

    pub fn quartic(alpha: f64, beta: f64, lambda: f64) -> Result<Self, ModelError> {
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(ModelError::BadQuartic { alpha, beta });
        }
        // lambda >= 2 opens an escape channel along the diagonals.
        if lambda >= 2.0 {
            return Err(ModelError::NotConfining(lambda));
        }
        Ok(Self::Quartic { alpha, beta, lambda })
    }

    pub fn tabulated(grid: Grid2D) -> Self {
        Self::Tabulated(Box::new(Bicubic::new(grid)))
    }

    /// The paper's chaotic quartic dot: alpha = 1e-3, beta = pi/4, lambda free.
    pub fn chaotic_dot(lambda: f64) -> Result<Self, ModelError> {
        Self::quartic(1e-3, std::f64::consts::FRAC_PI_4, lambda)
    }

    pub fn eval(&self, x: [f64; 2]) -> Result<f64, ModelError> {
        match self {
            Self::Harmonic { omega1, omega2 } => {
                Ok((omega1 * x[0]).powi(2) + (omega2 * x[1]).powi(2))
            }
            Self::Quartic { alpha, beta, lambda } => {
                let (a, b) = (x[0] * x[0], x[1] * x[1]);
                Ok(alpha * (a * a / beta + beta * b * b - lambda * a * b))
            }
            Self::Tabulated(interp) => interp
                .eval(x[0], x[1])
                .ok_or(ModelError::OutOfDomain(x[0], x[1])),
        }
    }

    pub fn grad(&self, x: [f64; 2]) -> Result<[f64; 2], ModelError> {
        match self {
            Self::Harmonic { omega1, omega2 } => {
                Ok([2.0 * omega1 * omega1 * x[0], 2.0 * omega2 * omega2 * x[1]])
            }
            Self::Quartic { alpha, beta, lambda } => {
                let (a, b) = (x[0] * x[0], x[1] * x[1]);
                Ok([
                    alpha * (4.0 * a * x[0] / beta - 2.0 * lambda * x[0] * b),
                    alpha * (4.0 * beta * b * x[1] - 2.0 * lambda * a * x[1]),
                ])
            }
            Self::Tabulated(interp) => interp
                .grad(x[0], x[1])
                .ok_or(ModelError::OutOfDomain(x[0], x[1])),
        }
    }

    /// Symmetric Hessian as `[[d11, d12], [d12, d22]]`.
    pub fn hess(&self, x: [f64; 2]) -> Result<[[f64; 2]; 2], ModelError> {
        match self {
            Self::Harmonic { omega1, omega2 } => Ok([
                [2.0 * omega1 * omega1, 0.0],
                [0.0, 2.0 * omega2 * omega2],
            ]),
            Self::Quartic { alpha, beta, lambda } => {
                let (a, b) = (x[0] * x[0], x[1] * x[1]);
                let d11 = alpha * (12.0 * a / beta - 2.0 * lambda * b);
                let d22 = alpha * (12.0 * beta * b - 2.0 * lambda * a);
                let d12 = alpha * (-4.0 * lambda * x[0] * x[1]);
                Ok([[d11, d12], [d12, d22]])
            }
            Self::Tabulated(interp) => interp
                .hess(x[0], x[1])
                .ok_or(ModelError::OutOfDomain(x[0], x[1])),
        }
    }
}

/// Numerical tolerances shared across the pipeline.
#[derive(Debug, Clone)]
pub struct Tolerances {
    /// Sup-norm change of W at self-consistency.
    pub tf_w: f64,
    /// Normalization defect allowed in the converged density.
    pub tf_mass: f64,
    /// Maximum fixed-point iterations.
    pub tf_max_iter: usize,
    /// Phase-space closure for periodic orbits.
    pub orbit_closure: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tf_w: 1e-8,
            tf_mass: 1e-6,
            tf_max_iter: 500,
            orbit_closure: 1e-10,
        }
    }
}

/// Full problem configuration consumed by the TF solver.
#[derive(Debug, Clone)]
pub struct ProblemConfig {
    pub potential: ConfinementPotential,
    /// Spatial dimension; 3 is used only by the atom correlation formulas.
    pub dimension: usize,
    /// Half-width L of the computational box `[-L, L]^2`.
    pub extent: f64,
    /// Nodes per axis.
    pub grid_n: usize,
    /// Disables the Coulomb term (test mode: W = V exactly).
    pub coulomb: bool,
    /// Fixed-point mixing parameter.
    pub mixing: f64,
    pub tolerances: Tolerances,
}

impl ProblemConfig {
    /// The paper's chaotic quartic dot at coupling `lambda`.
    pub fn chaotic_dot(lambda: f64) -> Result<Self, ModelError> {
        Ok(Self {
            potential: ConfinementPotential::chaotic_dot(lambda)?,
            dimension: 2,
            extent: 8.0,
            grid_n: 128,
            coulomb: true,
            mixing: 0.5,
            tolerances: Tolerances::default(),
        })
    }

    /// Isotropic harmonic well with the Coulomb term disabled; every
    /// downstream quantity has a closed form against this configuration.
    pub fn harmonic_test() -> Self {
        Self {
            potential: ConfinementPotential::harmonic(1.0, 1.0),
            dimension: 2,
            extent: 3.0,
            grid_n: 128,
            coulomb: false,
            mixing: 0.5,
            tolerances: Tolerances::default(),
        }
    }

    pub fn preset(name: &str) -> Result<Self, ModelError> {
        match name {
            "chaotic-dot" => Self::chaotic_dot(1.2),
            "harmonic-test" => Ok(Self::harmonic_test()),
            other => Err(ModelError::UnknownPreset(other.to_string())),
        }
    }
}
