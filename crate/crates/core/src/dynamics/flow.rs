//! Symplectic flow for H = p^2 + W(x) and its linearization.
//!
//! The Hamiltonian is separable, so we use a fixed-step 4th-order
//! composition of leapfrog steps (Yoshida coefficients). The tangent
//! propagation applies the exact Jacobian of each discrete substep,
//! which keeps the monodromy symplectic to roundoff.

use crate::interp::Bicubic;
use crate::model::ConfinementPotential;
use nalgebra::Matrix4;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("trajectory left the potential domain at t = {0}")]
    Escaped(f64),
    #[error("step size must be positive, got {0}")]
    BadStep(f64),
}

/// Smooth 2D potential with gradient and Hessian; the classical flow
/// only sees W through this interface.
pub trait Potential: Sync {
    fn eval(&self, x: [f64; 2]) -> Option<f64>;
    fn grad(&self, x: [f64; 2]) -> Option<[f64; 2]>;
    fn hess(&self, x: [f64; 2]) -> Option<[[f64; 2]; 2]>;
}

impl Potential for Bicubic {
    fn eval(&self, x: [f64; 2]) -> Option<f64> {
        Bicubic::eval(self, x[0], x[1])
    }
    fn grad(&self, x: [f64; 2]) -> Option<[f64; 2]> {
        Bicubic::grad(self, x[0], x[1])
    }
    fn hess(&self, x: [f64; 2]) -> Option<[[f64; 2]; 2]> {
        Bicubic::hess(self, x[0], x[1])
    }
}

impl Potential for ConfinementPotential {
    fn eval(&self, x: [f64; 2]) -> Option<f64> {
        ConfinementPotential::eval(self, x).ok()
    }
    fn grad(&self, x: [f64; 2]) -> Option<[f64; 2]> {
        ConfinementPotential::grad(self, x).ok()
    }
    fn hess(&self, x: [f64; 2]) -> Option<[[f64; 2]; 2]> {
        ConfinementPotential::hess(self, x).ok()
    }
}

/// Point in phase space, ordered (x1, x2, p1, p2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub x: [f64; 2],
    pub p: [f64; 2],
}

impl PhaseState {
    pub fn new(x: [f64; 2], p: [f64; 2]) -> Self {
        Self { x, p }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x[0], self.x[1], self.p[0], self.p[1]]
    }

    pub fn from_array(z: [f64; 4]) -> Self {
        Self {
            x: [z[0], z[1]],
            p: [z[2], z[3]],
        }
    }

    pub fn distance(&self, other: &PhaseState) -> f64 {
        let a = self.to_array();
        let b = other.to_array();
        a.iter()
            .zip(b.iter())
            .map(|(u, v)| (u - v) * (u - v))
            .sum::<f64>()
            .sqrt()
    }

    /// Velocity dx/dt = 2p.
    pub fn velocity(&self) -> [f64; 2] {
        [2.0 * self.p[0], 2.0 * self.p[1]]
    }
}

/// Classical energy H(z) = p^2 + W(x).
pub struct Hamiltonian<'a> {
    pub potential: &'a dyn Potential,
}

impl<'a> Hamiltonian<'a> {
    pub fn new(potential: &'a dyn Potential) -> Self {
        Self { potential }
    }

    pub fn energy(&self, z: &PhaseState) -> Option<f64> {
        Some(z.p[0] * z.p[0] + z.p[1] * z.p[1] + self.potential.eval(z.x)?)
    }

    /// Phase-space velocity (dx/dt, dp/dt) = (2p, -grad W).
    pub fn rhs(&self, z: &PhaseState) -> Option<[f64; 4]> {
        let g = self.potential.grad(z.x)?;
        Some([2.0 * z.p[0], 2.0 * z.p[1], -g[0], -g[1]])
    }
}

// Yoshida 4th-order composition weights.
fn yoshida_weights() -> [f64; 3] {
    let cbrt2 = 2f64.cbrt();
    let w1 = 1.0 / (2.0 - cbrt2);
    let w0 = -cbrt2 / (2.0 - cbrt2);
    [w1, w0, w1]
}

#[inline]
fn kick(
    pot: &dyn Potential,
    z: &mut PhaseState,
    tangent: &mut Option<&mut Matrix4<f64>>,
    tau: f64,
) -> Option<()> {
    let g = pot.grad(z.x)?;
    z.p[0] -= tau * g[0];
    z.p[1] -= tau * g[1];
    if let Some(u) = tangent.as_deref_mut() {
        let h = pot.hess(z.x)?;
        // dp_i -= tau * H_ij dx_j
        for col in 0..4 {
            let dx = [u[(0, col)], u[(1, col)]];
            u[(2, col)] -= tau * (h[0][0] * dx[0] + h[0][1] * dx[1]);
            u[(3, col)] -= tau * (h[1][0] * dx[0] + h[1][1] * dx[1]);
        }
    }
    Some(())
}

#[inline]
fn drift(z: &mut PhaseState, tangent: &mut Option<&mut Matrix4<f64>>, tau: f64) {
    z.x[0] += 2.0 * tau * z.p[0];
    z.x[1] += 2.0 * tau * z.p[1];
    if let Some(u) = tangent.as_deref_mut() {
        for col in 0..4 {
            u[(0, col)] += 2.0 * tau * u[(2, col)];
            u[(1, col)] += 2.0 * tau * u[(3, col)];
        }
    }
}

/// One 4th-order step of size `dt`; optionally advances the 4x4 tangent.
pub fn step(
    pot: &dyn Potential,
    z: &mut PhaseState,
    mut tangent: Option<&mut Matrix4<f64>>,
    dt: f64,
) -> Option<()> {
    for w in yoshida_weights() {
        let tau = w * dt;
        kick(pot, z, &mut tangent, 0.5 * tau)?;
        drift(z, &mut tangent, tau);
        kick(pot, z, &mut tangent, 0.5 * tau)?;
    }
    Some(())
}

fn steps_for(t: f64, dt: f64) -> usize {
    ((t / dt).round() as usize).max(1)
}

/// Integrates for duration `t` with `round(t/dt)` equal steps.
pub fn flow(pot: &dyn Potential, z0: PhaseState, t: f64, dt: f64) -> Result<PhaseState, FlowError> {
    if dt <= 0.0 {
        return Err(FlowError::BadStep(dt));
    }
    let n = steps_for(t, dt);
    let tau = t / n as f64;
    let mut z = z0;
    for k in 0..n {
        step(pot, &mut z, None, tau).ok_or(FlowError::Escaped(k as f64 * tau))?;
    }
    Ok(z)
}

/// Flow plus the 4x4 tangent (variational) matrix.
pub fn variational_flow(
    pot: &dyn Potential,
    z0: PhaseState,
    t: f64,
    dt: f64,
) -> Result<(PhaseState, Matrix4<f64>), FlowError> {
    if dt <= 0.0 {
        return Err(FlowError::BadStep(dt));
    }
    let n = steps_for(t, dt);
    let tau = t / n as f64;
    let mut z = z0;
    let mut u = Matrix4::identity();
    for k in 0..n {
        step(pot, &mut z, Some(&mut u), tau).ok_or(FlowError::Escaped(k as f64 * tau))?;
    }
    Ok((z, u))
}

/// Full time history of states and tangent matrices, recorded each step.
pub struct TangentTrace {
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
    pub tangents: Vec<Matrix4<f64>>,
}

pub fn variational_trace(
    pot: &dyn Potential,
    z0: PhaseState,
    t: f64,
    dt: f64,
) -> Result<TangentTrace, FlowError> {
    if dt <= 0.0 {
        return Err(FlowError::BadStep(dt));
    }
    let n = steps_for(t, dt);
    let tau = t / n as f64;
    let mut z = z0;
    let mut u = Matrix4::identity();
    let mut trace = TangentTrace {
        times: Vec::with_capacity(n + 1),
        states: Vec::with_capacity(n + 1),
        tangents: Vec::with_capacity(n + 1),
    };
    trace.times.push(0.0);
    trace.states.push(z);
    trace.tangents.push(u);
    for k in 0..n {
        step(pot, &mut z, Some(&mut u), tau).ok_or(FlowError::Escaped(k as f64 * tau))?;
        trace.times.push((k + 1) as f64 * tau);
        trace.states.push(z);
        trace.tangents.push(u);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn harmonic() -> ConfinementPotential {
        ConfinementPotential::harmonic(1.0, 1.0)
    }

    #[test]
    fn harmonic_motion_frequency_two() {
        // W = |x|^2: x(t) = sqrt(e) cos(2t), period pi.
        let pot = harmonic();
        let e = 0.7f64;
        let z0 = PhaseState::new([e.sqrt(), 0.0], [0.0, 0.0]);
        let z = flow(&pot, z0, PI, 1e-3).unwrap();
        assert_relative_eq!(z.x[0], e.sqrt(), epsilon = 1e-8);
        assert_relative_eq!(z.p[0], 0.0, epsilon = 1e-8);
        let quarter = flow(&pot, z0, PI / 4.0, 1e-3).unwrap();
        assert_relative_eq!(quarter.x[0], 0.0, epsilon = 1e-8);
    }

    #[test]
    fn energy_drift_stays_small() {
        let pot = harmonic();
        let ham = Hamiltonian::new(&pot);
        let z0 = PhaseState::new([0.8, 0.1], [0.05, -0.3]);
        let e0 = ham.energy(&z0).unwrap();
        let z = flow(&pot, z0, 1000.0 * 1e-3, 1e-3).unwrap();
        let e1 = ham.energy(&z).unwrap();
        assert!(((e1 - e0) / e0).abs() < 1e-9, "drift {:e}", (e1 - e0) / e0);
    }

    #[test]
    fn time_reversal_returns_home() {
        let pot = harmonic();
        let z0 = PhaseState::new([0.3, -0.4], [0.2, 0.1]);
        let fwd = flow(&pot, z0, 2.0, 1e-3).unwrap();
        let back = flow(
            &pot,
            PhaseState::new(fwd.x, [-fwd.p[0], -fwd.p[1]]),
            2.0,
            1e-3,
        )
        .unwrap();
        let returned = PhaseState::new(back.x, [-back.p[0], -back.p[1]]);
        assert!(returned.distance(&z0) < 1e-9);
    }

    #[test]
    fn tangent_is_rotation_block_for_harmonic() {
        // Linearized harmonic flow: each (x_i, p_i) plane rotates with
        // frequency 2 as [[cos, sin], [-sin, cos]].
        let pot = harmonic();
        let z0 = PhaseState::new([0.5, 0.0], [0.0, 0.2]);
        let t = 0.77;
        let (_, u) = variational_flow(&pot, z0, t, 1e-4).unwrap();
        let (c, s) = ((2.0 * t).cos(), (2.0 * t).sin());
        let expected = Matrix4::new(
            c, 0.0, s, 0.0, //
            0.0, c, 0.0, s, //
            -s, 0.0, c, 0.0, //
            0.0, -s, 0.0, c,
        );
        assert!((u - expected).abs().max() < 1e-7);
    }

    #[test]
    fn tangent_determinant_is_one() {
        let pot = ConfinementPotential::chaotic_dot(1.2).unwrap();
        let z0 = PhaseState::new([1.5, 0.3], [0.1, 0.25]);
        let (_, u) = variational_flow(&pot, z0, 40.0, 1e-3).unwrap();
        assert_relative_eq!(u.determinant(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn tangent_matches_bumped_trajectories() {
        let pot = ConfinementPotential::chaotic_dot(1.2).unwrap();
        let z0 = PhaseState::new([1.2, 0.4], [0.05, 0.2]);
        let t = 3.0;
        let dt = 1e-3;
        let (_, u) = variational_flow(&pot, z0, t, dt).unwrap();
        let eps = 1e-7;
        for col in 0..4 {
            let mut zp = z0.to_array();
            let mut zm = z0.to_array();
            zp[col] += eps;
            zm[col] -= eps;
            let fp = flow(&pot, PhaseState::from_array(zp), t, dt).unwrap().to_array();
            let fm = flow(&pot, PhaseState::from_array(zm), t, dt).unwrap().to_array();
            for row in 0..4 {
                let fd = (fp[row] - fm[row]) / (2.0 * eps);
                assert_relative_eq!(u[(row, col)], fd, epsilon = 1e-5, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn escape_is_reported() {
        // tabulated potential on a small box: an energetic particle leaves
        let g = crate::grid::Grid2D::from_fn(1.0, 65, |x, y| x * x + y * y).unwrap();
        let pot = Bicubic::new(g);
        let z0 = PhaseState::new([0.0, 0.0], [2.0, 0.0]);
        assert!(matches!(
            flow(&pot, z0, 10.0, 1e-3),
            Err(FlowError::Escaped(_))
        ));
    }
}
