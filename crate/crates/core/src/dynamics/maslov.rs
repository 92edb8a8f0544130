//! Maslov index from conjugate points of the transverse Jacobi field.
//!
//! Along the orbit we carry a moving frame (tangent, normal) built from
//! the configuration-space velocity, kept continuous through turning
//! points. The transverse 2x2 tangent map m(t) follows from the full 4x4
//! variational matrix; zeros of its off-diagonal entry m12 are the
//! conjugate points. The index is the number of sign changes of m12 on
//! (0, T), plus one when the endpoint itself is degenerate (m12(T) = 0,
//! as for librations closing exactly on a frame period).

use super::flow::TangentTrace;
use nalgebra::{Matrix4, Vector4};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MaslovError {
    #[error("transverse Jacobi entry vanishes ambiguously at t = {0}; refine the step")]
    AmbiguousCrossing(f64),
    #[error("trace too short to count conjugate points")]
    TooShort,
}

/// Transverse unit frame at each sample, continuous in t.
fn normal_frames(trace: &TangentTrace) -> Vec<[f64; 2]> {
    let mut frames = Vec::with_capacity(trace.states.len());
    let mut prev: Option<[f64; 2]> = None;
    for z in &trace.states {
        let v = z.velocity();
        let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
        let dir = if norm > 1e-9 {
            let mut d = [v[0] / norm, v[1] / norm];
            if let Some(p) = prev {
                if d[0] * p[0] + d[1] * p[1] < 0.0 {
                    d = [-d[0], -d[1]];
                }
            }
            d
        } else {
            // turning point: keep the previous direction
            prev.unwrap_or([1.0, 0.0])
        };
        prev = Some(dir);
        frames.push([-dir[1], dir[0]]);
    }
    frames
}

/// Off-diagonal transverse tangent entry m12(t) at every sample: the
/// Jacobi field seeded by a unit transverse momentum kick at t = 0.
pub fn transverse_m12(trace: &TangentTrace) -> Vec<f64> {
    let frames = normal_frames(trace);
    let n0 = frames[0];
    let seed = Vector4::new(0.0, 0.0, n0[0], n0[1]);
    trace
        .tangents
        .iter()
        .zip(frames.iter())
        .map(|(u, n): (&Matrix4<f64>, &[f64; 2])| {
            let d = u * seed;
            d[0] * n[0] + d[1] * n[1]
        })
        .collect()
}

/// Counts conjugate points of a closed primitive orbit.
pub fn maslov_index(trace: &TangentTrace) -> Result<u32, MaslovError> {
    let m12 = transverse_m12(trace);
    if m12.len() < 8 {
        return Err(MaslovError::TooShort);
    }
    let scale = m12.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(MaslovError::TooShort);
    }
    let tiny = 1e-12 * scale;
    let mut count = 0u32;
    let mut last = m12[1];
    for (k, &v) in m12.iter().enumerate().skip(2).take(m12.len() - 3) {
        if v.abs() < tiny {
            // exact zero at an interior sample: cannot attribute the
            // crossing to either side without a finer step
            return Err(MaslovError::AmbiguousCrossing(trace.times[k]));
        }
        if last * v < 0.0 {
            count += 1;
        }
        last = v;
    }
    // endpoint degeneracy (librations close with m12(T) = 0)
    let end = *m12.last().unwrap();
    if end.abs() < 1e-6 * scale {
        count += 1;
    } else if last * end < 0.0 {
        count += 1;
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::flow::{variational_trace, PhaseState};
    use crate::model::ConfinementPotential;
    use std::f64::consts::PI;

    #[test]
    fn harmonic_libration_has_index_two() {
        // 1D libration of W = |x|^2: two turning points per period.
        let pot = ConfinementPotential::harmonic(1.0, 1.0);
        let z0 = PhaseState::new([0.0, 0.0], [0.7, 0.0]);
        let trace = variational_trace(&pot, z0, PI, PI / 4097.0).unwrap();
        assert_eq!(maslov_index(&trace).unwrap(), 2);
    }

    #[test]
    fn anisotropic_transverse_rotation_counts_zeros() {
        // x1 libration of W = x1^2 + (2 x2)^2: transverse frequency 4,
        // m12 = sin(4t)/? with zeros at multiples of pi/4.
        let pot = ConfinementPotential::harmonic(1.0, 2.0);
        let z0 = PhaseState::new([0.0, 0.0], [0.7, 0.0]);
        // primitive period of the x1 motion is pi; transverse field
        // crosses zero at t = pi/4, pi/2, 3pi/4 and closes at pi.
        let trace = variational_trace(&pot, z0, PI, PI / 4097.0).unwrap();
        assert_eq!(maslov_index(&trace).unwrap(), 4);
    }
}
