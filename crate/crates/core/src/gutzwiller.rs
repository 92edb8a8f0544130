//! Semiclassical trace formula for the oscillating level density and
//! the shell correction to the total energy.
//!
//! With h = -eps^2 Lap + W and isolated orbits, each primitive orbit
//! and repetition contributes
//!
//!   d_osc(e) = (2 / pi eps) sum_{p,r} g_p T_p / sqrt|tr Mred^r - 2|
//!                * cos(r S_p / eps - sigma_r pi / 2)
//!
//! (the 2 is spin degeneracy, g_p the symmetry multiplicity). The shell
//! correction at particle number N follows by integrating the density
//! twice against the Fermi filling, which divides each term by
//! (r T_p / eps)^2; with eps = N^{-1/2} both S and eps are evaluated on
//! the self-consistent shell.

use crate::dynamics::PeriodicOrbit;
use std::f64::consts::PI;

/// Repetitions whose stability |tr Mred^r - 2| falls below this are
/// dropped: the isolated-orbit amplitude diverges there and the term is
/// outside the formula's validity.
pub const MIN_STABILITY: f64 = 1e-6;

/// Global sign of the Maslov phase, frozen against the quantum oracle:
/// phase = r S / eps + MASLOV_PHASE_SIGN * sigma_r * pi / 2.
pub const MASLOV_PHASE_SIGN: f64 = -1.0;

/// One (orbit, repetition) contribution to the trace formula.
#[derive(Debug, Clone)]
pub struct TraceTerm {
    pub orbit_index: usize,
    pub repetition: u32,
    /// Primitive period T_p.
    pub period: f64,
    /// Primitive action S_p.
    pub action: f64,
    /// Symmetry multiplicity g_p of the primitive orbit.
    pub multiplicity: u32,
    /// sigma_r = r * sigma_p.
    pub maslov: u32,
    /// tr Mred^r - 2.
    pub stability: f64,
}

impl TraceTerm {
    fn phase(&self, inv_eps: f64) -> f64 {
        let r = self.repetition as f64;
        r * self.action * inv_eps + MASLOV_PHASE_SIGN * self.maslov as f64 * PI / 2.0
    }

    /// Amplitude of the term in eps * d_osc.
    pub fn dos_amplitude(&self) -> f64 {
        2.0 * self.multiplicity as f64 * self.period / (PI * self.stability.abs().sqrt())
    }

    /// Contribution to d_osc(e) at the orbit energy.
    pub fn dos(&self, eps: f64) -> f64 {
        self.dos_amplitude() / eps * self.phase(1.0 / eps).cos()
    }

    /// Contribution to the scaled shell energy at particle number n.
    pub fn energy(&self, n: f64) -> f64 {
        let r = self.repetition as f64;
        let sqrt_n = n.sqrt();
        sqrt_n * 2.0 * self.multiplicity as f64
            / (PI * r * r * self.period * self.stability.abs().sqrt())
            * self.phase(sqrt_n).cos()
    }
}

/// Expands a primitive-orbit list into trace terms up to `max_repetition`,
/// skipping marginal repetitions.
pub fn trace_terms(orbits: &[PeriodicOrbit], max_repetition: u32) -> Vec<TraceTerm> {
    let mut terms = Vec::new();
    for (k, orbit) in orbits.iter().enumerate() {
        for r in 1..=max_repetition {
            let stability = orbit.trace_power(r) - 2.0;
            if stability.abs() < MIN_STABILITY {
                continue;
            }
            terms.push(TraceTerm {
                orbit_index: k,
                repetition: r,
                period: orbit.period,
                action: orbit.action,
                multiplicity: orbit.multiplicity,
                maslov: r * orbit.maslov,
                stability,
            });
        }
    }
    terms
}

/// Oscillating level density at the orbits' energy shell.
pub fn dos_osc(terms: &[TraceTerm], eps: f64) -> f64 {
    terms.iter().map(|t| t.dos(eps)).sum()
}

/// Oscillating part of the scaled total energy at particle number n,
/// with eps = n^{-1/2}.
pub fn energy_osc(terms: &[TraceTerm], n: f64) -> f64 {
    terms.iter().map(|t| t.energy(n)).sum()
}

/// Shell-correction curve over a particle-number window.
#[derive(Debug, Clone)]
pub struct OscillationScan {
    pub n: Vec<f64>,
    pub delta_e: Vec<f64>,
}

pub fn scan_osc(terms: &[TraceTerm], n_min: f64, n_max: f64, samples: usize) -> OscillationScan {
    let samples = samples.max(2);
    let mut n = Vec::with_capacity(samples);
    let mut delta_e = Vec::with_capacity(samples);
    for k in 0..samples {
        let v = n_min + (n_max - n_min) * k as f64 / (samples - 1) as f64;
        n.push(v);
        delta_e.push(energy_osc(terms, v));
    }
    OscillationScan { n, delta_e }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{PeriodicOrbit, PhaseState};
    use approx::assert_relative_eq;
    use nalgebra::Matrix2;

    fn orbit(trace: f64, maslov: u32, multiplicity: u32) -> PeriodicOrbit {
        PeriodicOrbit {
            energy: 1.0,
            initial: PhaseState::new([1.0, 0.0], [0.0, 0.0]),
            period: 2.5,
            action: 4.0,
            monodromy: Matrix2::new(trace - 1.0, 1.0, trace - 2.0, 1.0),
            trace,
            maslov,
            stabilizer: 4,
            multiplicity,
            closure_residual: 0.0,
        }
    }

    #[test]
    fn marginal_repetitions_are_skipped() {
        // trace 2 is marginal at every repetition
        assert!(trace_terms(&[orbit(2.0, 2, 1)], 4).is_empty());
        // hyperbolic orbit keeps all repetitions
        assert_eq!(trace_terms(&[orbit(3.0, 2, 1)], 4).len(), 4);
    }

    #[test]
    fn elliptic_orbit_skips_resonant_repetition_only() {
        // tr = 2 cos(2pi/3): the third repetition closes the stability
        // angle, tr M^3 = 2, and must be dropped.
        let tr = 2.0 * (2.0 * PI / 3.0).cos();
        let terms = trace_terms(&[orbit(tr, 2, 1)], 6);
        let reps: Vec<u32> = terms.iter().map(|t| t.repetition).collect();
        assert_eq!(reps, vec![1, 2, 4, 5]);
    }

    #[test]
    fn single_term_dos_value() {
        let terms = trace_terms(&[orbit(3.0, 2, 2)], 1);
        assert_eq!(terms.len(), 1);
        let t = &terms[0];
        assert_relative_eq!(t.stability, 1.0, epsilon = 1e-15);
        let eps = 0.2;
        let expect = 2.0 * 2.0 * 2.5 / (PI * 1.0f64.sqrt()) / eps
            * (4.0 / eps + MASLOV_PHASE_SIGN * 2.0 * PI / 2.0).cos();
        assert_relative_eq!(dos_osc(terms.as_slice(), eps), expect, epsilon = 1e-12);
    }

    #[test]
    fn energy_term_scaling_in_repetition() {
        // amplitude falls as 1/(r^2 sqrt|tr M^r - 2|)
        let terms = trace_terms(&[orbit(3.0, 0, 1)], 2);
        let n = 37.0f64;
        let amp = |t: &TraceTerm| {
            let r = t.repetition as f64;
            n.sqrt() * 2.0 / (PI * r * r * t.period * t.stability.abs().sqrt())
        };
        for t in &terms {
            let phase = (t.repetition as f64 * t.action * n.sqrt()).cos();
            assert_relative_eq!(t.energy(n), amp(t) * phase, epsilon = 1e-12);
        }
    }

    #[test]
    fn scan_is_deterministic_and_dense() {
        let terms = trace_terms(&[orbit(3.0, 2, 1)], 3);
        let s1 = scan_osc(&terms, 10.0, 100.0, 64);
        let s2 = scan_osc(&terms, 10.0, 100.0, 64);
        assert_eq!(s1.n.len(), 64);
        assert_eq!(s1.delta_e, s2.delta_e);
        assert_relative_eq!(s1.n[0], 10.0);
        assert_relative_eq!(*s1.n.last().unwrap(), 100.0);
    }
}
