//! Periodic-orbit search on a fixed energy shell.
//!
//! Seeds come from two sources: perpendicular launches at the axis
//! turning points, and close returns of randomly sampled shell
//! trajectories. Each candidate is polished with a Gauss-Newton
//! iteration on the unknowns (z0, T): four closure equations, one
//! phase anchor that removes the time-translation null direction, and
//! initially the shell constraint H(z0) = e. The overdetermined system
//! is solved by SVD with small singular values truncated; when the
//! shell row stalls the iteration (tabulated potentials do not
//! conserve H exactly under the discrete flow), a second pass drives
//! closure alone to tolerance and the settled energy is checked
//! against the request. The search runs at a coarse step count and
//! accepted orbits are re-polished at a finer one.

use super::flow::{
    flow, step, variational_flow, variational_trace, FlowError, Hamiltonian, PhaseState, Potential,
    TangentTrace,
};
use super::maslov::{maslov_index, MaslovError};
use nalgebra::{Matrix2, Matrix4, SMatrix, SVector, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OrbitError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Maslov(#[from] MaslovError),
    #[error("Gauss-Newton stalled with closure residual {0:e}")]
    NewtonStalled(f64),
    #[error("no classically allowed region at energy {0}")]
    NoClassicalRegion(f64),
    #[error("velocity or energy gradient vanishes on the orbit; transverse frame undefined")]
    DegenerateFrame,
    #[error("cannot continue orbit to energy {0}: initial point is forbidden there")]
    ContinuationFailed(f64),
    #[error("polished orbit settled at energy {found} instead of {requested}")]
    OffShell { requested: f64, found: f64 },
}

/// A primitive periodic orbit of H = p^2 + W at fixed energy.
#[derive(Debug, Clone)]
pub struct PeriodicOrbit {
    pub energy: f64,
    pub initial: PhaseState,
    pub period: f64,
    /// S = int 2 p^2 dt over one primitive period.
    pub action: f64,
    /// Reduced 2x2 monodromy in the transverse frame.
    pub monodromy: Matrix2<f64>,
    /// tr of the reduced monodromy.
    pub trace: f64,
    pub maslov: u32,
    /// Order of the subgroup of discrete symmetries fixing the orbit.
    pub stabilizer: u32,
    /// Distinct symmetry copies: |G| / |stabilizer|.
    pub multiplicity: u32,
    pub closure_residual: f64,
}

impl PeriodicOrbit {
    /// tr of the r-th power of the reduced monodromy. With det = 1 the
    /// traces obey the Chebyshev recurrence t_r = t_1 t_{r-1} - t_{r-2}.
    pub fn trace_power(&self, r: u32) -> f64 {
        let mut prev = 2.0;
        let mut cur = self.trace;
        match r {
            0 => prev,
            1 => cur,
            _ => {
                for _ in 1..r {
                    let next = self.trace * cur - prev;
                    prev = cur;
                    cur = next;
                }
                cur
            }
        }
    }
}

/// Effort knobs for `find_orbits`.
#[derive(Debug, Clone)]
pub struct SearchBudget {
    /// Rest seeds placed on the turning curve W = e along a ring of rays.
    pub ring_seeds: usize,
    /// Random shell seeds in addition to the turning-curve launches.
    pub random_seeds: usize,
    /// Longest primitive period considered.
    pub max_period: f64,
    /// Close returns polished per seed trajectory.
    pub returns_per_seed: usize,
    pub newton_iters: usize,
    pub closure_tol: f64,
    pub rng_seed: u64,
    pub max_orbits: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            ring_seeds: 16,
            random_seeds: 48,
            max_period: 20.0,
            returns_per_seed: 3,
            newton_iters: 60,
            closure_tol: 1e-10,
            rng_seed: 7,
            max_orbits: 16,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchReport {
    pub orbits: Vec<PeriodicOrbit>,
    pub seeds_tried: usize,
    pub polishes_attempted: usize,
    pub polishes_converged: usize,
    /// Converged orbits dropped because the Maslov count stayed ambiguous.
    pub dropped_maslov: usize,
    /// Converged orbits dropped for a degenerate transverse frame.
    pub dropped_frame: usize,
}

const ORBIT_STEPS: usize = 4096;
// Closure level reachable at the coarse resolution: a bicubic
// potential is only C^1, and the cell-boundary noise in the Hessian
// feeds a comparable error into the Gauss-Newton Jacobian, which
// stalls the iteration near this level for generic seeds.
const COARSE_TOL: f64 = 1e-6;
// Step count for the final refinement; the C^1 noise floor shrinks
// roughly like dt^2, which puts 1e-10 closures within reach.
const REFINE_STEPS: usize = 65536;
// The floor is also amplified by the orbit's instability, so strongly
// hyperbolic orbits escalate through finer resolutions until the
// closure tolerance is met.
const REFINE_ESCALATION: [usize; 3] = [1, 8, 64];
// Step-count offsets to retry when a conjugate point lands exactly on
// a sample (librations with commensurate zeros).
const MASLOV_OFFSETS: [usize; 4] = [0, 1, 3, 15];

fn norm4(z: [f64; 4]) -> f64 {
    z.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// One Gauss-Newton pass on the unknowns (z0, T). The equations are
/// the four closure components, a phase anchor that removes the
/// time-translation null direction, and (when `energy` is given) the
/// shell constraint H(z0) = e. Returns the best iterate together with
/// a convergence flag instead of failing on a stall, so a caller can
/// chain passes.
#[allow(clippy::type_complexity)]
fn gauss_newton(
    pot: &dyn Potential,
    seed: PhaseState,
    t_guess: f64,
    energy: Option<f64>,
    tol: f64,
    max_iter: usize,
    steps: usize,
) -> Result<(PhaseState, f64, f64, bool), OrbitError> {
    let ham = Hamiltonian::new(pot);
    let anchor = seed.to_array();
    let anchor_rhs = ham.rhs(&seed).ok_or(FlowError::Escaped(0.0))?;
    let mut z = seed;
    let mut t = t_guess;
    let scale = norm4(seed.to_array()).max(1.0);

    let residual = |z: &PhaseState, t: f64| -> Result<(SVector<f64, 6>, f64), OrbitError> {
        let zt = flow(pot, *z, t, t / steps as f64)?;
        let a = z.to_array();
        let b = zt.to_array();
        let mut f = SVector::<f64, 6>::zeros();
        for i in 0..4 {
            f[i] = b[i] - a[i];
        }
        f[4] = (0..4).map(|i| anchor_rhs[i] * (a[i] - anchor[i])).sum();
        if let Some(e) = energy {
            f[5] = ham.energy(z).ok_or(FlowError::Escaped(0.0))? - e;
        }
        let closure = (0..4).map(|i| f[i] * f[i]).sum::<f64>().sqrt();
        Ok((f, closure))
    };
    let converged = |closure: f64, f: &SVector<f64, 6>| {
        closure < tol * scale && (energy.is_none() || f[5].abs() < tol * scale)
    };

    let (mut f, mut closure) = residual(&z, t)?;
    for _ in 0..max_iter {
        if converged(closure, &f) {
            return Ok((z, t, closure, true));
        }
        let dt = t / steps as f64;
        let (zt, m) = variational_flow(pot, z, t, dt)?;
        let rhs_t = ham.rhs(&zt).ok_or(FlowError::Escaped(t))?;

        let mut jac = SMatrix::<f64, 6, 5>::zeros();
        for r in 0..4 {
            for c in 0..4 {
                jac[(r, c)] = m[(r, c)] - if r == c { 1.0 } else { 0.0 };
            }
            jac[(r, 4)] = rhs_t[r];
        }
        for c in 0..4 {
            jac[(4, c)] = anchor_rhs[c];
        }
        if energy.is_some() {
            let g = pot.grad(z.x).ok_or(FlowError::Escaped(0.0))?;
            let grad_h = [g[0], g[1], 2.0 * z.p[0], 2.0 * z.p[1]];
            for c in 0..4 {
                jac[(5, c)] = grad_h[c];
            }
        }

        // Truncate small singular values: marginally stable orbits
        // (harmonic oscillators) make M - I nearly zero, and the
        // corresponding null z0-directions must not enter the step.
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let delta = match svd.solve(&(-f), 1e-9 * smax.max(1.0)) {
            Ok(d) => d,
            Err(_) => return Ok((z, t, closure, false)),
        };

        let mut accepted = false;
        let mut alpha = 1.0;
        for _ in 0..8 {
            let z_try = PhaseState::from_array([
                z.x[0] + alpha * delta[0],
                z.x[1] + alpha * delta[1],
                z.p[0] + alpha * delta[2],
                z.p[1] + alpha * delta[3],
            ]);
            let t_try = t + alpha * delta[4];
            if t_try > 1e-3 * t_guess && t_try < 10.0 * t_guess {
                if let Ok((f_try, c_try)) = residual(&z_try, t_try) {
                    if f_try.norm() < f.norm() {
                        z = z_try;
                        t = t_try;
                        f = f_try;
                        closure = c_try;
                        accepted = true;
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Ok((z, t, closure, false));
        }
    }
    let ok = converged(closure, &f);
    Ok((z, t, closure, ok))
}

/// Polish of a candidate (z0, T) at energy `e`.
///
/// A first Gauss-Newton pass imposes H(z0) = e alongside closure. For
/// smooth potentials this converges outright. For tabulated (bicubic)
/// potentials the discrete flow map does not conserve H exactly, so
/// exact closure and exact energy are jointly unattainable and the
/// pass stalls near the orbit; a second pass without the energy row
/// then drives closure alone to tolerance. The orbit keeps the energy
/// the closed discrete trajectory settles on, which is accepted if it
/// lies within the integrator's energy wobble of the request.
fn polish(
    pot: &dyn Potential,
    seed: PhaseState,
    t_guess: f64,
    energy: f64,
    tol: f64,
    max_iter: usize,
    steps: usize,
) -> Result<(PhaseState, f64, f64), OrbitError> {
    let ham = Hamiltonian::new(pot);
    let (z1, t1, r1, ok1) = gauss_newton(pot, seed, t_guess, Some(energy), tol, max_iter, steps)?;
    if ok1 {
        return Ok((z1, t1, r1));
    }
    let (z2, t2, r2, ok2) = gauss_newton(pot, z1, t1, None, tol, max_iter, steps)?;
    if !ok2 {
        return Err(OrbitError::NewtonStalled(r2));
    }
    let found = ham.energy(&z2).ok_or(FlowError::Escaped(0.0))?;
    if (found - energy).abs() > 1e-6 * energy.abs().max(1.0) {
        return Err(OrbitError::OffShell {
            requested: energy,
            found,
        });
    }
    Ok((z2, t2, r2))
}

/// Refinement of an already-polished orbit at a finer step count. The
/// start is on shell to the accepted wobble, so the shell row is
/// omitted and closure alone is driven down. The best iterate is kept
/// even when the tolerance is not formally met: its residual is still
/// far below the coarse one and is recorded honestly.
fn refine(
    pot: &dyn Potential,
    z0: PhaseState,
    period: f64,
    energy: f64,
    tol: f64,
    max_iter: usize,
    steps: usize,
) -> Result<(PhaseState, f64, f64), OrbitError> {
    let ham = Hamiltonian::new(pot);
    let mut z = z0;
    let mut t = period;
    let mut res = f64::INFINITY;
    for &factor in &REFINE_ESCALATION {
        let (zk, tk, rk, ok) = gauss_newton(pot, z, t, None, tol, max_iter, steps * factor)?;
        if rk < res {
            (z, t, res) = (zk, tk, rk);
        }
        if ok {
            break;
        }
    }
    let found = ham.energy(&z).ok_or(FlowError::Escaped(0.0))?;
    if (found - energy).abs() > 1e-6 * energy.abs().max(1.0) {
        return Err(OrbitError::OffShell {
            requested: energy,
            found,
        });
    }
    Ok((z, t, res))
}

/// Moves a point of the closed trajectory through `z0` back onto the
/// shell H = e by rescaling the momentum at the point of largest
/// kinetic energy (the initial point of a brake orbit has p = 0 and
/// cannot be rescaled).
fn reseed_at_energy(
    pot: &dyn Potential,
    z0: PhaseState,
    period: f64,
    energy: f64,
) -> Result<PhaseState, OrbitError> {
    let mut z = z0;
    let mut best = z;
    let mut kin_best = z.p[0] * z.p[0] + z.p[1] * z.p[1];
    let n = 256;
    let dt = period / n as f64;
    for _ in 0..n {
        if step(pot, &mut z, None, dt).is_none() {
            break;
        }
        let kin = z.p[0] * z.p[0] + z.p[1] * z.p[1];
        if kin > kin_best {
            kin_best = kin;
            best = z;
        }
    }
    let w = pot.eval(best.x).ok_or(FlowError::Escaped(0.0))?;
    let kin_new = energy - w;
    if kin_new <= 0.0 || kin_best <= 0.0 {
        return Err(OrbitError::ContinuationFailed(energy));
    }
    let factor = (kin_new / kin_best).sqrt();
    Ok(PhaseState::new(
        best.x,
        [factor * best.p[0], factor * best.p[1]],
    ))
}

/// Reduced transverse monodromy by symplectic reduction. zdot = J grad H
/// are mutually orthogonal; w1 completes them orthonormally and
/// w2 = J w1 is its symplectic partner (also orthogonal to both, with
/// omega(w1, w2) = 1). Components are extracted with the symplectic
/// form, which annihilates the zdot and grad H directions exactly, so
/// the flow-direction shear and the integrator's small off-shell
/// leakage do not contaminate the transverse block.
pub(crate) fn reduced_monodromy(
    m: &Matrix4<f64>,
    zdot: [f64; 4],
    grad_h: [f64; 4],
) -> Result<Matrix2<f64>, OrbitError> {
    let v1 = Vector4::from(zdot);
    let v2 = Vector4::from(grad_h);
    let n1 = v1.norm();
    let n2 = v2.norm();
    if n1 < 1e-12 || n2 < 1e-12 {
        return Err(OrbitError::DegenerateFrame);
    }
    let v1 = v1 / n1;
    let v2 = v2 / n2;
    // omega(u, v) = u_x . v_p - u_p . v_x with z = (x1, x2, p1, p2)
    let omega = |u: &Vector4<f64>, v: &Vector4<f64>| u[0] * v[2] + u[1] * v[3] - u[2] * v[0] - u[3] * v[1];
    let jv = |u: &Vector4<f64>| Vector4::new(u[2], u[3], -u[0], -u[1]);
    // largest Gram-Schmidt remainder of the standard basis
    let w1 = (0..4)
        .map(|i| {
            let mut e = Vector4::zeros();
            e[i] = 1.0;
            e - v1 * v1.dot(&e) - v2 * v2.dot(&e)
        })
        .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
        .unwrap();
    if w1.norm() < 1e-6 {
        return Err(OrbitError::DegenerateFrame);
    }
    let w1 = w1.normalize();
    let w2 = jv(&w1);
    let mw1 = m * w1;
    let mw2 = m * w2;
    // M w = a zdot + b grad H + c1 w1 + c2 w2; with omega(w1, w2) = -1
    // the components are c1 = omega(w2, Mw) and c2 = omega(Mw, w1)
    Ok(Matrix2::new(
        omega(&w2, &mw1),
        omega(&w2, &mw2),
        omega(&mw1, &w1),
        omega(&mw2, &w1),
    ))
}

/// Action and period of a closed trajectory: S = int 2 p^2 dt by
/// composite Simpson over `ORBIT_STEPS` equal steps.
pub fn action_and_period(
    pot: &dyn Potential,
    z0: PhaseState,
    period: f64,
) -> Result<(f64, f64), OrbitError> {
    let trace = variational_trace(pot, z0, period, period / ORBIT_STEPS as f64)?;
    Ok((simpson_action(&trace), period))
}

fn simpson_action(trace: &TangentTrace) -> f64 {
    let n = trace.states.len() - 1;
    let h = trace.times[n] / n as f64;
    let f = |z: &PhaseState| 2.0 * (z.p[0] * z.p[0] + z.p[1] * z.p[1]);
    if n % 2 == 0 {
        let mut s = f(&trace.states[0]) + f(&trace.states[n]);
        for (k, z) in trace.states.iter().enumerate().take(n).skip(1) {
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(z);
        }
        s * h / 3.0
    } else {
        // trapezoid fallback for odd step counts
        let mut s = 0.5 * (f(&trace.states[0]) + f(&trace.states[n]));
        for z in trace.states.iter().take(n).skip(1) {
            s += f(z);
        }
        s * h
    }
}

// Discrete symmetries of H = p^2 + W that we test: sign flips of each
// coordinate (acting on x_i and p_i together) and time reversal p -> -p.
#[derive(Debug, Clone, Copy)]
struct SymmetryOp {
    sx: [f64; 2],
    reverse: bool,
}

impl SymmetryOp {
    fn apply(&self, z: &PhaseState) -> PhaseState {
        let r = if self.reverse { -1.0 } else { 1.0 };
        PhaseState::new(
            [self.sx[0] * z.x[0], self.sx[1] * z.x[1]],
            [r * self.sx[0] * z.p[0], r * self.sx[1] * z.p[1]],
        )
    }
}

/// Parity operations that leave W invariant, tested on sample points.
fn potential_symmetries(pot: &dyn Potential, extent: f64) -> Vec<SymmetryOp> {
    let probes = [
        [0.31 * extent, 0.17 * extent],
        [0.52 * extent, 0.44 * extent],
        [0.13 * extent, 0.61 * extent],
    ];
    let parities: [[f64; 2]; 4] = [[1.0, 1.0], [-1.0, 1.0], [1.0, -1.0], [-1.0, -1.0]];
    let mut ops = Vec::new();
    for sx in parities {
        let ok = probes.iter().all(|&q| {
            match (pot.eval(q), pot.eval([sx[0] * q[0], sx[1] * q[1]])) {
                (Some(a), Some(b)) => (a - b).abs() <= 1e-9 * a.abs().max(1.0),
                _ => false,
            }
        });
        if ok {
            ops.push(SymmetryOp { sx, reverse: false });
            // time reversal is always a symmetry of p^2 + W
            ops.push(SymmetryOp { sx, reverse: true });
        }
    }
    ops
}

/// True when `target` lies on the sampled orbit, refining near the
/// closest sample with a finer integration.
fn on_orbit(pot: &dyn Potential, trace: &TangentTrace, target: &PhaseState, tol: f64) -> bool {
    let (best, d_best) = trace
        .states
        .iter()
        .enumerate()
        .map(|(k, z)| (k, z.distance(target)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    if d_best < tol {
        return true;
    }
    let dt = trace.times[1] - trace.times[0];
    // refine over the bracketing window [t_best - dt, t_best + dt]
    let start = best.saturating_sub(1);
    let mut z = trace.states[start];
    let fine = dt / 100.0;
    let mut d_min = z.distance(target);
    for _ in 0..200 {
        if step(pot, &mut z, None, fine).is_none() {
            break;
        }
        d_min = d_min.min(z.distance(target));
    }
    d_min < tol
}

fn stabilizer_order(
    pot: &dyn Potential,
    trace: &TangentTrace,
    ops: &[SymmetryOp],
    tol: f64,
) -> u32 {
    let z0 = trace.states[0];
    ops.iter()
        .filter(|op| on_orbit(pot, trace, &op.apply(&z0), tol))
        .count()
        .max(1) as u32
}

/// Assembles the full orbit record from a polished (z0, T).
fn finish_orbit(
    pot: &dyn Potential,
    z0: PhaseState,
    period: f64,
    closure_residual: f64,
    extent_hint: f64,
    steps: usize,
) -> Result<PeriodicOrbit, OrbitError> {
    let ham = Hamiltonian::new(pot);
    let energy = ham.energy(&z0).ok_or(FlowError::Escaped(0.0))?;
    let trace = variational_trace(pot, z0, period, period / steps as f64)?;
    let action = simpson_action(&trace);

    let m = *trace.tangents.last().unwrap();
    let zdot = ham.rhs(&z0).ok_or(FlowError::Escaped(0.0))?;
    let g = pot.grad(z0.x).ok_or(FlowError::Escaped(0.0))?;
    let grad_h = [g[0], g[1], 2.0 * z0.p[0], 2.0 * z0.p[1]];
    let monodromy = reduced_monodromy(&m, zdot, grad_h)?;
    let trace_red = monodromy.trace();

    let maslov = {
        let mut result = maslov_index(&trace);
        for &off in &MASLOV_OFFSETS[1..] {
            if !matches!(result, Err(MaslovError::AmbiguousCrossing(_))) {
                break;
            }
            let retry = variational_trace(pot, z0, period, period / (steps + off) as f64)?;
            result = maslov_index(&retry);
        }
        result?
    };

    let ops = potential_symmetries(pot, extent_hint);
    let group = ops.len().max(1) as u32;
    let scale = norm4(z0.to_array()).max(1.0);
    let stab = stabilizer_order(pot, &trace, &ops, 1e-4 * scale);
    let stab = if group % stab == 0 { stab } else { 1 };

    Ok(PeriodicOrbit {
        energy,
        initial: z0,
        period,
        action,
        monodromy,
        trace: trace_red,
        maslov,
        stabilizer: stab,
        multiplicity: group / stab,
        closure_residual,
    })
}

/// Turning point along the unit ray `dir`: smallest s > 0 with
/// W(s dir) = e. Tabulated potentials are handled by clamping the
/// bracketing step at the edge of the evaluable domain.
fn ray_turning(pot: &dyn Potential, dir: [f64; 2], energy: f64) -> Option<f64> {
    let point = |s: f64| [s * dir[0], s * dir[1]];
    if pot.eval(point(0.0))? >= energy {
        return None;
    }
    let mut hi = 1e-3;
    let mut lo = 0.0;
    for _ in 0..60 {
        match pot.eval(point(hi)) {
            Some(w) if w >= energy => break,
            Some(_) => {
                lo = hi;
                hi *= 2.0;
            }
            None => {
                // the step left the tabulated domain: shrink back to the
                // largest evaluable radius and stop bracketing there
                let mut inside = lo;
                let mut outside = hi;
                for _ in 0..60 {
                    let mid = 0.5 * (inside + outside);
                    if pot.eval(point(mid)).is_some() {
                        inside = mid;
                    } else {
                        outside = mid;
                    }
                }
                hi = inside;
                break;
            }
        }
    }
    if pot.eval(point(hi))? < energy {
        return None; // the shell is open along this ray
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if pot.eval(point(mid))? < energy {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Times of the closest returns of the trajectory through `z0`.
fn close_returns(
    pot: &dyn Potential,
    z0: PhaseState,
    t_max: f64,
    k_max: usize,
) -> Vec<f64> {
    let n = 32768usize;
    let dt = t_max / n as f64;
    let t_min = 32.0 * dt;
    let mut z = z0;
    let mut dists = Vec::with_capacity(n + 1);
    dists.push(0.0);
    for _ in 0..n {
        if step(pot, &mut z, None, dt).is_none() {
            break;
        }
        dists.push(z.distance(&z0));
    }
    let mut minima: Vec<(f64, f64)> = Vec::new();
    for k in 1..dists.len().saturating_sub(1) {
        let t = k as f64 * dt;
        if t < t_min {
            continue;
        }
        if dists[k] < dists[k - 1] && dists[k] <= dists[k + 1] {
            // parabolic refinement of the minimum position
            let (a, b, c) = (dists[k - 1], dists[k], dists[k + 1]);
            let denom = a - 2.0 * b + c;
            let shift = if denom.abs() > 1e-300 {
                (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
            } else {
                0.0
            };
            minima.push((t + shift * dt, b));
        }
    }
    minima.sort_by(|u, v| u.1.partial_cmp(&v.1).unwrap());
    minima.truncate(k_max);
    minima.into_iter().map(|(t, _)| t).collect()
}

/// Searches the energy shell for primitive periodic orbits.
pub fn find_orbits(
    pot: &dyn Potential,
    energy: f64,
    budget: &SearchBudget,
) -> Result<SearchReport, OrbitError> {
    // Brake-orbit seeds: rest points on the turning curve W = e along a
    // ring of rays. Librations start and end on this curve, so these
    // seeds return almost exactly and polish reliably.
    let mut seeds: Vec<PhaseState> = Vec::new();
    let mut extent: f64 = 0.0;
    for k in 0..budget.ring_seeds.max(2) {
        let theta = std::f64::consts::TAU * k as f64 / budget.ring_seeds.max(2) as f64;
        let dir = [theta.cos(), theta.sin()];
        if let Some(s) = ray_turning(pot, dir, energy) {
            seeds.push(PhaseState::new([s * dir[0], s * dir[1]], [0.0, 0.0]));
            extent = extent.max(s);
        }
    }
    if seeds.is_empty() {
        return Err(OrbitError::NoClassicalRegion(energy));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.rng_seed);
    let bx = extent;
    let by = extent;
    let mut placed = 0;
    let mut attempts = 0;
    while placed < budget.random_seeds && attempts < 200 * budget.random_seeds.max(1) {
        attempts += 1;
        let x = [rng.gen_range(-bx..=bx), rng.gen_range(-by..=by)];
        let w = match pot.eval(x) {
            Some(w) => w,
            None => continue,
        };
        if w >= energy {
            continue;
        }
        let pm = (energy - w).sqrt();
        let theta = rng.gen_range(0.0..std::f64::consts::TAU);
        seeds.push(PhaseState::new(x, [pm * theta.cos(), pm * theta.sin()]));
        placed += 1;
    }

    // The search runs at the coarse resolution; accepted candidates are
    // re-polished at the fine resolution below.
    let coarse_tol = budget.closure_tol.max(COARSE_TOL);
    let mut orbits: Vec<PeriodicOrbit> = Vec::new();
    let mut polishes = 0;
    let mut converged = 0;
    let mut dropped_maslov = 0;
    let mut dropped_frame = 0;
    for seed in &seeds {
        let returns = close_returns(pot, *seed, budget.max_period, budget.returns_per_seed);
        for t_guess in returns {
            polishes += 1;
            let polished = polish(
                pot,
                *seed,
                t_guess,
                energy,
                coarse_tol,
                budget.newton_iters,
                ORBIT_STEPS,
            );
            let (mut z0, mut period, mut res) = match polished {
                Ok(v) => v,
                Err(_) => continue,
            };
            converged += 1;
            if period > 1.5 * budget.max_period {
                continue;
            }
            // reduce to the primitive period if the polished orbit is a
            // repetition of a shorter one; the candidate test is loose
            // (integration error drifts between step sizes) and the
            // re-polish plus period-shrink check makes it safe
            let scale = norm4(z0.to_array()).max(1.0);
            let mut m = 2;
            while m <= 8 {
                if period / m as f64 > 16.0 * period / ORBIT_STEPS as f64 {
                    let sub = period / m as f64;
                    if let Ok(zs) = flow(pot, z0, sub, sub / ORBIT_STEPS as f64) {
                        if zs.distance(&z0) < 1e-3 * scale {
                            if let Ok((zp, tp, rp)) = polish(
                                pot,
                                z0,
                                sub,
                                energy,
                                coarse_tol,
                                budget.newton_iters,
                                ORBIT_STEPS,
                            ) {
                                if tp < 0.8 * period {
                                    z0 = zp;
                                    period = tp;
                                    res = rp;
                                    m = 1; // restart in case of higher repetitions
                                }
                            }
                        }
                    }
                }
                m += 1;
            }

            let (action, _) = action_and_period(pot, z0, period)?;
            // repetitions that evaded the reduction still show up as near
            // integer multiples of a known primitive's (T, S)
            let duplicate = orbits.iter().any(|o| {
                (1..=8).any(|r| {
                    let rf = r as f64;
                    (period - rf * o.period).abs() < 1e-4 * period
                        && (action - rf * o.action).abs() < 1e-4 * action.abs().max(1e-12)
                })
            });
            if duplicate {
                continue;
            }
            // Fine re-polish of the accepted candidate: the coarse
            // resolution cannot reach tight closure tolerances on C^1
            // potentials. A refinement failure keeps the coarse orbit
            // with its larger residual recorded honestly.
            if budget.closure_tol < coarse_tol {
                if let Ok((zf, tf, rf)) = refine(
                    pot,
                    z0,
                    period,
                    energy,
                    budget.closure_tol,
                    budget.newton_iters,
                    REFINE_STEPS,
                ) {
                    if rf < res {
                        (z0, period, res) = (zf, tf, rf);
                    }
                }
            }
            match finish_orbit(pot, z0, period, res, extent, REFINE_STEPS) {
                Ok(orbit) => {
                    // a shorter primitive retires any stored repetition of it
                    orbits.retain(|o| {
                        !(2..=8).any(|r| {
                            let rf = r as f64;
                            (o.period - rf * orbit.period).abs() < 1e-4 * o.period
                                && (o.action - rf * orbit.action).abs()
                                    < 1e-4 * o.action.abs().max(1e-12)
                        })
                    });
                    orbits.push(orbit);
                }
                Err(OrbitError::Maslov(_)) => {
                    dropped_maslov += 1;
                    continue;
                }
                Err(OrbitError::DegenerateFrame) => {
                    dropped_frame += 1;
                    continue;
                }
                Err(e) => return Err(e),
            }
        }
    }
    orbits.sort_by(|a, b| a.period.partial_cmp(&b.period).unwrap());
    orbits.truncate(budget.max_orbits);
    Ok(SearchReport {
        orbits,
        seeds_tried: seeds.len(),
        polishes_attempted: polishes,
        polishes_converged: converged,
        dropped_maslov,
        dropped_frame,
    })
}

/// Continues a polished orbit to a nearby energy by rescaling the
/// momentum and re-polishing at the same period guess.
pub fn continue_in_energy(
    pot: &dyn Potential,
    orbit: &PeriodicOrbit,
    energy: f64,
    budget: &SearchBudget,
) -> Result<PeriodicOrbit, OrbitError> {
    let seed = reseed_at_energy(pot, orbit.initial, orbit.period, energy)?;
    let coarse_tol = budget.closure_tol.max(COARSE_TOL);
    let (mut z0, mut period, mut res) = polish(
        pot,
        seed,
        orbit.period,
        energy,
        coarse_tol,
        budget.newton_iters,
        ORBIT_STEPS,
    )?;
    if budget.closure_tol < coarse_tol {
        if let Ok((zf, tf, rf)) = refine(
            pot,
            z0,
            period,
            energy,
            budget.closure_tol,
            budget.newton_iters,
            REFINE_STEPS,
        ) {
            if rf < res {
                (z0, period, res) = (zf, tf, rf);
            }
        }
    }
    // the extent hint only steers symmetry probe points
    let extent = z0.x[0].abs().max(z0.x[1].abs()).max(1.0) * 2.0;
    finish_orbit(pot, z0, period, res, extent, REFINE_STEPS)
}
