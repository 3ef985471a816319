//! Two unit cells in series under a prescribed displacement of the outermost
//! block: constrained energy minimisation, quasi-static continuation with
//! snap detection, and extraction of the visited state sequence.
//!
//! With the displacement `u` of the outermost block imposed, the two lever
//! angles satisfy one constraint and the configuration space collapses to a
//! single interval of the inner angle. Continuation follows the local
//! minimiser of the summed strain energy along that interval as `u` is swept;
//! when the tracked minimum vanishes the state jumps to the basin reachable
//! downhill and the jump is recorded as a snap event.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::ChainError;
use crate::solve::{descend, WalkOutcome, WalkParams};
use crate::unit::{unit_energy, unit_force_raw, UnitConfig};
use crate::MM;

/// Two serially coupled unit cells. The standard builds share `r` and
/// `theta_c` between the units; differing values are permitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub inner: UnitConfig,
    pub outer: UnitConfig,
}

impl ChainConfig {
    pub fn validate(&self) -> Result<(), crate::ModelError> {
        self.inner.validate()?;
        self.outer.validate()
    }

    /// Half the reachable displacement span (mm); equals `2 r sin theta_c`
    /// for equal units.
    pub fn u_max(&self) -> f64 {
        0.5 * (self.inner.travel() + self.outer.travel())
    }

    /// Full reachable displacement span (mm).
    pub fn u_span(&self) -> f64 {
        self.inner.travel() + self.outer.travel()
    }
}

/// Continuous configuration of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub theta_in: f64,
    pub theta_out: f64,
}

impl ChainState {
    pub fn new(theta_in: f64, theta_out: f64) -> Self {
        ChainState { theta_in, theta_out }
    }

    /// Euclidean distance in angle space.
    pub fn distance(&self, other: &ChainState) -> f64 {
        (self.theta_in - other.theta_in).hypot(self.theta_out - other.theta_out)
    }
}

/// Linear displacement schedule for the outermost block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadProtocol {
    /// Starting displacement (mm).
    pub u_start: f64,
    /// Final displacement of the sweep (mm); may be below `u_start` for a
    /// descending sweep.
    pub u_end: f64,
    /// Grid spacing (mm), strictly positive.
    pub step: f64,
    /// Sweep back to `u_start` after reaching `u_end`.
    pub then_reverse: bool,
}

impl LoadProtocol {
    /// Full loading/unloading cycle `0 -> 2 u_max -> 0` with the default
    /// resolution of 200 steps per `u_max`.
    pub fn full_cycle(cfg: &ChainConfig) -> Self {
        let u_max = cfg.u_max();
        LoadProtocol {
            u_start: 0.0,
            u_end: 2.0 * u_max,
            step: u_max / 200.0,
            then_reverse: true,
        }
    }

    pub fn validate(&self, cfg: &ChainConfig) -> Result<(), ChainError> {
        if !self.step.is_finite() || self.step <= 0.0 {
            return Err(ChainError::InvalidProtocol {
                reason: format!("step must be > 0 mm, got {}", self.step),
            });
        }
        let span = cfg.u_span();
        let tol = 1e-9 * span.max(1.0);
        for u in [self.u_start, self.u_end] {
            if !(-tol..=span + tol).contains(&u) {
                return Err(ChainError::InvalidProtocol {
                    reason: format!("displacement {u} mm outside reachable span [0, {span} mm]"),
                });
            }
        }
        if self.u_start == self.u_end {
            return Err(ChainError::InvalidProtocol {
                reason: "u_start equals u_end".to_string(),
            });
        }
        Ok(())
    }

    /// The contiguous sweep segments this protocol performs.
    pub(crate) fn segments(&self) -> Vec<(f64, f64)> {
        if self.then_reverse {
            vec![(self.u_start, self.u_end), (self.u_end, self.u_start)]
        } else {
            vec![(self.u_start, self.u_end)]
        }
    }
}

/// Tolerances and iteration limits of the continuation solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    /// Gradient tolerance at a converged minimiser (J/rad).
    pub gtol: f64,
    /// Cap on descent refinement iterations.
    pub max_iters: usize,
    /// Angle-space jump between consecutive continuation states treated as a
    /// snap (rad).
    pub snap_threshold: f64,
    /// Bisection resolution when locating an instability in `u` (mm).
    pub snap_u_tol: f64,
    /// March resolution of the descent walk across the feasible interval.
    pub walk_steps: usize,
    /// Angle tolerance when quantising a unit onto its stop states (rad).
    pub eps_state: f64,
}

impl SolverParams {
    /// Defaults scaled to a chain's displacement span.
    pub fn for_chain(cfg: &ChainConfig) -> Self {
        let u_max = cfg.u_max();
        SolverParams {
            gtol: 1e-10,
            max_iters: 200,
            snap_threshold: 0.1,
            snap_u_tol: u_max / 1e4,
            walk_steps: 4096,
            eps_state: 1e-3,
        }
    }

    pub(crate) fn walk(&self) -> WalkParams {
        WalkParams {
            gtol: self.gtol,
            walk_steps: self.walk_steps,
            max_iters: self.max_iters,
        }
    }
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            gtol: 1e-10,
            max_iters: 200,
            snap_threshold: 0.1,
            snap_u_tol: 2e-3,
            walk_steps: 4096,
            eps_state: 1e-3,
        }
    }
}

/// Summed strain energy of both units (J).
pub fn total_energy(state: &ChainState, cfg: &ChainConfig) -> f64 {
    unit_energy(state.theta_in, &cfg.inner) + unit_energy(state.theta_out, &cfg.outer)
}

/// Displacement of the outermost block (mm), zero in the (00) state:
/// `u = r_in (sin t_in + sin tc_in) + r_out (sin t_out + sin tc_out)`.
pub fn displacement_of(state: &ChainState, cfg: &ChainConfig) -> f64 {
    cfg.inner.r * (state.theta_in.sin() + cfg.inner.theta_c.sin())
        + cfg.outer.r * (state.theta_out.sin() + cfg.outer.theta_c.sin())
}

/// Inner-angle interval on which the displacement constraint at `u` can be
/// satisfied with the outer angle inside its stops.
pub fn feasible_interval(u: f64, cfg: &ChainConfig) -> Result<(f64, f64), ChainError> {
    let span = cfg.u_span();
    let tol = 1e-9 * span.max(1.0);
    if !(-tol..=span + tol).contains(&u) || !u.is_finite() {
        return Err(ChainError::DisplacementOutOfRange { u, max: span });
    }
    let u = u.clamp(0.0, span);
    let s_in = cfg.inner.theta_c.sin();
    // Outer angle within its stops bounds the inner unit's share of u.
    let upper = (u / cfg.inner.r - s_in).min(s_in);
    let lower = ((u - cfg.outer.travel()) / cfg.inner.r - s_in).max(-s_in);
    let lo = lower.clamp(-1.0, 1.0).asin();
    let hi = upper.clamp(-1.0, 1.0).asin();
    Ok((lo.min(hi), hi.max(lo)))
}

/// Chain state with `theta_in = t` and the outer angle solved from the
/// constraint at `u` (principal arcsine branch, the physical one for
/// `theta_c < pi/2`).
pub(crate) fn state_at(t: f64, u: f64, cfg: &ChainConfig) -> ChainState {
    let s_out = (u - cfg.inner.r * (t.sin() + cfg.inner.theta_c.sin())) / cfg.outer.r
        - cfg.outer.theta_c.sin();
    ChainState {
        theta_in: t,
        theta_out: s_out.clamp(-1.0, 1.0).asin(),
    }
}

/// Energy along the constraint manifold, with an optional constant downward
/// load `grav` (N) on the outer unit.
pub(crate) fn manifold_energy(t: f64, u: f64, cfg: &ChainConfig, grav: f64) -> f64 {
    let s = state_at(t, u, cfg);
    let mut e = total_energy(&s, cfg);
    if grav != 0.0 {
        e += grav * cfg.outer.r * MM * (s.theta_out.sin() + cfg.outer.theta_c.sin());
    }
    e
}

/// d/d(theta_in) of [`manifold_energy`] at fixed `u`. Equals
/// `r_in cos(t) (F_in - F_out - grav)` in SI, which vanishes exactly at the
/// series force balance.
pub(crate) fn manifold_grad(t: f64, u: f64, cfg: &ChainConfig, grav: f64) -> f64 {
    let s = state_at(t, u, cfg);
    let f_in = unit_force_raw(s.theta_in, &cfg.inner);
    let f_out = unit_force_raw(s.theta_out, &cfg.outer) + grav;
    cfg.inner.r * MM * t.cos() * (f_in - f_out)
}

/// Quasi-static reaction force at a state where one unit is free to move
/// (used as a fallback where finite differences lack neighbours).
pub(crate) fn series_force(state: &ChainState, cfg: &ChainConfig, grav: f64) -> f64 {
    let face_tol = 1e-6;
    let inner_at_face = (state.theta_in.abs() - cfg.inner.theta_c).abs() < face_tol;
    let outer_at_face = (state.theta_out.abs() - cfg.outer.theta_c).abs() < face_tol;
    if inner_at_face && !outer_at_face {
        unit_force_raw(state.theta_out, &cfg.outer) + grav
    } else {
        unit_force_raw(state.theta_in, &cfg.inner)
    }
}

/// Continue the constrained local energy minimiser to displacement `u`,
/// seeded at the projection of `prev` onto the new feasible interval.
///
/// The converged point has a vanishing manifold gradient within
/// `solver.gtol`, or sits on an interval end with the one-sided derivative
/// pointing into the infeasible region.
pub fn minimize_at_u(
    u: f64,
    prev: &ChainState,
    cfg: &ChainConfig,
    solver: &SolverParams,
) -> Result<ChainState, ChainError> {
    let (lo, hi) = feasible_interval(u, cfg)?;
    let outcome = descend(
        |t| manifold_energy(t, u, cfg, 0.0),
        |t| manifold_grad(t, u, cfg, 0.0),
        |_| 0.0,
        prev.theta_in,
        lo,
        hi,
        &solver.walk(),
    );
    match outcome {
        WalkOutcome::Converged(t) => Ok(state_at(t, u, cfg)),
        WalkOutcome::IterationsExhausted(t) => Err(ChainError::NonConvergence {
            u,
            last_theta_in: t,
        }),
    }
}

/// Loading direction of a recorded path point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Load,
    Unload,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Load => write!(f, "load"),
            Phase::Unload => write!(f, "unload"),
        }
    }
}

/// One converged point of a swept path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    /// Imposed displacement (mm).
    pub u: f64,
    pub state: ChainState,
    /// Minimised energy at this point (J); effective energy for biased runs.
    pub energy: f64,
    /// Reaction force dE/du (N), finite-differenced along the path.
    pub force: f64,
    pub phase: Phase,
}

/// A discontinuous jump of the tracked minimiser.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapEvent {
    /// Displacement at which the originating branch vanished (mm).
    pub u: f64,
    pub state_before: ChainState,
    pub state_after: ChainState,
    /// Energy drop across the jump (J).
    pub energy_released: f64,
}

/// Stop-state label of one unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnitBit {
    Zero,
    One,
}

/// Quantised chain state `(alpha_in alpha_out)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiscreteState {
    pub alpha_in: UnitBit,
    pub alpha_out: UnitBit,
}

impl DiscreteState {
    pub const fn new(alpha_in: UnitBit, alpha_out: UnitBit) -> Self {
        DiscreteState { alpha_in, alpha_out }
    }

    /// States differing in exactly one unit.
    pub fn adjacent(&self, other: &DiscreteState) -> bool {
        (self.alpha_in != other.alpha_in) != (self.alpha_out != other.alpha_out)
    }
}

pub const S00: DiscreteState = DiscreteState::new(UnitBit::Zero, UnitBit::Zero);
pub const S01: DiscreteState = DiscreteState::new(UnitBit::Zero, UnitBit::One);
pub const S10: DiscreteState = DiscreteState::new(UnitBit::One, UnitBit::Zero);
pub const S11: DiscreteState = DiscreteState::new(UnitBit::One, UnitBit::One);

impl fmt::Display for DiscreteState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bit = |b: UnitBit| if b == UnitBit::One { '1' } else { '0' };
        write!(f, "{}{}", bit(self.alpha_in), bit(self.alpha_out))
    }
}

/// Quantisation outcome of one chain state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantization {
    State(DiscreteState),
    /// At least one unit is strictly between its stops.
    Transitioning,
}

fn quantize_unit(theta: f64, theta_c: f64, eps: f64) -> Option<UnitBit> {
    if theta <= -theta_c + eps {
        Some(UnitBit::Zero)
    } else if theta >= theta_c - eps {
        Some(UnitBit::One)
    } else {
        None
    }
}

/// Quantise a chain state onto the stop states with tolerance `eps` (rad).
pub fn discrete_state(state: &ChainState, cfg: &ChainConfig, eps: f64) -> Quantization {
    match (
        quantize_unit(state.theta_in, cfg.inner.theta_c, eps),
        quantize_unit(state.theta_out, cfg.outer.theta_c, eps),
    ) {
        (Some(alpha_in), Some(alpha_out)) => Quantization::State(DiscreteState { alpha_in, alpha_out }),
        _ => Quantization::Transitioning,
    }
}

/// Ordered distinct stop states visited along a path: transitioning samples
/// are skipped and consecutive repeats collapsed.
pub fn extract_sequence(points: &[PathPoint], cfg: &ChainConfig, eps: f64) -> Vec<DiscreteState> {
    let mut seq = Vec::new();
    for pt in points {
        if let Quantization::State(s) = discrete_state(&pt.state, cfg, eps) {
            if seq.last() != Some(&s) {
                seq.push(s);
            }
        }
    }
    seq
}

/// Result of sweeping a displacement protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub points: Vec<PathPoint>,
    pub snaps: Vec<SnapEvent>,
    pub sequence: Vec<DiscreteState>,
}

impl PathResult {
    /// Total energy released by snap events (J).
    pub fn dissipated_energy(&self) -> f64 {
        self.snaps.iter().map(|s| s.energy_released).sum()
    }

    /// Signed work integral of the recorded force over the path (J);
    /// for a closed cycle this is the area of the force-displacement loop.
    pub fn loop_area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| 0.5 * (w[0].force + w[1].force) * (w[1].u - w[0].u) * MM)
            .sum()
    }

    /// The visited sequence as a compact string, e.g. `"00,10,11,01,00"`.
    pub fn sequence_string(&self) -> String {
        let labels: Vec<String> = self.sequence.iter().map(|s| s.to_string()).collect();
        labels.join(",")
    }
}

/// Sweep a displacement protocol with warm-started continuation.
///
/// Snap events are located by bisection on `u` to within `snap_u_tol`; the
/// path continues from the minimiser reachable downhill of the destabilised
/// state at the same displacement. Reaction forces are central finite
/// differences of the minimised energy between snaps, one-sided at segment
/// ends.
pub fn run_protocol(
    cfg: &ChainConfig,
    protocol: &LoadProtocol,
    solver: &SolverParams,
) -> Result<PathResult, ChainError> {
    cfg.validate()?;
    protocol.validate(cfg)?;
    let initial = initial_state(protocol.u_start, cfg, solver)?;
    let stepper = |u: f64, prev: &ChainState| minimize_at_u(u, prev, cfg, solver);
    let energy = |s: &ChainState| total_energy(s, cfg);
    let force = |s: &ChainState| series_force(s, cfg, 0.0);
    run_segments(cfg, &protocol.segments(), protocol.step, solver, initial, &stepper, &energy, &force)
}

/// Starting state for a sweep: the stacked state-0 configuration at `u = 0`,
/// otherwise the minimiser continued from the state-0 side.
pub(crate) fn initial_state(
    u_start: f64,
    cfg: &ChainConfig,
    solver: &SolverParams,
) -> Result<ChainState, ChainError> {
    let rest = ChainState::new(-cfg.inner.theta_c, -cfg.outer.theta_c);
    if u_start.abs() < 1e-12 {
        return Ok(rest);
    }
    minimize_at_u(u_start, &rest, cfg, solver)
}

/// Generic protocol driver shared with the biased (robot-side) stepper.
#[allow(clippy::too_many_arguments)]
pub(crate) fn run_segments(
    cfg: &ChainConfig,
    segments: &[(f64, f64)],
    step: f64,
    solver: &SolverParams,
    initial: ChainState,
    stepper: &dyn Fn(f64, &ChainState) -> Result<ChainState, ChainError>,
    energy: &dyn Fn(&ChainState) -> f64,
    fallback_force: &dyn Fn(&ChainState) -> f64,
) -> Result<PathResult, ChainError> {
    // (point, segment id); forces are differenced within one segment only.
    let mut raw: Vec<(PathPoint, usize)> = Vec::new();
    let mut snaps: Vec<SnapEvent> = Vec::new();
    let mut seg = 0usize;
    let mut state = initial;

    let first_phase = phase_of(segments[0]);
    raw.push((
        PathPoint {
            u: segments[0].0,
            state,
            energy: energy(&state),
            force: 0.0,
            phase: first_phase,
        },
        seg,
    ));

    let mut prev_phase = first_phase;
    for (idx, &(a, b)) in segments.iter().enumerate() {
        let phase = phase_of((a, b));
        if idx > 0 && phase != prev_phase {
            // Direction reversal: break the differencing segment and re-emit
            // the turnaround point so both sides difference over full stencils.
            seg += 1;
            raw.push((
                PathPoint {
                    u: a,
                    state,
                    energy: energy(&state),
                    force: 0.0,
                    phase,
                },
                seg,
            ));
        }
        prev_phase = phase;
        let dir = if b > a { 1.0 } else { -1.0 };
        let n_steps = (((b - a).abs() / step) - 1e-9).ceil().max(1.0) as usize;
        let mut u_prev = a;
        let mut k = 1usize;
        while k <= n_steps {
            let u_target = if k == n_steps { b } else { a + dir * (k as f64) * step };
            let next = stepper(u_target, &state)?;
            if next.distance(&state) <= solver.snap_threshold {
                raw.push((
                    PathPoint {
                        u: u_target,
                        state: next,
                        energy: energy(&next),
                        force: 0.0,
                        phase,
                    },
                    seg,
                ));
                state = next;
                u_prev = u_target;
                k += 1;
                continue;
            }

            // Instability inside (u_prev, u_target]: bisect for the branch end.
            let mut ua = u_prev;
            let mut sa = state;
            let mut ub = u_target;
            let mut sb = next;
            while (ub - ua).abs() > solver.snap_u_tol {
                let um = 0.5 * (ua + ub);
                let sm = stepper(um, &sa)?;
                if sm.distance(&sa) > solver.snap_threshold {
                    ub = um;
                    sb = sm;
                } else {
                    ua = um;
                    sa = sm;
                }
            }
            if (ua - u_prev).abs() > 1e-15 {
                raw.push((
                    PathPoint {
                        u: ua,
                        state: sa,
                        energy: energy(&sa),
                        force: 0.0,
                        phase,
                    },
                    seg,
                ));
            }
            let e_before = energy(&sa);
            let e_after = energy(&sb);
            snaps.push(SnapEvent {
                u: ub,
                state_before: sa,
                state_after: sb,
                energy_released: e_before - e_after,
            });
            seg += 1;
            raw.push((
                PathPoint {
                    u: ub,
                    state: sb,
                    energy: e_after,
                    force: 0.0,
                    phase,
                },
                seg,
            ));
            state = sb;
            u_prev = ub;
            if (u_target - ub).abs() < 1e-12 {
                k += 1;
            }
        }
    }

    fill_forces(&mut raw, fallback_force);
    let points: Vec<PathPoint> = raw.into_iter().map(|(p, _)| p).collect();
    let sequence = extract_sequence(&points, cfg, solver.eps_state);
    Ok(PathResult { points, snaps, sequence })
}

fn phase_of((a, b): (f64, f64)) -> Phase {
    if b >= a {
        Phase::Load
    } else {
        Phase::Unload
    }
}

/// Reaction force as dE/du finite differences within each smooth segment.
fn fill_forces(raw: &mut [(PathPoint, usize)], fallback_force: &dyn Fn(&ChainState) -> f64) {
    let n = raw.len();
    let mut i = 0;
    while i < n {
        let seg = raw[i].1;
        let mut j = i;
        while j + 1 < n && raw[j + 1].1 == seg {
            j += 1;
        }
        let len = j - i + 1;
        if len == 1 {
            raw[i].0.force = fallback_force(&raw[i].0.state);
        } else {
            for idx in i..=j {
                let (lo, hi) = if idx == i {
                    (idx, idx + 1)
                } else if idx == j {
                    (idx - 1, idx)
                } else {
                    (idx - 1, idx + 1)
                };
                let du = (raw[hi].0.u - raw[lo].0.u) * MM;
                raw[idx].0.force = if du.abs() < 1e-18 {
                    fallback_force(&raw[idx].0.state)
                } else {
                    (raw[hi].0.energy - raw[lo].0.energy) / du
                };
            }
        }
        i = j + 1;
    }
}
