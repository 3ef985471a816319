//! Planar kinematic model of the three-legged walker.
//!
//! Each side of the robot carries a two-unit chain driven through a common
//! displacement cycle. The outer unit works a V-shaped leg, abstracted here to
//! a binary contact: the foot is grounded until the outer unit has rotated
//! `eps_contact` past state 0, lifted beyond. Moving the inner unit while the
//! foot is grounded propels the body; while lifted it repositions the leg.
//! Mounting the chain on the robot biases its energy landscape: gravity loads
//! the outer unit and ground friction gates inner-unit motion, which shifts
//! the transition map relative to the standalone chain.

mod antenna;

pub use antenna::{
    antenna_pin, navigate, AntennaConfig, AntennaReading, Coupling, Environment, NavigationResult,
    Obstacle, Rect, Termination,
};

use serde::{Deserialize, Serialize};

use crate::chain::{
    feasible_interval, manifold_energy, manifold_grad, run_segments, series_force, state_at,
    total_energy, ChainConfig, ChainState, PathResult, SolverParams,
};
use crate::error::ChainError;
use crate::solve::{descend, WalkOutcome};
use crate::unit::Vec2Mm;
use crate::MM;

/// External loads a mounted leg adds to the chain's energy landscape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasParams {
    /// Friction opposing inner-unit motion while the foot is grounded (N).
    pub f_fric: f64,
    /// Constant downward load on the outer unit (N).
    pub f_grav: f64,
}

impl BiasParams {
    pub const ZERO: BiasParams = BiasParams {
        f_fric: 0.0,
        f_grav: 0.0,
    };

    pub fn validate(&self) -> Result<(), ChainError> {
        if self.f_fric < 0.0 || self.f_grav < 0.0 || !self.f_fric.is_finite() || !self.f_grav.is_finite() {
            return Err(ChainError::InvalidProtocol {
                reason: format!("bias forces must be >= 0 N, got ({}, {})", self.f_fric, self.f_grav),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// One leg: a chain plus the loads of being mounted on that side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegAssembly {
    pub side: Side,
    pub chain: ChainConfig,
    pub bias: BiasParams,
}

/// The full robot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotConfig {
    pub left: LegAssembly,
    pub right: LegAssembly,
    /// Lateral separation of the two legs' lines of action (mm).
    pub track_width: f64,
    /// Half-amplitude of the actuator cycle (mm); the cycle sweeps
    /// `0 -> 2 u_max -> 0`.
    pub u_max: f64,
    /// Outer-unit rotation past state 0 at which the foot lifts (rad).
    pub eps_contact: f64,
}

impl RobotConfig {
    pub fn validate(&self) -> Result<(), ChainError> {
        for leg in [&self.left, &self.right] {
            leg.chain.validate()?;
            leg.bias.validate()?;
        }
        if !self.track_width.is_finite() || self.track_width <= 0.0 {
            return Err(ChainError::InvalidProtocol {
                reason: format!("track_width must be > 0 mm, got {}", self.track_width),
            });
        }
        if !self.eps_contact.is_finite() || self.eps_contact < 0.0 {
            return Err(ChainError::InvalidProtocol {
                reason: format!("eps_contact must be >= 0 rad, got {}", self.eps_contact),
            });
        }
        for leg in [&self.left, &self.right] {
            let span = leg.chain.u_span();
            if !(self.u_max > 0.0 && 2.0 * self.u_max <= span * (1.0 + 1e-9)) {
                return Err(ChainError::InvalidProtocol {
                    reason: format!(
                        "u_max {} mm incompatible with a chain span of {} mm",
                        self.u_max, span
                    ),
                });
            }
        }
        Ok(())
    }

    /// Solver defaults scaled to this robot's chains.
    pub fn solver(&self) -> SolverParams {
        SolverParams::for_chain(&self.left.chain)
    }
}

/// Planar pose; heading counterclockwise from +x (rad).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub const fn origin() -> Self {
        Pose {
            x: 0.0,
            y: 0.0,
            heading: 0.0,
        }
    }

    /// Apply one cycle's displacement and rotation with a midpoint scheme:
    /// half the translation before the turn, half after.
    pub fn advance(&self, d: f64, dphi: f64) -> Pose {
        let mut x = self.x + 0.5 * d * self.heading.cos();
        let mut y = self.y + 0.5 * d * self.heading.sin();
        let heading = self.heading + dphi;
        x += 0.5 * d * heading.cos();
        y += 0.5 * d * heading.sin();
        Pose { x, y, heading }
    }
}

/// True while the foot still touches the ground: the outer unit has rotated
/// less than `eps_contact` past state 0.
pub fn foot_grounded(state: &ChainState, cfg: &ChainConfig, eps_contact: f64) -> bool {
    state.theta_out <= -cfg.outer.theta_c + eps_contact
}

/// Chain energy plus the gravity potential of the outer unit (J). Friction is
/// non-conservative and enters the continuation step instead, so the
/// `grounded` flag does not change the stored energy.
pub fn effective_energy(state: &ChainState, leg: &LegAssembly, _grounded: bool) -> f64 {
    total_energy(state, &leg.chain)
        + leg.bias.f_grav
            * leg.chain.outer.r
            * MM
            * (state.theta_out.sin() + leg.chain.outer.theta_c.sin())
}

/// One continuation step of the minimum-energy path under gravity-augmented
/// energy and friction gating.
///
/// While grounded, the inner angle advances only where the manifold gradient
/// exceeds the friction torque `f_fric * r * cos(theta_in)`; otherwise the
/// inner unit holds its position and the outer unit absorbs the displacement
/// increment. Constraint-forced drag (the outer unit saturated) always
/// proceeds: the prescribed displacement dominates friction. With zero bias
/// this is exactly the unbiased continuation step.
pub fn biased_step(
    u: f64,
    prev: &ChainState,
    leg: &LegAssembly,
    grounded: bool,
    solver: &SolverParams,
) -> Result<ChainState, ChainError> {
    let cfg = &leg.chain;
    let (lo, hi) = feasible_interval(u, cfg)?;
    let grav = leg.bias.f_grav;
    let f_fric = if grounded { leg.bias.f_fric } else { 0.0 };
    let tau = move |t: f64| f_fric * cfg.inner.r * MM * t.cos();
    let outcome = descend(
        |t| manifold_energy(t, u, cfg, grav),
        |t| manifold_grad(t, u, cfg, grav),
        tau,
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

/// Quarter-cycle breakpoints of the actuator schedule.
fn leg_segments(u_max: f64, quarters: u32) -> Vec<(f64, f64)> {
    let pts = [0.0, u_max, 2.0 * u_max, u_max, 0.0];
    (0..quarters as usize).map(|i| (pts[i], pts[i + 1])).collect()
}

/// Sweep one leg through `quarters` quarter-cycles (4 = one full cycle),
/// starting from the stacked state-0 configuration.
pub fn run_leg(
    leg: &LegAssembly,
    u_max: f64,
    eps_contact: f64,
    quarters: u32,
    solver: &SolverParams,
) -> Result<PathResult, ChainError> {
    if !(1..=4).contains(&quarters) {
        return Err(ChainError::InvalidProtocol {
            reason: format!("quarters per cycle must be 1..=4, got {quarters}"),
        });
    }
    let cfg = &leg.chain;
    cfg.validate()?;
    let segments = leg_segments(u_max, quarters);
    let step = u_max / 200.0;
    let initial = ChainState::new(-cfg.inner.theta_c, -cfg.outer.theta_c);
    let stepper = |u: f64, prev: &ChainState| {
        let grounded = foot_grounded(prev, cfg, eps_contact);
        biased_step(u, prev, leg, grounded, solver)
    };
    let energy = |s: &ChainState| effective_energy(s, leg, false);
    let force = |s: &ChainState| series_force(s, cfg, leg.bias.f_grav);
    run_segments(cfg, &segments, step, solver, initial, &stepper, &energy, &force)
}

/// Net body displacement contributed by one leg over a swept path (mm):
/// the inner unit's vertical stroke accumulated while the foot is grounded.
pub fn leg_stroke(path: &PathResult, leg: &LegAssembly, eps_contact: f64) -> f64 {
    let cfg = &leg.chain;
    path.points
        .windows(2)
        .map(|w| {
            if foot_grounded(&w[0].state, cfg, eps_contact)
                && foot_grounded(&w[1].state, cfg, eps_contact)
            {
                cfg.inner.r * (w[1].state.theta_in.sin() - w[0].state.theta_in.sin())
            } else {
                0.0
            }
        })
        .sum()
}

/// Inner-anchor positions imposed per side (by the antenna linkage).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinOverrides {
    pub left: Vec2Mm,
    pub right: Vec2Mm,
}

/// Result of driving both legs through (part of) one actuator cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleOutcome {
    /// Body displacement along the heading (mm).
    pub d: f64,
    /// Heading change (rad, counterclockwise positive).
    pub dphi: f64,
    pub left: PathResult,
    pub right: PathResult,
}

/// Drive both legs through one full actuator cycle with the current (or
/// overridden) inner anchors and reduce the strokes differentially:
/// `d = (s_L + s_R) / 2`, `dphi = (s_R - s_L) / track_width`.
pub fn robot_cycle(cfg: &RobotConfig, overrides: Option<&PinOverrides>) -> Result<CycleOutcome, ChainError> {
    robot_cycle_quarters(cfg, overrides, 4)
}

/// As [`robot_cycle`], stopping after `quarters` quarter-cycles.
pub fn robot_cycle_quarters(
    cfg: &RobotConfig,
    overrides: Option<&PinOverrides>,
    quarters: u32,
) -> Result<CycleOutcome, ChainError> {
    let mut left = cfg.left.clone();
    let mut right = cfg.right.clone();
    if let Some(o) = overrides {
        left.chain.inner.p = o.left;
        right.chain.inner.p = o.right;
    }
    let solver_l = SolverParams::for_chain(&left.chain);
    let solver_r = SolverParams::for_chain(&right.chain);
    let lp = run_leg(&left, cfg.u_max, cfg.eps_contact, quarters, &solver_l)?;
    let rp = run_leg(&right, cfg.u_max, cfg.eps_contact, quarters, &solver_r)?;
    let s_l = leg_stroke(&lp, &left, cfg.eps_contact);
    let s_r = leg_stroke(&rp, &right, cfg.eps_contact);
    Ok(CycleOutcome {
        d: 0.5 * (s_l + s_r),
        dphi: (s_r - s_l) / cfg.track_width,
        left: lp,
        right: rp,
    })
}

/// Cycle count in quarter-cycle resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCount {
    quarters: u32,
}

impl CycleCount {
    pub fn from_quarters(quarters: u32) -> Result<Self, ChainError> {
        if quarters == 0 {
            return Err(ChainError::InvalidProtocol {
                reason: "cycle count must be at least one quarter-cycle".to_string(),
            });
        }
        Ok(CycleCount { quarters })
    }

    /// Parse a cycle count like `7.75`; must be a positive multiple of 0.25.
    pub fn from_cycles(cycles: f64) -> Result<Self, ChainError> {
        let quarters = cycles * 4.0;
        if !quarters.is_finite()
            || quarters <= 0.0
            || (quarters - quarters.round()).abs() > 1e-9
            || quarters > u32::MAX as f64
        {
            return Err(ChainError::InvalidProtocol {
                reason: format!("cycles must be a positive multiple of 0.25, got {cycles}"),
            });
        }
        CycleCount::from_quarters(quarters.round() as u32)
    }

    pub fn quarters(&self) -> u32 {
        self.quarters
    }

    pub fn as_cycles(&self) -> f64 {
        self.quarters as f64 / 4.0
    }
}

/// Per-cycle record of a gait or navigation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub cycle: usize,
    /// Pose after this cycle.
    pub pose: Pose,
    /// Body displacement this cycle (mm).
    pub d: f64,
    /// Heading change this cycle (rad, counterclockwise positive).
    pub dphi: f64,
    pub left_sequence: Vec<crate::chain::DiscreteState>,
    pub right_sequence: Vec<crate::chain::DiscreteState>,
    pub contact_left: bool,
    pub contact_right: bool,
}

/// Pose history over a number of actuator cycles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub cycles: Vec<CycleRecord>,
    pub final_pose: Pose,
    pub final_left_state: ChainState,
    pub final_right_state: ChainState,
}

/// Integrate the robot's pose over `cycles` actuator cycles starting at the
/// origin (no environment; anchors as configured).
pub fn simulate_gait(cfg: &RobotConfig, cycles: CycleCount) -> Result<Trajectory, ChainError> {
    simulate_gait_from(cfg, Pose::origin(), cycles)
}

/// As [`simulate_gait`] from an arbitrary start pose.
pub fn simulate_gait_from(
    cfg: &RobotConfig,
    start: Pose,
    cycles: CycleCount,
) -> Result<Trajectory, ChainError> {
    cfg.validate()?;
    let mut pose = start;
    let mut records = Vec::new();
    let mut final_left = ChainState::new(-cfg.left.chain.inner.theta_c, -cfg.left.chain.outer.theta_c);
    let mut final_right = ChainState::new(-cfg.right.chain.inner.theta_c, -cfg.right.chain.outer.theta_c);

    let full = cycles.quarters() / 4;
    let rem = cycles.quarters() % 4;
    let total = full as usize + usize::from(rem > 0);
    for cycle in 0..total {
        let quarters = if cycle < full as usize { 4 } else { rem };
        let out = robot_cycle_quarters(cfg, None, quarters)?;
        pose = pose.advance(out.d, out.dphi);
        final_left = out.left.points.last().expect("paths are never empty").state;
        final_right = out.right.points.last().expect("paths are never empty").state;
        records.push(CycleRecord {
            cycle,
            pose,
            d: out.d,
            dphi: out.dphi,
            left_sequence: out.left.sequence.clone(),
            right_sequence: out.right.sequence.clone(),
            contact_left: false,
            contact_right: false,
        });
    }
    Ok(Trajectory {
        cycles: records,
        final_pose: pose,
        final_left_state: final_left,
        final_right_state: final_right,
    })
}

/// Result of a friction calibration run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub f_fric: f64,
    pub f_grav: f64,
    /// Outer anchor x (mm) at which the mounted chain sits on the
    /// forward-sequence boundary with the calibrated friction.
    pub boundary_qx: f64,
    pub iterations: usize,
}

/// Bisect the friction magnitude that puts the forward-sequence boundary of a
/// mounted standard chain at `q_out = [boundary_qx, 0]` for the given gravity
/// load. Increasing friction raises the inner unit's yield threshold, so the
/// forward sequence survives at low friction and dies at high friction.
pub fn calibrate_friction(
    f_grav: f64,
    boundary_qx: f64,
    f_lo: f64,
    f_hi: f64,
    tol: f64,
) -> Result<Calibration, ChainError> {
    let forward_at = |f_fric: f64| -> Result<bool, ChainError> {
        let leg = LegAssembly {
            side: Side::Left,
            chain: crate::presets::standard_chain(Vec2Mm::new(boundary_qx, 0.0)),
            bias: BiasParams { f_fric, f_grav },
        };
        let solver = SolverParams::for_chain(&leg.chain);
        let path = run_leg(&leg, leg.chain.u_max(), crate::presets::EPS_CONTACT, 4, &solver)?;
        Ok(crate::sequence::classify_sequence(&path.sequence)
            == crate::sequence::SequenceClass::DirectedThrough10First)
    };
    if !forward_at(f_lo)? {
        return Err(ChainError::InvalidProtocol {
            reason: format!("not forward at f_fric = {f_lo}; lower the bracket"),
        });
    }
    if forward_at(f_hi)? {
        return Err(ChainError::InvalidProtocol {
            reason: format!("still forward at f_fric = {f_hi}; raise the bracket"),
        });
    }
    let (mut lo, mut hi) = (f_lo, f_hi);
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        iterations += 1;
        if forward_at(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Calibration {
        f_fric: 0.5 * (lo + hi),
        f_grav,
        boundary_qx,
        iterations,
    })
}
