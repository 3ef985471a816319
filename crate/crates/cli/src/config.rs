//! JSON configuration schemas and their conversion to simulation types.
//!
//! Unknown keys are rejected. Geometry is in millimetres, angles in radians,
//! stiffness in N/m; both units of a chain share `k`, `l0`, `r` and `theta_c`.

use serde::{Deserialize, Serialize};

use seqlab_core::chain::{ChainConfig, LoadProtocol, SolverParams};
use seqlab_core::robot::{
    AntennaConfig, BiasParams, Environment, LegAssembly, Pose, RobotConfig, Side,
};
use seqlab_core::unit::{UnitConfig, Vec2Mm};

use crate::CliError;

fn parse_json<'a, T: Deserialize<'a>>(bytes: &'a [u8], what: &str) -> Result<T, CliError> {
    serde_json::from_slice(bytes).map_err(|e| CliError::Input(format!("malformed {what}: {e}")))
}

fn validated_unit(u: UnitConfig) -> Result<UnitConfig, CliError> {
    u.validate().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(u)
}

// ---- unit command ----------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsFile {
    pub units: Vec<NamedUnit>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedUnit {
    pub name: String,
    pub r: f64,
    pub theta_c: f64,
    pub k: f64,
    pub l0: f64,
    pub p: Vec2Mm,
    pub q: Vec2Mm,
}

impl NamedUnit {
    pub fn to_config(&self) -> UnitConfig {
        UnitConfig {
            r: self.r,
            theta_c: self.theta_c,
            k: self.k,
            l0: self.l0,
            p: self.p,
            q: self.q,
        }
    }
}

pub fn parse_units(bytes: &[u8]) -> Result<Vec<(String, UnitConfig)>, CliError> {
    let file: UnitsFile = parse_json(bytes, "unit config")?;
    if file.units.is_empty() {
        return Err(CliError::Input("unit config lists no units".to_string()));
    }
    let mut out = Vec::with_capacity(file.units.len());
    for u in &file.units {
        if u.name.is_empty() || !u.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_".contains(c)) {
            return Err(CliError::Input(format!(
                "unit name '{}' must be non-empty and filename-safe",
                u.name
            )));
        }
        if out.iter().any(|(n, _)| n == &u.name) {
            return Err(CliError::Input(format!("duplicate unit name '{}'", u.name)));
        }
        out.push((u.name.clone(), validated_unit(u.to_config())?));
    }
    Ok(out)
}

// ---- chain / phase ---------------------------------------------------------

/// Chain geometry with shared spring and lever parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatChain {
    pub p_in: Vec2Mm,
    pub q_in: Vec2Mm,
    pub p_out: Vec2Mm,
    pub q_out: Vec2Mm,
    pub k: f64,
    pub l0: f64,
    pub r: f64,
    pub theta_c: f64,
}

impl FlatChain {
    pub fn to_config(&self) -> Result<ChainConfig, CliError> {
        let unit = |p: Vec2Mm, q: Vec2Mm| UnitConfig {
            r: self.r,
            theta_c: self.theta_c,
            k: self.k,
            l0: self.l0,
            p,
            q,
        };
        Ok(ChainConfig {
            inner: validated_unit(unit(self.p_in, self.q_in))?,
            outer: validated_unit(unit(self.p_out, self.q_out))?,
        })
    }

    pub fn from_config(cfg: &ChainConfig) -> Self {
        FlatChain {
            p_in: cfg.inner.p,
            q_in: cfg.inner.q,
            p_out: cfg.outer.p,
            q_out: cfg.outer.q,
            k: cfg.inner.k,
            l0: cfg.inner.l0,
            r: cfg.inner.r,
            theta_c: cfg.inner.theta_c,
        }
    }
}

/// Optional overrides of the full-cycle protocol.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSpec {
    pub u_start: Option<f64>,
    pub u_end: Option<f64>,
    pub step: Option<f64>,
    pub then_reverse: Option<bool>,
}

/// Optional overrides of the scaled solver defaults.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub gtol: Option<f64>,
    pub max_iters: Option<usize>,
    pub snap_threshold: Option<f64>,
    pub snap_u_tol: Option<f64>,
    pub walk_steps: Option<usize>,
    pub eps_state: Option<f64>,
}

impl SolverSpec {
    pub fn apply(&self, mut solver: SolverParams) -> SolverParams {
        if let Some(v) = self.gtol {
            solver.gtol = v;
        }
        if let Some(v) = self.max_iters {
            solver.max_iters = v;
        }
        if let Some(v) = self.snap_threshold {
            solver.snap_threshold = v;
        }
        if let Some(v) = self.snap_u_tol {
            solver.snap_u_tol = v;
        }
        if let Some(v) = self.walk_steps {
            solver.walk_steps = v;
        }
        if let Some(v) = self.eps_state {
            solver.eps_state = v;
        }
        solver
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainFile {
    pub chain: FlatChain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<ProtocolSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSpec>,
}

pub fn parse_chain(bytes: &[u8]) -> Result<(ChainConfig, LoadProtocol, SolverParams), CliError> {
    let file: ChainFile = parse_json(bytes, "chain config")?;
    let cfg = file.chain.to_config()?;
    let mut protocol = LoadProtocol::full_cycle(&cfg);
    if let Some(p) = &file.protocol {
        if let Some(v) = p.u_start {
            protocol.u_start = v;
        }
        if let Some(v) = p.u_end {
            protocol.u_end = v;
        }
        if let Some(v) = p.step {
            protocol.step = v;
        }
        if let Some(v) = p.then_reverse {
            protocol.then_reverse = v;
        }
    }
    let solver = file
        .solver
        .as_ref()
        .map(|s| s.apply(SolverParams::for_chain(&cfg)))
        .unwrap_or_else(|| SolverParams::for_chain(&cfg));
    Ok((cfg, protocol, solver))
}

// ---- gait / navigate -------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegSpec {
    pub chain: FlatChain,
    pub bias: BiasParams,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegsSpec {
    pub left: LegSpec,
    pub right: LegSpec,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSpec {
    pub legs: LegsSpec,
    /// Track width (mm).
    pub w: f64,
    /// Actuation half-amplitude (mm).
    pub u_max: f64,
    /// Foot-contact threshold (rad).
    pub eps_contact: f64,
}

impl RobotSpec {
    pub fn to_config(&self) -> Result<RobotConfig, CliError> {
        let robot = RobotConfig {
            left: LegAssembly {
                side: Side::Left,
                chain: self.legs.left.chain.to_config()?,
                bias: self.legs.left.bias,
            },
            right: LegAssembly {
                side: Side::Right,
                chain: self.legs.right.chain.to_config()?,
                bias: self.legs.right.bias,
            },
            track_width: self.w,
            u_max: self.u_max,
            eps_contact: self.eps_contact,
        };
        robot.validate().map_err(|e| CliError::Input(e.to_string()))?;
        Ok(robot)
    }

    pub fn from_config(cfg: &RobotConfig) -> Self {
        RobotSpec {
            legs: LegsSpec {
                left: LegSpec {
                    chain: FlatChain::from_config(&cfg.left.chain),
                    bias: cfg.left.bias,
                },
                right: LegSpec {
                    chain: FlatChain::from_config(&cfg.right.chain),
                    bias: cfg.right.bias,
                },
            },
            w: cfg.track_width,
            u_max: cfg.u_max,
            eps_contact: cfg.eps_contact,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub cycles: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotFile {
    pub robot: RobotSpec,
    pub run: RunSection,
}

pub fn parse_robot(bytes: &[u8]) -> Result<(RobotConfig, f64), CliError> {
    let file: RobotFile = parse_json(bytes, "robot config")?;
    Ok((file.robot.to_config()?, file.run.cycles))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub robot: RobotSpec,
    pub antennas: AntennaConfig,
    pub environment: Environment,
    pub run: ScenarioRun,
    pub start: Pose,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioRun {
    pub cycles: usize,
}

pub struct Scenario {
    pub robot: RobotConfig,
    pub antennas: AntennaConfig,
    pub environment: Environment,
    pub start: Pose,
    pub max_cycles: usize,
}

pub fn parse_scenario(bytes: &[u8]) -> Result<Scenario, CliError> {
    let file: ScenarioFile = parse_json(bytes, "scenario")?;
    let robot = file.robot.to_config()?;
    file.antennas
        .validate()
        .map_err(|e| CliError::Input(e.to_string()))?;
    file.environment
        .validate()
        .map_err(|e| CliError::Input(e.to_string()))?;
    Ok(Scenario {
        robot,
        antennas: file.antennas,
        environment: file.environment,
        start: file.start,
        max_cycles: file.run.cycles,
    })
}
