//! Argument parsing and the validated run specification.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use seqlab_core::chain::{ChainConfig, LoadProtocol, SolverParams};
use seqlab_core::robot::{AntennaConfig, CycleCount, Environment, Pose, RobotConfig};
use seqlab_core::sequence::AxisSpec;
use seqlab_core::unit::UnitConfig;

use crate::config;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "seqlab", version, about = "Simulation toolkit for serially coupled bistable unit cells and the walking mechanisms built from them")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-cell response curves and the stability table.
    Unit {
        /// JSON file with the unit-cell configurations.
        #[arg(long)]
        config: PathBuf,
        /// Number of angle samples per curve.
        #[arg(long, default_value_t = 201)]
        samples: usize,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Loading/unloading path of a two-cell chain.
    Chain {
        #[arg(long)]
        config: PathBuf,
        /// Override the displacement step (mm).
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep the outer anchor over a grid and classify every cell.
    Phase {
        /// Chain JSON file providing everything but the swept anchor.
        #[arg(long)]
        base: PathBuf,
        /// Grid axis as start:stop:count, e.g. 0:20:41.
        #[arg(long)]
        qx: String,
        #[arg(long)]
        qy: String,
        /// Classify by the boundary-force rule.
        #[arg(long)]
        rule: bool,
        /// Classify by path-following simulation.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Walk the robot in the open and record its pose history.
    Gait {
        #[arg(long)]
        config: PathBuf,
        /// Override the cycle count (multiple of 0.25).
        #[arg(long)]
        cycles: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Navigate an obstacle environment with antenna reprogramming.
    Navigate {
        #[arg(long)]
        scenario: PathBuf,
        /// Override the cycle budget.
        #[arg(long = "max-cycles")]
        max_cycles: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// A fully validated invocation, defaults applied.
#[derive(Debug)]
pub enum RunSpec {
    Unit {
        units: Vec<(String, UnitConfig)>,
        samples: usize,
        out: PathBuf,
        config_bytes: Vec<u8>,
    },
    Chain {
        cfg: ChainConfig,
        protocol: LoadProtocol,
        solver: SolverParams,
        out: PathBuf,
        config_bytes: Vec<u8>,
    },
    Phase {
        base: ChainConfig,
        qx: AxisSpec,
        qy: AxisSpec,
        rule: bool,
        oracle: bool,
        solver: SolverParams,
        out: PathBuf,
        config_bytes: Vec<u8>,
    },
    Gait {
        robot: RobotConfig,
        cycles: CycleCount,
        out: PathBuf,
        config_bytes: Vec<u8>,
    },
    Navigate {
        robot: RobotConfig,
        antennas: AntennaConfig,
        environment: Environment,
        start: Pose,
        max_cycles: usize,
        out: PathBuf,
        config_bytes: Vec<u8>,
    },
}

impl RunSpec {
    pub fn command_name(&self) -> &'static str {
        match self {
            RunSpec::Unit { .. } => "unit",
            RunSpec::Chain { .. } => "chain",
            RunSpec::Phase { .. } => "phase",
            RunSpec::Gait { .. } => "gait",
            RunSpec::Navigate { .. } => "navigate",
        }
    }

    pub fn out_dir(&self) -> &Path {
        match self {
            RunSpec::Unit { out, .. }
            | RunSpec::Chain { out, .. }
            | RunSpec::Phase { out, .. }
            | RunSpec::Gait { out, .. }
            | RunSpec::Navigate { out, .. } => out,
        }
    }

    pub fn config_bytes(&self) -> &[u8] {
        match self {
            RunSpec::Unit { config_bytes, .. }
            | RunSpec::Chain { config_bytes, .. }
            | RunSpec::Phase { config_bytes, .. }
            | RunSpec::Gait { config_bytes, .. }
            | RunSpec::Navigate { config_bytes, .. } => config_bytes,
        }
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

/// Parse `start:stop:count` into an axis.
pub fn parse_axis(s: &str) -> Result<AxisSpec, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || CliError::Input(format!("axis '{s}' must be start:stop:count, e.g. 0:20:41"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].parse().map_err(|_| bad())?;
    let count: usize = parts[2].parse().map_err(|_| bad())?;
    if count == 0 || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(bad());
    }
    Ok(AxisSpec::new(start, stop, count))
}

/// Validate the invocation and load the referenced files.
pub fn parse_run_spec(cli: Cli) -> Result<RunSpec, CliError> {
    match cli.command {
        Command::Unit { config, samples, out } => {
            if samples < 2 {
                return Err(CliError::Input(format!("samples must be at least 2, got {samples}")));
            }
            let bytes = read_bytes(&config)?;
            let units = config::parse_units(&bytes)?;
            Ok(RunSpec::Unit {
                units,
                samples,
                out,
                config_bytes: bytes,
            })
        }
        Command::Chain { config, step, out } => {
            let bytes = read_bytes(&config)?;
            let (cfg, mut protocol, solver) = config::parse_chain(&bytes)?;
            if let Some(step) = step {
                if !step.is_finite() || step <= 0.0 {
                    return Err(CliError::Input(format!("step must be > 0 mm, got {step}")));
                }
                protocol.step = step;
            }
            protocol.validate(&cfg).map_err(|e| CliError::Input(e.to_string()))?;
            Ok(RunSpec::Chain {
                cfg,
                protocol,
                solver,
                out,
                config_bytes: bytes,
            })
        }
        Command::Phase {
            base,
            qx,
            qy,
            rule,
            oracle,
            out,
        } => {
            if !rule && !oracle {
                return Err(CliError::Input(
                    "phase needs at least one of --rule and --oracle".to_string(),
                ));
            }
            let bytes = read_bytes(&base)?;
            let (cfg, _, solver) = config::parse_chain(&bytes)?;
            Ok(RunSpec::Phase {
                base: cfg,
                qx: parse_axis(&qx)?,
                qy: parse_axis(&qy)?,
                rule,
                oracle,
                solver,
                out,
                config_bytes: bytes,
            })
        }
        Command::Gait { config, cycles, out } => {
            let bytes = read_bytes(&config)?;
            let (robot, file_cycles) = config::parse_robot(&bytes)?;
            let cycles = CycleCount::from_cycles(cycles.unwrap_or(file_cycles))
                .map_err(|e| CliError::Input(e.to_string()))?;
            Ok(RunSpec::Gait {
                robot,
                cycles,
                out,
                config_bytes: bytes,
            })
        }
        Command::Navigate {
            scenario,
            max_cycles,
            out,
        } => {
            let bytes = read_bytes(&scenario)?;
            let parsed = config::parse_scenario(&bytes)?;
            let max_cycles = max_cycles.unwrap_or(parsed.max_cycles);
            if max_cycles == 0 {
                return Err(CliError::Input("max cycles must be at least 1".to_string()));
            }
            Ok(RunSpec::Navigate {
                robot: parsed.robot,
                antennas: parsed.antennas,
                environment: parsed.environment,
                start: parsed.start,
                max_cycles,
                out,
                config_bytes: bytes,
            })
        }
    }
}
