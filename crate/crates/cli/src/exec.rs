//! Command implementations.

use serde::Serialize;

use seqlab_core::chain::{run_protocol, ChainState, PathResult};
use seqlab_core::robot::{navigate, simulate_gait, NavigationResult, Pose, Trajectory};
use seqlab_core::sequence::{classify_sequence, compare, sweep_qout, PhaseDiagram, Provenance, TIE_TOL};
use seqlab_core::unit::{classify_stability, sample_curves};

use crate::args::RunSpec;
use crate::output::{csv, Manifest, OutputBundle};
use crate::{chain_error, CliError};

pub fn execute(spec: RunSpec) -> Result<Manifest, CliError> {
    let mut bundle = OutputBundle::create(spec.out_dir(), spec.command_name(), spec.config_bytes())?;
    match &spec {
        RunSpec::Unit { units, samples, .. } => run_unit(&mut bundle, units, *samples)?,
        RunSpec::Chain {
            cfg,
            protocol,
            solver,
            ..
        } => {
            let path = run_protocol(cfg, protocol, solver).map_err(chain_error)?;
            write_path(&mut bundle, &path)?;
        }
        RunSpec::Phase {
            base,
            qx,
            qy,
            rule,
            oracle,
            solver,
            ..
        } => {
            let rule_diagram = rule.then(|| sweep_qout(base, qx, qy, Provenance::Rule, solver, TIE_TOL));
            let oracle_diagram =
                oracle.then(|| sweep_qout(base, qx, qy, Provenance::Oracle, solver, TIE_TOL));
            if let Some(d) = &rule_diagram {
                write_diagram(&mut bundle, "rule", d)?;
            }
            if let Some(d) = &oracle_diagram {
                write_diagram(&mut bundle, "oracle", d)?;
            }
            if let (Some(r), Some(o)) = (&rule_diagram, &oracle_diagram) {
                let report = compare(r, o).map_err(chain_error)?;
                let mismatches: Vec<_> = report
                    .mismatches
                    .iter()
                    .map(|m| MismatchOut {
                        qx_mm: m.qx_mm,
                        qy_mm: m.qy_mm,
                        rule: m.rule.code(),
                        oracle: m.oracle.code(),
                    })
                    .collect();
                bundle.write_json(
                    "agreement.json",
                    &AgreementOut {
                        cells: report.cells,
                        compared: report.compared,
                        matches: report.matches,
                        agreement: report.agreement,
                        excluded_ties: report.excluded_ties,
                        failed: report.failed,
                        mismatches,
                    },
                )?;
            }
        }
        RunSpec::Gait { robot, cycles, .. } => {
            let traj = simulate_gait(robot, *cycles).map_err(chain_error)?;
            write_trajectory_csv(&mut bundle, &traj)?;
            bundle.write_json(
                "gait.json",
                &GaitOut {
                    cycles: cycle_records(&traj),
                    final_pose: traj.final_pose,
                    final_left_state: leg_state(&traj.final_left_state, &robot.left.chain),
                    final_right_state: leg_state(&traj.final_right_state, &robot.right.chain),
                },
            )?;
        }
        RunSpec::Navigate {
            robot,
            antennas,
            environment,
            start,
            max_cycles,
            ..
        } => {
            let result: NavigationResult =
                navigate(robot, environment, antennas, *max_cycles, *start).map_err(chain_error)?;
            write_trajectory_csv(&mut bundle, &result.trajectory)?;
            let events = contact_events(&result.trajectory);
            bundle.write_json(
                "navigation.json",
                &NavigationOut {
                    termination: match result.termination {
                        seqlab_core::robot::Termination::Goal => "goal",
                        seqlab_core::robot::Termination::CycleLimit => "cycle-limit",
                        seqlab_core::robot::Termination::Stuck => "stuck",
                    },
                    cycles: result.trajectory.cycles.len(),
                    events,
                    cycle_log: cycle_records(&result.trajectory),
                    final_pose: result.trajectory.final_pose,
                },
            )?;
        }
    }
    bundle.finish()
}

fn run_unit(
    bundle: &mut OutputBundle,
    units: &[(String, seqlab_core::unit::UnitConfig)],
    samples: usize,
) -> Result<(), CliError> {
    let mut stability = Vec::new();
    for (name, cfg) in units {
        let curve = sample_curves(cfg, samples).map_err(|e| CliError::Input(e.to_string()))?;
        let bytes = csv(
            "theta_rad,length_mm,energy_J,delta_energy_J,force_N",
            &curve,
            |s, line| {
                use std::fmt::Write;
                let _ = write!(
                    line,
                    "{},{},{},{},{}",
                    s.theta, s.length, s.energy, s.delta_energy, s.force
                );
            },
        );
        bundle.write_bytes(&format!("{name}.csv"), &bytes)?;
        let report = classify_stability(cfg).map_err(|e| CliError::Input(e.to_string()))?;
        stability.push(StabilityOut {
            name: name.clone(),
            theta_extremum_rad: report.theta_extremum,
            bistable: report.bistable,
            stable_states: match report.stable_states {
                seqlab_core::unit::StableStates::Both => "both",
                seqlab_core::unit::StableStates::State0Only => "state0_only",
                seqlab_core::unit::StableStates::State1Only => "state1_only",
            },
            taut_everywhere: report.taut_everywhere,
        });
    }
    bundle.write_json("stability.json", &stability)
}

fn write_path(bundle: &mut OutputBundle, path: &PathResult) -> Result<(), CliError> {
    let bytes = csv(
        "u_mm,theta_in_rad,theta_out_rad,energy_J,force_N,phase",
        &path.points,
        |p, line| {
            use std::fmt::Write;
            let _ = write!(
                line,
                "{},{},{},{},{},{}",
                p.u, p.state.theta_in, p.state.theta_out, p.energy, p.force, p.phase
            );
        },
    );
    bundle.write_bytes("path.csv", &bytes)?;
    let snaps: Vec<SnapOut> = path
        .snaps
        .iter()
        .map(|s| SnapOut {
            u_mm: s.u,
            theta_in_before: s.state_before.theta_in,
            theta_out_before: s.state_before.theta_out,
            theta_in_after: s.state_after.theta_in,
            theta_out_after: s.state_after.theta_out,
            energy_released_J: s.energy_released,
        })
        .collect();
    bundle.write_json(
        "result.json",
        &PathOut {
            sequence: path.sequence_string(),
            class: classify_sequence(&path.sequence).code(),
            snaps,
            dissipated_J: path.dissipated_energy(),
            loop_area_J: path.loop_area(),
        },
    )
}

fn write_diagram(bundle: &mut OutputBundle, stem: &str, d: &PhaseDiagram) -> Result<(), CliError> {
    bundle.write_json(
        &format!("{stem}.json"),
        &DiagramOut {
            qx_mm: &d.qx_mm,
            qy_mm: &d.qy_mm,
            provenance: stem,
            classes: d.cells.iter().map(|c| c.code()).collect(),
            monostable_outer: &d.monostable_outer,
        },
    )?;
    let mut rows = Vec::with_capacity(d.cells.len());
    for iy in 0..d.qy_mm.len() {
        for ix in 0..d.qx_mm.len() {
            rows.push((
                d.qx_mm[ix],
                d.qy_mm[iy],
                d.cell(ix, iy).code(),
                d.monostable_outer[iy * d.qx_mm.len() + ix],
            ));
        }
    }
    let bytes = csv("qx_mm,qy_mm,class,monostable_outer", &rows, |r, line| {
        use std::fmt::Write;
        let _ = write!(line, "{},{},{},{}", r.0, r.1, r.2, r.3);
    });
    bundle.write_bytes(&format!("{stem}.csv"), &bytes)
}

fn write_trajectory_csv(bundle: &mut OutputBundle, traj: &Trajectory) -> Result<(), CliError> {
    let bytes = csv(
        "cycle,x_mm,y_mm,heading_rad,d_mm,dphi_rad,contact_L,contact_R",
        &traj.cycles,
        |r, line| {
            use std::fmt::Write;
            let _ = write!(
                line,
                "{},{},{},{},{},{},{},{}",
                r.cycle, r.pose.x, r.pose.y, r.pose.heading, r.d, r.dphi, r.contact_left, r.contact_right
            );
        },
    );
    bundle.write_bytes("trajectory.csv", &bytes)
}

fn sequence_string(seq: &[seqlab_core::chain::DiscreteState]) -> String {
    seq.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
}

fn cycle_records(traj: &Trajectory) -> Vec<CycleOut> {
    traj.cycles
        .iter()
        .map(|r| CycleOut {
            cycle: r.cycle,
            d_mm: r.d,
            dphi_rad: r.dphi,
            left_sequence: sequence_string(&r.left_sequence),
            right_sequence: sequence_string(&r.right_sequence),
            contact_left: r.contact_left,
            contact_right: r.contact_right,
        })
        .collect()
}

fn contact_events(traj: &Trajectory) -> Vec<EventOut> {
    let mut events = Vec::new();
    let mut prev = (false, false);
    for r in &traj.cycles {
        let now = (r.contact_left, r.contact_right);
        if now != prev {
            events.push(EventOut {
                cycle: r.cycle,
                kind: if now.0 || now.1 { "contact" } else { "clear" },
                left: now.0,
                right: now.1,
            });
            prev = now;
        }
    }
    events
}

fn leg_state(state: &ChainState, chain: &seqlab_core::chain::ChainConfig) -> LegStateOut {
    let discrete = match seqlab_core::chain::discrete_state(state, chain, 1e-3) {
        seqlab_core::chain::Quantization::State(s) => s.to_string(),
        seqlab_core::chain::Quantization::Transitioning => "transitioning".to_string(),
    };
    LegStateOut {
        theta_in_rad: state.theta_in,
        theta_out_rad: state.theta_out,
        discrete,
    }
}

#[derive(Serialize)]
struct StabilityOut {
    name: String,
    theta_extremum_rad: f64,
    bistable: bool,
    stable_states: &'static str,
    taut_everywhere: bool,
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct SnapOut {
    u_mm: f64,
    theta_in_before: f64,
    theta_out_before: f64,
    theta_in_after: f64,
    theta_out_after: f64,
    energy_released_J: f64,
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct PathOut {
    sequence: String,
    class: &'static str,
    snaps: Vec<SnapOut>,
    dissipated_J: f64,
    loop_area_J: f64,
}

#[derive(Serialize)]
struct DiagramOut<'a> {
    qx_mm: &'a [f64],
    qy_mm: &'a [f64],
    provenance: &'a str,
    /// Row-major over ascending q_y rows and ascending q_x columns.
    classes: Vec<&'static str>,
    monostable_outer: &'a [bool],
}

#[derive(Serialize)]
struct AgreementOut {
    cells: usize,
    compared: usize,
    matches: usize,
    agreement: Option<f64>,
    excluded_ties: usize,
    failed: usize,
    mismatches: Vec<MismatchOut>,
}

#[derive(Serialize)]
struct MismatchOut {
    qx_mm: f64,
    qy_mm: f64,
    rule: &'static str,
    oracle: &'static str,
}

#[derive(Serialize)]
struct CycleOut {
    cycle: usize,
    d_mm: f64,
    dphi_rad: f64,
    left_sequence: String,
    right_sequence: String,
    contact_left: bool,
    contact_right: bool,
}

#[derive(Serialize)]
struct EventOut {
    cycle: usize,
    kind: &'static str,
    left: bool,
    right: bool,
}

#[derive(Serialize)]
struct LegStateOut {
    theta_in_rad: f64,
    theta_out_rad: f64,
    discrete: String,
}

#[derive(Serialize)]
struct GaitOut {
    cycles: Vec<CycleOut>,
    final_pose: Pose,
    final_left_state: LegStateOut,
    final_right_state: LegStateOut,
}

#[derive(Serialize)]
struct NavigationOut {
    termination: &'static str,
    cycles: usize,
    events: Vec<EventOut>,
    cycle_log: Vec<CycleOut>,
    final_pose: Pose,
}
