//! Regenerate the JSON fixtures under fixtures/ from the library presets.
//!
//! Run from the workspace root: cargo run -p seqlab-cli --example regen_fixtures

use std::path::Path;

use seqlab_cli::config::{
    ChainFile, FlatChain, NamedUnit, RobotFile, RobotSpec, RunSection, ScenarioFile, ScenarioRun,
    UnitsFile,
};
use seqlab_core::presets;
use seqlab_core::unit::Vec2Mm;

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) {
    let mut text = serde_json::to_string_pretty(value).expect("serialise");
    text.push('\n');
    let path = dir.join(name);
    std::fs::write(&path, text).expect("write fixture");
    println!("wrote {}", path.display());
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    std::fs::create_dir_all(&dir).expect("fixtures dir");

    let units = UnitsFile {
        units: presets::reference_units()
            .into_iter()
            .map(|(name, cfg)| NamedUnit {
                name: name.to_string(),
                r: cfg.r,
                theta_c: cfg.theta_c,
                k: cfg.k,
                l0: cfg.l0,
                p: cfg.p,
                q: cfg.q,
            })
            .collect(),
    };
    write_json(&dir, "units_reference.json", &units);

    let chain = |cfg: &seqlab_core::chain::ChainConfig| ChainFile {
        chain: FlatChain::from_config(cfg),
        protocol: None,
        solver: None,
    };
    write_json(&dir, "chain_forward.json", &chain(&presets::forward_chain()));
    write_json(&dir, "chain_backward.json", &chain(&presets::backward_chain()));
    for (name, cfg) in presets::contrast_chains() {
        write_json(&dir, &format!("chain_contrast_{name}.json"), &chain(&cfg));
    }

    let robot_file = |robot: &seqlab_core::robot::RobotConfig, cycles: f64| RobotFile {
        robot: RobotSpec::from_config(robot),
        run: RunSection { cycles },
    };
    let forward = presets::standard_robot(
        Vec2Mm::new(20.0, 0.0),
        Vec2Mm::new(20.0, 0.0),
        presets::default_bias(),
    );
    write_json(&dir, "robot_forward.json", &robot_file(&forward, 7.75));
    let turn = presets::standard_robot(
        Vec2Mm::new(5.0, 0.0),
        Vec2Mm::new(20.0, 0.0),
        presets::default_bias(),
    );
    write_json(&dir, "robot_turn.json", &robot_file(&turn, 6.0));

    let scenario_file = |s: &presets::NavScenario| ScenarioFile {
        robot: RobotSpec::from_config(&s.robot),
        antennas: s.antennas,
        environment: s.environment.clone(),
        run: ScenarioRun {
            cycles: s.max_cycles,
        },
        start: s.start,
    };
    write_json(&dir, "scenario_cylinder.json", &scenario_file(&presets::cylinder_scenario()));
    write_json(&dir, "scenario_three_walls.json", &scenario_file(&presets::three_wall_scenario()));
}
