//! Acceptance suite: one test per shipped claim, each printing a PASS/FAIL
//! line with its headline numbers.

use std::time::{Duration, Instant};

use seqlab_core::chain::{
    discrete_state, run_protocol, LoadProtocol, Phase, Quantization, SolverParams, S01,
};
use seqlab_core::presets;
use seqlab_core::robot::{
    antenna_pin, calibrate_friction, navigate, robot_cycle, run_leg, simulate_gait, BiasParams,
    CycleCount, LegAssembly, Side, Termination,
};
use seqlab_core::sequence::{
    classify_by_path, classify_sequence, compare, default_grid, sweep_qout, Provenance,
    SequenceClass, TIE_TOL,
};
use seqlab_core::unit::{classify_stability, sample_curves, unit_energy, unit_force, UnitConfig, Vec2Mm};

struct Criterion {
    name: &'static str,
    started: Instant,
}

impl Criterion {
    fn start(name: &'static str) -> Self {
        Criterion {
            name,
            started: Instant::now(),
        }
    }

    fn check(&self, ok: bool, detail: &str) {
        if !ok {
            println!("[acceptance] {}: FAIL ({detail})", self.name);
            panic!("{}: {detail}", self.name);
        }
    }

    fn pass(self, detail: String) -> Duration {
        let elapsed = self.started.elapsed();
        println!(
            "[acceptance] {}: PASS ({detail}; {:.2} s)",
            self.name,
            elapsed.as_secs_f64()
        );
        elapsed
    }

    fn budget(&self, limit: Duration) {
        let elapsed = self.started.elapsed();
        self.check(
            elapsed <= limit,
            &format!("runtime {:.2} s exceeds {:.2} s", elapsed.as_secs_f64(), limit.as_secs_f64()),
        );
    }
}

fn brute_force_minima(cfg: &UnitConfig, n: usize) -> usize {
    let e: Vec<f64> = (0..=n)
        .map(|i| {
            let t = -cfg.theta_c + 2.0 * cfg.theta_c * (i as f64) / (n as f64);
            unit_energy(t, cfg)
        })
        .collect();
    (0..=n)
        .filter(|&i| {
            (i == 0 || e[i - 1] > e[i]) && (i == n || e[i + 1] > e[i])
        })
        .count()
}

#[test]
fn bistability_table() {
    let c = Criterion::start("bistability table");
    let mut bistable = 0;
    for (name, cfg) in presets::reference_units() {
        let report = classify_stability(&cfg).unwrap();
        let minima = brute_force_minima(&cfg, 10_000);
        c.check(
            report.bistable == (minima == 2),
            &format!("{name}: rule says bistable={}, brute force found {minima} minima", report.bistable),
        );
        if report.bistable {
            bistable += 1;
        } else {
            c.check(name == "q0_-15", &format!("{name} unexpectedly monostable"));
        }
    }
    c.check(bistable == 5, &format!("{bistable} of 6 bistable, expected 5"));
    c.budget(Duration::from_secs(1));
    c.pass("6/6 rule vs brute-force agreement, 5 bistable + 1 monostable".to_string());
}

#[test]
fn force_consistency() {
    let c = Criterion::start("force consistency");
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(314159);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let cfg = UnitConfig::new(
            rng.gen_range(8.0..20.0),
            rng.gen_range(0.3..1.2),
            rng.gen_range(5.0..80.0),
            rng.gen_range(0.0..20.0),
            Vec2Mm::new(rng.gen_range(-20.0..0.0), rng.gen_range(-10.0..10.0)),
            Vec2Mm::new(rng.gen_range(1.0..25.0), rng.gen_range(-15.0..15.0)),
        )
        .unwrap();
        let theta = rng.gen_range(-0.95 * cfg.theta_c..0.95 * cfg.theta_c);
        let f = unit_force(theta, &cfg).unwrap();
        // Central finite difference of the energy with respect to the
        // vertical displacement, step 1e-6 m.
        let h_m = 1e-6;
        let u = cfg.r * (theta.sin() + cfg.theta_c.sin());
        let theta_at = |u_mm: f64| ((u_mm / cfg.r) - cfg.theta_c.sin()).asin();
        let fd = (unit_energy(theta_at(u + h_m * 1e3), &cfg) - unit_energy(theta_at(u - h_m * 1e3), &cfg))
            / (2.0 * h_m);
        let err = (f - fd).abs();
        worst = worst.max(err - 1e-4 * f.abs());
        c.check(
            err < 1e-6 + 1e-4 * f.abs(),
            &format!("analytic {f} vs finite difference {fd} for {cfg:?}"),
        );
    }
    for (name, cfg) in presets::reference_units() {
        let samples = sample_curves(&cfg, 100).unwrap();
        for w in samples.windows(2) {
            c.check(
                w[1].force < w[0].force,
                &format!("{name}: force not strictly decreasing at theta = {}", w[1].theta),
            );
        }
    }
    c.pass(format!(
        "100 finite-difference checks (worst abs residual {worst:.2e} N), 6 monotone force curves"
    ));
}

#[test]
fn sequence_fixtures() {
    let c = Criterion::start("sequence fixtures");
    let forward = presets::forward_chain();
    let solver = SolverParams::for_chain(&forward);
    let path = run_protocol(&forward, &LoadProtocol::full_cycle(&forward), &solver).unwrap();
    c.check(
        path.sequence_string() == "00,10,11,01,00",
        &format!("forward fixture visited {}", path.sequence_string()),
    );

    let mut classes = Vec::new();
    for (name, cfg) in presets::contrast_chains() {
        let class = classify_by_path(&cfg, &SolverParams::for_chain(&cfg)).unwrap();
        c.check(
            class != SequenceClass::Degenerate,
            &format!("{name} classified degenerate"),
        );
        c.check(!classes.contains(&class), &format!("{name} duplicates {class}"));
        classes.push(class);
    }
    c.budget(Duration::from_secs(5));
    c.pass(format!(
        "forward cycle 00,10,11,01,00; contrast classes {}",
        classes
            .iter()
            .map(|cl| cl.code())
            .collect::<Vec<_>>()
            .join("/")
    ));
}

#[test]
fn rule_vs_oracle_phase_diagram() {
    let c = Criterion::start("rule vs oracle phase diagram");
    let base = presets::forward_chain();
    let solver = SolverParams::for_chain(&base);
    let (qx, qy) = default_grid();
    let rule = sweep_qout(&base, &qx, &qy, Provenance::Rule, &solver, TIE_TOL);
    let oracle = sweep_qout(&base, &qx, &qy, Provenance::Oracle, &solver, TIE_TOL);
    let report = compare(&rule, &oracle).unwrap();
    let agreement = report.agreement.unwrap_or(0.0);
    c.check(report.failed == 0, &format!("{} cells failed to solve", report.failed));
    c.check(
        agreement >= 0.95,
        &format!(
            "agreement {agreement:.4} < 0.95 ({} mismatches of {})",
            report.mismatches.len(),
            report.compared
        ),
    );

    // Qualitative structure: undirected classes dominate the large-|q_y| rows,
    // directed classes dominate large q_x at small |q_y|.
    let count = |cells: &[(usize, usize)]| {
        let mut undirected = 0;
        let mut directed = 0;
        for &(ix, iy) in cells {
            match oracle.cell(ix, iy).class() {
                Some(cl) if cl.is_undirected() => undirected += 1,
                Some(cl) if cl.is_directed() => directed += 1,
                _ => {}
            }
        }
        (undirected, directed)
    };
    for iy in [0, qy.count - 1] {
        let row: Vec<(usize, usize)> = (0..qx.count).map(|ix| (ix, iy)).collect();
        let (u, d) = count(&row);
        c.check(
            u > d,
            &format!("row q_y = {} mm: undirected {u} vs directed {d}", oracle.qy_mm[iy]),
        );
    }
    let mid_y = (qy.count - 1) / 2;
    let band: Vec<(usize, usize)> = (0..qx.count)
        .filter(|&ix| oracle.qx_mm[ix] >= 12.0)
        .map(|ix| (ix, mid_y))
        .collect();
    let (u, d) = count(&band);
    c.check(d > u, &format!("q_y = 0, q_x >= 12 mm: directed {d} vs undirected {u}"));

    // Reference outer-anchor picks land in cells matching their standalone
    // classification.
    for q in [
        Vec2Mm::new(10.0, 0.0),
        Vec2Mm::new(0.0, 0.0),
        Vec2Mm::new(20.0, 0.0),
        Vec2Mm::new(10.0, -15.0),
        Vec2Mm::new(20.0, 15.0),
    ] {
        let cfg = presets::standard_chain(q);
        let standalone = classify_by_path(&cfg, &solver).unwrap();
        let cell = oracle.cell_near(q.x, q.y).class();
        c.check(
            cell == Some(standalone),
            &format!("marker ({}, {}): cell {cell:?} vs standalone {standalone}", q.x, q.y),
        );
    }
    c.budget(Duration::from_secs(300));
    c.pass(format!(
        "agreement {agreement:.4} over {} cells ({} ties excluded)",
        report.compared, report.excluded_ties
    ));
}

#[test]
fn hysteresis_and_dissipation() {
    let c = Criterion::start("hysteresis and dissipation");
    let mut details = Vec::new();
    for (name, cfg) in presets::contrast_chains() {
        let solver = SolverParams::for_chain(&cfg);
        let path = run_protocol(&cfg, &LoadProtocol::full_cycle(&cfg), &solver).unwrap();
        let class = classify_sequence(&path.sequence);
        if class.is_undirected() {
            c.check(path.snaps.is_empty(), &format!("{name}: undirected but snapped"));
            let load: Vec<_> = path.points.iter().filter(|p| p.phase == Phase::Load).collect();
            for up in path.points.iter().filter(|p| p.phase == Phase::Unload) {
                if let Some(lp) = load.iter().find(|lp| (lp.u - up.u).abs() < 1e-9) {
                    c.check(
                        (lp.force - up.force).abs() < 1e-3,
                        &format!(
                            "{name}: load/unload forces differ by {} N at u = {}",
                            (lp.force - up.force).abs(),
                            up.u
                        ),
                    );
                }
            }
            details.push(format!("{name} retraces"));
        } else {
            // At least one snap in each half-cycle; the post-snap state is a
            // recorded path point whose phase identifies the half.
            let mut load_snaps = 0;
            let mut unload_snaps = 0;
            for s in &path.snaps {
                c.check(s.energy_released > 0.0, &format!("{name}: snap released {} J", s.energy_released));
                let pt = path
                    .points
                    .iter()
                    .find(|p| p.u == s.u && p.state == s.state_after)
                    .expect("snap landing recorded");
                match pt.phase {
                    Phase::Load => load_snaps += 1,
                    Phase::Unload => unload_snaps += 1,
                }
            }
            c.check(
                load_snaps >= 1 && unload_snaps >= 1,
                &format!("{name}: {load_snaps} load / {unload_snaps} unload snaps"),
            );
            let dissipated = path.dissipated_energy();
            let area = path.loop_area();
            c.check(
                (area - dissipated).abs() <= 0.02 * dissipated,
                &format!("{name}: loop area {area} J vs snap total {dissipated} J"),
            );
            details.push(format!(
                "{name} dissipates {:.2e} J (loop {:.2e} J)",
                dissipated, area
            ));
        }
    }
    c.pass(details.join(", "));
}

#[test]
fn robot_kinematics() {
    let c = Criterion::start("robot kinematics");
    let u_max = presets::forward_chain().u_max();
    let fwd = presets::standard_robot(
        Vec2Mm::new(15.0, 0.0),
        Vec2Mm::new(15.0, 0.0),
        BiasParams::ZERO,
    );
    let out = robot_cycle(&fwd, None).unwrap();
    c.check(
        (out.d - u_max).abs() < 1e-6,
        &format!("forward d = {} mm, expected {u_max}", out.d),
    );

    let bwd = presets::standard_robot(
        Vec2Mm::new(5.0, 0.0),
        Vec2Mm::new(5.0, 0.0),
        BiasParams::ZERO,
    );
    let out = robot_cycle(&bwd, None).unwrap();
    c.check(
        (out.d + u_max).abs() < 1e-6,
        &format!("backward d = {} mm, expected -{u_max}", out.d),
    );

    let turn = presets::standard_robot(
        Vec2Mm::new(5.0, 0.0),
        Vec2Mm::new(15.0, 0.0),
        BiasParams::ZERO,
    );
    let out = robot_cycle(&turn, None).unwrap();
    c.check(out.d.abs() < 0.05 * u_max, &format!("turn d = {} mm", out.d));
    let dphi_expect = 2.0 * u_max / turn.track_width;
    c.check(
        (out.dphi - dphi_expect).abs() < 1e-9,
        &format!("turn dphi = {} rad, expected {dphi_expect}", out.dphi),
    );

    let traj = simulate_gait(&fwd, CycleCount::from_cycles(7.75).unwrap()).unwrap();
    let q = discrete_state(&traj.final_left_state, &fwd.left.chain, 1e-3);
    c.check(
        q == Quantization::State(S01),
        &format!("7.75-cycle forward run ends at {q:?}, expected 01"),
    );
    c.pass(format!(
        "d = +/-{u_max} mm, turn dphi = {dphi_expect:.4} rad (~pi/12), fractional run parks at 01"
    ));
}

#[test]
fn bias_calibration() {
    let c = Criterion::start("bias calibration");
    let bias = presets::default_bias();
    let classify = |q_out: Vec2Mm| {
        let leg = LegAssembly {
            side: Side::Left,
            chain: presets::standard_chain(q_out),
            bias,
        };
        let solver = SolverParams::for_chain(&leg.chain);
        let path = run_leg(&leg, leg.chain.u_max(), presets::EPS_CONTACT, 4, &solver).unwrap();
        classify_sequence(&path.sequence)
    };
    let at20 = classify(Vec2Mm::new(20.0, 0.0));
    let at15 = classify(Vec2Mm::new(15.0, 0.0));
    let at5 = classify(Vec2Mm::new(5.0, 0.0));
    c.check(
        at20 == SequenceClass::DirectedThrough10First,
        &format!("q_out=[20,0] gives {at20}, expected the forward sequence"),
    );
    c.check(
        at15 != SequenceClass::DirectedThrough10First,
        "q_out=[15,0] still gives the forward sequence under bias",
    );
    c.check(
        at5 == SequenceClass::DirectedThrough01First,
        &format!("q_out=[5,0] gives {at5}, expected the backward sequence"),
    );

    let cal = calibrate_friction(presets::DEFAULT_F_GRAV, 17.5, 0.0, 0.6, 1e-3).unwrap();
    c.check(
        (cal.f_fric - presets::DEFAULT_F_FRIC).abs() < 5e-3,
        &format!("calibration found {} N, shipped default {}", cal.f_fric, presets::DEFAULT_F_FRIC),
    );
    c.budget(Duration::from_secs(60));
    c.pass(format!(
        "20 mm forward / 15 mm {} / 5 mm backward; calibrated f_fric = {:.4} N in {} bisections",
        at15.code(),
        cal.f_fric,
        cal.iterations
    ));
}

#[test]
fn navigation() {
    let c = Criterion::start("navigation");

    let s = presets::cylinder_scenario();
    let first = navigate(&s.robot, &s.environment, &s.antennas, s.max_cycles, s.start).unwrap();
    let second = navigate(&s.robot, &s.environment, &s.antennas, s.max_cycles, s.start).unwrap();
    c.check(first == second, "cylinder run not deterministic");
    c.check(
        first.termination == Termination::CycleLimit,
        &format!("cylinder run ended {:?}", first.termination),
    );
    let episodes: Vec<usize> = first
        .trajectory
        .cycles
        .iter()
        .filter(|r| (r.contact_left || r.contact_right) && r.d < 0.0 && r.dphi.abs() > 0.01)
        .map(|r| r.cycle)
        .collect();
    c.check(
        !episodes.is_empty(),
        "no backward-turn episode with antenna contact",
    );
    let last_contact = first
        .trajectory
        .cycles
        .iter()
        .filter(|r| r.contact_left || r.contact_right)
        .map(|r| r.cycle)
        .max()
        .unwrap();
    let free_d = robot_cycle(&s.robot, None).unwrap().d;
    let resumed = first
        .trajectory
        .cycles
        .iter()
        .filter(|r| r.cycle > last_contact)
        .collect::<Vec<_>>();
    c.check(!resumed.is_empty(), "no cycles after the last contact");
    for r in &resumed {
        c.check(
            (r.d - free_d).abs() < 1e-9,
            &format!(
                "cycle {} after contact: d = {} mm differs from the free gait {free_d} mm",
                r.cycle, r.d
            ),
        );
    }
    let reading = antenna_pin(&s.environment, &first.trajectory.final_pose, &s.antennas);
    c.check(
        reading.p_in_left == s.antennas.p_in_free && reading.p_in_right == s.antennas.p_in_free,
        "inner anchors not restored to the free position",
    );

    let m = presets::three_wall_scenario();
    let maze = navigate(&m.robot, &m.environment, &m.antennas, m.max_cycles, m.start).unwrap();
    let maze2 = navigate(&m.robot, &m.environment, &m.antennas, m.max_cycles, m.start).unwrap();
    c.check(maze == maze2, "maze run not deterministic");
    c.check(
        maze.termination == Termination::Goal,
        &format!("maze ended {:?} at ({:.0}, {:.0})", maze.termination, maze.trajectory.final_pose.x, maze.trajectory.final_pose.y),
    );
    c.check(
        maze.trajectory.cycles.len() <= 400,
        &format!("maze took {} cycles", maze.trajectory.cycles.len()),
    );

    c.budget(Duration::from_secs(30));
    c.pass(format!(
        "cylinder: {} backward-turn episode(s), forward resumed with anchors restored; maze: goal in {} cycles",
        episodes.len(),
        maze.trajectory.cycles.len()
    ));
}
