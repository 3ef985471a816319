//! Stock configurations: the reference unit-cell bundle, the standard two-unit
//! chain builds, and the robot assemblies used by the shipped fixtures.

use std::f64::consts::FRAC_PI_4;

use crate::chain::ChainConfig;
use crate::robot::{
    AntennaConfig, BiasParams, Coupling, Environment, LegAssembly, Obstacle, Pose, Rect,
    RobotConfig, Side,
};
use crate::unit::{UnitConfig, Vec2Mm};

/// Lever length of the reference build (mm).
pub const LEVER_MM: f64 = 14.142;
/// Travel limit of the reference build (rad).
pub const TRAVEL_LIMIT: f64 = FRAC_PI_4;
/// Spring stiffness of the reference band (N/m).
pub const STIFFNESS: f64 = 28.5;
/// Rest length of the reference band (mm).
pub const REST_LENGTH_MM: f64 = 10.0;

/// Softer band used by the antenna-equipped builds (N/m).
pub const ANTENNA_STIFFNESS: f64 = 47.0;
/// Rest length of the softer band (mm).
pub const ANTENNA_REST_LENGTH_MM: f64 = 22.0;

/// Track width of the differential-drive reduction (mm); chosen so a
/// forward/backward leg pair turns by about pi/12 per cycle.
pub const TRACK_WIDTH_MM: f64 = 153.0;
/// Outer-unit rotation past state 0 at which the foot is considered lifted
/// (rad). The V-leg takes up slack before the foot leaves the ground, so
/// contact persists well into the outer unit's travel.
pub const EPS_CONTACT: f64 = 1.0;

/// Default downward bias on the outer unit of a mounted leg (N).
pub const DEFAULT_F_GRAV: f64 = 0.05;
/// Default friction opposing inner-unit motion while the foot is grounded (N).
/// Calibrated (see `calibrate_friction`) so the forward-sequence boundary of
/// the mounted chain sits near q_out = [17.5, 0] mm.
pub const DEFAULT_F_FRIC: f64 = 0.231;

/// Heavier bias of the antenna-equipped build: the front module adds weight
/// and drag. Calibrated so the antenna throw between the free and contact
/// anchor positions flips the gait between forward and backward.
pub const ANTENNA_F_GRAV: f64 = 0.40;
/// See [`ANTENNA_F_GRAV`].
pub const ANTENNA_F_FRIC: f64 = 0.81;

/// Free-state inner anchor held by the antenna levers (mm).
pub const ANTENNA_PIN_FREE: Vec2Mm = Vec2Mm::new(-7.0, 0.0);
/// Inner anchor position when the opposite antenna is fully deflected (mm).
pub const ANTENNA_PIN_CONTACT: Vec2Mm = Vec2Mm::new(-11.0, 0.0);
/// Antenna length from the body centre (mm).
pub const ANTENNA_REACH_MM: f64 = 300.0;
/// Angle of each antenna away from the heading (rad). Narrow enough that a
/// 50 mm obstacle ahead is sensed well before the body reaches it.
pub const ANTENNA_HALF_ANGLE: f64 = 0.22;

/// A unit cell of the reference build with the outer anchor at `q`.
pub fn standard_unit(q: Vec2Mm) -> UnitConfig {
    UnitConfig {
        r: LEVER_MM,
        theta_c: TRAVEL_LIMIT,
        k: STIFFNESS,
        l0: REST_LENGTH_MM,
        p: Vec2Mm::new(-10.0, 0.0),
        q,
    }
}

/// The six outer-anchor variants of the reference unit-cell bundle, named by
/// their `q` vector in millimetres. All but `q0_-15` are bistable.
pub fn reference_units() -> Vec<(&'static str, UnitConfig)> {
    vec![
        ("q10_0", standard_unit(Vec2Mm::new(10.0, 0.0))),
        ("q0_0", standard_unit(Vec2Mm::new(0.0, 0.0))),
        ("q20_0", standard_unit(Vec2Mm::new(20.0, 0.0))),
        ("q10_-15", standard_unit(Vec2Mm::new(10.0, -15.0))),
        ("q20_15", standard_unit(Vec2Mm::new(20.0, 15.0))),
        ("q0_-15", standard_unit(Vec2Mm::new(0.0, -15.0))),
    ]
}

/// Two-unit chain of the standard build: symmetric inner unit
/// (`p_in = -q_in = [-10, 0]`), outer unit anchored at `p_out = [-10, 0]`
/// with a free choice of `q_out`.
pub fn standard_chain(q_out: Vec2Mm) -> ChainConfig {
    ChainConfig {
        inner: standard_unit(Vec2Mm::new(10.0, 0.0)),
        outer: standard_unit(q_out),
    }
}

/// The chain that steps forward when driven standalone: `q_out = [15, 0]`.
pub fn forward_chain() -> ChainConfig {
    standard_chain(Vec2Mm::new(15.0, 0.0))
}

/// The chain that steps backward when driven standalone: `q_out = [5, 0]`.
pub fn backward_chain() -> ChainConfig {
    standard_chain(Vec2Mm::new(5.0, 0.0))
}

/// The four outer-anchor choices that realise the four distinct transition
/// sequences, named by their `q_out` vector.
pub fn contrast_chains() -> Vec<(&'static str, ChainConfig)> {
    vec![
        ("q0_0", standard_chain(Vec2Mm::new(0.0, 0.0))),
        ("q20_0", standard_chain(Vec2Mm::new(20.0, 0.0))),
        ("q10_-15", standard_chain(Vec2Mm::new(10.0, -15.0))),
        ("q20_15", standard_chain(Vec2Mm::new(20.0, 15.0))),
    ]
}

/// Default mounted-leg bias.
pub fn default_bias() -> BiasParams {
    BiasParams {
        f_fric: DEFAULT_F_FRIC,
        f_grav: DEFAULT_F_GRAV,
    }
}

/// A robot with the given outer anchors per side and a common bias.
pub fn standard_robot(q_out_left: Vec2Mm, q_out_right: Vec2Mm, bias: BiasParams) -> RobotConfig {
    let chain_l = standard_chain(q_out_left);
    let u_max = chain_l.u_max();
    RobotConfig {
        left: LegAssembly {
            side: Side::Left,
            chain: chain_l,
            bias,
        },
        right: LegAssembly {
            side: Side::Right,
            chain: standard_chain(q_out_right),
            bias,
        },
        track_width: TRACK_WIDTH_MM,
        u_max,
        eps_contact: EPS_CONTACT,
    }
}

/// A chain with the softer antenna-build bands, inner anchor `p_in` free to
/// move, `q_in = [10, 0]`, `p_out = [-10, 0]`, `q_out = [20, 0]`.
pub fn antenna_chain(p_in: Vec2Mm) -> ChainConfig {
    let unit = |p: Vec2Mm, q: Vec2Mm| UnitConfig {
        r: LEVER_MM,
        theta_c: TRAVEL_LIMIT,
        k: ANTENNA_STIFFNESS,
        l0: ANTENNA_REST_LENGTH_MM,
        p,
        q,
    };
    ChainConfig {
        inner: unit(p_in, Vec2Mm::new(10.0, 0.0)),
        outer: unit(Vec2Mm::new(-10.0, 0.0), Vec2Mm::new(20.0, 0.0)),
    }
}

/// A navigation scenario: robot, sensing, world, start pose and cycle budget.
#[derive(Debug, Clone)]
pub struct NavScenario {
    pub robot: RobotConfig,
    pub antennas: AntennaConfig,
    pub environment: Environment,
    pub start: Pose,
    pub max_cycles: usize,
}

/// A single cylindrical obstacle slightly right of the robot's path: the
/// right antenna engages first and the robot backs away turning left.
pub fn cylinder_scenario() -> NavScenario {
    let (robot, antennas) = antenna_robot();
    let environment = Environment {
        obstacles: vec![Obstacle::Circle {
            center: Vec2Mm::new(300.0, -35.0),
            radius: 25.0,
        }],
        goal: None,
        bounds: Rect {
            min: Vec2Mm::new(-600.0, -800.0),
            max: Vec2Mm::new(1200.0, 800.0),
        },
    };
    NavScenario {
        robot,
        antennas,
        environment,
        start: Pose::origin(),
        max_cycles: 150,
    }
}

/// Slalom through three baffle walls to a goal region on the far side.
/// Depth-proportional coupling steers the robot away from the deeper-engaged
/// side, so oblique wall approaches turn it toward the openings.
pub fn three_wall_scenario() -> NavScenario {
    let (robot, mut antennas) = antenna_robot();
    antennas.coupling = Coupling::LinearInDepth;
    let wall = |x1: f64, y1: f64, x2: f64, y2: f64| Obstacle::Wall {
        a: Vec2Mm::new(x1, y1),
        b: Vec2Mm::new(x2, y2),
    };
    let environment = Environment {
        obstacles: vec![
            // Three slanted walls in echelon barring the direct route to the
            // exit; the slits between them are far too narrow for the body.
            // The robot meets the first face obliquely, aligns with the
            // barrier line and tracks it at antenna standoff to the top.
            wall(200.0, -330.0, 430.0, 80.0),
            wall(469.0, 150.0, 640.0, 455.0),
            wall(679.0, 525.0, 850.0, 830.0),
            // Round end post of the last wall; lets the antennas feel the
            // barrier's end across the full body width.
            Obstacle::Circle {
                center: Vec2Mm::new(850.0, 830.0),
                radius: 60.0,
            },
            // Sensed floor and back wall just inside the hard bounds.
            wall(-180.0, -330.0, 1280.0, -330.0),
            wall(-180.0, -330.0, -180.0, 1080.0),
        ],
        goal: Some(Rect {
            min: Vec2Mm::new(550.0, 950.0),
            max: Vec2Mm::new(1300.0, 1100.0),
        }),
        bounds: Rect {
            min: Vec2Mm::new(-200.0, -350.0),
            max: Vec2Mm::new(1300.0, 1100.0),
        },
    };
    NavScenario {
        robot,
        antennas,
        environment,
        start: Pose {
            x: 0.0,
            y: -150.0,
            heading: 0.05,
        },
        max_cycles: 400,
    }
}

/// The antenna-equipped robot and its antenna geometry/coupling.
pub fn antenna_robot() -> (RobotConfig, AntennaConfig) {
    let bias = BiasParams {
        f_fric: ANTENNA_F_FRIC,
        f_grav: ANTENNA_F_GRAV,
    };
    let chain = antenna_chain(ANTENNA_PIN_FREE);
    let u_max = chain.u_max();
    let robot = RobotConfig {
        left: LegAssembly {
            side: Side::Left,
            chain: chain.clone(),
            bias,
        },
        right: LegAssembly {
            side: Side::Right,
            chain,
            bias,
        },
        track_width: TRACK_WIDTH_MM,
        u_max,
        eps_contact: EPS_CONTACT,
    };
    let antennas = AntennaConfig {
        reach: ANTENNA_REACH_MM,
        half_angle: ANTENNA_HALF_ANGLE,
        p_in_free: ANTENNA_PIN_FREE,
        p_in_contact: ANTENNA_PIN_CONTACT,
        coupling: Coupling::Binary,
    };
    (robot, antennas)
}
