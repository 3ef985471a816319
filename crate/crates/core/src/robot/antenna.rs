//! Mechanical obstacle sensing and navigation.
//!
//! Two antennas extend from the body at `heading +/- half_angle`. Deflecting
//! an antenna shifts the inner spring anchor of the mechanism on the
//! *opposite* side between its free and contact positions, which reprograms
//! that leg's transition sequence. Contact is evaluated once per actuator
//! cycle: it changes on the gait timescale, not the displacement-step one.

use serde::{Deserialize, Serialize};

use super::{robot_cycle, CycleRecord, PinOverrides, Pose, RobotConfig, Trajectory};
use crate::chain::ChainState;
use crate::error::ChainError;
use crate::unit::Vec2Mm;

/// How antenna deflection maps onto the inner anchor position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coupling {
    /// Any contact snaps the anchor to the contact position.
    Binary,
    /// The anchor interpolates linearly with penetration depth and saturates
    /// at the contact position once the obstacle has intruded a quarter of
    /// the reach (the lever bottoms out well before the body).
    LinearInDepth,
}

/// Penetration depth, as a fraction of reach, at which depth-proportional
/// coupling saturates.
const LINEAR_SATURATION: f64 = 0.25;

/// Antenna geometry and coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntennaConfig {
    /// Antenna length from the body centre (mm).
    pub reach: f64,
    /// Angle of each antenna away from the heading (rad).
    pub half_angle: f64,
    /// Inner anchor held while the antenna is free (mm).
    pub p_in_free: Vec2Mm,
    /// Inner anchor at full deflection (mm).
    pub p_in_contact: Vec2Mm,
    pub coupling: Coupling,
}

impl AntennaConfig {
    pub fn validate(&self) -> Result<(), ChainError> {
        if !self.reach.is_finite() || self.reach <= 0.0 {
            return Err(ChainError::InvalidScenario {
                reason: format!("antenna reach must be > 0 mm, got {}", self.reach),
            });
        }
        Ok(())
    }
}

/// Axis-aligned rectangle, world millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub min: Vec2Mm,
    pub max: Vec2Mm,
}

impl Rect {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.min.x && x <= self.max.x && y >= self.min.y && y <= self.max.y
    }

    pub fn is_empty(&self) -> bool {
        self.min.x >= self.max.x || self.min.y >= self.max.y
    }
}

/// A planar obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Obstacle {
    Circle { center: Vec2Mm, radius: f64 },
    Wall { a: Vec2Mm, b: Vec2Mm },
}

/// World the robot navigates in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Environment {
    pub obstacles: Vec<Obstacle>,
    pub goal: Option<Rect>,
    pub bounds: Rect,
}

impl Environment {
    pub fn validate(&self) -> Result<(), ChainError> {
        if self.bounds.is_empty() {
            return Err(ChainError::InvalidScenario {
                reason: "environment bounds are empty".to_string(),
            });
        }
        Ok(())
    }
}

/// Outcome of casting both antennas from a pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaReading {
    /// Inner anchor imposed on the LEFT mechanism (set by the right antenna).
    pub p_in_left: Vec2Mm,
    /// Inner anchor imposed on the RIGHT mechanism (set by the left antenna).
    pub p_in_right: Vec2Mm,
    /// Left antenna touching an obstacle.
    pub contact_left: bool,
    pub contact_right: bool,
    /// Penetration depth along each antenna (mm).
    pub depth_left: f64,
    pub depth_right: f64,
}

/// First intersection parameter `t in [0, 1]` of the segment `o + t (e - o)`
/// with a circle, if any.
fn segment_circle_hit(ox: f64, oy: f64, ex: f64, ey: f64, cx: f64, cy: f64, radius: f64) -> Option<f64> {
    let dx = ex - ox;
    let dy = ey - oy;
    let fx = ox - cx;
    let fy = oy - cy;
    let a = dx * dx + dy * dy;
    if a == 0.0 {
        return None;
    }
    let b = 2.0 * (fx * dx + fy * dy);
    let c = fx * fx + fy * fy - radius * radius;
    if c < 0.0 {
        // Origin already inside the circle.
        return Some(0.0);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sqrt_disc = disc.sqrt();
    let t1 = (-b - sqrt_disc) / (2.0 * a);
    let t2 = (-b + sqrt_disc) / (2.0 * a);
    for t in [t1, t2] {
        if (0.0..=1.0).contains(&t) {
            return Some(t);
        }
    }
    None
}

/// First intersection parameter of segment 1 with segment 2, if any.
fn segment_segment_hit(
    p1: (f64, f64),
    p2: (f64, f64),
    q1: (f64, f64),
    q2: (f64, f64),
) -> Option<f64> {
    let r = (p2.0 - p1.0, p2.1 - p1.1);
    let s = (q2.0 - q1.0, q2.1 - q1.1);
    let denom = r.0 * s.1 - r.1 * s.0;
    if denom.abs() < 1e-12 {
        return None;
    }
    let qp = (q1.0 - p1.0, q1.1 - p1.1);
    let t = (qp.0 * s.1 - qp.1 * s.0) / denom;
    let w = (qp.0 * r.1 - qp.1 * r.0) / denom;
    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&w) {
        Some(t)
    } else {
        None
    }
}

fn point_segment_distance(px: f64, py: f64, a: (f64, f64), b: (f64, f64)) -> f64 {
    let ab = (b.0 - a.0, b.1 - a.1);
    let len2 = ab.0 * ab.0 + ab.1 * ab.1;
    if len2 == 0.0 {
        return (px - a.0).hypot(py - a.1);
    }
    let t = (((px - a.0) * ab.0 + (py - a.1) * ab.1) / len2).clamp(0.0, 1.0);
    (px - (a.0 + t * ab.0)).hypot(py - (a.1 + t * ab.1))
}

/// Penetration depth (mm) of the closest obstacle along a ray of length
/// `reach` from `(ox, oy)` in direction `angle`; zero when clear.
fn antenna_depth(env: &Environment, ox: f64, oy: f64, angle: f64, reach: f64) -> f64 {
    let ex = ox + reach * angle.cos();
    let ey = oy + reach * angle.sin();
    let mut t_first: Option<f64> = None;
    for obs in &env.obstacles {
        let hit = match obs {
            Obstacle::Circle { center, radius } => {
                segment_circle_hit(ox, oy, ex, ey, center.x, center.y, *radius)
            }
            Obstacle::Wall { a, b } => {
                segment_segment_hit((ox, oy), (ex, ey), (a.x, a.y), (b.x, b.y))
            }
        };
        if let Some(t) = hit {
            t_first = Some(t_first.map_or(t, |cur: f64| cur.min(t)));
        }
    }
    t_first.map_or(0.0, |t| (1.0 - t) * reach)
}

/// Cast both antennas and derive the imposed inner anchors. Deflecting the
/// right antenna moves the LEFT mechanism's anchor and vice versa; anchors
/// spring back to `p_in_free` as soon as contact clears.
pub fn antenna_pin(env: &Environment, pose: &Pose, ant: &AntennaConfig) -> AntennaReading {
    let depth_left = antenna_depth(env, pose.x, pose.y, pose.heading + ant.half_angle, ant.reach);
    let depth_right = antenna_depth(env, pose.x, pose.y, pose.heading - ant.half_angle, ant.reach);
    let factor = |depth: f64| match ant.coupling {
        Coupling::Binary => f64::from(depth > 0.0),
        Coupling::LinearInDepth => (depth / (LINEAR_SATURATION * ant.reach)).clamp(0.0, 1.0),
    };
    let lerp = |f: f64| Vec2Mm {
        x: ant.p_in_free.x + f * (ant.p_in_contact.x - ant.p_in_free.x),
        y: ant.p_in_free.y + f * (ant.p_in_contact.y - ant.p_in_free.y),
    };
    AntennaReading {
        p_in_left: lerp(factor(depth_right)),
        p_in_right: lerp(factor(depth_left)),
        contact_left: depth_left > 0.0,
        contact_right: depth_right > 0.0,
        depth_left,
        depth_right,
    }
}

/// Why a navigation run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Goal,
    CycleLimit,
    Stuck,
}

/// Navigation run output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavigationResult {
    pub trajectory: Trajectory,
    pub termination: Termination,
}

fn body_collides(env: &Environment, x: f64, y: f64, body_radius: f64) -> bool {
    if x - body_radius < env.bounds.min.x
        || x + body_radius > env.bounds.max.x
        || y - body_radius < env.bounds.min.y
        || y + body_radius > env.bounds.max.y
    {
        return true;
    }
    env.obstacles.iter().any(|obs| match obs {
        Obstacle::Circle { center, radius } => {
            (x - center.x).hypot(y - center.y) < body_radius + radius
        }
        Obstacle::Wall { a, b } => {
            point_segment_distance(x, y, (a.x, a.y), (b.x, b.y)) < body_radius
        }
    })
}

/// Walk the robot through an environment, re-reading the antennas at the
/// start of every actuator cycle.
///
/// The body is modelled as a circle of radius `track_width / 2`; touching an
/// obstacle or the bounds terminates the run as stuck, entering the goal
/// region terminates it as reaching the goal.
pub fn navigate(
    cfg: &RobotConfig,
    env: &Environment,
    ant: &AntennaConfig,
    max_cycles: usize,
    start: Pose,
) -> Result<NavigationResult, ChainError> {
    cfg.validate()?;
    env.validate()?;
    ant.validate()?;
    let body_radius = 0.5 * cfg.track_width;
    if !env.bounds.contains(start.x, start.y) || body_collides(env, start.x, start.y, body_radius) {
        return Err(ChainError::InvalidScenario {
            reason: "start pose outside bounds or colliding".to_string(),
        });
    }

    let mut pose = start;
    let mut records: Vec<CycleRecord> = Vec::new();
    let mut final_left = ChainState::new(-cfg.left.chain.inner.theta_c, -cfg.left.chain.outer.theta_c);
    let mut final_right = final_left;
    let mut termination = Termination::CycleLimit;

    for cycle in 0..max_cycles {
        let reading = antenna_pin(env, &pose, ant);
        let overrides = PinOverrides {
            left: reading.p_in_left,
            right: reading.p_in_right,
        };
        let out = robot_cycle(cfg, Some(&overrides))?;
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
            contact_left: reading.contact_left,
            contact_right: reading.contact_right,
        });
        if body_collides(env, pose.x, pose.y, body_radius) {
            termination = Termination::Stuck;
            break;
        }
        if let Some(goal) = &env.goal {
            if goal.contains(pose.x, pose.y) {
                termination = Termination::Goal;
                break;
            }
        }
    }

    Ok(NavigationResult {
        trajectory: Trajectory {
            cycles: records,
            final_pose: pose,
            final_left_state: final_left,
            final_right_state: final_right,
        },
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn open_env() -> Environment {
        Environment {
            obstacles: vec![],
            goal: None,
            bounds: Rect {
                min: Vec2Mm::new(-5000.0, -5000.0),
                max: Vec2Mm::new(5000.0, 5000.0),
            },
        }
    }

    #[test]
    fn antennas_free_hold_the_free_anchor() {
        let (_, ant) = presets::antenna_robot();
        let reading = antenna_pin(&open_env(), &Pose::origin(), &ant);
        assert!(!reading.contact_left && !reading.contact_right);
        assert_eq!(reading.p_in_left, presets::ANTENNA_PIN_FREE);
        assert_eq!(reading.p_in_right, presets::ANTENNA_PIN_FREE);
    }

    #[test]
    fn right_antenna_contact_moves_the_left_anchor() {
        let (_, ant) = presets::antenna_robot();
        let mut env = open_env();
        // Obstacle squarely on the right antenna's line.
        let a = -ant.half_angle;
        env.obstacles.push(Obstacle::Circle {
            center: Vec2Mm::new(0.8 * ant.reach * a.cos(), 0.8 * ant.reach * a.sin()),
            radius: 10.0,
        });
        let reading = antenna_pin(&env, &Pose::origin(), &ant);
        assert!(reading.contact_right && !reading.contact_left);
        assert_eq!(reading.p_in_left, presets::ANTENNA_PIN_CONTACT);
        assert_eq!(reading.p_in_right, presets::ANTENNA_PIN_FREE);
    }

    #[test]
    fn both_antennas_engaged_move_both_anchors() {
        let (_, ant) = presets::antenna_robot();
        let mut env = open_env();
        env.obstacles.push(Obstacle::Wall {
            a: Vec2Mm::new(100.0, -200.0),
            b: Vec2Mm::new(100.0, 200.0),
        });
        let reading = antenna_pin(&env, &Pose::origin(), &ant);
        assert!(reading.contact_left && reading.contact_right);
        assert_eq!(reading.p_in_left, presets::ANTENNA_PIN_CONTACT);
        assert_eq!(reading.p_in_right, presets::ANTENNA_PIN_CONTACT);
    }

    #[test]
    fn linear_coupling_interpolates_with_depth() {
        let (_, mut ant) = presets::antenna_robot();
        ant.coupling = Coupling::LinearInDepth;
        let mut env = open_env();
        let a = -ant.half_angle;
        // Wall crossing the right antenna with an eighth of the reach left:
        // half the saturation depth, so the anchor sits at the midpoint.
        let frac = 1.0 - 0.125;
        let mid = (frac * ant.reach * a.cos(), frac * ant.reach * a.sin());
        env.obstacles.push(Obstacle::Wall {
            a: Vec2Mm::new(mid.0 + 200.0 * a.sin(), mid.1 - 200.0 * a.cos()),
            b: Vec2Mm::new(mid.0 - 200.0 * a.sin(), mid.1 + 200.0 * a.cos()),
        });
        let reading = antenna_pin(&env, &Pose::origin(), &ant);
        assert!((reading.depth_right - 0.125 * ant.reach).abs() < 1e-6);
        let expect_x = 0.5 * (presets::ANTENNA_PIN_FREE.x + presets::ANTENNA_PIN_CONTACT.x);
        assert!((reading.p_in_left.x - expect_x).abs() < 1e-9);
        // Deeper than the saturation depth clamps at the contact anchor.
        env.obstacles.push(Obstacle::Circle {
            center: Vec2Mm::new(0.5 * ant.reach * a.cos(), 0.5 * ant.reach * a.sin()),
            radius: 10.0,
        });
        let reading = antenna_pin(&env, &Pose::origin(), &ant);
        assert_eq!(reading.p_in_left, presets::ANTENNA_PIN_CONTACT);
    }

    #[test]
    fn geometry_helpers() {
        assert_eq!(
            segment_circle_hit(0.0, 0.0, 10.0, 0.0, 5.0, 0.0, 1.0),
            Some(0.4)
        );
        assert_eq!(segment_circle_hit(0.0, 0.0, 10.0, 0.0, 5.0, 3.0, 1.0), None);
        let t = segment_segment_hit((0.0, 0.0), (10.0, 0.0), (5.0, -1.0), (5.0, 1.0)).unwrap();
        assert!((t - 0.5).abs() < 1e-12);
        assert!(segment_segment_hit((0.0, 0.0), (10.0, 0.0), (5.0, 1.0), (5.0, 2.0)).is_none());
        assert!((point_segment_distance(0.0, 5.0, (-10.0, 0.0), (10.0, 0.0)) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn empty_environment_runs_to_the_cycle_limit_in_a_straight_line() {
        let (robot, ant) = presets::antenna_robot();
        let result = navigate(&robot, &open_env(), &ant, 5, Pose::origin()).unwrap();
        assert_eq!(result.termination, Termination::CycleLimit);
        assert_eq!(result.trajectory.cycles.len(), 5);
        for rec in &result.trajectory.cycles {
            assert!(!rec.contact_left && !rec.contact_right);
            assert!(rec.pose.y.abs() < 1e-9);
            assert!(rec.pose.heading.abs() < 1e-12);
            assert!(rec.d > 0.0, "antenna-build forward cycle d = {}", rec.d);
        }
    }

    #[test]
    fn mirrored_world_mirrors_the_trajectory() {
        // Reflect the environment across the x axis and swap the leg
        // programs (identical here); the trajectory must mirror too.
        let s = presets::cylinder_scenario();
        let mirrored_env = Environment {
            obstacles: s
                .environment
                .obstacles
                .iter()
                .map(|o| match *o {
                    Obstacle::Circle { center, radius } => Obstacle::Circle {
                        center: Vec2Mm::new(center.x, -center.y),
                        radius,
                    },
                    Obstacle::Wall { a, b } => Obstacle::Wall {
                        a: Vec2Mm::new(a.x, -a.y),
                        b: Vec2Mm::new(b.x, -b.y),
                    },
                })
                .collect(),
            goal: None,
            bounds: Rect {
                min: Vec2Mm::new(s.environment.bounds.min.x, -s.environment.bounds.max.y),
                max: Vec2Mm::new(s.environment.bounds.max.x, -s.environment.bounds.min.y),
            },
        };
        let mut swapped = s.robot.clone();
        std::mem::swap(&mut swapped.left.chain, &mut swapped.right.chain);
        std::mem::swap(&mut swapped.left.bias, &mut swapped.right.bias);

        let n = 40;
        let base = navigate(&s.robot, &s.environment, &s.antennas, n, Pose::origin()).unwrap();
        let mirror = navigate(&swapped, &mirrored_env, &s.antennas, n, Pose::origin()).unwrap();
        for (a, b) in base.trajectory.cycles.iter().zip(&mirror.trajectory.cycles) {
            assert!((a.pose.x - b.pose.x).abs() < 1e-6, "cycle {}", a.cycle);
            assert!((a.pose.y + b.pose.y).abs() < 1e-6, "cycle {}", a.cycle);
            assert!((a.pose.heading + b.pose.heading).abs() < 1e-9);
            assert_eq!(a.contact_left, b.contact_right);
            assert_eq!(a.contact_right, b.contact_left);
        }
    }

    #[test]
    fn start_pose_must_be_valid() {
        let (robot, ant) = presets::antenna_robot();
        let mut env = open_env();
        env.obstacles.push(Obstacle::Circle {
            center: Vec2Mm::new(0.0, 0.0),
            radius: 50.0,
        });
        assert!(matches!(
            navigate(&robot, &env, &ant, 5, Pose::origin()),
            Err(ChainError::InvalidScenario { .. })
        ));
    }
}
