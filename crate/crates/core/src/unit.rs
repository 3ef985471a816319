//! Single bistable unit cell: band geometry, strain energy, vertical reaction
//! force and stability classification.
//!
//! The cell has one degree of freedom, the lever angle `theta` confined to
//! `[-theta_c, theta_c]`. The spring of stiffness `k` and rest length `l0`
//! spans from anchor `p` on the fixed block to anchor `q` on the moving block;
//! both anchors are measured from the midpoints between the lever joints, so
//! the stretched length depends only on `q - p` and the lever vector.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::MM;

/// Planar anchor vector, components in millimetres. Serialises as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2Mm {
    pub x: f64,
    pub y: f64,
}

impl Vec2Mm {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2Mm { x, y }
    }
}

impl From<[f64; 2]> for Vec2Mm {
    fn from([x, y]: [f64; 2]) -> Self {
        Vec2Mm { x, y }
    }
}

impl From<Vec2Mm> for [f64; 2] {
    fn from(v: Vec2Mm) -> Self {
        [v.x, v.y]
    }
}

/// Geometry and spring parameters of one unit cell.
///
/// `r` is the lever length (mm), `theta_c` the travel limit (rad, strictly
/// inside `(0, pi/2)` so `cos theta > 0` over the whole range), `k` the spring
/// stiffness (N/m) and `l0` the rest length (mm).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitConfig {
    pub r: f64,
    pub theta_c: f64,
    pub k: f64,
    pub l0: f64,
    pub p: Vec2Mm,
    pub q: Vec2Mm,
}

/// Margin kept between `theta_c` and `pi/2`; the vertical force conversion
/// divides by `cos theta`.
const THETA_C_MARGIN: f64 = 1e-9;
/// Guard band for direct force evaluations near the singular verticals.
const FORCE_GUARD: f64 = 1e-6;

impl UnitConfig {
    pub fn new(r: f64, theta_c: f64, k: f64, l0: f64, p: Vec2Mm, q: Vec2Mm) -> Result<Self, ModelError> {
        let cfg = UnitConfig { r, theta_c, k, l0, p, q };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |field: &'static str, reason: String| Err(ModelError::InvalidConfig { field, reason });
        if !self.r.is_finite() || self.r <= 0.0 {
            return bad("r", format!("must be > 0 mm, got {}", self.r));
        }
        if !(self.theta_c > 0.0 && self.theta_c < std::f64::consts::FRAC_PI_2 - THETA_C_MARGIN) {
            return bad("theta_c", format!("must lie in (0, pi/2), got {}", self.theta_c));
        }
        if !self.k.is_finite() || self.k <= 0.0 {
            return bad("k", format!("must be > 0 N/m, got {}", self.k));
        }
        if !self.l0.is_finite() || self.l0 < 0.0 {
            return bad("l0", format!("must be >= 0 mm, got {}", self.l0));
        }
        for (field, v) in [("p", self.p), ("q", self.q)] {
            if !v.x.is_finite() || !v.y.is_finite() {
                return bad(field, format!("components must be finite, got ({}, {})", v.x, v.y));
            }
        }
        Ok(())
    }

    /// Vertical travel of the outer block over the full range, `2 r sin theta_c` (mm).
    pub fn travel(&self) -> f64 {
        2.0 * self.r * self.theta_c.sin()
    }
}

/// Stretched band length at angle `theta` (mm).
///
/// `l = sqrt((r cos t + q_x - p_x)^2 + (r sin t + q_y - p_y)^2)`.
pub fn spring_length(theta: f64, cfg: &UnitConfig) -> f64 {
    let ax = cfg.r * theta.cos() + cfg.q.x - cfg.p.x;
    let ay = cfg.r * theta.sin() + cfg.q.y - cfg.p.y;
    ax.hypot(ay)
}

/// d(length)/d(theta) in mm/rad.
pub(crate) fn spring_length_slope(theta: f64, cfg: &UnitConfig) -> f64 {
    let (s, c) = theta.sin_cos();
    let ax = cfg.r * c + cfg.q.x - cfg.p.x;
    let ay = cfg.r * s + cfg.q.y - cfg.p.y;
    let l = ax.hypot(ay);
    if l == 0.0 {
        return 0.0;
    }
    cfg.r * (ay * c - ax * s) / l
}

/// Strain energy at angle `theta` (J): `k/2 (l - l0)^2` with lengths in metres.
pub fn unit_energy(theta: f64, cfg: &UnitConfig) -> f64 {
    let stretch = (spring_length(theta, cfg) - cfg.l0) * MM;
    0.5 * cfg.k * stretch * stretch
}

/// dE/dtheta in J/rad.
pub(crate) fn unit_energy_slope(theta: f64, cfg: &UnitConfig) -> f64 {
    let stretch = (spring_length(theta, cfg) - cfg.l0) * MM;
    cfg.k * stretch * spring_length_slope(theta, cfg) * MM
}

/// Vertical reaction force on the outer block (N), without the singularity
/// guard. The conjugate displacement is `u = r (sin theta + sin theta_c)`, so
/// `F = (dE/dtheta) / (r cos theta)`; positive force resists upward motion.
pub(crate) fn unit_force_raw(theta: f64, cfg: &UnitConfig) -> f64 {
    unit_energy_slope(theta, cfg) / (cfg.r * MM * theta.cos())
}

/// Vertical reaction force on the outer block under displacement control (N).
///
/// Rejects angles within `1e-6` rad of the vertical, where the lever no longer
/// converts torque into vertical force.
pub fn unit_force(theta: f64, cfg: &UnitConfig) -> Result<f64, ModelError> {
    if theta.abs() > std::f64::consts::FRAC_PI_2 - FORCE_GUARD {
        return Err(ModelError::ForceSingularity { theta });
    }
    Ok(unit_force_raw(theta, cfg))
}

/// Angle of the interior energy extremum, folded into `(-pi/2, pi/2]`.
///
/// The band length is extremal where the lever aligns with the anchor offset;
/// `atan2(p_y - q_y, p_x - q_x)` resolves the quadrant and the fold keeps the
/// branch that can fall inside the travel range.
pub fn theta_energy_extremum(cfg: &UnitConfig) -> Result<f64, ModelError> {
    if cfg.p == cfg.q {
        return Err(ModelError::DegenerateAnchors);
    }
    let raw = (cfg.p.y - cfg.q.y).atan2(cfg.p.x - cfg.q.x);
    Ok(fold_principal(raw))
}

/// Fold an angle from `(-pi, pi]` into `(-pi/2, pi/2]`.
fn fold_principal(a: f64) -> f64 {
    use std::f64::consts::{FRAC_PI_2, PI};
    if a > FRAC_PI_2 {
        a - PI
    } else if a <= -FRAC_PI_2 {
        a + PI
    } else {
        a
    }
}

/// Which travel stops are stable rest configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StableStates {
    Both,
    State0Only,
    State1Only,
}

/// Stability classification of a unit cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Folded extremum angle (rad).
    pub theta_extremum: f64,
    /// True when both stops are local energy minima.
    pub bistable: bool,
    pub stable_states: StableStates,
    /// True when the band stays longer than its rest length over the whole
    /// travel range; where it does not, the linear-spring model and a real
    /// band diverge.
    pub taut_everywhere: bool,
}

const TAUT_SCAN_SAMPLES: usize = 512;

/// Classify a cell as bistable or monostable.
///
/// Bistable iff the folded extremum lies strictly inside the travel range and
/// the band is taut there (so the extremum is an energy maximum separating the
/// two stop states). Otherwise the stop with the lower energy is the single
/// stable state. Exact `|extremum| == theta_c` counts as monostable.
pub fn classify_stability(cfg: &UnitConfig) -> Result<StabilityReport, ModelError> {
    let theta_extremum = theta_energy_extremum(cfg)?;
    let taut_at_extremum = spring_length(theta_extremum, cfg) > cfg.l0;
    let bistable = theta_extremum.abs() < cfg.theta_c && taut_at_extremum;

    let mut taut_everywhere = true;
    for i in 0..=TAUT_SCAN_SAMPLES {
        let t = -cfg.theta_c + 2.0 * cfg.theta_c * (i as f64) / (TAUT_SCAN_SAMPLES as f64);
        if spring_length(t, cfg) <= cfg.l0 {
            taut_everywhere = false;
            break;
        }
    }

    let stable_states = if bistable {
        StableStates::Both
    } else {
        let e0 = unit_energy(-cfg.theta_c, cfg);
        let e1 = unit_energy(cfg.theta_c, cfg);
        if e0 <= e1 {
            StableStates::State0Only
        } else {
            StableStates::State1Only
        }
    };

    Ok(StabilityReport {
        theta_extremum,
        bistable,
        stable_states,
        taut_everywhere,
    })
}

/// One point of the quasi-static response curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSample {
    /// Lever angle (rad).
    pub theta: f64,
    /// Band length (mm).
    pub length: f64,
    /// Strain energy (J).
    pub energy: f64,
    /// Energy relative to state 0 (J).
    pub delta_energy: f64,
    /// Vertical reaction force (N).
    pub force: f64,
}

/// Sample length, energy and force curves at `n` uniform angles over the
/// travel range. `delta_energy` is measured from the first sample (state 0).
pub fn sample_curves(cfg: &UnitConfig, n: usize) -> Result<Vec<UnitSample>, ModelError> {
    if n < 2 {
        return Err(ModelError::InvalidSampleCount { n });
    }
    let e0 = unit_energy(-cfg.theta_c, cfg);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let theta = -cfg.theta_c + 2.0 * cfg.theta_c * (i as f64) / ((n - 1) as f64);
        let energy = unit_energy(theta, cfg);
        out.push(UnitSample {
            theta,
            length: spring_length(theta, cfg),
            energy,
            delta_energy: energy - e0,
            force: unit_force(theta, cfg)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn symmetric_cfg() -> UnitConfig {
        UnitConfig::new(
            14.142,
            FRAC_PI_4,
            28.5,
            10.0,
            Vec2Mm::new(-10.0, 0.0),
            Vec2Mm::new(10.0, 0.0),
        )
        .unwrap()
    }

    /// Vertical displacement of the outer block for a single cell.
    fn u_of(theta: f64, cfg: &UnitConfig) -> f64 {
        cfg.r * (theta.sin() + cfg.theta_c.sin())
    }

    /// Central finite difference of the energy with respect to u (independent
    /// force oracle; step in metres).
    fn force_fd(theta: f64, cfg: &UnitConfig) -> f64 {
        let h_m = 1e-6;
        let h_mm = h_m / MM;
        let u = u_of(theta, cfg);
        let theta_at = |u_mm: f64| ((u_mm / cfg.r) - cfg.theta_c.sin()).asin();
        let ep = unit_energy(theta_at(u + h_mm), cfg);
        let em = unit_energy(theta_at(u - h_mm), cfg);
        (ep - em) / (2.0 * h_m)
    }

    #[test]
    fn spring_length_matches_hand_evaluation() {
        let cfg = symmetric_cfg();
        let l = spring_length(FRAC_PI_4, &cfg);
        assert!((l - 31.623).abs() < 5e-4, "l = {l}");
    }

    #[test]
    fn spring_length_collapses_to_lever_for_coincident_anchors() {
        let mut cfg = symmetric_cfg();
        cfg.q = cfg.p;
        for theta in [-0.7, -0.2, 0.0, 0.33, 0.78] {
            assert!((spring_length(theta, &cfg) - cfg.r).abs() < 1e-12);
        }
    }

    #[test]
    fn spring_length_even_for_horizontal_anchors() {
        let cfg = symmetric_cfg();
        for theta in [0.1, 0.45, FRAC_PI_4] {
            let a = spring_length(theta, &cfg);
            let b = spring_length(-theta, &cfg);
            assert!((a - b).abs() < 1e-12);
        }
        assert!((spring_length(-FRAC_PI_4, &cfg) - 31.623).abs() < 5e-4);
    }

    #[test]
    fn energy_zero_at_rest_length_and_positive_elsewhere() {
        let mut cfg = symmetric_cfg();
        cfg.l0 = spring_length(0.3, &cfg);
        assert!(unit_energy(0.3, &cfg).abs() < 1e-18);
        for theta in [-0.7, -0.1, 0.5] {
            assert!(unit_energy(theta, &cfg) >= 0.0);
        }
    }

    #[test]
    fn energy_matches_hand_evaluation() {
        let cfg = symmetric_cfg();
        // l(pi/4) = 31.623 mm against l0 = 10 mm.
        let e = unit_energy(FRAC_PI_4, &cfg);
        assert!((e - 6.66e-3).abs() < 1e-5, "E = {e}");
    }

    #[test]
    fn energy_curves_match_force_integration() {
        // Independent oracle: integrate F du with the trapezoid rule and
        // compare against the closed-form energy difference.
        for (_, cfg) in presets::reference_units() {
            let n = 4000;
            let mut acc = 0.0;
            let mut prev_theta = -cfg.theta_c;
            let mut prev_f = unit_force(prev_theta, &cfg).unwrap();
            for i in 1..=n {
                let theta = -cfg.theta_c + 2.0 * cfg.theta_c * (i as f64) / (n as f64);
                let f = unit_force(theta, &cfg).unwrap();
                let du_m = (u_of(theta, &cfg) - u_of(prev_theta, &cfg)) * MM;
                acc += 0.5 * (f + prev_f) * du_m;
                let de = unit_energy(theta, &cfg) - unit_energy(-cfg.theta_c, &cfg);
                assert!(
                    (acc - de).abs() < 1e-6 + 1e-3 * de.abs(),
                    "integrated {acc} vs closed-form {de} at theta {theta}"
                );
                prev_theta = theta;
                prev_f = f;
            }
        }
    }

    #[test]
    fn force_zero_at_rest_length() {
        let mut cfg = symmetric_cfg();
        cfg.l0 = spring_length(0.25, &cfg);
        assert!(unit_force(0.25, &cfg).unwrap().abs() < 1e-12);
    }

    #[test]
    fn force_matches_finite_difference_oracle() {
        let cfg = symmetric_cfg();
        let f = unit_force(-FRAC_PI_4, &cfg).unwrap();
        assert!((f - 0.3898).abs() < 5e-4, "F = {f}");
        assert!((f - force_fd(-FRAC_PI_4, &cfg)).abs() < 1e-6 + 1e-4 * f.abs());
    }

    #[test]
    fn force_matches_finite_differences_on_random_configs() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x51ab);
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
            let fd = force_fd(theta, &cfg);
            assert!(
                (f - fd).abs() < 1e-6 + 1e-4 * f.abs(),
                "analytic {f} vs finite-difference {fd}"
            );
        }
    }

    #[test]
    fn force_antisymmetric_for_mirrored_anchors() {
        let cfg = symmetric_cfg();
        for theta in [0.1, 0.3, 0.6, FRAC_PI_4] {
            let fp = unit_force(theta, &cfg).unwrap();
            let fm = unit_force(-theta, &cfg).unwrap();
            assert!((fp + fm).abs() < 1e-10, "F({theta}) = {fp}, F(-{theta}) = {fm}");
        }
    }

    #[test]
    fn force_monotone_decreasing_for_reference_units() {
        for (name, cfg) in presets::reference_units() {
            let samples = sample_curves(&cfg, 100).unwrap();
            for w in samples.windows(2) {
                assert!(
                    w[1].force < w[0].force + 1e-12,
                    "{name}: F not decreasing at theta = {}",
                    w[1].theta
                );
            }
        }
    }

    #[test]
    fn energy_is_concave_in_displacement_for_reference_units() {
        // A monotonically decreasing reaction force means the energy, as a
        // function of the vertical displacement, curves downward.
        for (name, cfg) in presets::reference_units() {
            let n = 400;
            let u0 = u_of(-cfg.theta_c, &cfg);
            let u1 = u_of(cfg.theta_c, &cfg);
            let du = (u1 - u0) / n as f64;
            let theta_at = |u_mm: f64| ((u_mm / cfg.r) - cfg.theta_c.sin()).asin();
            for i in 1..n {
                let u = u0 + du * i as f64;
                let second = unit_energy(theta_at(u - du), &cfg) - 2.0 * unit_energy(theta_at(u), &cfg)
                    + unit_energy(theta_at(u + du), &cfg);
                assert!(
                    second <= 1e-12,
                    "{name}: convex energy segment at u = {u} mm (d2E = {second})"
                );
            }
        }
    }

    #[test]
    fn force_rejects_near_vertical_angles() {
        let cfg = symmetric_cfg();
        assert!(matches!(
            unit_force(FRAC_PI_2, &cfg),
            Err(ModelError::ForceSingularity { .. })
        ));
    }

    #[test]
    fn extremum_matches_hand_values() {
        let mut cfg = symmetric_cfg();
        assert!(theta_energy_extremum(&cfg).unwrap().abs() < 1e-12);

        cfg.q = Vec2Mm::new(0.0, -15.0);
        let t = theta_energy_extremum(&cfg).unwrap();
        assert!((t - (-0.9828)).abs() < 1e-4, "t = {t}");
        assert!(t.abs() > FRAC_PI_4);

        cfg.q = Vec2Mm::new(20.0, 15.0);
        let t = theta_energy_extremum(&cfg).unwrap();
        assert!((t - 0.4636).abs() < 1e-4, "t = {t}");
        assert!(t.abs() < FRAC_PI_4);
    }

    #[test]
    fn extremum_rejects_degenerate_anchors() {
        let mut cfg = symmetric_cfg();
        cfg.q = cfg.p;
        assert_eq!(theta_energy_extremum(&cfg), Err(ModelError::DegenerateAnchors));
        assert_eq!(
            classify_stability(&cfg).unwrap_err(),
            ModelError::DegenerateAnchors
        );
    }

    #[test]
    fn reference_units_classify_five_bistable_one_monostable() {
        let mut bistable = 0;
        for (name, cfg) in presets::reference_units() {
            let report = classify_stability(&cfg).unwrap();
            if report.bistable {
                bistable += 1;
                assert_eq!(report.stable_states, StableStates::Both, "{name}");
            } else {
                assert_eq!(name, "q0_-15", "only q=[0,-15] should be monostable");
                assert_ne!(report.stable_states, StableStates::Both);
            }
        }
        assert_eq!(bistable, 5);
    }

    #[test]
    fn extremum_exactly_at_stop_counts_as_monostable() {
        // q - p along the pi/4 direction puts the folded extremum exactly on
        // the travel limit; the strict inequality classifies it monostable.
        let cfg = UnitConfig::new(
            14.142,
            FRAC_PI_4,
            28.5,
            5.0,
            Vec2Mm::new(-10.0, 0.0),
            Vec2Mm::new(0.0, 10.0),
        )
        .unwrap();
        let report = classify_stability(&cfg).unwrap();
        assert!((report.theta_extremum - FRAC_PI_4).abs() < 1e-12);
        assert!(!report.bistable);
    }

    /// Brute-force oracle: count local minima of the energy over a dense grid.
    fn brute_force_minima(cfg: &UnitConfig, n: usize) -> usize {
        let e: Vec<f64> = (0..=n)
            .map(|i| {
                let t = -cfg.theta_c + 2.0 * cfg.theta_c * (i as f64) / (n as f64);
                unit_energy(t, cfg)
            })
            .collect();
        let mut count = 0;
        for i in 0..=n {
            let left_higher = i == 0 || e[i - 1] > e[i];
            let right_higher = i == n || e[i + 1] > e[i];
            if left_higher && right_higher {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn classification_agrees_with_brute_force_minima_count() {
        // Taut configurations with the outer anchor to the right of the inner
        // one, the geometry the stop-state model describes.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut checked = 0;
        while checked < 1000 {
            let cfg = UnitConfig::new(
                rng.gen_range(8.0..20.0),
                rng.gen_range(0.3..1.3),
                rng.gen_range(5.0..80.0),
                rng.gen_range(0.0..12.0),
                Vec2Mm::new(rng.gen_range(-20.0..-2.0), rng.gen_range(-10.0..10.0)),
                Vec2Mm::new(rng.gen_range(2.0..25.0), rng.gen_range(-15.0..15.0)),
            )
            .unwrap();
            let report = classify_stability(&cfg).unwrap();
            if !report.taut_everywhere {
                continue;
            }
            checked += 1;
            let minima = brute_force_minima(&cfg, 10_000);
            assert_eq!(
                report.bistable,
                minima == 2,
                "rule/brute-force mismatch for {cfg:?} (minima = {minima})"
            );
            if !report.bistable {
                let e0 = unit_energy(-cfg.theta_c, &cfg);
                let e1 = unit_energy(cfg.theta_c, &cfg);
                let expect = if e0 <= e1 {
                    StableStates::State0Only
                } else {
                    StableStates::State1Only
                };
                assert_eq!(report.stable_states, expect);
            }
        }
    }

    #[test]
    fn sample_curves_endpoints_and_reference_ordering() {
        let cfg = symmetric_cfg();
        let two = sample_curves(&cfg, 2).unwrap();
        assert_eq!(two.len(), 2);
        assert!((two[0].theta + cfg.theta_c).abs() < 1e-15);
        assert!((two[1].theta - cfg.theta_c).abs() < 1e-15);
        assert_eq!(two[0].delta_energy, 0.0);

        assert!(matches!(
            sample_curves(&cfg, 1),
            Err(ModelError::InvalidSampleCount { n: 1 })
        ));

        // State-0 reaction forces of the reference bundle; the strongly
        // offset q=[20,15] band produces the largest one.
        let f0: Vec<(String, f64)> = presets::reference_units()
            .into_iter()
            .map(|(name, cfg)| {
                let s = sample_curves(&cfg, 11).unwrap();
                (name.to_string(), s[0].force)
            })
            .collect();
        let max = f0
            .iter()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .unwrap();
        assert_eq!(max.0, "q20_15");
        let get = |n: &str| f0.iter().find(|(name, _)| name == n).unwrap().1;
        assert!(get("q20_0") > get("q10_0"));
        assert!(get("q10_0") > get("q0_0"));
        assert!(get("q0_0") > get("q10_-15"));
    }

    #[test]
    fn config_validation_rejects_bad_fields() {
        let ok = symmetric_cfg();
        let mut bad = ok;
        bad.r = 0.0;
        assert!(matches!(bad.validate(), Err(ModelError::InvalidConfig { field: "r", .. })));
        let mut bad = ok;
        bad.theta_c = 2.0;
        assert!(matches!(
            bad.validate(),
            Err(ModelError::InvalidConfig { field: "theta_c", .. })
        ));
        let mut bad = ok;
        bad.l0 = -1.0;
        assert!(matches!(bad.validate(), Err(ModelError::InvalidConfig { field: "l0", .. })));
    }
}
