//! One-dimensional local descent on a bracketed interval.
//!
//! The constrained chain reduces to minimising a smooth function of the inner
//! angle over a closed interval. Continuation wants the *local* minimiser
//! reached by descending from a seed, not the global one, so the solver walks
//! from the seed in the downhill direction and stops at the first point where
//! the descent drive is exhausted. A non-negative threshold `tau` models
//! dry friction: motion parks where `|gradient| <= tau`. With `tau == 0` this
//! is plain descent to a stationary point.

/// Iteration limits and tolerances for the walk.
#[derive(Debug, Clone, Copy)]
pub(crate) struct WalkParams {
    /// Gradient magnitude treated as converged (same units as the gradient).
    pub gtol: f64,
    /// March resolution: the interval is traversed in steps of
    /// `(hi - lo) / walk_steps`.
    pub walk_steps: usize,
    /// Cap on root-refinement bisection iterations.
    pub max_iters: usize,
}

pub(crate) enum WalkOutcome {
    Converged(f64),
    /// Bisection budget exhausted; carries the last iterate.
    IterationsExhausted(f64),
}

/// Descend `energy` from `t0` within `[lo, hi]`.
///
/// `grad` is the derivative of `energy`; `tau(t) >= 0` is the friction
/// threshold. Returns the first point along the descent direction where the
/// drive `-d * grad(t)` falls to `tau(t)`, or the interval end if the drive
/// never relents. Seeds sitting on a local maximum are nudged toward the
/// lower neighbouring side.
pub(crate) fn descend(
    energy: impl Fn(f64) -> f64,
    grad: impl Fn(f64) -> f64,
    tau: impl Fn(f64) -> f64,
    t0: f64,
    lo: f64,
    hi: f64,
    params: &WalkParams,
) -> WalkOutcome {
    debug_assert!(lo <= hi);
    let width = hi - lo;
    if width < 1e-13 {
        return WalkOutcome::Converged(lo);
    }
    let t0 = t0.clamp(lo, hi);
    let g0 = grad(t0);

    let mut dir = -g0.signum();
    if g0.abs() <= tau(t0) + params.gtol {
        // Stuck or stationary. A stationary interior seed can still sit on a
        // maximum; check the neighbours and roll off if so.
        let h = width * 1e-7;
        if tau(t0) == 0.0 && t0 - h > lo && t0 + h < hi {
            let e0 = energy(t0);
            let (el, er) = (energy(t0 - h), energy(t0 + h));
            if el < e0 || er < e0 {
                dir = if el < er { -1.0 } else { 1.0 };
            } else {
                return WalkOutcome::Converged(t0);
            }
        } else {
            return WalkOutcome::Converged(t0);
        }
    }
    // At an interval end with the descent pointing outward there is nowhere
    // to go.
    if (t0 <= lo && dir < 0.0) || (t0 >= hi && dir > 0.0) {
        return WalkOutcome::Converged(t0);
    }

    // Drive along the walk: positive while the slope exceeds friction.
    let drive = |t: f64| -dir * grad(t) - tau(t);

    let step = width / params.walk_steps as f64;
    let mut prev = t0;
    loop {
        let next = if dir > 0.0 {
            (prev + step).min(hi)
        } else {
            (prev - step).max(lo)
        };
        if drive(next) <= 0.0 {
            // Drive exhausted inside (prev, next]: bisect for the parking point.
            let root = bisect_drive(&drive, prev, next, params);
            return root;
        }
        if next <= lo || next >= hi {
            return WalkOutcome::Converged(next);
        }
        prev = next;
    }
}

fn bisect_drive(drive: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, params: &WalkParams) -> WalkOutcome {
    // drive(a) > 0 >= drive(b); shrink onto the crossing.
    for _ in 0..params.max_iters {
        let mid = 0.5 * (a + b);
        if (b - a).abs() < 1e-13 {
            return WalkOutcome::Converged(mid);
        }
        let d = drive(mid);
        if d.abs() <= params.gtol {
            return WalkOutcome::Converged(mid);
        }
        if d > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    WalkOutcome::IterationsExhausted(0.5 * (a + b))
}
