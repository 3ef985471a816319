//! Calibrate the default mounted-leg friction.
//!
//! Bisects the friction magnitude that puts the forward-sequence boundary of
//! the standard chain, mounted with the default gravity load, at
//! q_out = [17.5, 0] mm, between the standalone forward build (15 mm) and
//! the mounted one (20 mm). The result is what `presets::DEFAULT_F_FRIC`
//! ships.
//!
//! Run with: cargo run --release -p seqlab-core --example calibrate_bias

use std::time::Instant;

use seqlab_core::presets;
use seqlab_core::robot::calibrate_friction;

fn main() {
    let started = Instant::now();
    let cal = calibrate_friction(presets::DEFAULT_F_GRAV, 17.5, 0.0, 0.6, 1e-3)
        .expect("calibration bracket");
    println!(
        "calibrated f_fric = {:.4} N (f_grav = {:.3} N, boundary q_x = {} mm, {} bisections, {:.2} s)",
        cal.f_fric,
        cal.f_grav,
        cal.boundary_qx,
        cal.iterations,
        started.elapsed().as_secs_f64()
    );
    println!("shipped default   = {:.4} N", presets::DEFAULT_F_FRIC);
    let drift = (cal.f_fric - presets::DEFAULT_F_FRIC).abs();
    if drift > 5e-3 {
        println!("WARNING: shipped default drifts from calibration by {drift:.4} N");
        std::process::exit(1);
    }
}
