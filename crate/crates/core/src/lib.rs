//! Deterministic simulator of a UAV that inspects a building facade: layered
//! perimeter planning, IMU-only pose estimation, PID tracking with reactive
//! obstacle avoidance, timed image capture with crack classification, and a
//! second flight that revisits each detected fault.

// `!(x > 0.0)` is how validation rejects NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attitude;
pub mod control;
pub mod error;
pub mod estimation;
pub mod mission;
pub mod perception;
pub mod planner;
pub mod scenes;
pub mod sensors;
pub mod sweep;
pub mod vehicle;
pub mod world;

pub use error::SpecError;

/// Standard gravity (m/s²).
pub const GRAVITY: f64 = 9.81;

/// Plain decimal with 9 significant digits, no exponent. Negative zero prints as `0`.
pub fn fmt_sig9(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    // rounding may carry into the next decade, so ask the formatter for the exponent
    let sci = format!("{:.8e}", x);
    let exp = sci.split_once('e').and_then(|(_, e)| e.parse::<i32>().ok()).unwrap_or(exp);
    let decimals = (8 - exp).max(0) as usize;
    let rounded: f64 = sci.parse().unwrap_or(x);
    let s = format!("{:.*}", decimals, rounded);
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        return "0".to_string();
    }
    s
}
