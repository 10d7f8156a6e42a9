//! Angle reporting helpers. Every phase leaves the crate in (−π, π].

use std::f64::consts::{PI, TAU};

/// Wraps an angle into (−π, π]; −π itself maps to π.
pub fn wrap(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    if a <= -PI {
        a += TAU;
    }
    a
}

/// Distance between two angles on the circle, in [0, π].
pub fn distance(a: f64, b: f64) -> f64 {
    wrap(a - b).abs()
}
