//! Angle helpers shared by every guidance law.

use std::f64::consts::{PI, TAU};

/// Wraps an angle to the principal interval (-pi, pi].
#[inline]
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Wrapped difference `a - b`.
#[inline]
pub fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_angle(a - b)
}
