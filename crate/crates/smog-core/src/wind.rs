//! Wind speed and direction from component fields.

use core::f64::consts::PI;

/// Convert 10 m wind components (`u` eastward, `v` northward, m/s) to speed
/// and meteorological direction.
///
/// Direction is where the wind blows *from*, in degrees clockwise from
/// north: `mod(180 + atan2(u, v)·180/π, 360)`, always in `[0, 360)`. Calm
/// air (`u = v = 0`) is reported as speed 0, direction 0 by convention.
pub fn wind(u: f64, v: f64) -> (f64, f64) {
    debug_assert!(u.is_finite() && v.is_finite());
    let speed = libm::sqrt(u * u + v * v);
    if speed == 0.0 {
        return (0.0, 0.0);
    }
    let direction = (180.0 + libm::atan2(u, v) * (180.0 / PI)) % 360.0;
    (speed, direction)
}
