use super::{db_to_linear, RadioConfig, SPEED_OF_LIGHT};
use crate::geom::Vec3;
use std::f64::consts::PI;

/// First positive zero of J1.
pub const BESSEL_J1_FIRST_ZERO: f64 = 3.831_705_970_207_512;

/// Normalized circular-aperture power pattern 4 |J1(x)/x|^2, x = k a sin(theta).
pub fn reflector_pattern(offaxis_rad: f64, cfg: &RadioConfig) -> f64 {
    let k = 2.0 * PI * cfg.carrier_hz / SPEED_OF_LIGHT;
    let x = k * cfg.aperture_radius_m * offaxis_rad.sin();
    if x.abs() < 1e-8 {
        return 1.0;
    }
    let amp = 2.0 * libm::j1(x) / x;
    amp * amp
}

/// Reflector gain towards a direction `offaxis_rad` away from nadir (linear).
pub fn reflector_gain(offaxis_rad: f64, cfg: &RadioConfig) -> f64 {
    db_to_linear(cfg.boresight_gain_dbi) * reflector_pattern(offaxis_rad, cfg)
}

/// Angle between the nadir boresight of a platform at `haps` and the ray to `ue`.
pub fn offaxis_angle(haps: Vec3, ue: Vec3) -> f64 {
    let delta = ue - haps;
    delta.xy().norm().atan2(-delta.z)
}
