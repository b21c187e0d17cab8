use super::{db_to_linear, RadioConfig, SPEED_OF_LIGHT};
use std::f64::consts::PI;

/// Free-space power gain (c / (4 pi d f))^2.
pub fn fspl_gain(distance_m: f64, carrier_hz: f64) -> f64 {
    let ratio = SPEED_OF_LIGHT / (4.0 * PI * distance_m * carrier_hz);
    ratio * ratio
}

/// Free-space gain reduced by the configured constant attenuations.
pub fn pathloss_gain(distance_m: f64, cfg: &RadioConfig) -> f64 {
    fspl_gain(distance_m, cfg.carrier_hz) / db_to_linear(cfg.extra_atten_db.total_db())
}

#[cfg(test)]
mod tests {
    use super::super::{linear_to_db, ExtraAttenuation};
    use super::*;

    #[test]
    fn golden_fspl_at_twenty_km() {
        let db = linear_to_db(fspl_gain(20_000.0, 3.5e9));
        assert!((db + 129.35).abs() < 0.01, "{db}");
    }

    #[test]
    fn inverse_square_and_unit_distance() {
        let g1 = linear_to_db(fspl_gain(1234.0, 2e9));
        let g2 = linear_to_db(fspl_gain(2468.0, 2e9));
        assert!((g1 - g2 - 20.0 * 2f64.log10()).abs() < 1e-9);
        let f = 3.5e9;
        let d0 = SPEED_OF_LIGHT / (4.0 * PI * f);
        assert!(linear_to_db(fspl_gain(d0, f)).abs() < 1e-9);
    }

    #[test]
    fn extra_terms_add_in_db() {
        let mut cfg = RadioConfig {
            extra_atten_db: ExtraAttenuation::none(),
            ..RadioConfig::default()
        };
        assert_eq!(pathloss_gain(20_000.0, &cfg), fspl_gain(20_000.0, cfg.carrier_hz));
        cfg.extra_atten_db.rain = 1.0;
        cfg.extra_atten_db.cloud = 1.5;
        cfg.extra_atten_db.clutter = 0.5;
        let diff = linear_to_db(fspl_gain(20_000.0, cfg.carrier_hz)) - linear_to_db(pathloss_gain(20_000.0, &cfg));
        assert!((diff - 3.0).abs() < 1e-9);
        let default_db = linear_to_db(pathloss_gain(20_000.0, &RadioConfig::default()));
        assert!((default_db + 129.85).abs() < 0.01, "{default_db}");
    }
}
