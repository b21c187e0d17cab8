use crate::geom::{wrap_angle, Vec3};
use serde::{Deserialize, Serialize};

/// Which angle a UE reports to its serving HAPS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AoaMode {
    /// Horizontal azimuth from the HAPS to the UE, from east.
    #[default]
    Azimuth,
    /// Angle of the UE away from the nadir boresight.
    OffNadir,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoaMeasurement {
    pub angle: f64,
    /// Set when the horizontal positions coincide and the azimuth is undefined.
    pub degenerate: bool,
}

pub fn aoa(haps: Vec3, ue: Vec3, mode: AoaMode) -> AoaMeasurement {
    let horizontal = ue.xy() - haps.xy();
    let degenerate = horizontal.norm() == 0.0;
    let angle = match mode {
        AoaMode::Azimuth if degenerate => 0.0,
        AoaMode::Azimuth => wrap_angle(horizontal.angle()),
        AoaMode::OffNadir => super::offaxis_angle(haps, ue),
    };
    AoaMeasurement { angle, degenerate }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularStats {
    /// Direction of the resultant vector, in [-pi, pi).
    pub mean: f64,
    /// sqrt(-2 ln R) with R the mean resultant length.
    pub std: f64,
}

pub fn circular_stats(angles: &[f64]) -> CircularStats {
    let n = angles.len().max(1) as f64;
    let (s, c) = angles.iter().fold((0.0, 0.0), |(s, c), a| (s + a.sin(), c + a.cos()));
    let resultant = ((s / n).hypot(c / n)).clamp(1e-300, 1.0);
    CircularStats {
        mean: wrap_angle(s.atan2(c)),
        std: (-2.0 * resultant.ln()).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn azimuth_examples() {
        let h = Vec3::new(0.0, 0.0, 20_000.0);
        assert_eq!(aoa(h, Vec3::new(100.0, 0.0, 1.5), AoaMode::Azimuth).angle, 0.0);
        let north = aoa(h, Vec3::new(0.0, 100.0, 1.5), AoaMode::Azimuth);
        assert!((north.angle - PI / 2.0).abs() < 1e-12);
        let below = aoa(h, Vec3::new(0.0, 0.0, 1.5), AoaMode::Azimuth);
        assert!(below.degenerate);
        assert_eq!(below.angle, 0.0);
    }

    #[test]
    fn circular_mean_across_the_wrap() {
        let a = 179f64.to_radians();
        let st = circular_stats(&[a, -a]);
        assert!((st.mean.abs() - PI).abs() < 1e-9, "{}", st.mean);
        assert!(st.std < 0.02);
    }

    #[test]
    fn identical_angles_have_zero_spread() {
        let st = circular_stats(&[0.3; 10]);
        assert!((st.mean - 0.3).abs() < 1e-12);
        assert!(st.std < 1e-6);
    }

    #[test]
    fn opposite_angles_have_finite_large_spread() {
        let st = circular_stats(&[0.0, PI]);
        assert!(st.std.is_finite() && st.std > 3.0);
    }
}
