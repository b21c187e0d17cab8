//! Stratospheric horizontal wind.
//!
//! The wind velocity is the sum of a constant prevailing flow, a slow
//! sinusoid along the prevailing direction and a first-order autoregressive
//! residual whose stationary per-axis standard deviation is `residual_std`.
//! The process advances once per simulation frame.

use crate::error::{Result, SimError};
use crate::geom::Vec2;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindConfig {
    /// Prevailing wind speed (m/s).
    pub mean_speed: f64,
    /// Prevailing direction, radians counter-clockwise from east.
    pub mean_direction: f64,
    /// Stationary per-axis standard deviation of the residual (m/s).
    pub residual_std: f64,
    /// Frame-to-frame correlation of the residual, in [0, 1).
    pub temporal_rho: f64,
    /// Amplitude of the slow sinusoidal modulation (m/s).
    pub slow_amplitude: f64,
    /// Period of the slow modulation, in frames.
    pub slow_period: f64,
    /// Seconds per frame.
    pub dt: f64,
    /// One wind sample for all platforms (true) or one residual per platform.
    pub shared_field: bool,
    /// Metres per spatial unit of the wind field. Carried as metadata only.
    pub spatial_scale_m: f64,
}

impl Default for WindConfig {
    fn default() -> Self {
        Self {
            mean_speed: 4.0,
            mean_direction: 0.0,
            residual_std: 2.0,
            temporal_rho: 0.95,
            slow_amplitude: 1.0,
            slow_period: 128.0,
            dt: 2.0,
            shared_field: true,
            spatial_scale_m: 1000.0,
        }
    }
}

impl WindConfig {
    /// Zero-wind configuration, handy for isolating control effects.
    pub fn calm() -> Self {
        Self {
            mean_speed: 0.0,
            residual_std: 0.0,
            slow_amplitude: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = (0.0..1.0).contains(&self.temporal_rho)
            && self.residual_std >= 0.0
            && self.slow_period >= 1.0
            && self.dt > 0.0
            && self.mean_speed.is_finite()
            && self.mean_direction.is_finite()
            && self.slow_amplitude.is_finite();
        if ok {
            Ok(())
        } else {
            Err(SimError::InvalidConfig(format!("wind: {self:?}")))
        }
    }

    fn direction(&self) -> Vec2 {
        Vec2::from_angle(self.mean_direction)
    }

    /// Standard deviation of each AR(1) innovation.
    pub fn innovation_std(&self) -> f64 {
        self.residual_std * (1.0 - self.temporal_rho * self.temporal_rho).sqrt()
    }
}

/// Residual memory of the wind process.
#[derive(Debug, Clone, PartialEq)]
pub struct WindState {
    /// One entry when the field is shared, otherwise one per platform.
    pub residual: Vec<Vec2>,
    pub frame_index: u64,
}

impl WindState {
    pub fn zero(channels: usize) -> Self {
        Self {
            residual: vec![Vec2::ZERO; channels],
            frame_index: 0,
        }
    }

    /// Residuals drawn from the stationary distribution.
    pub fn stationary<R: Rng + ?Sized>(cfg: &WindConfig, channels: usize, rng: &mut R) -> Self {
        let residual = (0..channels)
            .map(|_| unit_gaussian_pair(rng) * cfg.residual_std)
            .collect();
        Self {
            residual,
            frame_index: 0,
        }
    }
}

pub fn unit_gaussian_pair<R: Rng + ?Sized>(rng: &mut R) -> Vec2 {
    let x: f64 = rng.sample(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    Vec2::new(x, y)
}

pub fn mean_flow(cfg: &WindConfig) -> Vec2 {
    cfg.direction() * cfg.mean_speed
}

pub fn slow_variation(cfg: &WindConfig, frame: u64) -> Vec2 {
    let phase = TAU * frame as f64 / cfg.slow_period;
    cfg.direction() * (cfg.slow_amplitude * phase.sin())
}

/// One AR(1) step for a single residual channel.
pub fn ar1_residual(residual: Vec2, cfg: &WindConfig, noise: Vec2) -> Vec2 {
    residual * cfg.temporal_rho + noise * cfg.innovation_std()
}

/// Advances every residual channel with the given unit-Gaussian noise.
pub fn ar1_step(state: &WindState, cfg: &WindConfig, noise: &[Vec2]) -> WindState {
    debug_assert_eq!(noise.len(), state.residual.len());
    WindState {
        residual: state
            .residual
            .iter()
            .zip(noise)
            .map(|(&r, &n)| ar1_residual(r, cfg, n))
            .collect(),
        frame_index: state.frame_index + 1,
    }
}

/// Wind velocity seen on residual channel `channel`.
pub fn wind_velocity(state: &WindState, cfg: &WindConfig, channel: usize) -> Vec2 {
    mean_flow(cfg) + slow_variation(cfg, state.frame_index) + state.residual[channel]
}

/// A wind process owning its state and its random stream.
#[derive(Debug, Clone)]
pub struct WindProcess<R> {
    cfg: WindConfig,
    state: WindState,
    rng: R,
}

impl<R: Rng> WindProcess<R> {
    /// Starts at frame 0 with residuals drawn from the stationary law.
    pub fn new(cfg: WindConfig, platforms: usize, mut rng: R) -> Self {
        let channels = if cfg.shared_field { 1 } else { platforms };
        let state = WindState::stationary(&cfg, channels, &mut rng);
        Self { cfg, state, rng }
    }

    pub fn config(&self) -> &WindConfig {
        &self.cfg
    }

    pub fn state(&self) -> &WindState {
        &self.state
    }

    pub fn advance(&mut self) {
        let noise: Vec<Vec2> = (0..self.state.residual.len())
            .map(|_| unit_gaussian_pair(&mut self.rng))
            .collect();
        self.state = ar1_step(&self.state, &self.cfg, &noise);
    }

    /// Current wind for each of `platforms` platforms.
    pub fn velocities(&self, platforms: usize) -> Vec<Vec2> {
        (0..platforms)
            .map(|d| {
                let channel = if self.cfg.shared_field { 0 } else { d };
                wind_velocity(&self.state, &self.cfg, channel)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};

    fn close(a: Vec2, b: Vec2, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn slow_variation_quarter_and_half_period() {
        let cfg = WindConfig::default();
        assert_eq!(slow_variation(&cfg, 0), Vec2::ZERO);
        assert!(close(slow_variation(&cfg, 32), Vec2::new(1.0, 0.0), 1e-15));
        assert!(close(slow_variation(&cfg, 64), Vec2::ZERO, 1e-12));
    }

    #[test]
    fn ar1_zero_fixed_point_and_decay() {
        let cfg = WindConfig::default();
        let zero = WindState::zero(1);
        let next = ar1_step(&zero, &cfg, &[Vec2::ZERO]);
        assert_eq!(next.residual[0], Vec2::ZERO);
        assert_eq!(next.frame_index, 1);

        let one = WindState {
            residual: vec![Vec2::new(1.0, 0.0)],
            frame_index: 0,
        };
        let next = ar1_step(&one, &cfg, &[Vec2::ZERO]);
        assert!(close(next.residual[0], Vec2::new(0.95, 0.0), 1e-15));
    }

    #[test]
    fn pure_decay_follows_rho_power() {
        let cfg = WindConfig::default();
        let mut state = WindState {
            residual: vec![Vec2::new(3.0, -4.0)],
            frame_index: 0,
        };
        for t in 1..=200 {
            state = ar1_step(&state, &cfg, &[Vec2::ZERO]);
            let expected = cfg.temporal_rho.powi(t) * 5.0;
            let got = state.residual[0].norm();
            assert!((got - expected).abs() <= 1e-12 * expected.max(1e-300), "t={t}");
        }
    }

    #[test]
    fn velocity_component_isolation() {
        let state = WindState {
            residual: vec![Vec2::new(0.3, -0.7)],
            frame_index: 17,
        };
        let only_mean = WindConfig {
            residual_std: 0.0,
            slow_amplitude: 0.0,
            ..WindConfig::default()
        };
        let calm_state = WindState::zero(1);
        for frame in [0u64, 5, 99] {
            let s = WindState {
                frame_index: frame,
                ..calm_state.clone()
            };
            assert_eq!(wind_velocity(&s, &only_mean, 0), Vec2::new(4.0, 0.0));
        }
        let only_residual = WindConfig {
            mean_speed: 0.0,
            slow_amplitude: 0.0,
            ..WindConfig::default()
        };
        assert_eq!(wind_velocity(&state, &only_residual, 0), state.residual[0]);

        let at_peak = WindState {
            residual: vec![Vec2::ZERO],
            frame_index: 32,
        };
        assert!(close(
            wind_velocity(&at_peak, &WindConfig::default(), 0),
            Vec2::new(5.0, 0.0),
            1e-12
        ));
    }

    #[test]
    fn long_run_std_matches_stationary_target() {
        let cfg = WindConfig::default();
        let mut rng = stream(11, Stream::Wind);
        let mut r = Vec2::ZERO;
        let n = 1_000_000;
        let (mut sx, mut sxx, mut sy, mut syy) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            r = ar1_residual(r, &cfg, unit_gaussian_pair(&mut rng));
            sx += r.x;
            sxx += r.x * r.x;
            sy += r.y;
            syy += r.y * r.y;
        }
        let nf = n as f64;
        let std_x = (sxx / nf - (sx / nf).powi(2)).sqrt();
        let std_y = (syy / nf - (sy / nf).powi(2)).sqrt();
        assert!((std_x - 2.0).abs() < 0.05, "std_x={std_x}");
        assert!((std_y - 2.0).abs() < 0.05, "std_y={std_y}");
    }

    #[test]
    fn identical_seeds_give_identical_trajectories() {
        let run = || {
            let mut w = WindProcess::new(WindConfig::default(), 3, stream(5, Stream::Wind));
            (0..500)
                .map(|_| {
                    w.advance();
                    w.velocities(3)[0]
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn per_platform_mode_has_independent_residuals() {
        let cfg = WindConfig {
            shared_field: false,
            ..WindConfig::default()
        };
        let mut w = WindProcess::new(cfg, 3, stream(5, Stream::Wind));
        w.advance();
        let v = w.velocities(3);
        assert_ne!(v[0], v[1]);
        let shared = WindProcess::new(WindConfig::default(), 3, stream(5, Stream::Wind));
        let v = shared.velocities(3);
        assert_eq!(v[0], v[2]);
    }

    #[test]
    fn rejects_bad_rho() {
        let cfg = WindConfig {
            temporal_rho: 1.0,
            ..WindConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
