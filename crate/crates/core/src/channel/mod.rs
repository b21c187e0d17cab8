//! Downlink radio model: large-scale gain, reflector pattern, Rician
//! fading, per-RB SINR with inter-HAPS interference, capacity-based
//! effective SINR, round-robin throughput and the log-fair objective.

mod antenna;
mod aoa;
mod fading;
mod link;
mod pathloss;
mod rate;

pub use antenna::{offaxis_angle, reflector_gain, reflector_pattern, BESSEL_J1_FIRST_ZERO};
pub use aoa::{aoa, circular_stats, AoaMeasurement, AoaMode, CircularStats};
pub use fading::rician_sample;
pub use link::{compute_frame, link_budget_rows, sinr_per_rb, FrameRadio, LinkBudgetRow, LinkState};
pub use pathloss::{fspl_gain, pathloss_gain};
pub use rate::{effective_sinr, fair_rate, ue_throughput, FairRate, RATE_FLOOR_LOG10_MBPS};

use crate::error::{Result, SimError};
use serde::{Deserialize, Serialize};

/// Speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Constant attenuation terms added on top of free-space loss (dB).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtraAttenuation {
    pub gaseous: f64,
    pub rain: f64,
    pub cloud: f64,
    pub scintillation: f64,
    pub clutter: f64,
}

impl Default for ExtraAttenuation {
    fn default() -> Self {
        Self {
            gaseous: 0.5,
            rain: 0.0,
            cloud: 0.0,
            scintillation: 0.0,
            clutter: 0.0,
        }
    }
}

impl ExtraAttenuation {
    pub fn none() -> Self {
        Self {
            gaseous: 0.0,
            ..Self::default()
        }
    }

    pub fn total_db(&self) -> f64 {
        self.clutter + self.gaseous + self.rain + self.cloud + self.scintillation
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    pub carrier_hz: f64,
    /// Bandwidth of each HAPS carrier (Hz).
    pub total_bw_hz: f64,
    /// Resource blocks per carrier.
    pub num_rb: usize,
    /// Transmit power per HAPS, split equally over the RBs (dBm).
    pub tx_power_dbm: f64,
    pub noise_dbm_per_mhz: f64,
    pub rician_k_db: f64,
    pub shadowing_std_db: f64,
    pub boresight_gain_dbi: f64,
    /// Radius of the circular reflector aperture (m).
    pub aperture_radius_m: f64,
    pub extra_atten_db: ExtraAttenuation,
    pub aoa_mode: AoaMode,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            carrier_hz: 3.5e9,
            total_bw_hz: 100e6,
            num_rb: 25,
            tx_power_dbm: 55.0,
            noise_dbm_per_mhz: -114.0,
            rician_k_db: 10.0,
            shadowing_std_db: 4.0,
            boresight_gain_dbi: 30.0,
            aperture_radius_m: 1.714,
            extra_atten_db: ExtraAttenuation::default(),
            aoa_mode: AoaMode::Azimuth,
        }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.carrier_hz,
            self.total_bw_hz,
            self.tx_power_dbm,
            self.noise_dbm_per_mhz,
            self.boresight_gain_dbi,
            self.aperture_radius_m,
            self.shadowing_std_db,
            self.extra_atten_db.total_db(),
        ]
        .iter()
        .all(|v| v.is_finite());
        // An infinite K-factor is the pure line-of-sight limit.
        let ok = finite
            && self.num_rb >= 1
            && self.carrier_hz > 0.0
            && self.total_bw_hz > 0.0
            && self.aperture_radius_m > 0.0
            && self.shadowing_std_db >= 0.0
            && !self.rician_k_db.is_nan()
            && self.rician_k_linear() >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(SimError::InvalidConfig(format!("radio: {self:?}")))
        }
    }

    pub fn rb_bandwidth_hz(&self) -> f64 {
        self.total_bw_hz / self.num_rb as f64
    }

    /// Noise power in one RB (dBm).
    pub fn noise_per_rb_dbm(&self) -> f64 {
        self.noise_dbm_per_mhz + linear_to_db(self.rb_bandwidth_hz() / 1e6)
    }

    pub fn noise_per_rb_mw(&self) -> f64 {
        db_to_linear(self.noise_per_rb_dbm())
    }

    /// Transmit power on one RB (mW).
    pub fn tx_per_rb_mw(&self) -> f64 {
        db_to_linear(self.tx_power_dbm) / self.num_rb as f64
    }

    pub fn rician_k_linear(&self) -> f64 {
        db_to_linear(self.rician_k_db)
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    /// Centre frequency of RB `k`.
    pub fn rb_frequency_hz(&self, k: usize) -> f64 {
        let offset = k as f64 - (self.num_rb as f64 - 1.0) / 2.0;
        self.carrier_hz + offset * self.rb_bandwidth_hz()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_rb_noise_at_four_mhz() {
        let cfg = RadioConfig::default();
        assert!((cfg.rb_bandwidth_hz() - 4e6).abs() < 1e-6);
        assert!((cfg.noise_per_rb_dbm() + 107.9794).abs() < 1e-3);
    }

    #[test]
    fn aperture_is_twenty_wavelengths() {
        let cfg = RadioConfig::default();
        assert!((cfg.aperture_radius_m / cfg.wavelength_m() - 20.0).abs() < 2e-2);
    }
}
