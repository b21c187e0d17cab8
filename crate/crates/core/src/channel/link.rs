use super::{
    aoa, db_to_linear, effective_sinr, fair_rate, linear_to_db, offaxis_angle, pathloss_gain, reflector_gain,
    rician_sample, ue_throughput, FairRate, RadioConfig, SPEED_OF_LIGHT,
};
use crate::mobility::{AreaConfig, WorldState};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::TAU;

/// Random link state: shadowing held for an episode, fading redrawn per frame.
///
/// UEs are indexed globally as `hotspot * ues_per_hotspot + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkState {
    num_haps: usize,
    num_rb: usize,
    /// `[ue * num_haps + d]`, dB.
    pub shadowing_db: Vec<f64>,
    /// `[(ue * num_haps + d) * num_rb + k]`.
    pub fading: Vec<Complex64>,
}

impl LinkState {
    pub fn new<R: Rng + ?Sized>(area: &AreaConfig, radio: &RadioConfig, rng: &mut R) -> Self {
        let num_ues = area.num_hotspots() * area.ues_per_hotspot;
        let num_haps = area.num_haps;
        let shadowing_db = (0..num_ues * num_haps)
            .map(|_| radio.shadowing_std_db * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Self {
            num_haps,
            num_rb: radio.num_rb,
            shadowing_db,
            fading: vec![Complex64::new(1.0, 0.0); num_ues * num_haps * radio.num_rb],
        }
    }

    /// Redraws every fading coefficient for the current geometry.
    pub fn redraw_fading<R: Rng + ?Sized>(
        &mut self,
        world: &WorldState,
        area: &AreaConfig,
        radio: &RadioConfig,
        rng: &mut R,
    ) {
        let mut idx = 0;
        for h in 0..world.hotspot_xy.len() {
            for i in 0..area.ues_per_hotspot {
                let ue = world.ue_position(area, h, i);
                for d in 0..self.num_haps {
                    let path = (ue - world.haps_position(area, d)).norm();
                    for k in 0..self.num_rb {
                        let cycles = (path * radio.rb_frequency_hz(k) / SPEED_OF_LIGHT).fract();
                        self.fading[idx] = rician_sample(radio, rng, -TAU * cycles);
                        idx += 1;
                    }
                }
            }
        }
    }

    pub fn fading_power(&self, ue: usize, d: usize, k: usize) -> f64 {
        self.fading[(ue * self.num_haps + d) * self.num_rb + k].norm_sqr()
    }
}

/// Per-RB downlink SINR of one UE.
///
/// `beta[d]` is the large-scale gain from HAPS `d`, `fading_power[d]` the
/// corresponding `|h|^2` on this RB. Every HAPS transmits on every RB.
pub fn sinr_per_rb(beta: &[f64], fading_power: &[f64], serving: usize, radio: &RadioConfig) -> f64 {
    let w = radio.tx_per_rb_mw();
    let signal = beta[serving] * fading_power[serving] * w;
    let interference: f64 = beta
        .iter()
        .zip(fading_power)
        .enumerate()
        .filter(|(d, _)| *d != serving)
        .map(|(_, (b, g))| b * g * w)
        .sum();
    signal / (interference + radio.noise_per_rb_mw())
}

/// Radio quantities of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRadio {
    /// `[ue * num_haps + d]`, linear.
    pub beta: Vec<f64>,
    /// `[ue * num_rb + k]`, linear.
    pub sinr_rb: Vec<f64>,
    /// Effective SINR per UE, linear.
    pub effective_sinr: Vec<f64>,
    /// Throughput per UE (bit/s).
    pub throughput: Vec<f64>,
    /// Angle reported by each UE to its serving HAPS (rad).
    pub aoa: Vec<f64>,
    /// Number of UE reports with an undefined azimuth.
    pub degenerate_aoa: usize,
    pub fair: FairRate,
}

impl FrameRadio {
    pub fn sum_throughput_mbps(&self) -> f64 {
        self.throughput.iter().sum::<f64>() / 1e6
    }
}

fn large_scale_gain(
    world: &WorldState,
    area: &AreaConfig,
    radio: &RadioConfig,
    links: &LinkState,
    hotspot: usize,
    i: usize,
    d: usize,
) -> f64 {
    let ue_index = hotspot * area.ues_per_hotspot + i;
    let ue = world.ue_position(area, hotspot, i);
    let haps = world.haps_position(area, d);
    let distance = (ue - haps).norm();
    pathloss_gain(distance, radio)
        * db_to_linear(links.shadowing_db[ue_index * area.num_haps + d])
        * reflector_gain(offaxis_angle(haps, ue), radio)
}

/// Evaluates SINR, throughput and the fair rate for the current geometry.
/// Hotspot `h` is served by HAPS `h`.
pub fn compute_frame(world: &WorldState, area: &AreaConfig, radio: &RadioConfig, links: &LinkState) -> FrameRadio {
    let num_haps = area.num_haps;
    let n = area.ues_per_hotspot;
    let num_ues = world.hotspot_xy.len() * n;
    let k_rb = radio.num_rb;

    let mut beta = Vec::with_capacity(num_ues * num_haps);
    let mut aoas = Vec::with_capacity(num_ues);
    let mut degenerate_aoa = 0;
    for h in 0..world.hotspot_xy.len() {
        for i in 0..n {
            for d in 0..num_haps {
                beta.push(large_scale_gain(world, area, radio, links, h, i, d));
            }
            let m = aoa(
                world.haps_position(area, h),
                world.ue_position(area, h, i),
                radio.aoa_mode,
            );
            degenerate_aoa += usize::from(m.degenerate);
            aoas.push(m.angle);
        }
    }

    let mut sinr_rb = Vec::with_capacity(num_ues * k_rb);
    let mut effective = Vec::with_capacity(num_ues);
    let mut throughput = Vec::with_capacity(num_ues);
    let mut gains = vec![0.0; num_haps];
    for ue in 0..num_ues {
        let serving = ue / n;
        let row = &beta[ue * num_haps..(ue + 1) * num_haps];
        let start = sinr_rb.len();
        for k in 0..k_rb {
            for (d, g) in gains.iter_mut().enumerate() {
                *g = links.fading_power(ue, d, k);
            }
            sinr_rb.push(sinr_per_rb(row, &gains, serving, radio));
        }
        let eff = effective_sinr(&sinr_rb[start..]);
        effective.push(eff);
        throughput.push(ue_throughput(eff, radio, n));
    }
    let fair = fair_rate(throughput.chunks(n));
    FrameRadio {
        beta,
        sinr_rb,
        effective_sinr: effective,
        throughput,
        aoa: aoas,
        degenerate_aoa,
        fair,
    }
}

/// Link-budget breakdown of one UE/HAPS pair, for debugging exports.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudgetRow {
    pub ue: usize,
    pub haps: usize,
    pub fspl_db: f64,
    pub antenna_db: f64,
    pub shadow_db: f64,
    /// Effective SINR of the UE on its serving link.
    pub sinr_db: f64,
}

impl LinkBudgetRow {
    pub const HEADER: &'static str = "ue,haps,fspl_db,antenna_db,shadow_db,sinr_db";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.ue, self.haps, self.fspl_db, self.antenna_db, self.shadow_db, self.sinr_db
        )
    }
}

pub fn link_budget_rows(
    world: &WorldState,
    area: &AreaConfig,
    radio: &RadioConfig,
    links: &LinkState,
    frame: &FrameRadio,
) -> Vec<LinkBudgetRow> {
    let mut rows = Vec::new();
    for h in 0..world.hotspot_xy.len() {
        for i in 0..area.ues_per_hotspot {
            let ue = h * area.ues_per_hotspot + i;
            let pos = world.ue_position(area, h, i);
            for d in 0..area.num_haps {
                let haps = world.haps_position(area, d);
                rows.push(LinkBudgetRow {
                    ue,
                    haps: d,
                    fspl_db: -linear_to_db(super::fspl_gain((pos - haps).norm(), radio.carrier_hz)),
                    antenna_db: linear_to_db(reflector_gain(offaxis_angle(haps, pos), radio)),
                    shadow_db: links.shadowing_db[ue * area.num_haps + d],
                    sinr_db: linear_to_db(frame.effective_sinr[ue]),
                });
            }
        }
    }
    rows
}
