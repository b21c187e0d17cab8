//! Fast invariant suite behind the `check` command.

use super::config::RunConfig;
use crate::channel::{
    effective_sinr, fair_rate, fspl_gain, linear_to_db, reflector_pattern, rician_sample, RadioConfig,
    BESSEL_J1_FIRST_ZERO,
};
use crate::env::HapsEnv;
use crate::mobility::{Action, Scenario};
use crate::ppo::{grad_check, ActorCritic, Batch, LossCoefficients, NetConfig};
use crate::rng::{stream, Stream};
use crate::wind::WindProcess;
use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn result(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

fn link_budget() -> CheckResult {
    let radio = RadioConfig::default();
    let fspl = -linear_to_db(fspl_gain(20_000.0, 3.5e9));
    // Off-axis angle whose pattern argument is the first J1 zero.
    let k = 2.0 * PI * radio.carrier_hz / crate::channel::SPEED_OF_LIGHT;
    let theta = (BESSEL_J1_FIRST_ZERO / (k * radio.aperture_radius_m)).asin();
    let null = reflector_pattern(theta, &radio);
    let noise = radio.noise_per_rb_dbm();
    let ok = (fspl - 129.35).abs() <= 0.01 && null < 1e-9 && (noise + 107.98).abs() <= 0.01;
    result(
        "link budget",
        ok,
        format!("FSPL {fspl:.3} dB, pattern at first null {null:.1e}, noise/RB {noise:.3} dBm"),
    )
}

fn reward_calibration(cfg: &RunConfig) -> CheckResult {
    let r50 = cfg.reward.reward(50.0);
    let r54 = cfg.reward.reward(54.0);
    let ok = cfg.reward.c_s != 0.25 || cfg.reward.c_m != 50.0 || (r50 == 0.5 && (r54 - 0.7311).abs() < 1e-4);
    result("reward calibration", ok, format!("R(50) = {r50}, R(54) = {r54:.5}"))
}

fn wind_statistics(cfg: &RunConfig) -> CheckResult {
    let frames = 20_000;
    let mut wind = WindProcess::new(cfg.wind.clone(), 1, stream(cfg.master_seed, Stream::Wind));
    let xs: Vec<f64> = (0..frames)
        .map(|_| {
            wind.advance();
            wind.state().residual[0].x
        })
        .collect();
    let mean = xs.iter().sum::<f64>() / frames as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / frames as f64;
    let lag1 = xs.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>() / ((frames - 1) as f64 * var);
    let std = var.sqrt();
    let target = cfg.wind.residual_std;
    let ok = target == 0.0 || ((std - target).abs() < 0.1 * target && (lag1 - cfg.wind.temporal_rho).abs() < 0.05);
    result(
        "wind statistics",
        ok,
        format!("residual std {std:.3} m/s, lag-1 autocorrelation {lag1:.3}"),
    )
}

fn rician_power(cfg: &RunConfig) -> CheckResult {
    let mut rng = stream(cfg.master_seed, Stream::Fading);
    let n = 100_000;
    let p = (0..n)
        .map(|i| rician_sample(&cfg.radio, &mut rng, i as f64 * 0.1).norm_sqr())
        .sum::<f64>()
        / n as f64;
    result("fading power", (p - 1.0).abs() < 0.02, format!("E|h|^2 = {p:.4}"))
}

fn rate_properties(cfg: &RunConfig) -> CheckResult {
    let mut rng = stream(cfg.master_seed, Stream::Baseline);
    let mut ok = true;
    for _ in 0..1000 {
        let v: Vec<f64> = (0..8).map(|_| 10f64.powf(rng.random_range(-2.0..3.0))).collect();
        let e = effective_sinr(&v);
        let (lo, hi) = v.iter().fold((f64::MAX, f64::MIN), |(l, h), &x| (l.min(x), h.max(x)));
        ok &= e >= lo * (1.0 - 1e-12) && e <= hi * (1.0 + 1e-12);
        let rates: Vec<f64> = (0..5).map(|_| rng.random_range(0.1..50.0)).collect();
        let mut bumped = rates.clone();
        bumped[rng.random_range(0..5)] *= 1.01;
        ok &= fair_rate([bumped.as_slice()]).value > fair_rate([rates.as_slice()]).value;
    }
    result(
        "rate properties",
        ok,
        "ESM sandwich and fair-rate monotonicity on 1000 draws".into(),
    )
}

fn gradients(cfg: &RunConfig) -> CheckResult {
    let net = NetConfig {
        hidden_layers: 2,
        hidden_width: 4,
        policy_gain: 0.5,
        ..NetConfig::default()
    };
    let mut rng = stream(cfg.master_seed, Stream::Init);
    let model = ActorCritic::new(&net, 4, 1, 50.0, &mut rng);
    let n = 8;
    let obs = Array2::from_shape_fn((n, 4), |_| rng.sample(StandardNormal));
    let mut raw = Array2::zeros((n, 2));
    let mut eps = Array2::zeros((n, 2));
    let mut old = Vec::new();
    for i in 0..n {
        let s = model.act(&obs.row(i).to_vec(), &mut rng).expect("matching dimension");
        for j in 0..2 {
            raw[[i, j]] = s.raw[j];
            eps[[i, j]] = s.eps[j];
        }
        old.push(s.log_prob + 0.2 * rng.sample::<f64, _>(StandardNormal));
    }
    let batch = Batch {
        obs,
        raw,
        eps,
        old_log_prob: old,
        advantages: (0..n).map(|_| rng.sample(StandardNormal)).collect(),
        returns: (0..n).map(|_| rng.sample(StandardNormal)).collect(),
    };
    let err = grad_check(&model, &batch, LossCoefficients::from(&cfg.ppo), 1e-5);
    result("policy gradients", err < 1e-4, format!("max relative error {err:.2e}"))
}

fn episode_contract(cfg: &RunConfig) -> CheckResult {
    let env_cfg = cfg.env_config();
    let d = env_cfg.num_haps();
    let run = || -> crate::error::Result<(usize, Vec<f64>)> {
        let mut env = HapsEnv::new(env_cfg.clone(), &Scenario::Preset(1), cfg.master_seed)?;
        let mut rewards = Vec::new();
        while !env.is_done() {
            rewards.push(env.step(&vec![Action::HOLD; d])?.reward);
        }
        Ok((rewards.len(), rewards))
    };
    match (run(), run()) {
        (Ok((len, a)), Ok((_, b))) => {
            let in_range = a.iter().all(|r| (0.0..=1.0).contains(r));
            let frames = env_cfg.episode.frames_per_episode as usize;
            result(
                "episode contract",
                len == frames && a == b && in_range,
                format!("{len} steps, deterministic: {}, rewards in [0, 1]: {in_range}", a == b),
            )
        }
        (Err(e), _) | (_, Err(e)) => result("episode contract", false, e.to_string()),
    }
}

/// Runs every check against `cfg`.
pub fn run_checks(cfg: &RunConfig) -> Vec<CheckResult> {
    vec![
        link_budget(),
        reward_calibration(cfg),
        wind_statistics(cfg),
        rician_power(cfg),
        rate_properties(cfg),
        gradients(cfg),
        episode_contract(cfg),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_passes_every_check() {
        for c in run_checks(&RunConfig::default()) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
