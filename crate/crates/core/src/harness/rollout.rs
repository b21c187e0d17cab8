//! Episode rollouts for learned and baseline controllers.

use crate::env::{EnvConfig, HapsEnv, Observation};
use crate::error::{Result, SimError};
use crate::mobility::{step_hotspots, Action, Scenario};
use crate::ppo::ActorCritic;
use crate::rng::{derive_seed, stream, SimRng, Stream};
use rand::Rng;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

const TRAIN_LABEL: u64 = 1;
const EVAL_LABEL: u64 = 2;
const AGENT_LABEL: u64 = 3;

/// Environment seed of training episode `episode`.
pub fn train_seed(master: u64, episode: usize) -> u64 {
    derive_seed(master, &[TRAIN_LABEL, episode as u64])
}

/// Environment seed of evaluation episode `k` on `scenario`. Independent of
/// the training progress, so every controller sees the same draws.
pub fn eval_seed(master: u64, scenario: &Scenario, k: usize) -> u64 {
    let id = match scenario {
        Scenario::Preset(id) => u64::from(*id),
        _ => 0,
    };
    derive_seed(master, &[EVAL_LABEL, id, k as u64])
}

pub fn agent_seed(master: u64) -> u64 {
    derive_seed(master, &[AGENT_LABEL])
}

/// Per-episode aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSummary {
    pub mean_reward: f64,
    pub mean_fair_rate: f64,
    pub mean_sum_throughput_mbps: f64,
    pub mean_distance_m: Vec<f64>,
    pub wind_mean_mps: f64,
    pub wind_max_mps: f64,
    pub rewards: Vec<f64>,
}

/// Streaming accumulator behind [`EpisodeSummary`].
#[derive(Debug, Clone, Default)]
pub struct SummaryBuilder {
    rewards: Vec<f64>,
    fair: f64,
    tput: f64,
    distance: Vec<f64>,
    wind_sum: f64,
    wind_count: usize,
    wind_max: f64,
}

impl SummaryBuilder {
    pub fn push(&mut self, outcome: &crate::env::StepOutcome) {
        self.rewards.push(outcome.reward);
        self.fair += outcome.info.fair_rate;
        self.tput += outcome.info.sum_throughput_mbps;
        if self.distance.is_empty() {
            self.distance = vec![0.0; outcome.info.distances.len()];
        }
        for (acc, d) in self.distance.iter_mut().zip(&outcome.info.distances) {
            *acc += d;
        }
        for w in &outcome.info.wind {
            let m = w.norm();
            self.wind_sum += m;
            self.wind_count += 1;
            self.wind_max = self.wind_max.max(m);
        }
    }

    pub fn finish(self) -> EpisodeSummary {
        let n = self.rewards.len().max(1) as f64;
        EpisodeSummary {
            mean_reward: self.rewards.iter().sum::<f64>() / n,
            mean_fair_rate: self.fair / n,
            mean_sum_throughput_mbps: self.tput / n,
            mean_distance_m: self.distance.iter().map(|d| d / n).collect(),
            wind_mean_mps: self.wind_sum / self.wind_count.max(1) as f64,
            wind_max_mps: self.wind_max,
            rewards: self.rewards,
        }
    }
}

/// Runs one full episode from `env`'s current state.
pub fn run_episode<P>(env: &mut HapsEnv, mut policy: P) -> Result<EpisodeSummary>
where
    P: FnMut(&HapsEnv, &Observation) -> Result<Vec<Action>>,
{
    let mut obs = env.observation();
    let mut acc = SummaryBuilder::default();
    while !env.is_done() {
        let actions = policy(env, &obs)?;
        let outcome = env.step(&actions)?;
        acc.push(&outcome);
        obs = outcome.observation;
    }
    Ok(acc.finish())
}

/// Non-learned comparators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    /// HAPS hold their starting point exactly (perfect station-keeping).
    Static,
    /// Zero commands; the wind carries the HAPS.
    NoControl,
    /// Ground-truth tracking of the projected hotspot centroid.
    Oracle,
    /// Uniform heading and distance.
    Random,
}

impl Baseline {
    pub const ALL: [Baseline; 4] = [
        Baseline::Static,
        Baseline::NoControl,
        Baseline::Oracle,
        Baseline::Random,
    ];
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Baseline::Static => "static",
            Baseline::NoControl => "nocontrol",
            Baseline::Oracle => "oracle",
            Baseline::Random => "random",
        })
    }
}

impl FromStr for Baseline {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        Baseline::ALL
            .into_iter()
            .find(|b| b.to_string() == s)
            .ok_or_else(|| SimError::UnknownBaseline(s.to_string()))
    }
}

/// Oracle command: move each HAPS onto where its hotspot will be after the
/// step, pre-compensating the wind it is about to feel.
pub fn oracle_actions(env: &HapsEnv) -> Vec<Action> {
    let cfg = env.config();
    let dt = cfg.episode.dt;
    let mut projected = env.world().clone();
    step_hotspots(&mut projected, &cfg.area, dt);
    let wind = env.peek_next_wind();
    env.world()
        .haps_xy
        .iter()
        .zip(&projected.hotspot_xy)
        .zip(&wind)
        .map(|((&haps, &target), &w)| Action::toward(target - haps - w * dt, cfg.area.r_max))
        .collect()
}

pub fn random_actions(n: usize, r_max: f64, rng: &mut SimRng) -> Vec<Action> {
    (0..n)
        .map(|_| Action::new(rng.random_range(-PI..PI), rng.random_range(0.0..=r_max)))
        .collect()
}

/// One baseline episode on a freshly reset environment.
pub fn baseline_episode(cfg: &EnvConfig, baseline: Baseline, scenario: &Scenario, seed: u64) -> Result<EpisodeSummary> {
    let mut env = HapsEnv::new(cfg.clone(), scenario, seed)?;
    env.set_hold_station(baseline == Baseline::Static);
    let n = cfg.num_haps();
    let r_max = cfg.area.r_max;
    let mut rng = stream(seed, Stream::Baseline);
    run_episode(&mut env, |env, _| {
        Ok(match baseline {
            Baseline::Static | Baseline::NoControl => vec![Action::HOLD; n],
            Baseline::Oracle => oracle_actions(env),
            Baseline::Random => random_actions(n, r_max, &mut rng),
        })
    })
}

/// One deterministic (mean-action) episode of a learned policy.
pub fn policy_episode(cfg: &EnvConfig, model: &ActorCritic, scenario: &Scenario, seed: u64) -> Result<EpisodeSummary> {
    let mut env = HapsEnv::new(cfg.clone(), scenario, seed)?;
    run_episode(&mut env, |_, obs| model.act_deterministic(&obs.normalized))
}

/// Mean and population standard deviation over episodes.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSummary {
    pub episodes: Vec<EpisodeSummary>,
    pub reward_mean: f64,
    pub reward_std: f64,
    pub throughput_mean: f64,
    pub throughput_std: f64,
}

fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count().max(1) as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl EvalSummary {
    pub fn from_episodes(episodes: Vec<EpisodeSummary>) -> Result<Self> {
        if episodes.is_empty() {
            return Err(SimError::EmptyEvaluation);
        }
        let (reward_mean, reward_std) = mean_std(episodes.iter().map(|e| e.mean_reward));
        let (throughput_mean, throughput_std) = mean_std(episodes.iter().map(|e| e.mean_sum_throughput_mbps));
        Ok(Self {
            episodes,
            reward_mean,
            reward_std,
            throughput_mean,
            throughput_std,
        })
    }

    /// Reward and throughput means across all episodes, merged with `mean`
    /// of the per-episode fields.
    pub fn merged(&self) -> EpisodeSummary {
        let n = self.episodes.len() as f64;
        let avg = |f: &dyn Fn(&EpisodeSummary) -> f64| self.episodes.iter().map(f).sum::<f64>() / n;
        let d = self.episodes[0].mean_distance_m.len();
        EpisodeSummary {
            mean_reward: self.reward_mean,
            mean_fair_rate: avg(&|e| e.mean_fair_rate),
            mean_sum_throughput_mbps: self.throughput_mean,
            mean_distance_m: (0..d).map(|i| avg(&|e| e.mean_distance_m[i])).collect(),
            wind_mean_mps: avg(&|e| e.wind_mean_mps),
            wind_max_mps: self.episodes.iter().map(|e| e.wind_max_mps).fold(0.0, f64::max),
            rewards: Vec::new(),
        }
    }
}

/// Evaluates `episodes` paired-seed episodes of a learned policy.
pub fn evaluate_policy(
    cfg: &EnvConfig,
    model: &ActorCritic,
    scenario: &Scenario,
    episodes: usize,
    master_seed: u64,
) -> Result<EvalSummary> {
    let runs = (0..episodes)
        .map(|k| policy_episode(cfg, model, scenario, eval_seed(master_seed, scenario, k)))
        .collect::<Result<Vec<_>>>()?;
    EvalSummary::from_episodes(runs)
}

/// Evaluates a baseline on the same seeds as [`evaluate_policy`].
pub fn evaluate_baseline(
    cfg: &EnvConfig,
    baseline: Baseline,
    scenario: &Scenario,
    episodes: usize,
    master_seed: u64,
) -> Result<EvalSummary> {
    let runs = (0..episodes)
        .map(|k| baseline_episode(cfg, baseline, scenario, eval_seed(master_seed, scenario, k)))
        .collect::<Result<Vec<_>>>()?;
    EvalSummary::from_episodes(runs)
}
