//! Training loop with periodic deterministic evaluation.

use super::config::RunConfig;
use super::metrics::{MetricsRow, MetricsWriter, Phase};
use super::rollout::{agent_seed, evaluate_policy, train_seed, EpisodeSummary, SummaryBuilder};
use crate::env::HapsEnv;
use crate::error::{Result, SimError};
use crate::mobility::Scenario;
use crate::ppo::{checkpoint, ActorCritic, PpoAgent, Transition, UpdateStats};
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

pub const METRICS_FILE: &str = "metrics.csv";
pub const BEST_CHECKPOINT: &str = "checkpoint_best.txt";
pub const FINAL_CHECKPOINT: &str = "checkpoint_final.txt";
pub const CONFIG_FILE: &str = "config.toml";
pub const ABORT_FILE: &str = "abort.txt";

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub rows: Vec<MetricsRow>,
    pub model: ActorCritic,
    /// Best mean evaluation reward across scenarios, if any evaluation ran.
    pub best_eval_reward: Option<f64>,
    /// Statistics of every PPO update, in order.
    pub updates: Vec<UpdateStats>,
    pub output_dir: PathBuf,
}

fn row(episode: usize, phase: Phase, scenario: &Scenario, s: &EpisodeSummary) -> MetricsRow {
    MetricsRow {
        episode,
        phase,
        scenario: scenario.to_string(),
        mean_reward: s.mean_reward,
        mean_fair_rate: s.mean_fair_rate,
        mean_sum_throughput_mbps: s.mean_sum_throughput_mbps,
        mean_distance_m: s.mean_distance_m.clone(),
        wind_mean_mps: s.wind_mean_mps,
        wind_max_mps: s.wind_max_mps,
    }
}

/// One exploratory episode from a random start, updating the agent as its
/// buffer fills.
fn train_episode(agent: &mut PpoAgent, env: &mut HapsEnv, updates: &mut Vec<UpdateStats>) -> Result<EpisodeSummary> {
    let mut obs = env.observation().normalized;
    let mut acc = SummaryBuilder::default();
    while !env.is_done() {
        let (sample, value) = agent.act(&obs)?;
        let outcome = env.step(&sample.actions)?;
        acc.push(&outcome);
        let next = outcome.observation.normalized;
        let t = Transition {
            obs,
            raw: sample.raw,
            eps: sample.eps,
            actions: sample.actions,
            log_prob: sample.log_prob,
            reward: outcome.reward,
            value,
            done: outcome.done,
        };
        if let Some(stats) = agent.record(t, &next)? {
            updates.push(stats);
        }
        obs = next;
    }
    Ok(acc.finish())
}

fn write_abort(dir: &Path, episode: usize, env: &HapsEnv, err: &SimError, update: Option<&UpdateStats>) {
    let world = env.world();
    let text = format!(
        "error: {err}\nepisode: {episode}\nframe: {}\nhaps_xy: {:?}\nhotspot_xy: {:?}\nlast_update: {update:?}\n",
        world.frame, world.haps_xy, world.hotspot_xy
    );
    // Best effort: the original error is what the caller reports.
    let _ = std::fs::write(dir.join(ABORT_FILE), text);
}

/// Trains from scratch, writing metrics, config and checkpoints to `out`.
/// `progress` sees every metrics row as it is written.
pub fn train(cfg: &RunConfig, out: &Path, mut progress: impl FnMut(&MetricsRow)) -> Result<TrainOutcome> {
    cfg.validate()?;
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join(CONFIG_FILE), cfg.to_toml()?)?;
    let hash = cfg.model_hash()?;
    let env_cfg = cfg.env_config();
    let num_haps = env_cfg.num_haps();
    let mut metrics = MetricsWriter::new(BufWriter::new(File::create(out.join(METRICS_FILE))?), num_haps)?;
    let mut agent = PpoAgent::new(
        &cfg.net,
        cfg.ppo.clone(),
        env_cfg.observation_dim(),
        num_haps,
        env_cfg.area.r_max,
        agent_seed(cfg.master_seed),
    )?;
    let mut env = HapsEnv::new(env_cfg.clone(), &Scenario::Random, train_seed(cfg.master_seed, 0))?;
    let mut rows = Vec::new();
    let mut best: Option<f64> = None;
    let mut updates = Vec::new();
    let mut emit = |r: MetricsRow, rows: &mut Vec<MetricsRow>| -> Result<()> {
        metrics.write(&r)?;
        progress(&r);
        rows.push(r);
        Ok(())
    };

    for ep in 0..cfg.episodes {
        env.reset(&Scenario::Random, train_seed(cfg.master_seed, ep))?;
        let summary = match train_episode(&mut agent, &mut env, &mut updates) {
            Ok(s) => s,
            Err(e) => {
                if matches!(e, SimError::Numerical(_)) {
                    write_abort(out, ep, &env, &e, updates.last());
                }
                return Err(e);
            }
        };
        let done = ep + 1;
        emit(row(done, Phase::Train, &Scenario::Random, &summary), &mut rows)?;

        if done % cfg.eval_every == 0 {
            let mut total = 0.0;
            for sc in cfg.scenarios() {
                let eval = evaluate_policy(&env_cfg, &agent.model, &sc, cfg.eval_episodes, cfg.master_seed)?;
                total += eval.reward_mean;
                emit(row(done, Phase::Eval, &sc, &eval.merged()), &mut rows)?;
            }
            let mean = total / cfg.scenarios().len().max(1) as f64;
            if best.is_none_or(|b| mean > b) {
                best = Some(mean);
                checkpoint::save(&agent.model, &hash, &out.join(BEST_CHECKPOINT))?;
            }
        }
    }
    checkpoint::save(&agent.model, &hash, &out.join(FINAL_CHECKPOINT))?;
    if best.is_none() {
        checkpoint::save(&agent.model, &hash, &out.join(BEST_CHECKPOINT))?;
    }
    Ok(TrainOutcome {
        rows,
        model: agent.model,
        best_eval_reward: best,
        updates,
        output_dir: out.to_path_buf(),
    })
}

/// Loads a checkpoint and checks it was trained under `cfg`.
pub fn load_model(cfg: &RunConfig, path: &Path) -> Result<ActorCritic> {
    let model = checkpoint::load(path, Some(&cfg.model_hash()?))?;
    let env_cfg = cfg.env_config();
    if model.obs_dim() != env_cfg.observation_dim() || model.action_dim() != env_cfg.action_dim() {
        return Err(SimError::Checkpoint(format!(
            "checkpoint expects {} inputs and {} actions; config has {} and {}",
            model.obs_dim(),
            model.action_dim(),
            env_cfg.observation_dim(),
            env_cfg.action_dim()
        )));
    }
    Ok(model)
}
