//! Proximal policy optimization with a tanh-squashed Gaussian policy,
//! written against plain parameter vectors.

mod adam;
mod buffer;
pub mod checkpoint;
mod gae;
mod mlp;
mod policy;
mod update;

pub use adam::Adam;
pub use buffer::{RolloutBuffer, Transition};
pub use gae::{gae, normalize, one_step, AdvantageMode};
pub use mlp::{softplus, Activation, ForwardCache, Mlp};
pub use policy::{
    action_bounds, gaussian_log_density, log_one_minus_tanh_sq, sample_action, squash_actions, squashed_density,
    squashed_entropy, squashed_log_prob, ActionBound, ActorCritic, NetConfig, SampledAction, LOG_STD_MAX, LOG_STD_MIN,
};
pub use update::{
    build_batch, clip_global_norm, clipped_objective, grad_check, loss, loss_and_grads, ppo_update, Batch,
    LossCoefficients, LossParts, Optimizers, UpdateStats,
};

use crate::error::{Result, SimError};
use crate::rng::{stream, SimRng, Stream};
use serde::{Deserialize, Serialize};

/// Which entropy the bonus rewards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyMode {
    /// Closed-form entropy of the pre-squash Gaussian; touches only log std.
    Gaussian,
    /// Single-sample reparameterized entropy of the squashed action,
    /// using the stored noise. Also pulls the means toward the centre of
    /// the action box.
    #[default]
    Squashed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    pub lr: f64,
    pub gamma_df: f64,
    pub gae_lambda: f64,
    pub clip_eps: f64,
    pub entropy_coef: f64,
    pub entropy: EntropyMode,
    pub value_coef: f64,
    /// Bound on the joint actor+critic gradient norm.
    pub max_grad_norm: f64,
    pub epochs_per_update: usize,
    pub minibatch_size: usize,
    /// Transitions collected between updates.
    pub rollout_frames: usize,
    pub advantage: AdvantageMode,
    pub normalize_advantages: bool,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            lr: 3e-5,
            gamma_df: 0.99,
            gae_lambda: 0.95,
            clip_eps: 0.2,
            entropy_coef: 0.1,
            entropy: EntropyMode::Squashed,
            value_coef: 0.5,
            max_grad_norm: 1.0,
            epochs_per_update: 4,
            minibatch_size: 32,
            rollout_frames: 128,
            advantage: AdvantageMode::Gae,
            normalize_advantages: true,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
        }
    }
}

impl PpoConfig {
    // Negated comparisons so that NaN fails validation.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SimError::InvalidConfig(format!("ppo: {m}")));
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("lr must be positive");
        }
        if !(0.0..=1.0).contains(&self.gamma_df) || !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("gamma_df and gae_lambda must lie in [0, 1]");
        }
        if !(self.clip_eps > 0.0 && self.clip_eps < 1.0) {
            return bad("clip_eps must lie in (0, 1)");
        }
        if self.entropy_coef < 0.0 || self.value_coef < 0.0 || !(self.max_grad_norm > 0.0) {
            return bad("coefficients must be non-negative and max_grad_norm positive");
        }
        if self.epochs_per_update == 0 || self.minibatch_size == 0 || self.rollout_frames == 0 {
            return bad("epochs, minibatch size and rollout length must be >= 1");
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) || !(self.adam_eps > 0.0) {
            return bad("adam betas must lie in [0, 1) and eps be positive");
        }
        Ok(())
    }
}

/// Model, optimizers, rollout storage and the agent's own random streams.
#[derive(Debug, Clone)]
pub struct PpoAgent {
    pub model: ActorCritic,
    pub opt: Optimizers,
    pub buffer: RolloutBuffer,
    pub cfg: PpoConfig,
    policy_rng: SimRng,
    shuffle_rng: SimRng,
}

impl PpoAgent {
    /// Fresh agent; weights come from the `Init` stream of `seed`.
    pub fn new(
        net: &NetConfig,
        cfg: PpoConfig,
        obs_dim: usize,
        num_haps: usize,
        r_max: f64,
        seed: u64,
    ) -> Result<Self> {
        net.validate()?;
        cfg.validate()?;
        let model = ActorCritic::new(net, obs_dim, num_haps, r_max, &mut stream(seed, Stream::Init));
        Ok(Self::from_model(model, cfg, seed))
    }

    pub fn from_model(model: ActorCritic, cfg: PpoConfig, seed: u64) -> Self {
        Self {
            opt: Optimizers::new(&model, &cfg),
            buffer: RolloutBuffer::new(cfg.rollout_frames),
            model,
            policy_rng: stream(seed, Stream::Policy),
            shuffle_rng: stream(seed, Stream::Shuffle),
            cfg,
        }
    }

    /// Samples an action and the critic's value for `obs`.
    pub fn act(&mut self, obs: &[f64]) -> Result<(SampledAction, f64)> {
        let sample = self.model.act(obs, &mut self.policy_rng)?;
        let value = self.model.value(obs)?;
        Ok((sample, value))
    }

    /// Stores a transition; runs an update once the buffer is full.
    /// `next_obs` bootstraps a segment that does not end in a terminal.
    pub fn record(&mut self, t: Transition, next_obs: &[f64]) -> Result<Option<UpdateStats>> {
        let done = t.done;
        self.buffer.push(t);
        if !self.buffer.is_full() {
            return Ok(None);
        }
        let last_value = if done { 0.0 } else { self.model.value(next_obs)? };
        let stats = ppo_update(
            &mut self.model,
            &mut self.opt,
            &mut self.buffer,
            &self.cfg,
            last_value,
            &mut self.shuffle_rng,
        )?;
        Ok(Some(stats))
    }
}
