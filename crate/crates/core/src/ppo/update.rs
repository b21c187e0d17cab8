//! Clipped-surrogate loss, its analytic gradient and the minibatch update.

use super::gae::{gae, normalize, one_step, AdvantageMode};
use super::policy::{
    gaussian_log_density, log_one_minus_tanh_sq, ActorCritic, HALF_LN_TWO_PI, LOG_STD_MAX, LOG_STD_MIN,
};
use super::{Adam, EntropyMode, PpoConfig, RolloutBuffer, Transition};
use crate::error::{Result, SimError};
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;

/// Training samples in row-major batch form.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub obs: Array2<f64>,
    pub raw: Array2<f64>,
    pub eps: Array2<f64>,
    pub old_log_prob: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.old_log_prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.old_log_prob.is_empty()
    }

    pub fn select(&self, idx: &[usize]) -> Batch {
        let rows = |m: &Array2<f64>| m.select(ndarray::Axis(0), idx);
        let pick = |v: &[f64]| idx.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Batch {
            obs: rows(&self.obs),
            raw: rows(&self.raw),
            eps: rows(&self.eps),
            old_log_prob: pick(&self.old_log_prob),
            advantages: pick(&self.advantages),
            returns: pick(&self.returns),
        }
    }
}

/// Scalar coefficients of the loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossCoefficients {
    pub clip_eps: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub entropy: EntropyMode,
}

impl From<&PpoConfig> for LossCoefficients {
    fn from(cfg: &PpoConfig) -> Self {
        Self {
            clip_eps: cfg.clip_eps,
            value_coef: cfg.value_coef,
            entropy_coef: cfg.entropy_coef,
            entropy: cfg.entropy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossParts {
    pub total: f64,
    /// Negated clipped surrogate.
    pub policy: f64,
    /// Mean squared value error (before the coefficient).
    pub value: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
}

/// Per-sample clipped surrogate min(rA, clip(r)A) and its derivative in r.
pub fn clipped_objective(ratio: f64, advantage: f64, clip_eps: f64) -> (f64, f64) {
    let unclipped = ratio * advantage;
    let clipped = ratio.clamp(1.0 - clip_eps, 1.0 + clip_eps) * advantage;
    if unclipped <= clipped {
        (unclipped, advantage)
    } else {
        (clipped, 0.0)
    }
}

/// Loss over `batch` and gradients w.r.t. actor and critic parameters.
pub fn loss_and_grads(model: &ActorCritic, batch: &Batch, coef: LossCoefficients) -> (LossParts, Vec<f64>, Vec<f64>) {
    let n = batch.len() as f64;
    let a_dim = model.action_dim();
    let actor_cache = model.actor.forward(batch.obs.view());
    let critic_cache = model.critic.forward(batch.obs.view());
    let out = actor_cache.output();
    let values = critic_cache.output();

    let mut d_actor = Array2::<f64>::zeros(out.raw_dim());
    let mut d_critic = Array2::<f64>::zeros(values.raw_dim());
    let mut parts = LossParts::default();

    for i in 0..batch.len() {
        let mut log_prob = 0.0;
        let mut entropy = 0.0;
        let mut d_mean_lp = vec![0.0; a_dim];
        let mut d_logstd_lp = vec![0.0; a_dim];
        let mut d_mean_h = vec![0.0; a_dim];
        let mut d_logstd_h = vec![0.0; a_dim];
        for j in 0..a_dim {
            let mean = out[[i, j]];
            let s_raw = out[[i, a_dim + j]];
            let s = s_raw.clamp(LOG_STD_MIN, LOG_STD_MAX);
            let std = s.exp();
            let u = batch.raw[[i, j]];
            let z = (u - mean) / std;
            log_prob += gaussian_log_density(u, mean, s) - log_one_minus_tanh_sq(u) - model.bounds[j].half_width().ln();
            d_mean_lp[j] = z / std;
            d_logstd_lp[j] = z * z - 1.0;

            match coef.entropy {
                EntropyMode::Gaussian => {
                    entropy += 0.5 + HALF_LN_TWO_PI + s;
                    d_logstd_h[j] = 1.0;
                }
                EntropyMode::Squashed => {
                    let e = batch.eps[[i, j]];
                    let u_rep = mean + std * e;
                    entropy +=
                        0.5 + HALF_LN_TWO_PI + s + log_one_minus_tanh_sq(u_rep) + model.bounds[j].half_width().ln();
                    let dj = -2.0 * u_rep.tanh();
                    d_mean_h[j] = dj;
                    d_logstd_h[j] = 1.0 + dj * std * e;
                }
            }
        }

        let log_ratio = log_prob - batch.old_log_prob[i];
        let ratio = log_ratio.exp();
        let adv = batch.advantages[i];
        let (obj, d_obj_d_ratio) = clipped_objective(ratio, adv, coef.clip_eps);
        parts.policy -= obj / n;
        parts.entropy += entropy / n;
        parts.approx_kl += ((ratio - 1.0) - log_ratio) / n;
        if (ratio - 1.0).abs() > coef.clip_eps {
            parts.clip_fraction += 1.0 / n;
        }

        let g_lp = -d_obj_d_ratio * ratio / n;
        let g_h = -coef.entropy_coef / n;
        for j in 0..a_dim {
            d_actor[[i, j]] = g_lp * d_mean_lp[j] + g_h * d_mean_h[j];
            let s_raw = out[[i, a_dim + j]];
            let inside = s_raw > LOG_STD_MIN && s_raw < LOG_STD_MAX;
            d_actor[[i, a_dim + j]] = if inside {
                g_lp * d_logstd_lp[j] + g_h * d_logstd_h[j]
            } else {
                0.0
            };
        }

        let err = values[[i, 0]] - batch.returns[i];
        parts.value += err * err / n;
        d_critic[[i, 0]] = coef.value_coef * 2.0 * err / n;
    }
    parts.total = parts.policy + coef.value_coef * parts.value - coef.entropy_coef * parts.entropy;

    let mut g_actor = vec![0.0; model.actor.num_params()];
    let mut g_critic = vec![0.0; model.critic.num_params()];
    model.actor.backward(&actor_cache, d_actor, &mut g_actor);
    model.critic.backward(&critic_cache, d_critic, &mut g_critic);
    (parts, g_actor, g_critic)
}

/// Loss only (used by finite-difference checks).
pub fn loss(model: &ActorCritic, batch: &Batch, coef: LossCoefficients) -> f64 {
    loss_and_grads(model, batch, coef).0.total
}

/// Maximum relative error between analytic and central-difference
/// gradients of the total loss over every parameter.
///
/// The relative error is `|a - f| / max(|a| + |f|, 1e-6)`.
pub fn grad_check(model: &ActorCritic, batch: &Batch, coef: LossCoefficients, h: f64) -> f64 {
    let (_, g_actor, g_critic) = loss_and_grads(model, batch, coef);
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for critic in [false, true] {
        let analytic = if critic { &g_critic } else { &g_actor };
        for (i, &a) in analytic.iter().enumerate() {
            let orig = *param_mut(&mut probe, critic, i);
            *param_mut(&mut probe, critic, i) = orig + h;
            let up = loss(&probe, batch, coef);
            *param_mut(&mut probe, critic, i) = orig - h;
            let down = loss(&probe, batch, coef);
            *param_mut(&mut probe, critic, i) = orig;
            let fd = (up - down) / (2.0 * h);
            worst = worst.max((fd - a).abs() / (fd.abs() + a.abs()).max(1e-6));
        }
    }
    worst
}

fn param_mut(model: &mut ActorCritic, critic: bool, i: usize) -> &mut f64 {
    if critic {
        &mut model.critic.params[i]
    } else {
        &mut model.actor.params[i]
    }
}

/// Rescales the concatenated gradient to at most `max_norm`.
/// Returns the norm before and after clipping.
pub fn clip_global_norm(grads: &mut [&mut [f64]], max_norm: f64) -> (f64, f64) {
    let norm = grads.iter().flat_map(|g| g.iter()).map(|x| x * x).sum::<f64>().sqrt();
    if norm > max_norm {
        let scale = max_norm / norm;
        grads.iter_mut().for_each(|g| g.iter_mut().for_each(|x| *x *= scale));
        (norm, max_norm)
    } else {
        (norm, norm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
    /// Mean global gradient norm before clipping.
    pub grad_norm: f64,
    /// Largest global gradient norm after clipping.
    pub max_clipped_norm: f64,
    pub minibatches: usize,
}

/// Assembles the batch from a full buffer, including advantages.
pub fn build_batch(model: &ActorCritic, buffer: &RolloutBuffer, cfg: &PpoConfig, last_value: f64) -> Batch {
    let steps = buffer.steps();
    let n = steps.len();
    let obs_dim = steps.first().map(|t| t.obs.len()).unwrap_or(0);
    let a_dim = model.action_dim();
    let matrix =
        |cols: usize, f: fn(&Transition) -> &Vec<f64>| Array2::from_shape_fn((n, cols), |(i, j)| f(&steps[i])[j]);
    let (mut advantages, returns) = match cfg.advantage {
        AdvantageMode::Gae => gae(
            &buffer.rewards(),
            &buffer.values(),
            &buffer.dones(),
            last_value,
            cfg.gamma_df,
            cfg.gae_lambda,
        ),
        AdvantageMode::OneStep => one_step(&buffer.rewards(), &buffer.values()),
    };
    if cfg.normalize_advantages {
        normalize(&mut advantages);
    }
    Batch {
        obs: matrix(obs_dim, |t| &t.obs),
        raw: matrix(a_dim, |t| &t.raw),
        eps: matrix(a_dim, |t| &t.eps),
        old_log_prob: steps.iter().map(|t| t.log_prob).collect(),
        advantages,
        returns,
    }
}

/// Optimizer state for both networks.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimizers {
    pub actor: Adam,
    pub critic: Adam,
}

impl Optimizers {
    pub fn new(model: &ActorCritic, cfg: &PpoConfig) -> Self {
        let adam = |len| Adam::new(len, cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
        Self {
            actor: adam(model.actor.num_params()),
            critic: adam(model.critic.num_params()),
        }
    }
}

/// Runs the epochs of minibatch updates over a full buffer, then empties it.
pub fn ppo_update<R: Rng + ?Sized>(
    model: &mut ActorCritic,
    opt: &mut Optimizers,
    buffer: &mut RolloutBuffer,
    cfg: &PpoConfig,
    last_value: f64,
    rng: &mut R,
) -> Result<UpdateStats> {
    if buffer.is_empty() {
        return Err(SimError::Numerical("update called with an empty buffer".into()));
    }
    let batch = build_batch(model, buffer, cfg, last_value);
    buffer.clear();
    let coef = LossCoefficients::from(cfg);
    let mut stats = UpdateStats::default();
    let mut order: Vec<usize> = (0..batch.len()).collect();
    let mb = cfg.minibatch_size.min(batch.len()).max(1);
    for _ in 0..cfg.epochs_per_update {
        order.shuffle(rng);
        for chunk in order.chunks(mb) {
            let sub = batch.select(chunk);
            let (parts, mut g_actor, mut g_critic) = loss_and_grads(model, &sub, coef);
            if !parts.total.is_finite() {
                return Err(SimError::Numerical(format!(
                    "non-finite loss (policy {}, value {}, entropy {})",
                    parts.policy, parts.value, parts.entropy
                )));
            }
            let (pre, post) = clip_global_norm(&mut [&mut g_actor, &mut g_critic], cfg.max_grad_norm);
            if !pre.is_finite() {
                return Err(SimError::Numerical("non-finite gradient".into()));
            }
            opt.actor.step(&mut model.actor.params, &g_actor);
            opt.critic.step(&mut model.critic.params, &g_critic);
            stats.policy_loss += parts.policy;
            stats.value_loss += parts.value;
            stats.entropy += parts.entropy;
            stats.approx_kl += parts.approx_kl;
            stats.clip_fraction += parts.clip_fraction;
            stats.grad_norm += pre;
            stats.max_clipped_norm = stats.max_clipped_norm.max(post);
            stats.minibatches += 1;
        }
    }
    let k = stats.minibatches.max(1) as f64;
    stats.policy_loss /= k;
    stats.value_loss /= k;
    stats.entropy /= k;
    stats.approx_kl /= k;
    stats.clip_fraction /= k;
    stats.grad_norm /= k;
    Ok(stats)
}
