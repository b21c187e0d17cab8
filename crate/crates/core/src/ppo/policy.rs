//! Actor-critic pair and the tanh-squashed Gaussian action distribution.
//!
//! The actor emits, for each of the `2·D` action dimensions, a mean and a
//! log standard deviation of a Gaussian over the pre-squash value `u`. The
//! environment action is `lo + (hi - lo) · (tanh(u) + 1) / 2`, i.e. heading
//! in (-pi, pi) and distance in (0, r_max).

use super::mlp::{Activation, Mlp};
use crate::error::{Result, SimError};
use crate::mobility::Action;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;
pub(crate) const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetConfig {
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub activation: Activation,
    /// Orthogonal-init gain of the hidden layers.
    pub hidden_gain: f64,
    /// Orthogonal-init gain of the actor output layer.
    pub policy_gain: f64,
    pub value_gain: f64,
    /// Initial bias of the log-std outputs.
    pub log_std_init: f64,
}

impl Default for NetConfig {
    fn default() -> Self {
        Self {
            hidden_layers: 3,
            hidden_width: 128,
            activation: Activation::Tanh,
            hidden_gain: std::f64::consts::SQRT_2,
            policy_gain: 0.01,
            value_gain: 1.0,
            log_std_init: 0.0,
        }
    }
}

impl NetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_width == 0
            || ![self.hidden_gain, self.policy_gain, self.value_gain, self.log_std_init]
                .iter()
                .all(|g| g.is_finite())
        {
            return Err(SimError::InvalidConfig(
                "net: widths must be >= 1 and gains finite".into(),
            ));
        }
        Ok(())
    }

    fn sizes(&self, input: usize, output: usize) -> Vec<usize> {
        std::iter::once(input)
            .chain(std::iter::repeat_n(self.hidden_width, self.hidden_layers))
            .chain(std::iter::once(output))
            .collect()
    }
}

/// Affine range of each action dimension after the tanh squash.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionBound {
    pub lo: f64,
    pub hi: f64,
}

impl ActionBound {
    pub fn half_width(&self) -> f64 {
        (self.hi - self.lo) / 2.0
    }

    pub fn squash(&self, u: f64) -> f64 {
        self.lo + self.half_width() * (u.tanh() + 1.0)
    }
}

/// Heading then distance bounds, repeated for every HAPS.
pub fn action_bounds(num_haps: usize, r_max: f64) -> Vec<ActionBound> {
    (0..num_haps)
        .flat_map(|_| [ActionBound { lo: -PI, hi: PI }, ActionBound { lo: 0.0, hi: r_max }])
        .collect()
}

/// log(1 - tanh(u)^2), stable for large |u|.
pub fn log_one_minus_tanh_sq(u: f64) -> f64 {
    2.0 * (LN_2 - u - super::mlp::softplus(-2.0 * u))
}

/// Gaussian log density of `u` given mean and log std (one dimension).
pub fn gaussian_log_density(u: f64, mean: f64, log_std: f64) -> f64 {
    let z = (u - mean) / log_std.exp();
    -0.5 * z * z - log_std - HALF_LN_TWO_PI
}

/// Log density of the squashed action at pre-squash value `u`.
pub fn squashed_log_prob(u: &[f64], mean: &[f64], log_std: &[f64], bounds: &[ActionBound]) -> f64 {
    u.iter()
        .zip(mean)
        .zip(log_std)
        .zip(bounds)
        .map(|(((&u, &m), &s), b)| gaussian_log_density(u, m, s) - log_one_minus_tanh_sq(u) - b.half_width().ln())
        .sum()
}

/// Density of the squashed action at a point `a` inside (lo, hi), 1-D.
pub fn squashed_density(a: f64, mean: f64, log_std: f64, bound: &ActionBound) -> f64 {
    let y = (a - bound.lo) / bound.half_width() - 1.0;
    let u = y.atanh();
    squashed_log_prob(&[u], &[mean], &[log_std], std::slice::from_ref(bound)).exp()
}

/// Single-sample reparameterized entropy of the squashed distribution,
/// evaluated at `u = mean + std · eps`.
pub fn squashed_entropy(mean: &[f64], log_std: &[f64], eps: &[f64], bounds: &[ActionBound]) -> f64 {
    mean.iter()
        .zip(log_std)
        .zip(eps)
        .zip(bounds)
        .map(|(((&m, &s), &e), b)| {
            let u = m + s.exp() * e;
            0.5 + HALF_LN_TWO_PI + s + log_one_minus_tanh_sq(u) + b.half_width().ln()
        })
        .sum()
}

/// A sampled joint action.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledAction {
    /// Pre-squash Gaussian sample.
    pub raw: Vec<f64>,
    /// Standard-normal noise that produced `raw`.
    pub eps: Vec<f64>,
    pub actions: Vec<Action>,
    pub log_prob: f64,
}

/// Maps pre-squash values to per-HAPS actions.
pub fn squash_actions(raw: &[f64], bounds: &[ActionBound]) -> Vec<Action> {
    raw.chunks(2)
        .zip(bounds.chunks(2))
        .map(|(u, b)| Action::new(b[0].squash(u[0]), b[1].squash(u[1])))
        .collect()
}

pub fn sample_action<R: Rng + ?Sized>(
    mean: &[f64],
    log_std: &[f64],
    bounds: &[ActionBound],
    rng: &mut R,
) -> SampledAction {
    let eps: Vec<f64> = mean.iter().map(|_| rng.sample(StandardNormal)).collect();
    let raw: Vec<f64> = mean
        .iter()
        .zip(log_std)
        .zip(&eps)
        .map(|((m, s), e)| m + s.exp() * e)
        .collect();
    let log_prob = squashed_log_prob(&raw, mean, log_std, bounds);
    SampledAction {
        actions: squash_actions(&raw, bounds),
        raw,
        eps,
        log_prob,
    }
}

/// Separate actor and critic networks.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorCritic {
    pub actor: Mlp,
    pub critic: Mlp,
    pub bounds: Vec<ActionBound>,
}

impl ActorCritic {
    pub fn new<R: Rng + ?Sized>(cfg: &NetConfig, obs_dim: usize, num_haps: usize, r_max: f64, rng: &mut R) -> Self {
        let action_dim = 2 * num_haps;
        let mut actor = Mlp::orthogonal(
            &cfg.sizes(obs_dim, 2 * action_dim),
            cfg.activation,
            cfg.hidden_gain,
            cfg.policy_gain,
            rng,
        );
        actor.output_bias_mut()[action_dim..]
            .iter_mut()
            .for_each(|b| *b = cfg.log_std_init);
        let critic = Mlp::orthogonal(
            &cfg.sizes(obs_dim, 1),
            cfg.activation,
            cfg.hidden_gain,
            cfg.value_gain,
            rng,
        );
        Self {
            actor,
            critic,
            bounds: action_bounds(num_haps, r_max),
        }
    }

    pub fn action_dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn obs_dim(&self) -> usize {
        self.actor.input_dim()
    }

    fn check_dim(&self, obs: &[f64]) -> Result<()> {
        if obs.len() != self.obs_dim() {
            return Err(SimError::DimensionMismatch {
                expected: self.obs_dim(),
                got: obs.len(),
            });
        }
        Ok(())
    }

    /// Policy mean and clamped log std for one observation.
    pub fn policy_forward(&self, obs: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_dim(obs)?;
        let out = self.actor.forward_one(obs);
        let (mean, log_std) = out.split_at(self.action_dim());
        Ok((
            mean.to_vec(),
            log_std.iter().map(|s| s.clamp(LOG_STD_MIN, LOG_STD_MAX)).collect(),
        ))
    }

    pub fn value(&self, obs: &[f64]) -> Result<f64> {
        self.check_dim(obs)?;
        Ok(self.critic.forward_one(obs)[0])
    }

    pub fn act<R: Rng + ?Sized>(&self, obs: &[f64], rng: &mut R) -> Result<SampledAction> {
        let (mean, log_std) = self.policy_forward(obs)?;
        Ok(sample_action(&mean, &log_std, &self.bounds, rng))
    }

    /// Exploration-free action: the squashed mean.
    pub fn act_deterministic(&self, obs: &[f64]) -> Result<Vec<Action>> {
        let (mean, _) = self.policy_forward(obs)?;
        Ok(squash_actions(&mean, &self.bounds))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};

    fn bound() -> ActionBound {
        ActionBound { lo: 0.0, hi: 50.0 }
    }

    #[test]
    fn zero_network_has_zero_mean() {
        let cfg = NetConfig {
            hidden_width: 8,
            ..NetConfig::default()
        };
        let mut ac = ActorCritic::new(&cfg, 18, 3, 50.0, &mut stream(1, Stream::Init));
        ac.actor.params.iter_mut().for_each(|p| *p = 0.0);
        let (mean, log_std) = ac.policy_forward(&[0.3; 18]).unwrap();
        assert_eq!(mean, vec![0.0; 6]);
        assert_eq!(log_std, vec![0.0; 6]);
        let a = ac.act_deterministic(&[0.3; 18]).unwrap();
        assert!(a.iter().all(|a| a.angle == 0.0 && a.distance == 25.0));
    }

    #[test]
    fn forward_is_pure_and_checks_dims() {
        let ac = ActorCritic::new(&NetConfig::default(), 18, 3, 50.0, &mut stream(2, Stream::Init));
        let obs: Vec<f64> = (0..18).map(|i| (i as f64 * 0.1).sin()).collect();
        assert_eq!(ac.policy_forward(&obs).unwrap(), ac.policy_forward(&obs).unwrap());
        assert!(matches!(
            ac.policy_forward(&obs[..17]),
            Err(SimError::DimensionMismatch { expected: 18, got: 17 })
        ));
    }

    #[test]
    fn tiny_std_collapses_to_squashed_mean() {
        let bounds = action_bounds(1, 50.0);
        let mut rng = stream(3, Stream::Policy);
        let s = sample_action(&[0.4, -0.3], &[LOG_STD_MIN * 10.0; 2], &bounds, &mut rng);
        let det = squash_actions(&[0.4, -0.3], &bounds);
        assert!((s.actions[0].angle - det[0].angle).abs() < 1e-12);
        assert!((s.actions[0].distance - det[0].distance).abs() < 1e-12);
    }

    #[test]
    fn squashed_density_integrates_to_one() {
        let b = bound();
        for (mean, log_std) in [(0.0, 0.0), (0.7, -0.5), (-1.2, 0.4)] {
            let n = 200_000;
            let h = (b.hi - b.lo) / n as f64;
            let integral: f64 = (0..n)
                .map(|i| squashed_density(b.lo + (i as f64 + 0.5) * h, mean, log_std, &b) * h)
                .sum();
            assert!((integral - 1.0).abs() < 0.01, "{mean} {log_std}: {integral}");
        }
    }

    #[test]
    fn stable_log_jacobian() {
        for u in [-30.0, -2.0, 0.0, 0.5, 3.0, 40.0] {
            let direct = (1.0 - f64::tanh(u).powi(2)).ln();
            if direct.is_finite() {
                assert!((log_one_minus_tanh_sq(u) - direct).abs() < 1e-9, "u={u}");
            } else {
                assert!(log_one_minus_tanh_sq(u).is_finite());
            }
        }
    }

    #[test]
    fn entropy_falls_with_log_std() {
        // Expected squashed entropy over normal quantiles of eps.
        let b = [bound()];
        let eps: Vec<f64> = (1..400).map(|i| inv_normal(i as f64 / 400.0)).collect();
        let entropy = |s: f64| {
            eps.iter()
                .map(|e| squashed_entropy(&[0.0], &[s], &[*e], &b))
                .sum::<f64>()
                / eps.len() as f64
        };
        let mut prev = f64::INFINITY;
        for s in [-0.2, -0.6, -1.0, -2.0, -3.0] {
            let h = entropy(s);
            assert!(h < prev, "s={s}");
            prev = h;
        }
    }

    fn inv_normal(p: f64) -> f64 {
        let cdf = |x: f64| 0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2));
        let (mut lo, mut hi) = (-10.0, 10.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}
