//! Run configuration, read from TOML.
//!
//! Every block is optional and falls back to the defaults, so an empty file
//! is a valid configuration:
//!
//! ```toml
//! master_seed = 1
//! episodes = 12000
//! eval_every = 500
//! eval_scenarios = [1, 2, 3, 4]
//!
//! [wind]
//! mean_speed = 4.0
//!
//! [ppo]
//! lr = 3e-5
//! ```

use crate::channel::RadioConfig;
use crate::env::{EnvConfig, EpisodeConfig, ObservationConfig, RewardConfig};
use crate::error::{Result, SimError};
use crate::mobility::{AreaConfig, Scenario};
use crate::ppo::{checkpoint, NetConfig, PpoConfig};
use crate::wind::WindConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Bumped whenever a field changes meaning; folded into the config hash.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub master_seed: u64,
    pub episodes: usize,
    pub eval_every: usize,
    /// Deterministic evaluation episodes per scenario at every checkpoint.
    pub eval_episodes: usize,
    pub eval_scenarios: Vec<u8>,
    pub output_dir: PathBuf,
    pub wind: WindConfig,
    pub area: AreaConfig,
    pub radio: RadioConfig,
    pub reward: RewardConfig,
    pub episode: EpisodeConfig,
    pub observation: ObservationConfig,
    pub net: NetConfig,
    pub ppo: PpoConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            episodes: 12_000,
            eval_every: 500,
            eval_episodes: 1,
            eval_scenarios: vec![1, 2, 3, 4],
            output_dir: PathBuf::from("runs/default"),
            wind: WindConfig::default(),
            area: AreaConfig::default(),
            radio: RadioConfig::default(),
            reward: RewardConfig::default(),
            episode: EpisodeConfig::default(),
            observation: ObservationConfig::default(),
            net: NetConfig::default(),
            ppo: PpoConfig::default(),
        }
    }
}

/// The part of the configuration a trained model depends on.
#[derive(Serialize)]
struct ModelIdentity<'a> {
    schema_version: u32,
    env: &'a EnvConfig,
    net: &'a NetConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| SimError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| SimError::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| SimError::InvalidConfig(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.env_config().validate()?;
        self.net.validate()?;
        self.ppo.validate()?;
        if self.eval_every == 0 || self.eval_episodes == 0 {
            return Err(SimError::InvalidConfig(
                "eval_every and eval_episodes must be >= 1".into(),
            ));
        }
        for id in &self.eval_scenarios {
            if !(1..=4).contains(id) {
                return Err(SimError::InvalidScenario(id.to_string()));
            }
        }
        Ok(())
    }

    pub fn env_config(&self) -> EnvConfig {
        EnvConfig {
            wind: self.wind.clone(),
            area: self.area.clone(),
            radio: self.radio.clone(),
            reward: self.reward.clone(),
            episode: self.episode.clone(),
            observation: self.observation.clone(),
        }
    }

    pub fn scenarios(&self) -> Vec<Scenario> {
        self.eval_scenarios.iter().map(|&id| Scenario::Preset(id)).collect()
    }

    /// Hash stored in checkpoints: schema version, environment and network.
    pub fn model_hash(&self) -> Result<String> {
        checkpoint::config_hash(&ModelIdentity {
            schema_version: SCHEMA_VERSION,
            env: &self.env_config(),
            net: &self.net,
        })
    }
}
