//! Run configuration: one JSON document tying catalog, environment, reward,
//! agent and sweep settings together.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::agent::Hyperparams;
use crate::env::{default_activity_mixture, ActivityChoice, EnvConfig, UavSpec};
use crate::error::{Error, Result};
use crate::network::BandwidthModel;
use crate::profiles::{load_catalog, ProfileCatalog};
use crate::reward::{Normalizer, RewardWeights, ScoreParams};
use crate::server::ServerConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvSection {
    pub uavs: Vec<UavSpec>,
    #[serde(default = "default_slot")]
    pub slot_s: f64,
    #[serde(default = "default_task_probability")]
    pub task_probability: f64,
    #[serde(default)]
    pub bandwidth: BandwidthModel,
    #[serde(default)]
    pub server: ServerConfig,
    #[serde(default = "default_activity_mixture")]
    pub activity: Vec<ActivityChoice>,
    #[serde(default = "default_max_slots")]
    pub max_slots: usize,
}

fn default_slot() -> f64 {
    30.0
}

fn default_task_probability() -> f64 {
    0.9
}

fn default_max_slots() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardSection {
    #[serde(default)]
    pub weights: RewardWeights,
    /// Accuracy sigmoid steepness.
    #[serde(default = "default_p")]
    pub p: f64,
    /// Accuracy sigmoid midpoint.
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default)]
    pub normalizer: Normalizer,
}

fn default_p() -> f64 {
    ScoreParams::default().p
}

fn default_q() -> f64 {
    ScoreParams::default().q
}

impl Default for RewardSection {
    fn default() -> Self {
        Self {
            weights: RewardWeights::default(),
            p: default_p(),
            q: default_q(),
            normalizer: Normalizer::default(),
        }
    }
}

impl RewardSection {
    pub fn score_params(&self) -> ScoreParams {
        ScoreParams {
            p: self.p,
            q: self.q,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub weight: String,
    pub grid: Vec<f64>,
    #[serde(default = "default_sweep_episodes")]
    pub episodes: usize,
    #[serde(default = "default_sweep_policy")]
    pub policy: String,
}

fn default_sweep_episodes() -> usize {
    5
}

fn default_sweep_policy() -> String {
    "oracle".into()
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            weight: "w2".into(),
            grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            episodes: default_sweep_episodes(),
            policy: default_sweep_policy(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Catalog path; relative paths resolve against the config file's directory.
    pub catalog: Option<PathBuf>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    pub env: EnvSection,
    #[serde(default)]
    pub reward: RewardSection,
    #[serde(default)]
    pub agent: Hyperparams,
    #[serde(default)]
    pub sweep: SweepSection,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse("run config", e))
    }

    /// Reads the config and rewrites a relative catalog path against the config's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidConfig(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut config = Self::from_json(&text)?;
        if let Some(catalog) = &config.catalog {
            if catalog.is_relative() {
                let base = path.parent().unwrap_or_else(|| Path::new("."));
                config.catalog = Some(base.join(catalog));
            }
        }
        Ok(config)
    }

    pub fn load_catalog(&self) -> Result<ProfileCatalog> {
        let path = self
            .catalog
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("no catalog path given".into()))?;
        if !path.exists() {
            return Err(Error::InvalidConfig(format!(
                "catalog {} does not exist",
                path.display()
            )));
        }
        load_catalog(path)
    }

    pub fn env_config(&self, catalog: Arc<ProfileCatalog>) -> Result<EnvConfig> {
        let env = &self.env;
        let config = EnvConfig {
            catalog,
            uavs: env.uavs.clone(),
            bandwidth: env.bandwidth.clone(),
            server: env.server.clone(),
            slot_s: env.slot_s,
            weights: self.reward.weights,
            score_params: self.reward.score_params(),
            normalizer: self.reward.normalizer,
            task_probability: env.task_probability,
            activity: env.activity.clone(),
            max_slots: env.max_slots,
            seed: self.seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn hyperparams(&self) -> Hyperparams {
        Hyperparams {
            seed: self.seed,
            ..self.agent.clone()
        }
    }
}
