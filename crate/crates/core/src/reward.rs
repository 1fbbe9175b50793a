//! End-to-end latency, normalized scores and the weighted slot reward.

use serde::{Deserialize, Serialize};

use crate::device::{compute_energy, transmission_energy};
use crate::error::{Error, Result};
use crate::network::{transmission_latency, BandwidthClass};
use crate::profiles::{cumulative_local_latency, ModelProfile, VersionProfile};
use crate::server::remote_latency;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardWeights {
    pub accuracy: f64,
    pub latency: f64,
    pub energy: f64,
}

impl RewardWeights {
    pub const EQUAL: Self = Self {
        accuracy: 1.0 / 3.0,
        latency: 1.0 / 3.0,
        energy: 1.0 / 3.0,
    };

    pub fn new(accuracy: f64, latency: f64, energy: f64) -> Result<Self> {
        let w = Self {
            accuracy,
            latency,
            energy,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.accuracy, self.latency, self.energy];
        if parts.iter().any(|w| !(*w >= 0.0)) || (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "reward weights {parts:?} must be non-negative and sum to 1"
            )));
        }
        Ok(())
    }

    pub fn combine(&self, scores: &Scores) -> f64 {
        self.accuracy * scores.accuracy
            + self.latency * scores.latency
            + self.energy * scores.energy
    }
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self::EQUAL
    }
}

/// Sigmoid parameters for the accuracy score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreParams {
    pub p: f64,
    pub q: f64,
}

impl Default for ScoreParams {
    fn default() -> Self {
        Self { p: 10.0, q: 0.7 }
    }
}

impl ScoreParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0) || !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "score params p={} q={} need p > 0 and q in (0, 1)",
                self.p, self.q
            )));
        }
        Ok(())
    }
}

/// Which full-local run normalizes the latency and energy scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalizer {
    /// The model's heaviest version run fully on the device. Every version of
    /// a model shares it, so the scores rank actions by raw latency and energy.
    #[default]
    PerModel,
    /// The chosen version itself run fully on the device.
    PerVersion,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Scores {
    pub accuracy: f64,
    pub latency: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionOutcome {
    pub version_index: usize,
    pub cut_layer: usize,
    pub latency_s: f64,
    pub local_latency_s: f64,
    pub transmission_latency_s: f64,
    pub remote_latency_s: f64,
    pub energy_j: f64,
    pub compute_energy_j: f64,
    pub transmission_energy_j: f64,
    pub accuracy: f64,
    pub scores: Scores,
    pub local_normalizer_latency_s: f64,
    pub local_normalizer_energy_j: f64,
}

pub fn end_to_end_latency(
    version: &VersionProfile,
    l: usize,
    compute_scale: f64,
    class: &BandwidthClass,
    queue_delay_s: f64,
) -> Result<f64> {
    let local = cumulative_local_latency(version, l, compute_scale)?;
    let trans = transmission_latency(class, version.output_mb_at(l)?);
    Ok(local + trans + remote_latency(queue_delay_s, version, l)?)
}

pub fn accuracy_score(accuracy: f64, params: &ScoreParams) -> f64 {
    1.0 / (1.0 + (-params.p * (accuracy - params.q)).exp())
}

pub fn latency_score(latency_s: f64, normalizer_s: f64) -> Result<f64> {
    if !(normalizer_s > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "latency normalizer {normalizer_s} must be > 0"
        )));
    }
    Ok(1.0 - latency_s / normalizer_s)
}

pub fn energy_score(energy_j: f64, normalizer_j: f64) -> Result<f64> {
    if !(normalizer_j > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "energy normalizer {normalizer_j} must be > 0"
        )));
    }
    Ok(1.0 - energy_j / normalizer_j)
}

/// Mean weighted score over the devices that ran a task; zero when none did.
pub fn slot_reward<'a>(
    outcomes: impl IntoIterator<Item = &'a DecisionOutcome>,
    weights: &RewardWeights,
) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for o in outcomes {
        sum += weights.combine(&o.scores);
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Everything needed to score one execution profile on one device.
#[derive(Debug, Clone, Copy)]
pub struct DecisionContext<'a> {
    pub model: &'a ModelProfile,
    pub compute_scale: f64,
    pub bandwidth: &'a BandwidthClass,
    pub queue_delay_s: f64,
    pub params: &'a ScoreParams,
    pub normalizer: Normalizer,
}

impl DecisionContext<'_> {
    pub fn evaluate(&self, version_index: usize, cut_layer: usize) -> Result<DecisionOutcome> {
        let version = self.model.versions.get(version_index).ok_or_else(|| {
            Error::ActionOutOfRange(format!(
                "version index {version_index} for model `{}` with {} versions",
                self.model.model_id,
                self.model.versions.len()
            ))
        })?;
        let l = cut_layer;
        let local_latency_s = cumulative_local_latency(version, l, self.compute_scale)?;
        let output_mb = version.output_mb_at(l)?;
        let transmission_latency_s = transmission_latency(self.bandwidth, output_mb);
        let remote_latency_s = remote_latency(self.queue_delay_s, version, l)?;
        let latency_s = local_latency_s + transmission_latency_s + remote_latency_s;
        let compute_energy_j = compute_energy(version, l, self.compute_scale)?;
        let transmission_energy_j = transmission_energy(self.bandwidth, output_mb);
        let energy_j = compute_energy_j + transmission_energy_j;

        let reference = match self.normalizer {
            Normalizer::PerModel => self.model.reference_version(),
            Normalizer::PerVersion => version,
        };
        let full = reference.num_layers;
        let local_normalizer_latency_s =
            cumulative_local_latency(reference, full, self.compute_scale)?;
        let local_normalizer_energy_j = compute_energy(reference, full, self.compute_scale)?;

        let scores = Scores {
            accuracy: accuracy_score(version.accuracy, self.params),
            latency: latency_score(latency_s, local_normalizer_latency_s)?,
            energy: energy_score(energy_j, local_normalizer_energy_j)?,
        };
        Ok(DecisionOutcome {
            version_index,
            cut_layer: l,
            latency_s,
            local_latency_s,
            transmission_latency_s,
            remote_latency_s,
            energy_j,
            compute_energy_j,
            transmission_energy_j,
            accuracy: version.accuracy,
            scores,
            local_normalizer_latency_s,
            local_normalizer_energy_j,
        })
    }
}
