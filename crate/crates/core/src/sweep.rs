//! Reward-weight sensitivity sweeps.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{train, A2CModel, Hyperparams};
use crate::baselines::{build_policy, evaluate_policy, EvalReport, PolicyKind};
use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::reward::RewardWeights;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepWeight {
    Accuracy,
    Latency,
    Energy,
}

impl FromStr for SweepWeight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "w1" | "accuracy" => Ok(SweepWeight::Accuracy),
            "w2" | "latency" => Ok(SweepWeight::Latency),
            "w3" | "energy" => Ok(SweepWeight::Energy),
            other => Err(Error::UnknownId {
                kind: "sweep weight",
                id: other.to_string(),
            }),
        }
    }
}

impl fmt::Display for SweepWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepWeight::Accuracy => "w1",
            SweepWeight::Latency => "w2",
            SweepWeight::Energy => "w3",
        })
    }
}

/// Sets one weight to `value` and splits `1 - value` between the other two
/// in proportion to their share of `base`; an even split if both are zero.
pub fn renormalize(base: &RewardWeights, which: SweepWeight, value: f64) -> Result<RewardWeights> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidConfig(format!(
            "grid value {value} outside [0, 1]"
        )));
    }
    let rest = 1.0 - value;
    let split = |a: f64, b: f64| -> (f64, f64) {
        let s = a + b;
        if s > 0.0 {
            (rest * a / s, rest * b / s)
        } else {
            (rest / 2.0, rest / 2.0)
        }
    };
    Ok(match which {
        SweepWeight::Accuracy => {
            let (l, e) = split(base.latency, base.energy);
            RewardWeights {
                accuracy: value,
                latency: l,
                energy: e,
            }
        }
        SweepWeight::Latency => {
            let (a, e) = split(base.accuracy, base.energy);
            RewardWeights {
                accuracy: a,
                latency: value,
                energy: e,
            }
        }
        SweepWeight::Energy => {
            let (a, l) = split(base.accuracy, base.latency);
            RewardWeights {
                accuracy: a,
                latency: l,
                energy: value,
            }
        }
    })
}

/// Inclusive `start..=stop` grid with the given step.
pub fn grid_from_range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "grid step {step} must be > 0"
        )));
    }
    let mut grid = Vec::new();
    let mut i = 0u32;
    loop {
        let v = start + f64::from(i) * step;
        if v > stop + 1e-9 {
            break;
        }
        grid.push(v.min(stop));
        i += 1;
    }
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty sweep grid".into()));
    }
    Ok(grid)
}

/// How each grid point picks its actions.
#[derive(Debug, Clone)]
pub enum SweepPolicy {
    Fixed(PolicyKind, Option<A2CModel>),
    /// Train a fresh agent at every grid point, then evaluate it greedily.
    Train(Hyperparams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub grid_value: f64,
    pub weights: RewardWeights,
    pub report: EvalReport,
}

/// Grid points run in parallel, each with its own environment and RNG
/// streams; rows come back in grid order.
pub fn run_sweep(
    base: &EnvConfig,
    which: SweepWeight,
    grid: &[f64],
    policy: &SweepPolicy,
    episodes: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty sweep grid".into()));
    }
    grid.par_iter()
        .map(|&value| {
            let mut config = base.clone();
            config.weights = renormalize(&base.weights, which, value)?;
            let mut boxed = match policy {
                SweepPolicy::Fixed(kind, model) => build_policy(*kind, seed, model.clone())?,
                SweepPolicy::Train(hp) => {
                    let trained = train(&config, hp)?;
                    build_policy(PolicyKind::Trained, seed, Some(trained.model))?
                }
            };
            let report = evaluate_policy(boxed.as_mut(), &config, episodes, seed)?;
            Ok(SweepRow {
                grid_value: value,
                weights: config.weights,
                report,
            })
        })
        .collect()
}
