//! Reference policies and the policy-evaluation harness.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::agent::a2c::sample_categorical;
use crate::agent::A2CModel;
use crate::env::{Env, EnvConfig, Observation};
use crate::error::{Error, Result};
use crate::reward::{DecisionContext, DecisionOutcome, RewardWeights};
use crate::seed::{derive_seed, STREAM_ACTIONS, STREAM_EVAL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Oracle,
    Trained,
    AccuracyOnly,
    LatencyOnly,
    EnergyOnly,
    LocalOnly,
    MinCutOffload,
    UniformRandom,
}

impl PolicyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyKind::Oracle => "oracle",
            PolicyKind::Trained => "trained",
            PolicyKind::AccuracyOnly => "accuracy-only",
            PolicyKind::LatencyOnly => "latency-only",
            PolicyKind::EnergyOnly => "energy-only",
            PolicyKind::LocalOnly => "local-only",
            PolicyKind::MinCutOffload => "min-cut-offload",
            PolicyKind::UniformRandom => "uniform-random",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "oracle" => PolicyKind::Oracle,
            "trained" => PolicyKind::Trained,
            "accuracy-only" | "ao" => PolicyKind::AccuracyOnly,
            "latency-only" | "lo" => PolicyKind::LatencyOnly,
            "energy-only" | "eo" => PolicyKind::EnergyOnly,
            "local-only" => PolicyKind::LocalOnly,
            "min-cut" | "min-cut-offload" => PolicyKind::MinCutOffload,
            "random" | "uniform-random" => PolicyKind::UniformRandom,
            other => {
                return Err(Error::UnknownId {
                    kind: "policy",
                    id: other.to_string(),
                })
            }
        })
    }
}

/// Weights that reduce the reward to a single metric.
pub fn make_univariate(kind: PolicyKind) -> Result<RewardWeights> {
    match kind {
        PolicyKind::AccuracyOnly => Ok(RewardWeights {
            accuracy: 1.0,
            latency: 0.0,
            energy: 0.0,
        }),
        PolicyKind::LatencyOnly => Ok(RewardWeights {
            accuracy: 0.0,
            latency: 1.0,
            energy: 0.0,
        }),
        PolicyKind::EnergyOnly => Ok(RewardWeights {
            accuracy: 0.0,
            latency: 0.0,
            energy: 1.0,
        }),
        other => Err(Error::UnknownId {
            kind: "univariate policy",
            id: other.to_string(),
        }),
    }
}

pub trait Policy {
    fn kind(&self) -> PolicyKind;

    /// Raw `(version_index, cut_index)` per UAV, within the action-space bounds.
    fn act(&mut self, env: &Env, obs: &Observation) -> Result<Vec<(usize, usize)>>;

    fn name(&self) -> String {
        self.kind().to_string()
    }
}

/// `true` when `a` is preferred over `b`: higher reward, then lower energy,
/// lower latency, lower version index, lower cut index.
fn better(
    a: (f64, &DecisionOutcome, usize, usize),
    b: (f64, &DecisionOutcome, usize, usize),
) -> bool {
    use std::cmp::Ordering::*;
    let ord =
        a.0.partial_cmp(&b.0)
            .unwrap_or(Equal)
            .then_with(|| b.1.energy_j.partial_cmp(&a.1.energy_j).unwrap_or(Equal))
            .then_with(|| b.1.latency_s.partial_cmp(&a.1.latency_s).unwrap_or(Equal))
            .then_with(|| b.2.cmp(&a.2))
            .then_with(|| b.3.cmp(&a.3));
    ord == Greater
}

/// Exhaustive argmax of the weighted score over every (version, cut) of one device.
pub fn oracle_profile(
    ctx: &DecisionContext<'_>,
    weights: &RewardWeights,
) -> Result<(usize, usize, DecisionOutcome)> {
    let mut best: Option<(f64, DecisionOutcome, usize, usize)> = None;
    for (vi, version) in ctx.model.versions.iter().enumerate() {
        for (ci, &cut) in version.candidate_cuts.iter().enumerate() {
            let outcome = ctx.evaluate(vi, cut)?;
            let value = weights.combine(&outcome.scores);
            let take = match &best {
                None => true,
                Some((bv, bo, bvi, bci)) => {
                    better((value, &outcome, vi, ci), (*bv, bo, *bvi, *bci))
                }
            };
            if take {
                best = Some((value, outcome, vi, ci));
            }
        }
    }
    let (_, outcome, vi, ci) = best.expect("models have at least one version and cut");
    Ok((vi, ci, outcome))
}

/// Oracle decision for every device using the expected queue delay. Devices
/// that are off or idle get `(0, 0)`.
pub fn oracle_action(env: &Env, weights: &RewardWeights) -> Result<Vec<(usize, usize)>> {
    let delay = env.server().expected_queue_delay();
    env.uavs()
        .iter()
        .enumerate()
        .map(|(k, uav)| {
            if uav.is_on() && uav.task_flag {
                let (vi, ci, _) = oracle_profile(&env.decision_context(k, delay), weights)?;
                Ok((vi, ci))
            } else {
                Ok((0, 0))
            }
        })
        .collect()
}

/// Argmax under either the environment's weights or a fixed override.
pub struct OraclePolicy {
    kind: PolicyKind,
    weights: Option<RewardWeights>,
}

impl OraclePolicy {
    pub fn new() -> Self {
        Self {
            kind: PolicyKind::Oracle,
            weights: None,
        }
    }

    pub fn univariate(kind: PolicyKind) -> Result<Self> {
        Ok(Self {
            kind,
            weights: Some(make_univariate(kind)?),
        })
    }
}

impl Default for OraclePolicy {
    fn default() -> Self {
        Self::new()
    }
}

impl Policy for OraclePolicy {
    fn kind(&self) -> PolicyKind {
        self.kind
    }

    fn act(&mut self, env: &Env, _obs: &Observation) -> Result<Vec<(usize, usize)>> {
        let weights = self.weights.unwrap_or(env.config().weights);
        oracle_action(env, &weights)
    }
}

/// Fixed rule: first version, cut at its last candidate (local-only) or first candidate (min-cut).
pub struct StaticPolicy {
    kind: PolicyKind,
}

impl StaticPolicy {
    pub fn local_only() -> Self {
        Self {
            kind: PolicyKind::LocalOnly,
        }
    }

    pub fn min_cut() -> Self {
        Self {
            kind: PolicyKind::MinCutOffload,
        }
    }
}

impl Policy for StaticPolicy {
    fn kind(&self) -> PolicyKind {
        self.kind
    }

    fn act(&mut self, env: &Env, _obs: &Observation) -> Result<Vec<(usize, usize)>> {
        let catalog = &env.config().catalog;
        Ok(env
            .uavs()
            .iter()
            .map(|u| {
                let version = &catalog.models[u.model_index].versions[0];
                match self.kind {
                    PolicyKind::LocalOnly => (0, version.candidate_cuts.len() - 1),
                    _ => (0, 0),
                }
            })
            .collect())
    }
}

pub struct RandomPolicy {
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Policy for RandomPolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::UniformRandom
    }

    fn act(&mut self, env: &Env, _obs: &Observation) -> Result<Vec<(usize, usize)>> {
        Ok(env
            .action_space_shape()
            .into_iter()
            .map(|(nv, nc)| {
                let v = sample_categorical(&vec![1.0 / nv as f64; nv], &mut self.rng);
                let c = sample_categorical(&vec![1.0 / nc as f64; nc], &mut self.rng);
                (v, c)
            })
            .collect())
    }
}

/// Greedy (per-head argmax) actions from a trained actor.
pub struct TrainedPolicy {
    model: A2CModel,
}

impl TrainedPolicy {
    pub fn new(model: A2CModel) -> Self {
        Self { model }
    }
}

impl Policy for TrainedPolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Trained
    }

    fn act(&mut self, _env: &Env, obs: &Observation) -> Result<Vec<(usize, usize)>> {
        self.model.greedy_action(obs)
    }
}

/// Builds a policy by name for `config`. `trained` needs a model.
pub fn build_policy(
    kind: PolicyKind,
    seed: u64,
    model: Option<A2CModel>,
) -> Result<Box<dyn Policy + Send>> {
    Ok(match kind {
        PolicyKind::Oracle => Box::new(OraclePolicy::new()),
        PolicyKind::AccuracyOnly | PolicyKind::LatencyOnly | PolicyKind::EnergyOnly => {
            Box::new(OraclePolicy::univariate(kind)?)
        }
        PolicyKind::LocalOnly => Box::new(StaticPolicy::local_only()),
        PolicyKind::MinCutOffload => Box::new(StaticPolicy::min_cut()),
        PolicyKind::UniformRandom => {
            Box::new(RandomPolicy::new(derive_seed(seed, STREAM_ACTIONS, 0)))
        }
        PolicyKind::Trained => {
            Box::new(TrainedPolicy::new(model.ok_or_else(|| {
                Error::InvalidConfig("trained policy needs a checkpoint".into())
            })?))
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub episode: usize,
    pub slot: usize,
    pub uav: String,
    pub version: String,
    pub cut: usize,
    pub latency_s: f64,
    pub energy_j: f64,
    pub accuracy_score: f64,
    pub latency_score: f64,
    pub energy_score: f64,
    pub reward: f64,
    pub battery: u8,
    pub queue_len: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub policy: String,
    pub episodes: usize,
    pub slots: usize,
    pub decisions: usize,
    /// Mean over episodes of the per-episode mean slot reward.
    pub mean_reward: f64,
    pub mean_latency_s: f64,
    /// Compute plus transmission energy per decision.
    pub mean_energy_j: f64,
    pub mean_transmission_energy_j: f64,
    pub mean_accuracy: f64,
    /// Slots each device stayed on, averaged over devices and episodes.
    pub mean_lifetime_slots: f64,
    pub tau_latency_violation_rate: f64,
    pub tau_accuracy_violation_rate: f64,
    pub clamped_actions: usize,
    /// `model/version/cut` -> count.
    pub action_histogram: BTreeMap<String, usize>,
}

pub fn evaluate_policy(
    policy: &mut dyn Policy,
    config: &EnvConfig,
    episodes: usize,
    seed: u64,
) -> Result<EvalReport> {
    evaluate_policy_traced(policy, config, episodes, seed, |_| {})
}

/// Runs `episodes` episodes; episode `e` uses an environment seed derived
/// from `(seed, e)` so different policies see the same exogenous draws.
pub fn evaluate_policy_traced(
    policy: &mut dyn Policy,
    config: &EnvConfig,
    episodes: usize,
    seed: u64,
    mut trace: impl FnMut(&TraceRow),
) -> Result<EvalReport> {
    if episodes == 0 {
        return Err(Error::InvalidConfig(
            "evaluation needs at least one episode".into(),
        ));
    }
    let mut env = Env::new(config.clone())?;
    let catalog = config.catalog.clone();
    let mut reward_sum = 0.0;
    let mut slots = 0usize;
    let mut decisions = 0usize;
    let (mut latency, mut energy, mut trans, mut accuracy) = (0.0, 0.0, 0.0, 0.0);
    let (mut tau_lat, mut tau_acc) = (0usize, 0usize);
    let mut lifetime = 0usize;
    let mut clamped = 0usize;
    let mut histogram = BTreeMap::new();

    for episode in 0..episodes {
        let mut obs = env.reset_with_seed(derive_seed(seed, STREAM_EVAL, episode as u64));
        let mut episode_reward = 0.0;
        let mut episode_slots = 0usize;
        loop {
            lifetime += env.uavs().iter().filter(|u| u.is_on()).count();
            let raw = policy.act(&env, &obs)?;
            let action = env.decode_action(&raw)?;
            let slot = env.slot();
            let step = env.step(&action)?;
            clamped += step.info.clamped;
            for (k, outcome) in step.info.outcomes.iter().enumerate() {
                let Some(o) = outcome else { continue };
                let uav = &env.uavs()[k];
                let model = &catalog.models[uav.model_index];
                let version = &model.versions[o.version_index];
                decisions += 1;
                latency += o.latency_s;
                energy += o.energy_j;
                trans += o.transmission_energy_j;
                accuracy += o.accuracy;
                tau_lat += usize::from(o.latency_s > model.latency_requirement_s);
                tau_acc += usize::from(o.accuracy < model.accuracy_requirement);
                *histogram
                    .entry(format!(
                        "{}/{}/{}",
                        model.model_id, version.version_id, o.cut_layer
                    ))
                    .or_insert(0) += 1;
                trace(&TraceRow {
                    episode,
                    slot,
                    uav: uav.uav_id.clone(),
                    version: version.version_id.clone(),
                    cut: o.cut_layer,
                    latency_s: o.latency_s,
                    energy_j: o.energy_j,
                    accuracy_score: o.scores.accuracy,
                    latency_score: o.scores.latency,
                    energy_score: o.scores.energy,
                    reward: step.reward,
                    battery: uav.battery_level,
                    queue_len: step.info.queue_len,
                });
            }
            episode_reward += step.reward;
            episode_slots += 1;
            obs = step.observation;
            if step.done {
                break;
            }
        }
        slots += episode_slots;
        reward_sum += episode_reward / episode_slots as f64;
    }

    let per_decision = |x: f64| {
        if decisions == 0 {
            0.0
        } else {
            x / decisions as f64
        }
    };
    let device_episodes = (episodes * config.uavs.len()) as f64;
    Ok(EvalReport {
        policy: policy.name(),
        episodes,
        slots,
        decisions,
        mean_reward: reward_sum / episodes as f64,
        mean_latency_s: per_decision(latency),
        mean_energy_j: per_decision(energy),
        mean_transmission_energy_j: per_decision(trans),
        mean_accuracy: per_decision(accuracy),
        mean_lifetime_slots: lifetime as f64 / device_episodes,
        tau_latency_violation_rate: per_decision(tau_lat as f64),
        tau_accuracy_violation_rate: per_decision(tau_acc as f64),
        clamped_actions: clamped,
        action_histogram: histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{BandwidthClass, BandwidthModel};
    use crate::profiles::fixture_f1;
    use std::sync::Arc;

    fn f1(n: usize) -> EnvConfig {
        EnvConfig::uniform(Arc::new(fixture_f1()), n, "toyNet")
    }

    #[test]
    fn univariate_weights() {
        assert_eq!(
            make_univariate(PolicyKind::AccuracyOnly).unwrap(),
            RewardWeights::new(1.0, 0.0, 0.0).unwrap()
        );
        assert_eq!(
            make_univariate(PolicyKind::LatencyOnly).unwrap(),
            RewardWeights::new(0.0, 1.0, 0.0).unwrap()
        );
        assert_eq!(
            make_univariate(PolicyKind::EnergyOnly).unwrap(),
            RewardWeights::new(0.0, 0.0, 1.0).unwrap()
        );
        assert!(make_univariate(PolicyKind::Oracle).is_err());
        assert!("bogus".parse::<PolicyKind>().is_err());
        assert_eq!("eo".parse::<PolicyKind>().unwrap(), PolicyKind::EnergyOnly);
    }

    #[test]
    fn accuracy_only_picks_heavy() {
        let mut cfg = f1(1);
        cfg.task_probability = 1.0;
        let env = Env::new(cfg).unwrap();
        let action =
            oracle_action(&env, &make_univariate(PolicyKind::AccuracyOnly).unwrap()).unwrap();
        assert_eq!(action[0].0, 1);
        // every heavy cut ties on the accuracy score; lowest energy wins, which is cut 1
        assert_eq!(action[0].1, 0);
    }

    #[test]
    fn oracle_beats_random_and_local_only_sends_little() {
        let cfg = f1(2);
        let oracle = evaluate_policy(&mut OraclePolicy::new(), &cfg, 3, 1).unwrap();
        let random = evaluate_policy(&mut RandomPolicy::new(1), &cfg, 3, 1).unwrap();
        assert!(oracle.mean_reward >= random.mean_reward);
        let local = evaluate_policy(&mut StaticPolicy::local_only(), &cfg, 3, 1).unwrap();
        // only the 0.01 Mb result payload leaves the device
        assert!(local.mean_transmission_energy_j <= 0.08 * 0.01 + 1e-12);
        assert_eq!(
            local.action_histogram.keys().collect::<Vec<_>>(),
            vec!["toyNet/light/4"]
        );
        assert_eq!(
            local.action_histogram.values().sum::<usize>(),
            local.decisions
        );
    }

    #[test]
    fn energy_weighting_spends_less_energy() {
        let mut cfg = f1(1);
        cfg.bandwidth = BandwidthModel::default();
        let eo = evaluate_policy(
            &mut OraclePolicy::univariate(PolicyKind::EnergyOnly).unwrap(),
            &cfg,
            2,
            3,
        )
        .unwrap();
        let lo = evaluate_policy(
            &mut OraclePolicy::univariate(PolicyKind::LatencyOnly).unwrap(),
            &cfg,
            2,
            3,
        )
        .unwrap();
        assert!(eo.mean_energy_j <= lo.mean_energy_j);
        assert!(lo.mean_latency_s <= eo.mean_latency_s);
    }

    #[test]
    fn evaluation_is_deterministic() {
        let mut cfg = f1(2);
        cfg.bandwidth = BandwidthModel::fixed(BandwidthClass::narrow());
        let a = evaluate_policy(&mut RandomPolicy::new(4), &cfg, 2, 9).unwrap();
        let b = evaluate_policy(&mut RandomPolicy::new(4), &cfg, 2, 9).unwrap();
        assert_eq!(a, b);
        assert!(evaluate_policy(&mut RandomPolicy::new(4), &cfg, 0, 9).is_err());
    }
}
