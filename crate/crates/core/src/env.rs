//! Time-slot environment: state encoding, multi-discrete action decoding and
//! the per-slot energy/latency/reward step.

use std::ops::Deref;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::device::{kinetic_energy_slot, ActivityProfile, UavBuild, UavState, BATTERY_LEVELS};
use crate::error::{Error, Result};
use crate::network::BandwidthModel;
use crate::profiles::ProfileCatalog;
use crate::reward::{
    slot_reward, DecisionContext, DecisionOutcome, Normalizer, RewardWeights, ScoreParams,
};
use crate::server::{ServerConfig, ServerState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UavSpec {
    pub uav_id: String,
    #[serde(default)]
    pub build: UavBuild,
    pub model_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActivityChoice {
    pub name: String,
    pub profile: ActivityProfile,
    pub weight: f64,
}

/// The three named kinetic profiles; only `high` is drawn by default.
pub fn default_activity_mixture() -> Vec<ActivityChoice> {
    vec![
        ActivityChoice {
            name: "high".into(),
            profile: ActivityProfile::high(),
            weight: 1.0,
        },
        ActivityChoice {
            name: "medium".into(),
            profile: ActivityProfile::medium(),
            weight: 0.0,
        },
        ActivityChoice {
            name: "low".into(),
            profile: ActivityProfile::low(),
            weight: 0.0,
        },
    ]
}

#[derive(Debug, Clone)]
pub struct EnvConfig {
    pub catalog: Arc<ProfileCatalog>,
    pub uavs: Vec<UavSpec>,
    pub bandwidth: BandwidthModel,
    pub server: ServerConfig,
    pub slot_s: f64,
    pub weights: RewardWeights,
    pub score_params: ScoreParams,
    pub normalizer: Normalizer,
    pub task_probability: f64,
    pub activity: Vec<ActivityChoice>,
    pub max_slots: usize,
    pub seed: u64,
}

impl EnvConfig {
    /// Defaults around a catalog: 30 s slots, 0.9 task probability, High activity.
    pub fn new(catalog: Arc<ProfileCatalog>, uavs: Vec<UavSpec>) -> Self {
        Self {
            catalog,
            uavs,
            bandwidth: BandwidthModel::default(),
            server: ServerConfig::default(),
            slot_s: 30.0,
            weights: RewardWeights::default(),
            score_params: ScoreParams::default(),
            normalizer: Normalizer::default(),
            task_probability: 0.9,
            activity: default_activity_mixture(),
            max_slots: 1000,
            seed: 0,
        }
    }

    /// `n` identical default UAVs all running `model_id`.
    pub fn uniform(catalog: Arc<ProfileCatalog>, n: usize, model_id: &str) -> Self {
        let uavs = (0..n)
            .map(|k| UavSpec {
                uav_id: format!("uav{k}"),
                build: UavBuild::default(),
                model_id: model_id.to_string(),
            })
            .collect();
        Self::new(catalog, uavs)
    }

    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if self.uavs.is_empty() {
            errors.push("env.uavs: at least one UAV is required".to_string());
        }
        if !(self.slot_s > 0.0) {
            errors.push("env.slot_s: must be > 0".to_string());
        }
        if self.max_slots == 0 {
            errors.push("env.max_slots: must be > 0".to_string());
        }
        if !(0.0..=1.0).contains(&self.task_probability) {
            errors.push("env.task_probability: must be in [0, 1]".to_string());
        }
        if self.activity.is_empty()
            || self.activity.iter().any(|a| !(a.weight >= 0.0))
            || !(self.activity.iter().map(|a| a.weight).sum::<f64>() > 0.0)
        {
            errors
                .push("env.activity: weights must be non-negative with a positive sum".to_string());
        }
        for (i, a) in self.activity.iter().enumerate() {
            if let Err(e) = a.profile.validate() {
                errors.push(format!("env.activity[{i}]: {e}"));
            }
        }
        for (i, uav) in self.uavs.iter().enumerate() {
            if self.catalog.model(&uav.model_id).is_err() {
                errors.push(format!(
                    "env.uavs[{i}].model_id: unknown model `{}`",
                    uav.model_id
                ));
            }
            if let Err(Error::Validation(msgs)) = uav.build.validate() {
                errors.extend(msgs.into_iter().map(|m| format!("env.uavs[{i}]: {m}")));
            }
        }
        for result in [
            self.bandwidth.validate(),
            self.server.validate(),
            self.weights.validate(),
            self.score_params.validate(),
            self.catalog.validate(),
        ] {
            match result {
                Ok(()) => {}
                Err(Error::Validation(msgs)) => errors.extend(msgs),
                Err(other) => errors.push(other.to_string()),
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errors))
        }
    }

    /// Feature count of one UAV's observation block.
    pub fn block_len(&self) -> usize {
        1 + 1 + self.bandwidth.classes.len() + self.catalog.models.len() + 3
    }

    pub fn observation_len(&self) -> usize {
        self.uavs.len() * self.block_len()
    }

    /// Per UAV `(number of versions, widest cut list)` of its assigned model.
    pub fn action_space_shape(&self) -> Result<Vec<(usize, usize)>> {
        self.uavs
            .iter()
            .map(|u| {
                let model = self.catalog.model(&u.model_id)?;
                Ok((model.versions.len(), model.max_cuts()))
            })
            .collect()
    }
}

/// Flat feature vector; every entry lies in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation(pub Vec<f64>);

impl Deref for Observation {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// One device's decoded execution profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExecutionProfile {
    pub version_index: usize,
    pub cut_index: usize,
    /// 1-based layer after which the network is split.
    pub cut_layer: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionVector {
    pub profiles: Vec<ExecutionProfile>,
    /// Cut indices that pointed past a ragged version's cut list and were clamped.
    pub clamped: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SlotEnergy {
    pub kinetic_j: f64,
    pub compute_j: f64,
    pub transmission_j: f64,
}

impl SlotEnergy {
    pub fn total(&self) -> f64 {
        self.kinetic_j + self.compute_j + self.transmission_j
    }

    fn add(&mut self, other: &SlotEnergy) {
        self.kinetic_j += other.kinetic_j;
        self.compute_j += other.compute_j;
        self.transmission_j += other.transmission_j;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    /// Outcome per UAV; `None` for devices that were off or idle this slot.
    pub outcomes: Vec<Option<DecisionOutcome>>,
    pub energy: Vec<SlotEnergy>,
    /// Backlog the inference jobs saw this slot.
    pub queue_len: u32,
    pub clamped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// Running totals for the per-episode energy balance.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyLedger {
    pub initial_reserve_j: f64,
    pub drained: SlotEnergy,
}

pub struct Env {
    config: EnvConfig,
    uavs: Vec<UavState>,
    server: ServerState,
    rng: ChaCha8Rng,
    slot: usize,
    done: bool,
    ledger: EnergyLedger,
    activity_total: f64,
}

impl Env {
    pub fn new(config: EnvConfig) -> Result<Self> {
        config.validate()?;
        let server = ServerState::new(config.server.clone());
        let activity_total = config.activity.iter().map(|a| a.weight).sum();
        let seed = config.seed;
        let mut env = Self {
            uavs: Vec::new(),
            server,
            rng: ChaCha8Rng::seed_from_u64(seed),
            slot: 0,
            done: false,
            ledger: EnergyLedger::default(),
            activity_total,
            config,
        };
        env.reset_with_seed(seed);
        Ok(env)
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn uavs(&self) -> &[UavState] {
        &self.uavs
    }

    pub fn server(&self) -> &ServerState {
        &self.server
    }

    pub fn slot(&self) -> usize {
        self.slot
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn ledger(&self) -> &EnergyLedger {
        &self.ledger
    }

    pub fn reset(&mut self) -> Observation {
        self.reset_with_seed(self.config.seed)
    }

    /// Full batteries, fresh queue, RNG reseeded, initial per-device draws.
    pub fn reset_with_seed(&mut self, seed: u64) -> Observation {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.server = ServerState::new(self.config.server.clone());
        self.uavs = self
            .config
            .uavs
            .iter()
            .map(|spec| {
                let model_index = self
                    .config
                    .catalog
                    .model_index(&spec.model_id)
                    .expect("validated model id");
                let scale =
                    spec.build.compute_scale * self.config.catalog.scaling(&spec.build.build_id);
                UavState::new(spec.uav_id.clone(), spec.build.clone(), scale, model_index)
            })
            .collect();
        self.slot = 0;
        self.done = false;
        self.ledger = EnergyLedger {
            initial_reserve_j: self.uavs.iter().map(|u| u.reserve_j).sum(),
            drained: SlotEnergy::default(),
        };
        self.resample_devices(true);
        self.observation()
    }

    /// Draws task flag, bandwidth class and activity for every device. The
    /// number of draws is fixed per device so the stream does not depend on
    /// which devices are still on.
    fn resample_devices(&mut self, initial: bool) {
        let task_p = self.config.task_probability;
        for k in 0..self.uavs.len() {
            let task_draw: f64 = self.rng.random();
            let current = (!initial).then_some(self.uavs[k].bandwidth_class);
            let class = self
                .config
                .bandwidth
                .sample(current, &mut self.rng)
                .expect("validated bandwidth model");
            let activity_draw: f64 = self.rng.random::<f64>() * self.activity_total;
            let uav = &mut self.uavs[k];
            if !uav.is_on() {
                uav.task_flag = false;
                continue;
            }
            uav.task_flag = task_draw < task_p;
            uav.bandwidth_class = class;
            uav.activity = pick_activity(&self.config.activity, activity_draw);
        }
    }

    pub fn observation(&self) -> Observation {
        let n_classes = self.config.bandwidth.classes.len();
        let n_models = self.config.catalog.models.len();
        let block = self.config.block_len();
        let mut features = vec![0.0; self.config.observation_len()];
        for (k, uav) in self.uavs.iter().enumerate() {
            if !uav.is_on() {
                continue;
            }
            let f = &mut features[k * block..(k + 1) * block];
            f[0] = f64::from(uav.battery_level) / f64::from(BATTERY_LEVELS);
            f[1] = if uav.task_flag { 1.0 } else { 0.0 };
            f[2 + uav.bandwidth_class] = 1.0;
            f[2 + n_classes + uav.model_index] = 1.0;
            let a = 2 + n_classes + n_models;
            f[a] = uav.activity.forward;
            f[a + 1] = uav.activity.vertical;
            f[a + 2] = uav.activity.rotation;
        }
        Observation(features)
    }

    pub fn action_space_shape(&self) -> Vec<(usize, usize)> {
        self.config.action_space_shape().expect("validated config")
    }

    /// Maps per-UAV `(version_index, cut_index)` pairs to concrete cut layers.
    pub fn decode_action(&self, raw: &[(usize, usize)]) -> Result<ActionVector> {
        decode_action(&self.config, raw)
    }

    /// Scoring context for device `k` under a given queue delay.
    pub fn decision_context(&self, k: usize, queue_delay_s: f64) -> DecisionContext<'_> {
        let uav = &self.uavs[k];
        DecisionContext {
            model: &self.config.catalog.models[uav.model_index],
            compute_scale: uav.compute_scale,
            bandwidth: &self.config.bandwidth.classes[uav.bandwidth_class],
            queue_delay_s,
            params: &self.config.score_params,
            normalizer: self.config.normalizer,
        }
    }

    pub fn step(&mut self, action: &ActionVector) -> Result<StepResult> {
        if self.done {
            return Err(Error::EpisodeDone);
        }
        if action.profiles.len() != self.uavs.len() {
            return Err(Error::ActionOutOfRange(format!(
                "{} profiles for {} UAVs",
                action.profiles.len(),
                self.uavs.len()
            )));
        }
        let queue_len = self.server.queue_len;
        let queue_delay = self.server.queue_delay();

        let mut outcomes = Vec::with_capacity(self.uavs.len());
        for (k, profile) in action.profiles.iter().enumerate() {
            let uav = &self.uavs[k];
            let outcome = if uav.is_on() && uav.task_flag {
                Some(
                    self.decision_context(k, queue_delay)
                        .evaluate(profile.version_index, profile.cut_layer)?,
                )
            } else {
                None
            };
            outcomes.push(outcome);
        }

        let slot_s = self.config.slot_s;
        let mut energy = vec![SlotEnergy::default(); self.uavs.len()];
        for (k, uav) in self.uavs.iter_mut().enumerate() {
            if !uav.is_on() {
                continue;
            }
            let e = &mut energy[k];
            if let Some(o) = &outcomes[k] {
                e.compute_j = uav.drain_battery(o.compute_energy_j);
                e.transmission_j = uav.drain_battery(o.transmission_energy_j);
            }
            e.kinetic_j = uav.drain_battery(kinetic_energy_slot(&uav.activity, &uav.build, slot_s));
            self.ledger.drained.add(e);
        }

        let reward = slot_reward(outcomes.iter().flatten(), &self.config.weights);

        self.server.advance_queue(slot_s, &mut self.rng);
        self.slot += 1;
        self.resample_devices(false);
        self.done = self.uavs.iter().all(|u| !u.is_on()) || self.slot >= self.config.max_slots;

        Ok(StepResult {
            observation: self.observation(),
            reward,
            done: self.done,
            info: StepInfo {
                outcomes,
                energy,
                queue_len,
                clamped: action.clamped,
            },
        })
    }

    /// Remaining reserve across all devices.
    pub fn total_reserve(&self) -> f64 {
        self.uavs.iter().map(|u| u.reserve_j).sum()
    }
}

fn pick_activity(choices: &[ActivityChoice], draw: f64) -> ActivityProfile {
    let mut acc = 0.0;
    let mut last = choices[0].profile;
    for c in choices {
        if c.weight > 0.0 {
            last = c.profile;
            acc += c.weight;
            if draw < acc {
                return c.profile;
            }
        }
    }
    last
}

pub fn decode_action(config: &EnvConfig, raw: &[(usize, usize)]) -> Result<ActionVector> {
    if raw.len() != config.uavs.len() {
        return Err(Error::ActionOutOfRange(format!(
            "{} index pairs for {} UAVs",
            raw.len(),
            config.uavs.len()
        )));
    }
    let mut clamped = 0;
    let profiles = raw
        .iter()
        .zip(&config.uavs)
        .map(|(&(version_index, cut_index), spec)| {
            let model = config.catalog.model(&spec.model_id)?;
            let bound = model.max_cuts();
            let version = model.versions.get(version_index).ok_or_else(|| {
                Error::ActionOutOfRange(format!(
                    "version index {version_index} >= {} for `{}`",
                    model.versions.len(),
                    spec.uav_id
                ))
            })?;
            if cut_index >= bound {
                return Err(Error::ActionOutOfRange(format!(
                    "cut index {cut_index} >= {bound} for `{}`",
                    spec.uav_id
                )));
            }
            let effective = if cut_index >= version.candidate_cuts.len() {
                clamped += 1;
                version.candidate_cuts.len() - 1
            } else {
                cut_index
            };
            Ok(ExecutionProfile {
                version_index,
                cut_index: effective,
                cut_layer: version.candidate_cuts[effective],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ActionVector { profiles, clamped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::BandwidthClass;
    use crate::profiles::{classifier_catalog_stub, fixture_f1};

    fn f1_config(n: usize) -> EnvConfig {
        EnvConfig::uniform(Arc::new(fixture_f1()), n, "toyNet")
    }

    #[test]
    fn reset_gives_full_batteries_and_fixed_length() {
        let mut env = Env::new(f1_config(3)).unwrap();
        let obs = env.reset();
        assert_eq!(obs.len(), 3 * (1 + 1 + 2 + 1 + 3));
        assert_eq!(obs.len(), 24);
        for k in 0..3 {
            assert_eq!(obs[k * 8], 1.0);
        }
        assert!(obs.iter().all(|x| (0.0..=1.0).contains(x)));
        let again = env.reset();
        assert_eq!(obs, again);
    }

    #[test]
    fn decode_examples() {
        let cfg = f1_config(1);
        let a = decode_action(&cfg, &[(0, 0)]).unwrap();
        assert_eq!(a.profiles[0].cut_layer, 1);
        let a = decode_action(&cfg, &[(0, 1)]).unwrap();
        assert_eq!(a.profiles[0].cut_layer, 2);
        let a = decode_action(&cfg, &[(1, 3)]).unwrap();
        assert_eq!(
            (a.profiles[0].version_index, a.profiles[0].cut_layer),
            (1, 6)
        );
        assert!(decode_action(&cfg, &[(2, 0)]).is_err());
        assert!(decode_action(&cfg, &[(0, 4)]).is_err());
        assert!(decode_action(&cfg, &[]).is_err());

        let stub = EnvConfig::uniform(Arc::new(classifier_catalog_stub()), 1, "VGG");
        let a = decode_action(&stub, &[(1, 1)]).unwrap();
        assert_eq!(a.profiles[0].cut_layer, 10);
    }

    #[test]
    fn ragged_cut_lists_are_clamped() {
        let mut cat = fixture_f1();
        cat.models[0].versions[0].candidate_cuts = vec![2, 4];
        let cfg = EnvConfig::uniform(Arc::new(cat), 1, "toyNet");
        assert_eq!(cfg.action_space_shape().unwrap(), vec![(2, 4)]);
        let a = decode_action(&cfg, &[(0, 3)]).unwrap();
        assert_eq!(a.clamped, 1);
        assert_eq!(a.profiles[0].cut_layer, 4);
    }

    #[test]
    fn action_space_shapes() {
        assert_eq!(f1_config(1).action_space_shape().unwrap(), vec![(2, 4)]);
        assert_eq!(f1_config(3).action_space_shape().unwrap(), vec![(2, 4); 3]);
        let stub = EnvConfig::uniform(Arc::new(classifier_catalog_stub()), 1, "ResNet");
        assert_eq!(stub.action_space_shape().unwrap(), vec![(2, 4)]);
    }

    #[test]
    fn idle_slot_drains_kinetic_only() {
        let mut cfg = f1_config(1);
        cfg.task_probability = 0.0;
        let mut env = Env::new(cfg).unwrap();
        env.reset();
        let action = env.decode_action(&[(0, 1)]).unwrap();
        let r = env.step(&action).unwrap();
        assert_eq!(r.reward, 0.0);
        assert!(r.info.outcomes[0].is_none());
        assert_eq!(r.info.energy[0].compute_j, 0.0);
        assert_eq!(r.info.energy[0].kinetic_j, 10_650.0);
        assert_eq!(env.uavs()[0].reserve_j, 500_000.0 - 10_650.0);
    }

    #[test]
    fn forced_light_cut2_reward() {
        let mut cfg = f1_config(1);
        cfg.task_probability = 1.0;
        cfg.bandwidth = BandwidthModel::fixed(BandwidthClass::wide());
        cfg.server.initial_queue_len = 2;
        cfg.normalizer = Normalizer::PerVersion;
        let mut env = Env::new(cfg).unwrap();
        env.reset();
        assert_eq!(env.server().queue_delay(), 0.1);
        let action = env.decode_action(&[(0, 1)]).unwrap();
        let r = env.step(&action).unwrap();
        assert!(
            (r.reward - 0.305_165_667_665_750_15).abs() < 1e-12,
            "{}",
            r.reward
        );
        assert_eq!(r.info.queue_len, 2);
    }

    #[test]
    fn immediate_depletion_ends_episode() {
        let mut cfg = f1_config(1);
        cfg.uavs[0].build.battery_capacity_j = 5_000.0;
        let mut env = Env::new(cfg).unwrap();
        env.reset();
        let a = env.decode_action(&[(0, 0)]).unwrap();
        let r = env.step(&a).unwrap();
        assert!(r.done);
        assert!(r.observation.iter().all(|&x| x == 0.0));
        assert!(matches!(env.step(&a), Err(Error::EpisodeDone)));
    }

    #[test]
    fn episode_cap_ends_episode() {
        let mut cfg = f1_config(2);
        cfg.max_slots = 3;
        let mut env = Env::new(cfg).unwrap();
        env.reset();
        let a = env.decode_action(&[(0, 0), (1, 2)]).unwrap();
        assert!(!env.step(&a).unwrap().done);
        assert!(!env.step(&a).unwrap().done);
        assert!(env.step(&a).unwrap().done);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = f1_config(1);
        cfg.slot_s = 0.0;
        cfg.uavs[0].model_id = "nope".into();
        cfg.max_slots = 0;
        let Err(Error::Validation(msgs)) = Env::new(cfg) else {
            panic!()
        };
        assert_eq!(msgs.len(), 3, "{msgs:?}");
        assert!(Env::new(f1_config(0)).is_err());
    }
}
