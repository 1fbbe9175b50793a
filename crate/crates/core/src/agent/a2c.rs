//! Advantage actor-critic with one `(version, cut)` categorical pair per UAV.
//!
//! The actor is a two-layer ReLU trunk followed, for each UAV, by a shared
//! ReLU layer that feeds a version head and a cut head. The critic is a
//! separate two-layer ReLU network with a scalar output. Updates happen once
//! per episode on the whole trajectory with Monte-Carlo returns and a value
//! baseline, followed by a clipped plain SGD step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::nn::{entropy, log_softmax, relu_backward, relu_in_place, softmax, Dense};
use crate::env::{Env, EnvConfig};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, STREAM_ACTIONS, STREAM_EPISODES, STREAM_INIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSizes {
    pub trunk: [usize; 2],
    pub head: usize,
    pub critic: [usize; 2],
}

impl Default for NetworkSizes {
    fn default() -> Self {
        Self {
            trunk: [512, 256],
            head: 128,
            critic: [512, 256],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub gamma: f64,
    pub entropy_coefficient: f64,
    pub value_loss_coefficient: f64,
    pub episodes: usize,
    pub gradient_clip_norm: f64,
    pub seed: u64,
    #[serde(default)]
    pub network: NetworkSizes,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            learning_rate: 5e-5,
            gamma: 0.99,
            entropy_coefficient: 0.01,
            value_loss_coefficient: 0.5,
            episodes: 5000,
            gradient_clip_norm: 0.5,
            seed: 0,
            network: NetworkSizes::default(),
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            errors.push("agent.learning_rate: must be finite and >= 0".to_string());
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            errors.push("agent.gamma: must be in [0, 1]".to_string());
        }
        if self.episodes == 0 {
            errors.push("agent.episodes: must be > 0".to_string());
        }
        if !(self.entropy_coefficient >= 0.0) || !(self.value_loss_coefficient >= 0.0) {
            errors.push("agent: loss coefficients must be >= 0".to_string());
        }
        let n = self.network;
        if n.trunk.contains(&0) || n.critic.contains(&0) || n.head == 0 {
            errors.push("agent.network: layer widths must be > 0".to_string());
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errors))
        }
    }
}

/// Per-UAV `(version probabilities, cut probabilities)`.
pub type HeadDistributions = Vec<(Vec<f64>, Vec<f64>)>;

#[derive(Debug, Clone, PartialEq)]
pub struct A2CModel {
    pub(crate) obs_dim: usize,
    pub(crate) action_shape: Vec<(usize, usize)>,
    pub(crate) sizes: NetworkSizes,
    /// Actor trunk (2), then `[shared, version, cut]` per UAV, then critic (2 hidden + output).
    pub(crate) layers: Vec<Dense>,
}

/// Activations kept from an actor forward pass.
struct ActorPass {
    h1: Vec<f64>,
    h2: Vec<f64>,
    heads: Vec<HeadPass>,
}

struct HeadPass {
    hidden: Vec<f64>,
    version_probs: Vec<f64>,
    version_logp: Vec<f64>,
    cut_probs: Vec<f64>,
    cut_logp: Vec<f64>,
}

struct CriticPass {
    h1: Vec<f64>,
    h2: Vec<f64>,
    value: f64,
}

/// Inputs to one loss evaluation. Advantages are held fixed.
#[derive(Debug, Clone, Copy)]
pub struct LossBatch<'a> {
    pub observations: &'a [Vec<f64>],
    pub actions: &'a [Vec<(usize, usize)>],
    pub advantages: &'a [f64],
    pub returns: &'a [f64],
    pub entropy_coefficient: f64,
    pub value_loss_coefficient: f64,
}

/// Sums over the batch.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct LossStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

impl A2CModel {
    /// Hidden layers get fan-in uniform weights; the logit layers and the
    /// critic output start at zero.
    pub fn new(
        obs_dim: usize,
        action_shape: Vec<(usize, usize)>,
        sizes: NetworkSizes,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let [t1, t2] = sizes.trunk;
        let [c1, c2] = sizes.critic;
        let mut layers = vec![
            Dense::fan_in_uniform(obs_dim, t1, &mut rng),
            Dense::fan_in_uniform(t1, t2, &mut rng),
        ];
        for &(versions, cuts) in &action_shape {
            layers.push(Dense::fan_in_uniform(t2, sizes.head, &mut rng));
            layers.push(Dense::zeros(sizes.head, versions));
            layers.push(Dense::zeros(sizes.head, cuts));
        }
        layers.push(Dense::fan_in_uniform(obs_dim, c1, &mut rng));
        layers.push(Dense::fan_in_uniform(c1, c2, &mut rng));
        layers.push(Dense::zeros(c2, 1));
        Self {
            obs_dim,
            action_shape,
            sizes,
            layers,
        }
    }

    pub fn for_env(config: &EnvConfig, sizes: NetworkSizes, seed: u64) -> Result<Self> {
        Ok(Self::new(
            config.observation_len(),
            config.action_space_shape()?,
            sizes,
            seed,
        ))
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn action_shape(&self) -> &[(usize, usize)] {
        &self.action_shape
    }

    pub fn sizes(&self) -> NetworkSizes {
        self.sizes
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    fn head_base(&self, k: usize) -> usize {
        2 + 3 * k
    }

    fn critic_base(&self) -> usize {
        2 + 3 * self.action_shape.len()
    }

    /// Number of leading layers that belong to the actor.
    pub fn actor_layer_count(&self) -> usize {
        self.critic_base()
    }

    pub fn layer_names(&self) -> Vec<String> {
        let mut names = vec!["actor.trunk.0".to_string(), "actor.trunk.1".to_string()];
        for k in 0..self.action_shape.len() {
            names.push(format!("actor.uav{k}.shared"));
            names.push(format!("actor.uav{k}.version"));
            names.push(format!("actor.uav{k}.cut"));
        }
        names.extend([
            "critic.0".to_string(),
            "critic.1".to_string(),
            "critic.out".to_string(),
        ]);
        names
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Dense::param_count).sum()
    }

    fn check_obs(&self, obs: &[f64]) -> Result<()> {
        if obs.len() != self.obs_dim {
            return Err(Error::ShapeMismatch {
                expected: self.obs_dim,
                actual: obs.len(),
            });
        }
        Ok(())
    }

    fn actor_pass(&self, obs: &[f64]) -> ActorPass {
        let mut h1 = self.layers[0].forward(obs);
        relu_in_place(&mut h1);
        let mut h2 = self.layers[1].forward(&h1);
        relu_in_place(&mut h2);
        let heads = (0..self.action_shape.len())
            .map(|k| {
                let base = self.head_base(k);
                let mut hidden = self.layers[base].forward(&h2);
                relu_in_place(&mut hidden);
                let version_logits = self.layers[base + 1].forward(&hidden);
                let cut_logits = self.layers[base + 2].forward(&hidden);
                HeadPass {
                    version_probs: softmax(&version_logits),
                    version_logp: log_softmax(&version_logits),
                    cut_probs: softmax(&cut_logits),
                    cut_logp: log_softmax(&cut_logits),
                    hidden,
                }
            })
            .collect();
        ActorPass { h1, h2, heads }
    }

    fn critic_pass(&self, obs: &[f64]) -> CriticPass {
        let base = self.critic_base();
        let mut h1 = self.layers[base].forward(obs);
        relu_in_place(&mut h1);
        let mut h2 = self.layers[base + 1].forward(&h1);
        relu_in_place(&mut h2);
        let value = self.layers[base + 2].forward(&h2)[0];
        CriticPass { h1, h2, value }
    }

    pub fn actor_forward(&self, obs: &[f64]) -> Result<HeadDistributions> {
        self.check_obs(obs)?;
        Ok(self
            .actor_pass(obs)
            .heads
            .into_iter()
            .map(|h| (h.version_probs, h.cut_probs))
            .collect())
    }

    pub fn critic_forward(&self, obs: &[f64]) -> Result<f64> {
        self.check_obs(obs)?;
        Ok(self.critic_pass(obs).value)
    }

    /// Most probable index of every head; ties go to the lower index.
    pub fn greedy_action(&self, obs: &[f64]) -> Result<Vec<(usize, usize)>> {
        Ok(self
            .actor_forward(obs)?
            .iter()
            .map(|(v, c)| (argmax(v), argmax(c)))
            .collect())
    }

    pub fn sample_action<R: Rng + ?Sized>(
        &self,
        obs: &[f64],
        rng: &mut R,
    ) -> Result<Vec<(usize, usize)>> {
        Ok(self
            .actor_forward(obs)?
            .iter()
            .map(|(v, c)| (sample_categorical(v, rng), sample_categorical(c, rng)))
            .collect())
    }

    fn check_batch(&self, batch: &LossBatch<'_>) -> Result<()> {
        let n = batch.observations.len();
        for len in [
            batch.actions.len(),
            batch.advantages.len(),
            batch.returns.len(),
        ] {
            if len != n {
                return Err(Error::ShapeMismatch {
                    expected: n,
                    actual: len,
                });
            }
        }
        for (obs, action) in batch.observations.iter().zip(batch.actions) {
            self.check_obs(obs)?;
            if action.len() != self.action_shape.len() {
                return Err(Error::ShapeMismatch {
                    expected: self.action_shape.len(),
                    actual: action.len(),
                });
            }
            for (&(v, c), &(nv, nc)) in action.iter().zip(&self.action_shape) {
                if v >= nv || c >= nc {
                    return Err(Error::ActionOutOfRange(format!(
                        "({v}, {c}) outside ({nv}, {nc})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `-sum A log pi(a|s) + c_v sum (R - V)^2 - c_e sum H`, forward pass only.
    pub fn loss(&self, batch: &LossBatch<'_>) -> Result<LossStats> {
        self.check_batch(batch)?;
        let mut stats = LossStats::default();
        for t in 0..batch.observations.len() {
            let obs = &batch.observations[t];
            let actor = self.actor_pass(obs);
            let value = self.critic_pass(obs).value;
            let (logp, ent) = log_prob_and_entropy(&actor, &batch.actions[t]);
            stats.policy_loss -= batch.advantages[t] * logp;
            stats.entropy += ent;
            stats.value_loss += (batch.returns[t] - value).powi(2);
        }
        stats.total = stats.policy_loss + batch.value_loss_coefficient * stats.value_loss
            - batch.entropy_coefficient * stats.entropy;
        Ok(stats)
    }

    /// Loss and its analytic gradient with respect to every parameter.
    pub fn loss_and_gradients(&self, batch: &LossBatch<'_>) -> Result<(LossStats, Gradients)> {
        self.check_batch(batch)?;
        let mut grads = Gradients {
            layers: self.layers.iter().map(Dense::zeros_like).collect(),
        };
        let mut stats = LossStats::default();
        let [t1, t2] = self.sizes.trunk;
        let [c1, c2] = self.sizes.critic;
        let ce = batch.entropy_coefficient;

        for t in 0..batch.observations.len() {
            let obs = &batch.observations[t];
            let action = &batch.actions[t];
            let advantage = batch.advantages[t];

            let actor = self.actor_pass(obs);
            let (logp, ent) = log_prob_and_entropy(&actor, action);
            stats.policy_loss -= advantage * logp;
            stats.entropy += ent;

            let mut dh2 = vec![0.0; t2];
            let mut dh2_part = vec![0.0; t2];
            for (k, head) in actor.heads.iter().enumerate() {
                let base = self.head_base(k);
                let (a_v, a_c) = action[k];
                let dv = logit_grad(&head.version_probs, &head.version_logp, a_v, advantage, ce);
                let dc = logit_grad(&head.cut_probs, &head.cut_logp, a_c, advantage, ce);

                let mut dhidden = vec![0.0; self.sizes.head];
                let mut dhidden_part = vec![0.0; self.sizes.head];
                self.layers[base + 1].backward(
                    &head.hidden,
                    &dv,
                    &mut grads.layers[base + 1],
                    Some(&mut dhidden),
                );
                self.layers[base + 2].backward(
                    &head.hidden,
                    &dc,
                    &mut grads.layers[base + 2],
                    Some(&mut dhidden_part),
                );
                add_into(&mut dhidden, &dhidden_part);
                relu_backward(&head.hidden, &mut dhidden);
                self.layers[base].backward(
                    &actor.h2,
                    &dhidden,
                    &mut grads.layers[base],
                    Some(&mut dh2_part),
                );
                add_into(&mut dh2, &dh2_part);
            }
            relu_backward(&actor.h2, &mut dh2);
            let mut dh1 = vec![0.0; t1];
            self.layers[1].backward(&actor.h1, &dh2, &mut grads.layers[1], Some(&mut dh1));
            relu_backward(&actor.h1, &mut dh1);
            self.layers[0].backward(obs, &dh1, &mut grads.layers[0], None);

            let base = self.critic_base();
            let critic = self.critic_pass(obs);
            let residual = batch.returns[t] - critic.value;
            stats.value_loss += residual * residual;
            let dvalue = [-2.0 * batch.value_loss_coefficient * residual];
            let mut dc2 = vec![0.0; c2];
            self.layers[base + 2].backward(
                &critic.h2,
                &dvalue,
                &mut grads.layers[base + 2],
                Some(&mut dc2),
            );
            relu_backward(&critic.h2, &mut dc2);
            let mut dc1 = vec![0.0; c1];
            self.layers[base + 1].backward(
                &critic.h1,
                &dc2,
                &mut grads.layers[base + 1],
                Some(&mut dc1),
            );
            relu_backward(&critic.h1, &mut dc1);
            self.layers[base].backward(obs, &dc1, &mut grads.layers[base], None);
        }
        stats.total = stats.policy_loss + batch.value_loss_coefficient * stats.value_loss
            - ce * stats.entropy;
        Ok((stats, grads))
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.params().all(|p| p.is_finite()))
    }
}

fn add_into(acc: &mut [f64], part: &[f64]) {
    acc.iter_mut().zip(part).for_each(|(a, p)| *a += p);
}

/// d/dz of `-A log p_a - c_e H` for one categorical head.
fn logit_grad(
    probs: &[f64],
    logp: &[f64],
    chosen: usize,
    advantage: f64,
    entropy_coef: f64,
) -> Vec<f64> {
    let h = entropy(probs);
    probs
        .iter()
        .zip(logp)
        .enumerate()
        .map(|(i, (&p, &lp))| {
            let indicator = if i == chosen { 1.0 } else { 0.0 };
            advantage * (p - indicator) + entropy_coef * p * (lp + h)
        })
        .collect()
}

fn log_prob_and_entropy(actor: &ActorPass, action: &[(usize, usize)]) -> (f64, f64) {
    actor
        .heads
        .iter()
        .zip(action)
        .fold((0.0, 0.0), |(lp, ent), (head, &(v, c))| {
            (
                lp + head.version_logp[v] + head.cut_logp[c],
                ent + entropy(&head.version_probs) + entropy(&head.cut_probs),
            )
        })
}

pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub observation: Vec<f64>,
    pub action: Vec<(usize, usize)>,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub steps: Vec<Transition>,
    /// False when the episode was cut off by the slot cap.
    pub terminal: bool,
}

impl Trajectory {
    pub fn rewards(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.reward)
    }
}

/// Discounted suffix sums `sum_{k>=t} gamma^(k-t) r_k`; no bootstrap at the end.
pub fn discounted_returns(rewards: &[f64], gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut running = 0.0;
    for (t, r) in rewards.iter().enumerate().rev() {
        running = r + gamma * running;
        out[t] = running;
    }
    out
}

/// Per step `(return, return - V(s_t))`.
pub fn compute_returns_and_advantages(
    traj: &Trajectory,
    model: &A2CModel,
    gamma: f64,
) -> Result<Vec<(f64, f64)>> {
    let rewards: Vec<f64> = traj.rewards().collect();
    discounted_returns(&rewards, gamma)
        .into_iter()
        .zip(&traj.steps)
        .map(|(ret, step)| Ok((ret, ret - model.critic_forward(&step.observation)?)))
        .collect()
}

/// Per-step means of the loss terms from one update.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
}

fn clip_and_apply(params: &mut [Dense], grads: &[Dense], clip_norm: f64, lr: f64) {
    let norm = grads
        .iter()
        .flat_map(|g| g.params())
        .map(|g| g * g)
        .sum::<f64>()
        .sqrt();
    let scale = if clip_norm > 0.0 && norm > clip_norm {
        clip_norm / norm
    } else {
        1.0
    };
    let step = lr * scale;
    if step == 0.0 {
        return;
    }
    for (layer, grad) in params.iter_mut().zip(grads) {
        for (p, g) in layer.params_mut().zip(grad.params()) {
            *p -= step * g;
        }
    }
}

/// One gradient step on the episode. Actor and critic gradients are clipped
/// to `gradient_clip_norm` separately.
pub fn update(model: &mut A2CModel, traj: &Trajectory, hp: &Hyperparams) -> Result<UpdateStats> {
    if traj.steps.is_empty() {
        return Err(Error::InvalidConfig(
            "cannot update on an empty trajectory".into(),
        ));
    }
    let ra = compute_returns_and_advantages(traj, model, hp.gamma)?;
    let observations: Vec<Vec<f64>> = traj.steps.iter().map(|s| s.observation.clone()).collect();
    let actions: Vec<Vec<(usize, usize)>> = traj.steps.iter().map(|s| s.action.clone()).collect();
    let returns: Vec<f64> = ra.iter().map(|r| r.0).collect();
    let advantages: Vec<f64> = ra.iter().map(|r| r.1).collect();
    let batch = LossBatch {
        observations: &observations,
        actions: &actions,
        advantages: &advantages,
        returns: &returns,
        entropy_coefficient: hp.entropy_coefficient,
        value_loss_coefficient: hp.value_loss_coefficient,
    };
    let (stats, grads) = model.loss_and_gradients(&batch)?;
    if !stats.total.is_finite() {
        return Err(Error::NonFiniteLoss(format!(
            "policy {} value {} entropy {} over {} steps",
            stats.policy_loss,
            stats.value_loss,
            stats.entropy,
            traj.steps.len()
        )));
    }
    let split = model.actor_layer_count();
    let (actor, critic) = model.layers.split_at_mut(split);
    clip_and_apply(
        actor,
        &grads.layers[..split],
        hp.gradient_clip_norm,
        hp.learning_rate,
    );
    clip_and_apply(
        critic,
        &grads.layers[split..],
        hp.gradient_clip_norm,
        hp.learning_rate,
    );
    if !model.all_finite() {
        return Err(Error::NonFiniteLoss(
            "parameters became non-finite after the step".into(),
        ));
    }
    let n = traj.steps.len() as f64;
    Ok(UpdateStats {
        policy_loss: stats.policy_loss / n,
        value_loss: stats.value_loss / n,
        entropy: stats.entropy / n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub episode: usize,
    /// Mean slot reward over the episode.
    pub mean_reward: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
}

/// Plays one episode with actions sampled from the current policy.
pub fn rollout<R: Rng + ?Sized>(
    env: &mut Env,
    model: &A2CModel,
    seed: u64,
    rng: &mut R,
) -> Result<Trajectory> {
    let mut obs = env.reset_with_seed(seed);
    let mut traj = Trajectory::default();
    loop {
        let raw = model.sample_action(&obs, rng)?;
        let action = env.decode_action(&raw)?;
        let step = env.step(&action)?;
        traj.steps.push(Transition {
            observation: obs.0,
            action: raw,
            reward: step.reward,
        });
        obs = step.observation;
        if step.done {
            traj.terminal = env.uavs().iter().all(|u| !u.is_on());
            return Ok(traj);
        }
    }
}

pub struct TrainOutput {
    pub model: A2CModel,
    pub curve: Vec<CurveRow>,
}

pub fn train(config: &EnvConfig, hp: &Hyperparams) -> Result<TrainOutput> {
    train_with_progress(config, hp, |_| {})
}

/// Deterministic in `(config, hp)`: model init, action sampling and episode
/// seeds all derive from `hp.seed`.
pub fn train_with_progress(
    config: &EnvConfig,
    hp: &Hyperparams,
    mut progress: impl FnMut(&CurveRow),
) -> Result<TrainOutput> {
    hp.validate()?;
    let mut env = Env::new(config.clone())?;
    let mut model = A2CModel::for_env(config, hp.network, derive_seed(hp.seed, STREAM_INIT, 0))?;
    let mut action_rng = ChaCha8Rng::seed_from_u64(derive_seed(hp.seed, STREAM_ACTIONS, 0));
    let mut curve = Vec::with_capacity(hp.episodes);
    for episode in 0..hp.episodes {
        let traj = rollout(
            &mut env,
            &model,
            derive_seed(hp.seed, STREAM_EPISODES, episode as u64),
            &mut action_rng,
        )?;
        let mean_reward = traj.rewards().sum::<f64>() / traj.steps.len() as f64;
        let stats = update(&mut model, &traj, hp)?;
        let row = CurveRow {
            episode,
            mean_reward,
            policy_loss: stats.policy_loss,
            value_loss: stats.value_loss,
            entropy: stats.entropy,
        };
        progress(&row);
        curve.push(row);
    }
    Ok(TrainOutput { model, curve })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::fixture_f1;
    use std::sync::Arc;

    fn toy_sizes() -> NetworkSizes {
        NetworkSizes {
            trunk: [12, 10],
            head: 6,
            critic: [12, 10],
        }
    }

    #[test]
    fn zero_logits_give_uniform_heads() {
        let model = A2CModel::new(8, vec![(2, 4), (3, 2)], NetworkSizes::default(), 1);
        let obs = vec![0.5; 8];
        let heads = model.actor_forward(&obs).unwrap();
        assert_eq!(heads.len(), 2);
        assert!(heads[0].0.iter().all(|&p| p == 0.5));
        assert!(heads[0].1.iter().all(|&p| p == 0.25));
        assert_eq!(model.critic_forward(&obs).unwrap(), 0.0);
        assert_eq!(model.actor_forward(&obs).unwrap(), heads);
        assert!(matches!(
            model.actor_forward(&[0.0; 3]),
            Err(Error::ShapeMismatch {
                expected: 8,
                actual: 3
            })
        ));
        assert!(model.critic_forward(&[0.0; 9]).is_err());
    }

    #[test]
    fn uniform_entropy_per_uav() {
        let model = A2CModel::new(8, vec![(2, 4)], toy_sizes(), 1);
        let obs = vec![vec![0.1; 8]];
        let actions = vec![vec![(0, 0)]];
        let batch = LossBatch {
            observations: &obs,
            actions: &actions,
            advantages: &[0.0],
            returns: &[0.0],
            entropy_coefficient: 0.0,
            value_loss_coefficient: 0.0,
        };
        let stats = model.loss(&batch).unwrap();
        assert!((stats.entropy - (2f64.ln() + 4f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn returns_examples() {
        assert_eq!(
            discounted_returns(&[1.0, 1.0, 1.0], 0.0),
            vec![1.0, 1.0, 1.0]
        );
        assert_eq!(
            discounted_returns(&[1.0, 1.0, 1.0], 1.0),
            vec![3.0, 2.0, 1.0]
        );
        assert_eq!(
            discounted_returns(&[1.0, 0.0, 2.0], 0.5),
            vec![1.5, 1.0, 2.0]
        );
    }

    #[test]
    fn advantages_subtract_critic() {
        let mut model = A2CModel::new(2, vec![(2, 2)], toy_sizes(), 3);
        let out = model.layers.len() - 1;
        model.layers[out].bias[0] = 0.25;
        let traj = Trajectory {
            steps: (0..3)
                .map(|_| Transition {
                    observation: vec![0.0, 1.0],
                    action: vec![(0, 1)],
                    reward: 1.0,
                })
                .collect(),
            terminal: true,
        };
        let v = model.critic_forward(&[0.0, 1.0]).unwrap();
        let ra = compute_returns_and_advantages(&traj, &model, 1.0).unwrap();
        assert_eq!(
            ra.iter().map(|r| r.0).collect::<Vec<_>>(),
            vec![3.0, 2.0, 1.0]
        );
        for (ret, adv) in ra {
            assert!((adv - (ret - v)).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_learning_rate_is_a_null_step() {
        let config = EnvConfig::uniform(Arc::new(fixture_f1()), 1, "toyNet");
        let hp = Hyperparams {
            learning_rate: 0.0,
            episodes: 2,
            network: toy_sizes(),
            ..Hyperparams::default()
        };
        let initial =
            A2CModel::for_env(&config, hp.network, derive_seed(hp.seed, STREAM_INIT, 0)).unwrap();
        let out = train(&config, &hp).unwrap();
        assert_eq!(out.model, initial);
        assert_eq!(out.curve.len(), 2);
    }

    #[test]
    fn training_is_reproducible() {
        let config = EnvConfig::uniform(Arc::new(fixture_f1()), 2, "toyNet");
        let hp = Hyperparams {
            learning_rate: 1e-2,
            episodes: 3,
            network: toy_sizes(),
            seed: 5,
            ..Hyperparams::default()
        };
        let a = train(&config, &hp).unwrap();
        let b = train(&config, &hp).unwrap();
        assert_eq!(a.curve, b.curve);
        assert_eq!(a.model, b.model);
        assert_ne!(
            a.model,
            A2CModel::for_env(&config, hp.network, derive_seed(5, STREAM_INIT, 0)).unwrap()
        );
        assert!(a.model.all_finite());
    }

    #[test]
    fn sampling_respects_degenerate_probs() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(sample_categorical(&[0.0, 1.0, 0.0], &mut rng), 1);
        }
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
    }
}
