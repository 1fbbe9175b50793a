use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use edgesplit::agent::{train, A2CModel, Hyperparams, NetworkSizes};
use edgesplit::device::ActivityProfile;
use edgesplit::env::{ActivityChoice, Env, EnvConfig};
use edgesplit::network::{BandwidthClass, BandwidthModel};
use edgesplit::profiles::{fixture_f1, generate_synthetic_catalog, GeneratorSpec};
use edgesplit::reward::{Normalizer, RewardWeights};

fn random_actions(rng: &mut ChaCha8Rng, shape: &[(usize, usize)]) -> Vec<(usize, usize)> {
    shape
        .iter()
        .map(|&(v, c)| (rng.random_range(0..v), rng.random_range(0..c)))
        .collect()
}

#[test]
fn episodes_end_batteries_fall_and_rewards_stay_bounded() {
    let spec = GeneratorSpec {
        models: 2,
        versions_per_model: 3,
        ..GeneratorSpec::default()
    };
    let catalog = Arc::new(generate_synthetic_catalog(&spec, 11).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..40 {
        let n = rng.random_range(1..=4);
        let mut config = EnvConfig::uniform(catalog.clone(), n, "m0");
        for (k, uav) in config.uavs.iter_mut().enumerate() {
            uav.model_id = format!("m{}", k % 2);
            uav.build.battery_capacity_j = rng.random_range(50_000.0..300_000.0);
        }
        config.normalizer = if case % 2 == 0 {
            Normalizer::PerModel
        } else {
            Normalizer::PerVersion
        };
        config.task_probability = rng.random_range(0.0..1.0);
        config.max_slots = 400;
        config.seed = case;
        if case % 5 == 0 {
            config.activity = vec![ActivityChoice {
                name: "hover".into(),
                profile: ActivityProfile::hover_only(),
                weight: 1.0,
            }];
        }
        let min_capacity = config
            .uavs
            .iter()
            .map(|u| u.build.battery_capacity_j)
            .fold(f64::INFINITY, f64::min);
        let max_capacity = config
            .uavs
            .iter()
            .map(|u| u.build.battery_capacity_j)
            .fold(0.0, f64::max);
        let mut env = Env::new(config).unwrap();
        let shape = env.action_space_shape();
        let obs = env.reset();
        let block = obs.len() / n;
        let mut prev: Vec<f64> = env.uavs().iter().map(|u| u.reserve_j).collect();
        let mut slots = 0;
        while !env.is_done() {
            let action = env
                .decode_action(&random_actions(&mut rng, &shape))
                .unwrap();
            let step = env.step(&action).unwrap();
            slots += 1;
            assert!(step.reward <= 1.0 + 1e-12, "reward {}", step.reward);
            assert!(step.reward.is_finite());
            assert_eq!(step.observation.len(), n * block);
            for (k, uav) in env.uavs().iter().enumerate() {
                assert!(uav.reserve_j <= prev[k], "battery rose");
                assert!(uav.reserve_j >= 0.0);
                let level = step.observation[k * block];
                assert!((0.0..=1.0).contains(&level));
                if !uav.is_on() {
                    assert!(step.observation[k * block..(k + 1) * block]
                        .iter()
                        .all(|&x| x == 0.0));
                }
                prev[k] = uav.reserve_j;
            }
        }
        // hover alone draws 320 W, so every device is flat by capacity / (320 W * 30 s) slots
        let bound = (max_capacity / (320.0 * 30.0)).ceil() as usize;
        assert!(
            slots <= bound.min(400),
            "case {case}: {slots} slots, bound {bound}"
        );
        assert!(slots >= 1 && min_capacity > 0.0);
        assert!(env.uavs().iter().all(|u| !u.is_on()) || slots == 400);
    }
}

#[test]
fn heads_are_distributions() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sizes = NetworkSizes {
        trunk: [16, 12],
        head: 8,
        critic: [16, 12],
    };
    let mut model = A2CModel::new(10, vec![(2, 4), (3, 5)], sizes, 4);
    for layer in model.layers_mut() {
        for p in layer.params_mut() {
            *p = rng.random_range(-3.0..3.0);
        }
    }
    for _ in 0..200 {
        let obs: Vec<f64> = (0..10).map(|_| rng.random_range(-5.0..5.0)).collect();
        let heads = model.actor_forward(&obs).unwrap();
        for (v, c) in &heads {
            for head in [v, c] {
                assert!((head.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(head.iter().all(|p| (0.0..=1.0).contains(p)));
            }
        }
        let action = model.sample_action(&obs, &mut rng).unwrap();
        assert!(action[0].0 < 2 && action[0].1 < 4 && action[1].0 < 3 && action[1].1 < 5);
        for (k, &(vi, ci)) in action.iter().enumerate() {
            assert!(heads[k].0[vi].ln().is_finite() && heads[k].1[ci].ln().is_finite());
        }
    }
}

fn kl_from_uniform(probs: &[f64]) -> f64 {
    let n = probs.len() as f64;
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|p| p * (p * n).ln())
        .sum()
}

#[test]
fn strong_entropy_bonus_keeps_policy_near_uniform() {
    let mut config = EnvConfig::uniform(Arc::new(fixture_f1()), 1, "toyNet");
    config.bandwidth = BandwidthModel::fixed(BandwidthClass::narrow());
    config.task_probability = 1.0;
    config.weights = RewardWeights::EQUAL;
    let run = |entropy_coefficient: f64| {
        let hp = Hyperparams {
            learning_rate: 3e-3,
            gamma: 0.9,
            gradient_clip_norm: 1.0,
            entropy_coefficient,
            episodes: 200,
            seed: 2,
            ..Hyperparams::default()
        };
        let model = train(&config, &hp).unwrap().model;
        let mut env = Env::new(config.clone()).unwrap();
        let obs = env.reset_with_seed(5);
        let heads = model.actor_forward(&obs).unwrap();
        heads
            .iter()
            .map(|(v, c)| kl_from_uniform(v).max(kl_from_uniform(c)))
            .fold(0.0, f64::max)
    };
    let regularized = run(2.0);
    let free = run(0.0);
    assert!(regularized < 0.05, "KL {regularized}");
    assert!(
        free > regularized,
        "entropy bonus did not hold the policy back: {free} vs {regularized}"
    );
}
