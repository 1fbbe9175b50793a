//! Uplink bandwidth classes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandwidthClass {
    pub class_id: String,
    pub rate_mbps: f64,
    /// Joules spent per megabit sent.
    pub energy_per_mb: f64,
}

impl BandwidthClass {
    pub fn narrow() -> Self {
        Self {
            class_id: "narrow".into(),
            rate_mbps: 8.0,
            energy_per_mb: 0.08,
        }
    }

    pub fn wide() -> Self {
        Self {
            class_id: "wide".into(),
            rate_mbps: 20.0,
            energy_per_mb: 0.05,
        }
    }
}

pub fn transmission_latency(class: &BandwidthClass, output_mb: f64) -> f64 {
    output_mb / class.rate_mbps
}

/// Per-slot bandwidth process: with probability `hold_prob` a device keeps
/// its class, otherwise it draws a fresh one from `probabilities`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandwidthModel {
    pub classes: Vec<BandwidthClass>,
    pub probabilities: Vec<f64>,
    #[serde(default)]
    pub hold_prob: f64,
}

impl Default for BandwidthModel {
    fn default() -> Self {
        Self {
            classes: vec![BandwidthClass::narrow(), BandwidthClass::wide()],
            probabilities: vec![0.5, 0.5],
            hold_prob: 0.0,
        }
    }
}

impl BandwidthModel {
    pub fn fixed(class: BandwidthClass) -> Self {
        Self {
            classes: vec![class],
            probabilities: vec![1.0],
            hold_prob: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if self.classes.is_empty() {
            errors.push("bandwidth.classes: must not be empty".to_string());
        }
        if self.probabilities.len() != self.classes.len() {
            errors.push(format!(
                "bandwidth.probabilities: {} entries for {} classes",
                self.probabilities.len(),
                self.classes.len()
            ));
        }
        if self
            .probabilities
            .iter()
            .any(|p| !(*p >= 0.0) || !p.is_finite())
            || !(self.probabilities.iter().sum::<f64>() > 0.0)
        {
            errors.push(
                "bandwidth.probabilities: must be non-negative with a positive sum".to_string(),
            );
        }
        if !(0.0..=1.0).contains(&self.hold_prob) {
            errors.push("bandwidth.hold_prob: must be in [0, 1]".to_string());
        }
        for (i, c) in self.classes.iter().enumerate() {
            if !(c.rate_mbps > 0.0) {
                errors.push(format!("bandwidth.classes[{i}].rate_mbps: must be > 0"));
            }
            if !(c.energy_per_mb >= 0.0) {
                errors.push(format!(
                    "bandwidth.classes[{i}].energy_per_mb: must be >= 0"
                ));
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errors))
        }
    }

    pub fn class_index(&self, class_id: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.class_id == class_id)
    }

    /// Draws the next class index. `current` is the class held in the previous slot, if any.
    ///
    /// Consumes exactly two uniform draws whatever the outcome, so the stream
    /// position does not depend on the configuration.
    pub fn sample<R: Rng + ?Sized>(&self, current: Option<usize>, rng: &mut R) -> Result<usize> {
        if self.classes.is_empty() {
            return Err(Error::InvalidConfig(
                "bandwidth model has no classes".into(),
            ));
        }
        let hold: f64 = rng.random();
        let u: f64 = rng.random();
        if let Some(idx) = current {
            if hold < self.hold_prob {
                return Ok(idx);
            }
        }
        let total: f64 = self.probabilities.iter().sum();
        let target = u * total;
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (i, &p) in self.probabilities.iter().enumerate() {
            if p > 0.0 {
                last_positive = i;
                acc += p;
                if target < acc {
                    return Ok(i);
                }
            }
        }
        Ok(last_positive)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn latency_examples() {
        assert!((transmission_latency(&BandwidthClass::wide(), 4.0) - 0.2).abs() < 1e-12);
        assert!((transmission_latency(&BandwidthClass::narrow(), 8.0) - 1.0).abs() < 1e-12);
        assert_eq!(transmission_latency(&BandwidthClass::narrow(), 0.0), 0.0);
    }

    #[test]
    fn degenerate_distributions() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let single = BandwidthModel::fixed(BandwidthClass::wide());
        let two = BandwidthModel {
            probabilities: vec![1.0, 0.0],
            ..BandwidthModel::default()
        };
        for _ in 0..1000 {
            assert_eq!(single.sample(None, &mut rng).unwrap(), 0);
            assert_eq!(two.sample(Some(1), &mut rng).unwrap(), 0);
        }
        let empty = BandwidthModel {
            classes: vec![],
            probabilities: vec![],
            hold_prob: 0.0,
        };
        assert!(empty.sample(None, &mut rng).is_err());
        assert!(empty.validate().is_err());
    }

    #[test]
    fn even_split_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let model = BandwidthModel::default();
        let n = 10_000;
        let ones = (0..n)
            .filter(|_| model.sample(None, &mut rng).unwrap() == 1)
            .count();
        let freq = ones as f64 / n as f64;
        assert!((0.48..=0.52).contains(&freq), "freq {freq}");
    }

    #[test]
    fn hold_keeps_class() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let model = BandwidthModel {
            hold_prob: 1.0,
            ..BandwidthModel::default()
        };
        for _ in 0..100 {
            assert_eq!(model.sample(Some(1), &mut rng).unwrap(), 1);
        }
    }

    proptest! {
        #[test]
        fn latency_is_additive(a in 0.0f64..100.0, b in 0.0f64..100.0, rate in 0.1f64..100.0) {
            let c = BandwidthClass { class_id: "x".into(), rate_mbps: rate, energy_per_mb: 0.1 };
            let lhs = transmission_latency(&c, a + b);
            let rhs = transmission_latency(&c, a) + transmission_latency(&c, b);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }
}
