//! DNN profile catalog.
//!
//! A catalog stands in for real model execution: each model has one or more
//! versions, each version is an ordered list of per-layer costs plus the set
//! of layers after which the network may be split. A cut `l` runs layers
//! `1..=l` on the device and `l+1..=L` on the edge server; `l == L` is fully
//! local and only the final result leaves the device.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerProfile {
    pub device_latency_s: f64,
    pub server_latency_s: f64,
    /// Megabits produced by this layer; for the last layer this is the result payload.
    pub output_mb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VersionProfile {
    pub version_id: String,
    pub num_layers: usize,
    pub accuracy: f64,
    pub device_power_w: f64,
    pub layers: Vec<LayerProfile>,
    /// 1-based layer indices, strictly increasing.
    pub candidate_cuts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelProfile {
    pub model_id: String,
    pub latency_requirement_s: f64,
    pub accuracy_requirement: f64,
    pub versions: Vec<VersionProfile>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileCatalog {
    pub models: Vec<ModelProfile>,
    /// build id -> multiplier on device latency and device power.
    #[serde(default)]
    pub build_scaling: BTreeMap<String, f64>,
}

impl VersionProfile {
    fn check_cut(&self, l: usize) -> Result<()> {
        if l == 0 || l > self.num_layers || l > self.layers.len() {
            return Err(Error::IllegalCut {
                version: self.version_id.clone(),
                cut: l,
                num_layers: self.num_layers,
            });
        }
        Ok(())
    }

    /// Megabits leaving the device when the network is cut after layer `l`.
    pub fn output_mb_at(&self, l: usize) -> Result<f64> {
        self.check_cut(l)?;
        Ok(self.layers[l - 1].output_mb)
    }

    /// Server-side compute for layers `l+1..=L`; zero when `l == L`.
    pub fn tail_server_latency(&self, l: usize) -> Result<f64> {
        self.check_cut(l)?;
        Ok(self.layers[l..]
            .iter()
            .map(|layer| layer.server_latency_s)
            .sum())
    }

    pub fn is_candidate_cut(&self, l: usize) -> bool {
        self.candidate_cuts.binary_search(&l).is_ok()
    }
}

/// Device-side latency of layers `1..=l`, scaled by the device build factor.
pub fn cumulative_local_latency(
    version: &VersionProfile,
    l: usize,
    build_scale: f64,
) -> Result<f64> {
    version.check_cut(l)?;
    let sum: f64 = version.layers[..l]
        .iter()
        .map(|layer| layer.device_latency_s)
        .sum();
    Ok(build_scale * sum)
}

impl ModelProfile {
    pub fn version(&self, version_id: &str) -> Result<&VersionProfile> {
        self.versions
            .iter()
            .find(|v| v.version_id == version_id)
            .ok_or_else(|| Error::UnknownId {
                kind: "version",
                id: format!("{}/{}", self.model_id, version_id),
            })
    }

    /// The heaviest version: most layers, then the larger full-local latency,
    /// then the later position in the list.
    pub fn reference_version(&self) -> &VersionProfile {
        let full_local =
            |v: &VersionProfile| -> f64 { v.layers.iter().map(|l| l.device_latency_s).sum() };
        let mut best = &self.versions[0];
        for v in &self.versions[1..] {
            let heavier = match v.num_layers.cmp(&best.num_layers) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => full_local(v) >= full_local(best),
            };
            if heavier {
                best = v;
            }
        }
        best
    }

    /// Largest candidate-cut count over all versions (width of the cut head).
    pub fn max_cuts(&self) -> usize {
        self.versions
            .iter()
            .map(|v| v.candidate_cuts.len())
            .max()
            .unwrap_or(0)
    }
}

impl ProfileCatalog {
    pub fn model(&self, model_id: &str) -> Result<&ModelProfile> {
        self.models
            .iter()
            .find(|m| m.model_id == model_id)
            .ok_or_else(|| Error::UnknownId {
                kind: "model",
                id: model_id.to_string(),
            })
    }

    pub fn model_index(&self, model_id: &str) -> Result<usize> {
        self.models
            .iter()
            .position(|m| m.model_id == model_id)
            .ok_or_else(|| Error::UnknownId {
                kind: "model",
                id: model_id.to_string(),
            })
    }

    /// Compute multiplier for a build; builds not listed run at 1.0.
    pub fn scaling(&self, build_id: &str) -> f64 {
        self.build_scaling.get(build_id).copied().unwrap_or(1.0)
    }

    pub fn candidate_cuts(&self, model_id: &str, version_id: &str) -> Result<&[usize]> {
        Ok(&self.model(model_id)?.version(version_id)?.candidate_cuts)
    }

    /// Collects every invariant violation instead of stopping at the first.
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        let mut seen = HashSet::new();
        if self.models.is_empty() {
            errors.push("models: must not be empty".to_string());
        }
        for (mi, model) in self.models.iter().enumerate() {
            let mp = format!("models[{mi}]");
            if !seen.insert(model.model_id.as_str()) {
                errors.push(format!("{mp}.model_id: duplicate id `{}`", model.model_id));
            }
            if !(model.latency_requirement_s > 0.0) {
                errors.push(format!("{mp}.latency_requirement_s: must be > 0"));
            }
            if !(model.accuracy_requirement > 0.0) {
                errors.push(format!("{mp}.accuracy_requirement: must be > 0"));
            }
            if model.versions.is_empty() {
                errors.push(format!("{mp}.versions: must not be empty"));
            }
            let mut version_ids = HashSet::new();
            for (vi, version) in model.versions.iter().enumerate() {
                let vp = format!("{mp}.versions[{vi}]");
                if !version_ids.insert(version.version_id.as_str()) {
                    errors.push(format!(
                        "{vp}.version_id: duplicate id `{}`",
                        version.version_id
                    ));
                }
                validate_version(version, &vp, &mut errors);
            }
        }
        for (build, factor) in &self.build_scaling {
            if !(*factor > 0.0) || !factor.is_finite() {
                errors.push(format!(
                    "build_scaling.{build}: must be a finite factor > 0"
                ));
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errors))
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let catalog: ProfileCatalog =
            serde_json::from_str(text).map_err(|e| Error::parse("catalog", e))?;
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("catalog serializes");
        text.push('\n');
        text
    }
}

fn validate_version(version: &VersionProfile, vp: &str, errors: &mut Vec<String>) {
    if version.layers.len() != version.num_layers {
        errors.push(format!(
            "{vp}.layers: has {} entries but num_layers is {}",
            version.layers.len(),
            version.num_layers
        ));
    }
    if version.num_layers == 0 {
        errors.push(format!("{vp}.num_layers: must be >= 1"));
    }
    if !(0.0..=1.0).contains(&version.accuracy) {
        errors.push(format!("{vp}.accuracy: {} not in [0, 1]", version.accuracy));
    }
    if !(version.device_power_w > 0.0) || !version.device_power_w.is_finite() {
        errors.push(format!("{vp}.device_power_w: must be > 0"));
    }
    for (li, layer) in version.layers.iter().enumerate() {
        let fields = [
            ("device_latency_s", layer.device_latency_s),
            ("server_latency_s", layer.server_latency_s),
            ("output_mb", layer.output_mb),
        ];
        for (name, value) in fields {
            if !(value >= 0.0) || !value.is_finite() {
                errors.push(format!(
                    "{vp}.layers[{li}].{name}: {value} must be finite and >= 0"
                ));
            }
        }
    }
    if version.candidate_cuts.is_empty() {
        errors.push(format!("{vp}.candidate_cuts: must not be empty"));
    }
    for (ci, &cut) in version.candidate_cuts.iter().enumerate() {
        if cut == 0 || cut > version.num_layers {
            errors.push(format!(
                "{vp}.candidate_cuts[{ci}]: cut {cut} outside [1, {}]",
                version.num_layers
            ));
        }
        if ci > 0 && cut <= version.candidate_cuts[ci - 1] {
            errors.push(format!(
                "{vp}.candidate_cuts[{ci}]: cuts must be strictly increasing"
            ));
        }
    }
}

pub fn load_catalog(path: impl AsRef<Path>) -> Result<ProfileCatalog> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    ProfileCatalog::from_json(&text).map_err(|e| match e {
        Error::Parse { message, .. } => Error::parse(path.display().to_string(), message),
        other => other,
    })
}

pub fn save_catalog(catalog: &ProfileCatalog, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, catalog.to_json())?;
    Ok(())
}

/// Parameters for [`generate_synthetic_catalog`]. Ranges are inclusive `(lo, hi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub models: usize,
    pub versions_per_model: usize,
    pub layer_range: (usize, usize),
    pub cuts_per_version: usize,
    pub device_layer_latency_s: (f64, f64),
    /// Server runs a layer this many times faster than the reference device.
    pub server_speedup: (f64, f64),
    /// Output size of the first layer; later layers shrink geometrically.
    pub first_output_mb: (f64, f64),
    pub device_power_w: (f64, f64),
    pub accuracy: (f64, f64),
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            models: 1,
            versions_per_model: 2,
            layer_range: (4, 24),
            cuts_per_version: 4,
            device_layer_latency_s: (0.05, 0.4),
            server_speedup: (5.0, 15.0),
            first_output_mb: (4.0, 16.0),
            device_power_w: (5.0, 9.0),
            accuracy: (0.6, 0.8),
        }
    }
}

const RESULT_PAYLOAD_MB: f64 = 0.01;

impl GeneratorSpec {
    fn check(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::DegenerateSpec(msg));
        if self.models == 0 {
            return fail("models must be >= 1".into());
        }
        if self.versions_per_model == 0 {
            return fail("versions_per_model must be >= 1".into());
        }
        let (lo, hi) = self.layer_range;
        if lo == 0 || hi < lo {
            return fail(format!("layer_range ({lo}, {hi}) is empty"));
        }
        if hi - lo + 1 < self.versions_per_model {
            return fail(format!(
                "layer_range ({lo}, {hi}) cannot give {} distinct layer counts",
                self.versions_per_model
            ));
        }
        if self.cuts_per_version == 0 {
            return fail("cuts_per_version must be >= 1".into());
        }
        let positive_ranges = [
            ("device_layer_latency_s", self.device_layer_latency_s),
            ("server_speedup", self.server_speedup),
            ("first_output_mb", self.first_output_mb),
            ("device_power_w", self.device_power_w),
        ];
        for (name, (a, b)) in positive_ranges {
            if !(a > 0.0 && b >= a && b.is_finite()) {
                return fail(format!("{name} range ({a}, {b}) is empty or non-positive"));
            }
        }
        let (a, b) = self.accuracy;
        if !(a >= 0.0 && b > a && b <= 1.0) {
            return fail(format!(
                "accuracy range ({a}, {b}) must satisfy 0 <= lo < hi <= 1"
            ));
        }
        Ok(())
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// Deterministic synthetic catalog. Within a model, versions are ordered by
/// strictly increasing layer count and strictly increasing accuracy.
pub fn generate_synthetic_catalog(spec: &GeneratorSpec, seed: u64) -> Result<ProfileCatalog> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (layer_lo, layer_hi) = spec.layer_range;
    let versions = spec.versions_per_model;

    let mut models = Vec::with_capacity(spec.models);
    for mi in 0..spec.models {
        let mut layer_counts: Vec<usize> = sample(&mut rng, layer_hi - layer_lo + 1, versions)
            .into_iter()
            .map(|offset| layer_lo + offset)
            .collect();
        layer_counts.sort_unstable();

        let (acc_lo, acc_hi) = spec.accuracy;
        let accuracies: Vec<f64> = (0..versions)
            .map(|j| {
                let jitter: f64 = rng.random_range(0.0..1.0);
                acc_lo + (acc_hi - acc_lo) * (j as f64 + jitter) / versions as f64
            })
            .collect();

        let mut version_profiles = Vec::with_capacity(versions);
        for (vj, (&num_layers, &accuracy)) in layer_counts.iter().zip(&accuracies).enumerate() {
            let mut output = uniform(&mut rng, spec.first_output_mb);
            let mut layers = Vec::with_capacity(num_layers);
            for li in 0..num_layers {
                let device = uniform(&mut rng, spec.device_layer_latency_s);
                let speedup = uniform(&mut rng, spec.server_speedup);
                let output_mb = if li + 1 == num_layers {
                    RESULT_PAYLOAD_MB
                } else {
                    output
                };
                layers.push(LayerProfile {
                    device_latency_s: device,
                    server_latency_s: device / speedup,
                    output_mb,
                });
                output *= rng.random_range(0.5..0.95);
            }
            let n_cuts = spec.cuts_per_version.min(num_layers);
            let mut candidate_cuts: Vec<usize> = if num_layers > 1 {
                sample(&mut rng, num_layers - 1, n_cuts - 1)
                    .into_iter()
                    .map(|i| i + 1)
                    .collect()
            } else {
                Vec::new()
            };
            candidate_cuts.push(num_layers);
            candidate_cuts.sort_unstable();
            version_profiles.push(VersionProfile {
                version_id: format!("v{vj}"),
                num_layers,
                accuracy,
                device_power_w: uniform(&mut rng, spec.device_power_w),
                layers,
                candidate_cuts,
            });
        }

        let lightest_local: f64 = version_profiles[0]
            .layers
            .iter()
            .map(|l| l.device_latency_s)
            .sum();
        models.push(ModelProfile {
            model_id: format!("m{mi}"),
            latency_requirement_s: lightest_local,
            accuracy_requirement: 0.5 * (acc_lo + acc_hi),
            versions: version_profiles,
        });
    }

    let catalog = ProfileCatalog {
        models,
        build_scaling: BTreeMap::new(),
    };
    catalog.validate()?;
    Ok(catalog)
}

/// Small two-version fixture used throughout the tests.
pub fn fixture_f1() -> ProfileCatalog {
    fn version(
        id: &str,
        device: &[f64],
        server: &[f64],
        output: &[f64],
        power: f64,
        acc: f64,
        cuts: &[usize],
    ) -> VersionProfile {
        let layers = device
            .iter()
            .zip(server)
            .zip(output)
            .map(|((&d, &s), &o)| LayerProfile {
                device_latency_s: d,
                server_latency_s: s,
                output_mb: o,
            })
            .collect::<Vec<_>>();
        VersionProfile {
            version_id: id.to_string(),
            num_layers: layers.len(),
            accuracy: acc,
            device_power_w: power,
            layers,
            candidate_cuts: cuts.to_vec(),
        }
    }
    ProfileCatalog {
        models: vec![ModelProfile {
            model_id: "toyNet".into(),
            latency_requirement_s: 1.5,
            accuracy_requirement: 0.7,
            versions: vec![
                version(
                    "light",
                    &[0.50, 0.40, 0.30, 0.20],
                    &[0.050, 0.040, 0.030, 0.020],
                    &[8.0, 4.0, 2.0, 0.01],
                    6.0,
                    0.69,
                    &[1, 2, 3, 4],
                ),
                version(
                    "heavy",
                    &[0.60, 0.50, 0.50, 0.40, 0.30, 0.20],
                    &[0.060, 0.050, 0.050, 0.040, 0.030, 0.020],
                    &[10.0, 8.0, 4.0, 2.0, 1.0, 0.01],
                    7.0,
                    0.76,
                    &[1, 2, 4, 6],
                ),
            ],
        }],
        build_scaling: BTreeMap::new(),
    }
}

/// Catalog stub for the three image classifiers and their light/heavy
/// versions. Cut points are the published candidates; per-layer costs are
/// placeholders shaped like a TX2-class device against a desktop server.
pub fn classifier_catalog_stub() -> ProfileCatalog {
    struct Row {
        version: &'static str,
        layers: usize,
        cuts: [usize; 4],
        accuracy: f64,
        total_device_s: f64,
        power_w: f64,
        first_output_mb: f64,
    }
    let table: [(&str, f64, f64, [Row; 2]); 3] = [
        (
            "VGG",
            2.0,
            0.70,
            [
                Row {
                    version: "11",
                    layers: 27,
                    cuts: [3, 6, 11, 27],
                    accuracy: 0.6902,
                    total_device_s: 0.9,
                    power_w: 7.5,
                    first_output_mb: 24.0,
                },
                Row {
                    version: "19",
                    layers: 43,
                    cuts: [5, 10, 19, 43],
                    accuracy: 0.7238,
                    total_device_s: 1.6,
                    power_w: 8.5,
                    first_output_mb: 24.0,
                },
            ],
        ),
        (
            "ResNet",
            1.5,
            0.72,
            [
                Row {
                    version: "18",
                    layers: 49,
                    cuts: [4, 15, 20, 49],
                    accuracy: 0.6976,
                    total_device_s: 0.5,
                    power_w: 6.0,
                    first_output_mb: 12.0,
                },
                Row {
                    version: "50",
                    layers: 115,
                    cuts: [4, 13, 20, 115],
                    accuracy: 0.7613,
                    total_device_s: 1.1,
                    power_w: 7.0,
                    first_output_mb: 12.0,
                },
            ],
        ),
        (
            "DenseNet",
            2.0,
            0.75,
            [
                Row {
                    version: "121",
                    layers: 14,
                    cuts: [4, 6, 8, 14],
                    accuracy: 0.7443,
                    total_device_s: 1.2,
                    power_w: 7.0,
                    first_output_mb: 16.0,
                },
                Row {
                    version: "161",
                    layers: 14,
                    cuts: [4, 6, 8, 14],
                    accuracy: 0.7714,
                    total_device_s: 2.4,
                    power_w: 8.0,
                    first_output_mb: 20.0,
                },
            ],
        ),
    ];

    let models = table
        .iter()
        .map(|(model_id, tau_latency, tau_acc, rows)| ModelProfile {
            model_id: model_id.to_string(),
            latency_requirement_s: *tau_latency,
            accuracy_requirement: *tau_acc,
            versions: rows
                .iter()
                .map(|row| {
                    let n = row.layers;
                    let per_layer = row.total_device_s / n as f64;
                    let layers = (0..n)
                        .map(|k| {
                            // early layers are wide and cheap to split after, late layers small
                            let pos = k as f64 / n as f64;
                            let device = per_layer * (1.5 - pos);
                            let output = if k + 1 == n {
                                RESULT_PAYLOAD_MB
                            } else {
                                row.first_output_mb * (-4.0 * pos).exp()
                            };
                            LayerProfile {
                                device_latency_s: round6(device),
                                server_latency_s: round6(device / 10.0),
                                output_mb: round6(output),
                            }
                        })
                        .collect();
                    VersionProfile {
                        version_id: row.version.to_string(),
                        num_layers: n,
                        accuracy: row.accuracy,
                        device_power_w: row.power_w,
                        layers,
                        candidate_cuts: row.cuts.to_vec(),
                    }
                })
                .collect(),
        })
        .collect();
    ProfileCatalog {
        models,
        build_scaling: BTreeMap::new(),
    }
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * b.abs().max(1.0)
    }

    #[test]
    fn fixture_is_valid_and_round_trips() {
        let cat = fixture_f1();
        cat.validate().unwrap();
        let back = ProfileCatalog::from_json(&cat.to_json()).unwrap();
        assert_eq!(back, cat);
        assert_eq!(back.models.len(), 1);
        assert_eq!(back.models[0].versions.len(), 2);
    }

    #[test]
    fn cumulative_latency_on_fixture() {
        let cat = fixture_f1();
        let light = &cat.models[0].versions[0];
        assert!(close(cumulative_local_latency(light, 2, 1.0).unwrap(), 0.9));
        assert!(close(cumulative_local_latency(light, 4, 1.0).unwrap(), 1.4));
        assert!(close(cumulative_local_latency(light, 2, 2.0).unwrap(), 1.8));
        assert!(matches!(
            cumulative_local_latency(light, 5, 1.0),
            Err(Error::IllegalCut { cut: 5, .. })
        ));
        assert!(cumulative_local_latency(light, 0, 1.0).is_err());
    }

    #[test]
    fn table_ii_cuts() {
        let cat = classifier_catalog_stub();
        cat.validate().unwrap();
        assert_eq!(cat.candidate_cuts("VGG", "11").unwrap(), &[3, 6, 11, 27]);
        assert_eq!(
            cat.candidate_cuts("ResNet", "50").unwrap(),
            &[4, 13, 20, 115]
        );
        assert_eq!(
            cat.candidate_cuts("DenseNet", "161").unwrap(),
            &[4, 6, 8, 14]
        );
        assert!(matches!(
            cat.candidate_cuts("VGG", "16"),
            Err(Error::UnknownId { .. })
        ));
        assert!(matches!(
            cat.candidate_cuts("AlexNet", "1"),
            Err(Error::UnknownId { .. })
        ));
    }

    #[test]
    fn reference_version_is_heaviest() {
        let cat = classifier_catalog_stub();
        assert_eq!(
            cat.model("VGG").unwrap().reference_version().version_id,
            "19"
        );
        assert_eq!(
            cat.model("DenseNet")
                .unwrap()
                .reference_version()
                .version_id,
            "161"
        );
        assert_eq!(
            fixture_f1().models[0].reference_version().version_id,
            "heavy"
        );
    }

    #[test]
    fn cut_beyond_layers_is_named() {
        let mut cat = fixture_f1();
        cat.models[0].versions[0].candidate_cuts = vec![1, 2, 7];
        let err = cat.validate().unwrap_err();
        let Error::Validation(msgs) = err else {
            panic!("expected validation error")
        };
        assert!(msgs
            .iter()
            .any(|m| m.contains("models[0].versions[0].candidate_cuts[2]") && m.contains("cut 7")));
    }

    #[test]
    fn validation_reports_every_violation() {
        let mut cat = fixture_f1();
        cat.models[0].versions[1].layers[2].output_mb = -1.0;
        cat.models[0].versions[0].accuracy = 1.5;
        cat.models[0].versions[0].candidate_cuts = vec![3, 2];
        cat.build_scaling.insert("tiny".into(), 0.0);
        let Error::Validation(msgs) = cat.validate().unwrap_err() else {
            panic!()
        };
        assert_eq!(msgs.len(), 4, "{msgs:?}");
        assert!(msgs
            .iter()
            .any(|m| m.contains("versions[1].layers[2].output_mb")));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text =
            fixture_f1()
                .to_json()
                .replacen("\"num_layers\"", "\"extra\": 1, \"num_layers\"", 1);
        assert!(matches!(
            ProfileCatalog::from_json(&text),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            ProfileCatalog::from_json("{ not json"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn generator_is_deterministic_and_ordered() {
        let spec = GeneratorSpec::default();
        let a = generate_synthetic_catalog(&spec, 7).unwrap();
        let b = generate_synthetic_catalog(&spec, 7).unwrap();
        assert_eq!(a, b);
        a.validate().unwrap();
        let versions = &a.models[0].versions;
        assert_eq!(versions.len(), 2);
        // the version with more layers must be the more accurate one
        let (small, big) = if versions[0].num_layers < versions[1].num_layers {
            (&versions[0], &versions[1])
        } else {
            (&versions[1], &versions[0])
        };
        assert!(big.num_layers > small.num_layers);
        assert!(big.accuracy > small.accuracy);
        assert_ne!(generate_synthetic_catalog(&spec, 8).unwrap(), a);
    }

    #[test]
    fn generator_rejects_degenerate_specs() {
        let base = GeneratorSpec::default();
        for spec in [
            GeneratorSpec {
                versions_per_model: 0,
                ..base.clone()
            },
            GeneratorSpec {
                models: 0,
                ..base.clone()
            },
            GeneratorSpec {
                layer_range: (5, 4),
                ..base.clone()
            },
            GeneratorSpec {
                layer_range: (4, 4),
                versions_per_model: 2,
                ..base.clone()
            },
            GeneratorSpec {
                accuracy: (0.8, 0.8),
                ..base.clone()
            },
        ] {
            assert!(matches!(
                generate_synthetic_catalog(&spec, 1),
                Err(Error::DegenerateSpec(_))
            ));
        }
    }
}
