//! JSON checkpoint of every parameter tensor together with its shape.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::a2c::{A2CModel, NetworkSizes};
use super::nn::Dense;
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "edgesplit-a2c";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointFile {
    format: String,
    version: u32,
    obs_dim: usize,
    action_shape: Vec<(usize, usize)>,
    network: NetworkSizes,
    layers: Vec<LayerRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerRecord {
    name: String,
    shape: [usize; 2],
    weight: Vec<f64>,
    bias: Vec<f64>,
}

pub fn to_json(model: &A2CModel) -> String {
    let file = CheckpointFile {
        format: CHECKPOINT_FORMAT.to_string(),
        version: CHECKPOINT_VERSION,
        obs_dim: model.obs_dim(),
        action_shape: model.action_shape().to_vec(),
        network: model.sizes(),
        layers: model
            .layer_names()
            .into_iter()
            .zip(model.layers())
            .map(|(name, layer)| LayerRecord {
                name,
                shape: [layer.out_dim, layer.in_dim],
                weight: layer.weight.clone(),
                bias: layer.bias.clone(),
            })
            .collect(),
    };
    let mut text = serde_json::to_string(&file).expect("checkpoint serializes");
    text.push('\n');
    text
}

pub fn from_json(text: &str) -> Result<A2CModel> {
    let file: CheckpointFile =
        serde_json::from_str(text).map_err(|e| Error::Checkpoint(e.to_string()))?;
    if file.format != CHECKPOINT_FORMAT || file.version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported checkpoint {} v{}",
            file.format, file.version
        )));
    }
    // Build a skeleton with the declared shapes, then fill it in.
    let mut model = A2CModel::new(file.obs_dim, file.action_shape, file.network, 0);
    let names = model.layer_names();
    if file.layers.len() != names.len() {
        return Err(Error::Checkpoint(format!(
            "expected {} layers, found {}",
            names.len(),
            file.layers.len()
        )));
    }
    for ((slot, name), record) in model.layers_mut().iter_mut().zip(&names).zip(file.layers) {
        let expected = [slot.out_dim, slot.in_dim];
        if record.name != *name
            || record.shape != expected
            || record.weight.len() != expected[0] * expected[1]
            || record.bias.len() != expected[0]
        {
            return Err(Error::Checkpoint(format!(
                "layer `{}` {:?} does not match expected `{name}` {expected:?}",
                record.name, record.shape
            )));
        }
        if record
            .weight
            .iter()
            .chain(&record.bias)
            .any(|p| !p.is_finite())
        {
            return Err(Error::Checkpoint(format!(
                "layer `{name}` has non-finite parameters"
            )));
        }
        *slot = Dense {
            in_dim: expected[1],
            out_dim: expected[0],
            weight: record.weight,
            bias: record.bias,
        };
    }
    Ok(model)
}

pub fn save(model: &A2CModel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_json(model))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<A2CModel> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Checkpoint(format!("{}: {e}", path.as_ref().display())))?;
    from_json(&text)
}
