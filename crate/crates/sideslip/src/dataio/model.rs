//! Trained hybrid model as versioned JSON.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sideslip_core::hybrid::{HybridModel, Standardizer};
use sideslip_core::mlp::{DenseLayer, MlpTopology, MlpWeights, TrainConfig};
use sideslip_core::simulator::{ReferenceFrame, SensorFrame};

use super::write_json;
use crate::{Error, Result};

pub const MODEL_FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u64,
    pub topology: MlpTopology,
    pub layers: Vec<DenseLayer>,
    pub standardizer: Standardizer,
    pub train_config: TrainConfig,
    /// SHA-256 over the training logs, see [`training_fingerprint`].
    pub training_fingerprint: String,
}

impl ModelFile {
    pub fn new(model: &HybridModel, train_config: &TrainConfig, training_fingerprint: String) -> Self {
        Self {
            format_version: MODEL_FORMAT_VERSION,
            topology: model.topology.clone(),
            layers: model.weights.layers.clone(),
            standardizer: model.standardizer.clone(),
            train_config: train_config.clone(),
            training_fingerprint,
        }
    }

    pub fn model(&self) -> HybridModel {
        HybridModel {
            topology: self.topology.clone(),
            weights: MlpWeights { layers: self.layers.clone() },
            standardizer: self.standardizer.clone(),
        }
    }
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u64,
}

pub fn write_model(path: &Path, file: &ModelFile) -> Result<()> {
    write_json(path, file)
}

/// Load a model file, rejecting unknown versions and inconsistent shapes.
pub fn read_model(path: &Path) -> Result<ModelFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let json = |source| Error::Json { path: path.into(), source };
    let probe: VersionProbe = serde_json::from_str(&text).map_err(json)?;
    if probe.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            path: path.into(),
            found: probe.format_version,
            expected: MODEL_FORMAT_VERSION,
        });
    }
    let file: ModelFile = serde_json::from_str(&text).map_err(json)?;
    file.model().validate()?;
    Ok(file)
}

/// Hash of the training logs: names, lengths and the bit patterns of every
/// sensor and reference value, in the given order.
pub fn training_fingerprint<'a, I>(logs: I) -> String
where
    I: IntoIterator<Item = (&'a str, &'a [SensorFrame], &'a [ReferenceFrame])>,
{
    let mut h = Sha256::new();
    for (name, sensor, reference) in logs {
        h.update((name.len() as u64).to_le_bytes());
        h.update(name.as_bytes());
        h.update((sensor.len() as u64).to_le_bytes());
        for (s, r) in sensor.iter().zip(reference) {
            let values = [
                s.t,
                s.a_x,
                s.a_y,
                s.yaw_rate,
                s.w_fl,
                s.w_fr,
                s.w_rl,
                s.w_rr,
                s.delta,
                r.beta,
                r.v_x,
                r.v_y,
                r.psi,
                r.x,
                r.y,
                r.theta,
                r.phi,
                r.psi_rate,
                r.theta_rate,
                r.phi_rate,
            ];
            for v in values {
                h.update(v.to_bits().to_le_bytes());
            }
        }
    }
    hex::encode(h.finalize())
}
