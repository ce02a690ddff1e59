//! Trajectory logs and model files.

mod model;
mod trajectory;

pub use model::{read_model, training_fingerprint, write_model, ModelFile, MODEL_FORMAT_VERSION};
pub use trajectory::{
    meta_path, read_trajectory, write_trajectory, TrajectoryFile, TrajectoryMeta, TRAJECTORY_COLUMNS,
    TRAJECTORY_SCHEMA_VERSION,
};

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::{Error, Result};

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json { path: path.into(), source })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.into(), source })
}

/// Shortest decimal text that parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:?}")
}
