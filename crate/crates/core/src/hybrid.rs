//! The hybrid observer: standardised in-car measurements feed the first
//! network stage, and the kinematic side-slip angle (in radians, not
//! standardised) joins at the concatenation point.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::mlp::{predict_batch, train, ConcatPoint, MlpTopology, MlpWeights, TrainConfig, TrainingSet};
use crate::simulator::{ReferenceFrame, SensorFrame};
use crate::vehicle::{kinematic_sideslip, VehicleParams};
use crate::{Error, Result};

/// Input channel order of the network.
pub const FEATURE_CHANNELS: [&str; 8] = ["a_x", "a_y", "yaw_rate", "w_fl", "w_fr", "w_rl", "w_rr", "delta"];

pub const FEATURE_DIM: usize = FEATURE_CHANNELS.len();

/// Rows per forward call in batched inference.
const INFERENCE_CHUNK: usize = 512;

pub fn sensor_features(frame: &SensorFrame) -> [f64; FEATURE_DIM] {
    [frame.a_x, frame.a_y, frame.yaw_rate, frame.w_fl, frame.w_fr, frame.w_rl, frame.w_rr, frame.delta]
}

/// Per-channel z-score statistics from the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub channels: Vec<String>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn validate(&self) -> Result<()> {
        if self.channels.len() != FEATURE_DIM || self.mean.len() != FEATURE_DIM || self.std.len() != FEATURE_DIM {
            return Err(Error::Shape(format!("standardizer must cover {FEATURE_DIM} channels")));
        }
        if self.channels.iter().map(String::as_str).ne(FEATURE_CHANNELS) {
            return Err(Error::Shape(format!(
                "channel order {:?} does not match {:?}",
                self.channels, FEATURE_CHANNELS
            )));
        }
        if let Some(i) = self.std.iter().position(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::DegenerateChannel(self.channels[i].clone()));
        }
        Ok(())
    }

    pub fn transform(&self, frame: &SensorFrame) -> [f64; FEATURE_DIM] {
        let mut x = sensor_features(frame);
        for ((v, m), s) in x.iter_mut().zip(&self.mean).zip(&self.std) {
            *v = (*v - m) / s;
        }
        x
    }
}

/// Population mean and standard deviation of every input channel.
pub fn fit_standardizer(frames: &[SensorFrame]) -> Result<Standardizer> {
    if frames.len() < 2 {
        return Err(Error::Empty("standardizer needs at least two frames"));
    }
    let n = frames.len() as f64;
    let mut mean = [0.0; FEATURE_DIM];
    for f in frames {
        for (m, v) in mean.iter_mut().zip(sensor_features(f)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = [0.0; FEATURE_DIM];
    for f in frames {
        for ((acc, v), m) in var.iter_mut().zip(sensor_features(f)).zip(&mean) {
            *acc += (v - m) * (v - m);
        }
    }
    let std: Vec<f64> = var.iter().map(|v| libm::sqrt(v / n)).collect();
    let standardizer =
        Standardizer { channels: FEATURE_CHANNELS.iter().map(|c| c.to_string()).collect(), mean: mean.to_vec(), std };
    // Relative floor: a constant channel leaves rounding residue in its std.
    let degenerate = |(s, m): (&f64, &f64)| !(*s > 1e-12 * m.abs().max(1.0));
    if let Some(i) = standardizer.std.iter().zip(&standardizer.mean).position(degenerate) {
        return Err(Error::DegenerateChannel(FEATURE_CHANNELS[i].to_string()));
    }
    Ok(standardizer)
}

/// Trained network plus the statistics its inputs were scaled with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridModel {
    pub topology: MlpTopology,
    pub weights: MlpWeights,
    pub standardizer: Standardizer,
}

impl HybridModel {
    pub fn validate(&self) -> Result<()> {
        self.topology.validate()?;
        self.weights.check_shapes(&self.topology)?;
        self.standardizer.validate()?;
        if self.topology.feature_dim() != FEATURE_DIM {
            return Err(Error::Shape(format!(
                "network expects {} features, observer provides {FEATURE_DIM}",
                self.topology.feature_dim()
            )));
        }
        Ok(())
    }
}

/// Side-slip estimate for one frame.
pub fn estimate(model: &HybridModel, frame: &SensorFrame, params: &VehicleParams) -> Result<f64> {
    let x = model.standardizer.transform(frame);
    let kinematic = kinematic_sideslip(frame.delta, params)?;
    let out = predict_batch(&model.weights, &model.topology, &x, &[kinematic])?;
    Ok(out[0])
}

/// Frame-wise [`estimate`] over a log, evaluated in batches.
pub fn run_hybrid(log: &[SensorFrame], model: &HybridModel, params: &VehicleParams) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(log.len());
    for chunk in log.chunks(INFERENCE_CHUNK) {
        let mut features = Vec::with_capacity(chunk.len() * FEATURE_DIM);
        let mut kinematic = Vec::with_capacity(chunk.len());
        for frame in chunk {
            features.extend_from_slice(&model.standardizer.transform(frame));
            kinematic.push(kinematic_sideslip(frame.delta, params)?);
        }
        out.extend(predict_batch(&model.weights, &model.topology, &features, &kinematic)?);
    }
    Ok(out)
}

/// The kinematic model alone, applied to the measured steering angle.
pub fn run_kinematic(log: &[SensorFrame], params: &VehicleParams) -> Result<Vec<f64>> {
    log.iter().map(|f| kinematic_sideslip(f.delta, params)).collect()
}

/// Rows of (standardised features, kinematic angle, reference angle).
pub fn build_training_set<'a, I>(pairs: I, standardizer: &Standardizer, params: &VehicleParams) -> Result<TrainingSet>
where
    I: IntoIterator<Item = (&'a SensorFrame, &'a ReferenceFrame)>,
{
    let mut set = TrainingSet::new(FEATURE_DIM);
    for (sensor, reference) in pairs {
        set.push(&standardizer.transform(sensor), kinematic_sideslip(sensor.delta, params)?, reference.beta);
    }
    Ok(set)
}

/// Fit the standardizer on the training logs only, then train the network.
pub fn train_hybrid(
    logs: &[(&[SensorFrame], &[ReferenceFrame])],
    config: &TrainConfig,
    concat_point: ConcatPoint,
    params: &VehicleParams,
) -> Result<(HybridModel, Vec<f64>)> {
    for (sensor, reference) in logs {
        if sensor.len() != reference.len() {
            return Err(Error::LengthMismatch { left: sensor.len(), right: reference.len() });
        }
    }
    let frames: Vec<SensorFrame> = logs.iter().flat_map(|(s, _)| s.iter().copied()).collect();
    let standardizer = fit_standardizer(&frames)?;
    let pairs = logs.iter().flat_map(|(s, r)| s.iter().zip(r.iter()));
    let set = build_training_set(pairs, &standardizer, params)?;
    let topology = MlpTopology::two_stage(FEATURE_DIM, concat_point);
    let outcome = train(&set, config, &topology)?;
    Ok((HybridModel { topology, weights: outcome.weights, standardizer }, outcome.history))
}
