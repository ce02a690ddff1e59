//! Two-stage feedforward network trained from scratch.
//!
//! Stage one maps the sensor features through tanh layers; the kinematic
//! side-slip angle is appended to its output and stage two maps the result
//! to a single linear output. Training minimises mean squared error plus an
//! L2 penalty on the weight matrices with Adam.

mod adam;
mod network;
mod train;

pub use adam::{adam_step, adam_step_slice, AdamState};
pub use network::{backward, forward, forward_batch, l2_penalty, loss, mse, predict_batch, ForwardCache, LayerCache};
pub use train::{train, TrainOutcome, TrainingSet};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::seed::rng_from_seed;
use crate::{Error, Result};

/// Where the kinematic side-slip angle enters the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcatPoint {
    /// Appended to the stage-one output.
    #[default]
    Stage2,
    /// Appended to the raw features (ablation).
    Stage1Input,
}

/// Layer widths of both stages, inputs included.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpTopology {
    pub stage1_sizes: Vec<usize>,
    pub stage2_sizes: Vec<usize>,
    pub concat_point: ConcatPoint,
}

impl MlpTopology {
    pub fn new(stage1_sizes: Vec<usize>, stage2_sizes: Vec<usize>, concat_point: ConcatPoint) -> Result<Self> {
        let t = Self { stage1_sizes, stage2_sizes, concat_point };
        t.validate()?;
        Ok(t)
    }

    /// 16-32-64-128 then 32-16-1 around the kinematic input.
    pub fn two_stage(feature_dim: usize, concat_point: ConcatPoint) -> Self {
        let (input, joined) = match concat_point {
            ConcatPoint::Stage2 => (feature_dim, 129),
            ConcatPoint::Stage1Input => (feature_dim + 1, 128),
        };
        Self { stage1_sizes: vec![input, 16, 32, 64, 128], stage2_sizes: vec![joined, 32, 16, 1], concat_point }
    }

    pub fn validate(&self) -> Result<()> {
        let (s1, s2) = (&self.stage1_sizes, &self.stage2_sizes);
        if s1.len() < 2 || s2.len() < 2 {
            return Err(Error::Shape(format!("each stage needs an input and at least one layer: {s1:?} / {s2:?}")));
        }
        if s1.iter().chain(s2).any(|&w| w == 0) {
            return Err(Error::Shape(format!("zero-width layer in {s1:?} / {s2:?}")));
        }
        if s2[s2.len() - 1] != 1 {
            return Err(Error::Shape(format!("output width must be 1, got {}", s2[s2.len() - 1])));
        }
        let last = s1[s1.len() - 1];
        let expected = match self.concat_point {
            ConcatPoint::Stage2 => last + 1,
            ConcatPoint::Stage1Input => last,
        };
        if s2[0] != expected {
            return Err(Error::Shape(format!("stage-two input width {} should be {expected}", s2[0])));
        }
        if self.concat_point == ConcatPoint::Stage1Input && s1[0] < 2 {
            return Err(Error::Shape("stage-one input must hold features plus the kinematic angle".into()));
        }
        Ok(())
    }

    /// Number of sensor features (the kinematic angle excluded).
    pub fn feature_dim(&self) -> usize {
        match self.concat_point {
            ConcatPoint::Stage2 => self.stage1_sizes[0],
            ConcatPoint::Stage1Input => self.stage1_sizes[0] - 1,
        }
    }

    /// (inputs, outputs) of every dense layer, stage one first.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let pairs = |s: &[usize]| s.windows(2).map(|w| (w[0], w[1])).collect::<Vec<_>>();
        let mut shapes = pairs(&self.stage1_sizes);
        shapes.extend(pairs(&self.stage2_sizes));
        shapes
    }

    pub fn stage1_layers(&self) -> usize {
        self.stage1_sizes.len() - 1
    }
}

/// Weight matrix (outputs × inputs, row-major) and bias of one layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { inputs, outputs, weights: vec![0.0; inputs * outputs], biases: vec![0.0; outputs] }
    }

    pub fn weight(&self, out: usize, inp: usize) -> f64 {
        self.weights[out * self.inputs + inp]
    }

    fn is_consistent(&self) -> bool {
        self.weights.len() == self.inputs * self.outputs && self.biases.len() == self.outputs
    }
}

/// All layers in evaluation order; also used as the gradient container.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpWeights {
    pub layers: Vec<DenseLayer>,
}

impl MlpWeights {
    pub fn zeros(topology: &MlpTopology) -> Self {
        Self { layers: topology.layer_shapes().into_iter().map(|(i, o)| DenseLayer::zeros(i, o)).collect() }
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Check shapes against `topology`, naming the first offending layer.
    pub fn check_shapes(&self, topology: &MlpTopology) -> Result<()> {
        let shapes = topology.layer_shapes();
        if shapes.len() != self.layers.len() {
            return Err(Error::Shape(format!("expected {} layers, found {}", shapes.len(), self.layers.len())));
        }
        for (index, (layer, (i, o))) in self.layers.iter().zip(shapes).enumerate() {
            if layer.inputs != i || layer.outputs != o || !layer.is_consistent() {
                return Err(Error::Shape(format!(
                    "layer {index}: expected {o}x{i}, found {}x{} with {} weights and {} biases",
                    layer.outputs,
                    layer.inputs,
                    layer.weights.len(),
                    layer.biases.len()
                )));
            }
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.layers.iter().all(|l| l.weights.iter().chain(&l.biases).all(|v| v.is_finite()))
    }
}

/// Glorot-uniform weights in ±sqrt(6 / (fan_in + fan_out)); zero biases.
pub fn xavier_init(topology: &MlpTopology, seed: u64) -> Result<MlpWeights> {
    topology.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut weights = MlpWeights::zeros(topology);
    for layer in &mut weights.layers {
        let bound = xavier_bound(layer.inputs, layer.outputs);
        let dist = Uniform::new_inclusive(-bound, bound).expect("finite positive bound");
        for w in &mut layer.weights {
            *w = dist.sample(&mut rng);
        }
    }
    Ok(weights)
}

pub fn xavier_bound(fan_in: usize, fan_out: usize) -> f64 {
    libm::sqrt(6.0 / (fan_in + fan_out) as f64)
}

/// Optimiser and schedule settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub l2_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub shuffle_each_epoch: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            l2_rate: 1e-5,
            batch_size: 64,
            epochs: 30,
            seed: 0,
            shuffle_each_epoch: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let rates_ok = [self.learning_rate, self.adam_eps].iter().all(|r| *r > 0.0 && r.is_finite())
            && self.l2_rate >= 0.0
            && self.l2_rate.is_finite();
        let betas_ok = (0.0..1.0).contains(&self.adam_beta1) && (0.0..1.0).contains(&self.adam_beta2);
        if rates_ok && betas_ok && self.batch_size >= 1 && self.epochs >= 1 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid training configuration {self:?}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_topology_shapes() {
        let t = MlpTopology::two_stage(8, ConcatPoint::Stage2);
        t.validate().unwrap();
        assert_eq!(t.layer_shapes(), vec![(8, 16), (16, 32), (32, 64), (64, 128), (129, 32), (32, 16), (16, 1)]);
        let a = MlpTopology::two_stage(8, ConcatPoint::Stage1Input);
        a.validate().unwrap();
        assert_eq!(a.layer_shapes()[0], (9, 16));
        assert_eq!(a.layer_shapes()[4], (128, 32));
        assert_eq!(a.feature_dim(), 8);
    }

    #[test]
    fn topology_rejects_bad_concat_width() {
        assert!(MlpTopology::new(vec![3, 4], vec![4, 1], ConcatPoint::Stage2).is_err());
        assert!(MlpTopology::new(vec![3, 4], vec![5, 1], ConcatPoint::Stage2).is_ok());
        assert!(MlpTopology::new(vec![3, 4], vec![5, 2], ConcatPoint::Stage2).is_err());
    }

    #[test]
    fn xavier_bounds_and_biases() {
        assert!((xavier_bound(16, 32) - 0.353_553_390_593_273_8).abs() < 1e-15);
        let t = MlpTopology::two_stage(8, ConcatPoint::Stage2);
        let w = xavier_init(&t, 11).unwrap();
        w.check_shapes(&t).unwrap();
        for l in &w.layers {
            let b = xavier_bound(l.inputs, l.outputs);
            assert!(l.weights.iter().all(|v| v.abs() <= b));
            assert!(l.biases.iter().all(|v| *v == 0.0));
        }
        assert_eq!(w, xavier_init(&t, 11).unwrap());
        assert_ne!(w, xavier_init(&t, 12).unwrap());
    }

    #[test]
    fn shape_check_names_layer() {
        let t = MlpTopology::two_stage(8, ConcatPoint::Stage2);
        let mut w = MlpWeights::zeros(&t);
        w.layers[2].biases.pop();
        let err = w.check_shapes(&t).unwrap_err();
        assert!(alloc::format!("{err}").contains("layer 2"));
    }
}
