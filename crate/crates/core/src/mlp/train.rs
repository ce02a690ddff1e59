use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::{
    adam_step, backward, forward_batch, l2_penalty, mse, xavier_init, AdamState, MlpTopology, MlpWeights, TrainConfig,
};
use crate::seed::{derive_seed, rng_from_seed};
use crate::{Error, Result};

/// Row-major feature matrix with the kinematic angle and target per row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingSet {
    pub feature_dim: usize,
    pub features: Vec<f64>,
    pub kinematic_beta: Vec<f64>,
    pub beta_ref: Vec<f64>,
}

impl TrainingSet {
    pub fn new(feature_dim: usize) -> Self {
        Self { feature_dim, ..Self::default() }
    }

    pub fn push(&mut self, features: &[f64], kinematic_beta: f64, beta_ref: f64) {
        assert_eq!(features.len(), self.feature_dim, "feature width");
        self.features.extend_from_slice(features);
        self.kinematic_beta.push(kinematic_beta);
        self.beta_ref.push(beta_ref);
    }

    pub fn len(&self) -> usize {
        self.beta_ref.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta_ref.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.feature_dim..(i + 1) * self.feature_dim]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub weights: MlpWeights,
    /// Sample-weighted mean minibatch loss of every epoch.
    pub history: Vec<f64>,
}

/// Minibatch Adam training from a Xavier start.
///
/// Initialisation and shuffling draw from the `init` and `shuffle`
/// substreams of `config.seed`. The final partial batch is kept.
pub fn train(set: &TrainingSet, config: &TrainConfig, topology: &MlpTopology) -> Result<TrainOutcome> {
    config.validate()?;
    topology.validate()?;
    if set.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if set.feature_dim != topology.feature_dim()
        || set.features.len() != set.len() * set.feature_dim
        || set.kinematic_beta.len() != set.len()
    {
        return Err(Error::Shape(format!(
            "training set has {} features per row, topology expects {}",
            set.feature_dim,
            topology.feature_dim()
        )));
    }

    let mut weights = xavier_init(topology, derive_seed(config.seed, "init"))?;
    let mut adam = AdamState::for_weights(&weights);
    let mut rng = rng_from_seed(derive_seed(config.seed, "shuffle"));
    let mut order: Vec<usize> = (0..set.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);

    let mut features = Vec::with_capacity(config.batch_size * set.feature_dim);
    let mut kinematic = Vec::with_capacity(config.batch_size);
    let mut targets = Vec::with_capacity(config.batch_size);
    for epoch in 0..config.epochs {
        if config.shuffle_each_epoch {
            order.shuffle(&mut rng);
        }
        let mut weighted_loss = 0.0;
        for chunk in order.chunks(config.batch_size) {
            features.clear();
            kinematic.clear();
            targets.clear();
            for &i in chunk {
                features.extend_from_slice(set.row(i));
                kinematic.push(set.kinematic_beta[i]);
                targets.push(set.beta_ref[i]);
            }
            let (output, cache) = forward_batch(&weights, topology, &features, &kinematic)?;
            let batch_loss = mse(&output, &targets)? + config.l2_rate * l2_penalty(&weights);
            if !batch_loss.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            weighted_loss += batch_loss * chunk.len() as f64;
            let grads = backward(&weights, topology, &cache, &targets, config.l2_rate)?;
            adam_step(&mut weights, &grads, &mut adam, config);
        }
        history.push(weighted_loss / set.len() as f64);
    }
    if !weights.all_finite() {
        return Err(Error::Divergence { epoch: config.epochs.saturating_sub(1) });
    }
    Ok(TrainOutcome { weights, history })
}
