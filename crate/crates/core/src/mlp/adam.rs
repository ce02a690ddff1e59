use alloc::vec;
use alloc::vec::Vec;

use super::{MlpWeights, TrainConfig};

/// First and second moments for a flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(parameters: usize) -> Self {
        Self { m: vec![0.0; parameters], v: vec![0.0; parameters], t: 0 }
    }

    pub fn for_weights(weights: &MlpWeights) -> Self {
        Self::new(weights.parameter_count())
    }
}

struct Corrections {
    first: f64,
    second: f64,
}

fn advance(state: &mut AdamState, config: &TrainConfig) -> Corrections {
    state.t += 1;
    let t = state.t as f64;
    Corrections { first: 1.0 - libm::pow(config.adam_beta1, t), second: 1.0 - libm::pow(config.adam_beta2, t) }
}

fn update(params: &mut [f64], grads: &[f64], m: &mut [f64], v: &mut [f64], c: &Corrections, config: &TrainConfig) {
    assert_eq!(params.len(), grads.len(), "parameter and gradient lengths differ");
    let (b1, b2) = (config.adam_beta1, config.adam_beta2);
    for (((p, &g), m), v) in params.iter_mut().zip(grads).zip(m).zip(v) {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / c.first;
        let v_hat = *v / c.second;
        *p -= config.learning_rate * m_hat / (libm::sqrt(v_hat) + config.adam_eps);
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step_slice(params: &mut [f64], grads: &[f64], state: &mut AdamState, config: &TrainConfig) {
    assert_eq!(params.len(), state.m.len(), "optimizer state does not match parameters");
    let c = advance(state, config);
    update(params, grads, &mut state.m, &mut state.v, &c, config);
}

/// Adam over every weight and bias of the network, weights first per layer.
pub fn adam_step(weights: &mut MlpWeights, grads: &MlpWeights, state: &mut AdamState, config: &TrainConfig) {
    assert_eq!(weights.parameter_count(), state.m.len(), "optimizer state does not match parameters");
    let c = advance(state, config);
    let mut offset = 0;
    for (layer, grad) in weights.layers.iter_mut().zip(&grads.layers) {
        for (params, g) in [(&mut layer.weights, &grad.weights), (&mut layer.biases, &grad.biases)] {
            let n = params.len();
            let range = offset..offset + n;
            update(params, g, &mut state.m[range.clone()], &mut state.v[range], &c, config);
            offset += n;
        }
    }
}
