use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{ConcatPoint, DenseLayer, MlpTopology, MlpWeights};
use crate::{Error, Result};

/// Activations kept by the forward pass for one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerCache {
    /// batch × inputs
    pub input: Vec<f64>,
    /// batch × outputs, before the activation.
    pub pre: Vec<f64>,
    /// batch × outputs, after the activation (identity on the output layer).
    pub post: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache {
    pub batch: usize,
    pub layers: Vec<LayerCache>,
}

/// `out[s, o] = b[o] + sum_i input[s, i] * W[o, i]`, one row at a time so a
/// row's result does not depend on the batch it is in.
fn dense_forward(layer: &DenseLayer, input: &[f64], batch: usize) -> Vec<f64> {
    let (n_in, n_out) = (layer.inputs, layer.outputs);
    let mut transposed = vec![0.0; n_in * n_out];
    for o in 0..n_out {
        for i in 0..n_in {
            transposed[i * n_out + o] = layer.weights[o * n_in + i];
        }
    }
    let mut out = vec![0.0; batch * n_out];
    for (row, x) in out.chunks_exact_mut(n_out).zip(input.chunks_exact(n_in)) {
        row.copy_from_slice(&layer.biases);
        for (&a, w) in x.iter().zip(transposed.chunks_exact(n_out)) {
            for (r, &w) in row.iter_mut().zip(w) {
                *r += a * w;
            }
        }
    }
    out
}

fn append_column(matrix: &[f64], width: usize, column: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(matrix.len() + column.len());
    for (row, &c) in matrix.chunks_exact(width).zip(column) {
        out.extend_from_slice(row);
        out.push(c);
    }
    out
}

/// Forward pass over a batch.
///
/// `features` is row-major `batch × feature_dim`; `kinematic_beta` holds one
/// angle per row and also fixes the batch size.
pub fn forward_batch(
    weights: &MlpWeights,
    topology: &MlpTopology,
    features: &[f64],
    kinematic_beta: &[f64],
) -> Result<(Vec<f64>, ForwardCache)> {
    let batch = kinematic_beta.len();
    let dim = topology.feature_dim();
    if features.len() != batch * dim {
        return Err(Error::Shape(format!("expected {batch}x{dim} features, got {} values", features.len())));
    }
    weights.check_shapes(topology)?;

    let split = topology.stage1_layers();
    let last = weights.layers.len() - 1;
    let mut activation = match topology.concat_point {
        ConcatPoint::Stage2 => features.to_vec(),
        ConcatPoint::Stage1Input => append_column(features, dim, kinematic_beta),
    };
    let mut caches = Vec::with_capacity(weights.layers.len());
    for (index, layer) in weights.layers.iter().enumerate() {
        let input = if index == split && topology.concat_point == ConcatPoint::Stage2 {
            append_column(&activation, weights.layers[index - 1].outputs, kinematic_beta)
        } else {
            activation
        };
        let pre = dense_forward(layer, &input, batch);
        let post = if index == last { pre.clone() } else { pre.iter().map(|&z| libm::tanh(z)).collect() };
        activation = post.clone();
        caches.push(LayerCache { input, pre, post });
    }
    Ok((activation, ForwardCache { batch, layers: caches }))
}

/// Single-sample forward pass.
pub fn forward(
    weights: &MlpWeights,
    topology: &MlpTopology,
    features: &[f64],
    kinematic_beta: f64,
) -> Result<(f64, ForwardCache)> {
    let (out, cache) = forward_batch(weights, topology, features, &[kinematic_beta])?;
    Ok((out[0], cache))
}

/// Batched inference without keeping the cache.
pub fn predict_batch(
    weights: &MlpWeights,
    topology: &MlpTopology,
    features: &[f64],
    kinematic_beta: &[f64],
) -> Result<Vec<f64>> {
    forward_batch(weights, topology, features, kinematic_beta).map(|(out, _)| out)
}

pub fn mse(beta_hat: &[f64], beta_ref: &[f64]) -> Result<f64> {
    if beta_hat.len() != beta_ref.len() {
        return Err(Error::LengthMismatch { left: beta_hat.len(), right: beta_ref.len() });
    }
    if beta_hat.is_empty() {
        return Err(Error::Empty("loss needs a non-empty batch"));
    }
    let sum: f64 = beta_hat.iter().zip(beta_ref).map(|(h, r)| (h - r) * (h - r)).sum();
    Ok(sum / beta_hat.len() as f64)
}

/// Sum of squared weight-matrix entries; biases are not penalised.
pub fn l2_penalty(weights: &MlpWeights) -> f64 {
    weights.layers.iter().flat_map(|l| &l.weights).map(|w| w * w).sum()
}

/// `MSE(beta_hat, beta_ref) + l2_rate * sum(w²)`.
pub fn loss(beta_hat: &[f64], beta_ref: &[f64], weights: &MlpWeights, l2_rate: f64) -> Result<f64> {
    Ok(mse(beta_hat, beta_ref)? + l2_rate * l2_penalty(weights))
}

/// Exact gradient of [`loss`] for the batch recorded in `cache`.
pub fn backward(
    weights: &MlpWeights,
    topology: &MlpTopology,
    cache: &ForwardCache,
    beta_ref: &[f64],
    l2_rate: f64,
) -> Result<MlpWeights> {
    weights.check_shapes(topology)?;
    let batch = cache.batch;
    if beta_ref.len() != batch {
        return Err(Error::Shape(format!("cache holds {batch} rows but {} references were given", beta_ref.len())));
    }
    if batch == 0 {
        return Err(Error::Empty("backward needs a non-empty batch"));
    }
    let consistent = cache.layers.len() == weights.layers.len()
        && cache.layers.iter().zip(&weights.layers).all(|(c, l)| {
            c.input.len() == batch * l.inputs && c.pre.len() == batch * l.outputs && c.post.len() == batch * l.outputs
        });
    if !consistent {
        return Err(Error::Shape("forward cache does not match the network".into()));
    }

    let split = topology.stage1_layers();
    let scale = 2.0 / batch as f64;
    let output = &cache.layers[cache.layers.len() - 1].post;
    let mut delta: Vec<f64> = output.iter().zip(beta_ref).map(|(h, r)| scale * (h - r)).collect();

    let mut grads = MlpWeights::zeros(topology);
    for index in (0..weights.layers.len()).rev() {
        let layer = &weights.layers[index];
        let layer_cache = &cache.layers[index];
        let (n_in, n_out) = (layer.inputs, layer.outputs);
        let grad = &mut grads.layers[index];

        for (d_row, x_row) in delta.chunks_exact(n_out).zip(layer_cache.input.chunks_exact(n_in)) {
            for (o, &d) in d_row.iter().enumerate() {
                grad.biases[o] += d;
                for (g, &x) in grad.weights[o * n_in..(o + 1) * n_in].iter_mut().zip(x_row) {
                    *g += d * x;
                }
            }
        }
        for (g, &w) in grad.weights.iter_mut().zip(&layer.weights) {
            *g += 2.0 * l2_rate * w;
        }

        if index == 0 {
            break;
        }
        // The appended kinematic column receives no upstream gradient.
        let prev = &cache.layers[index - 1];
        let prev_width = weights.layers[index - 1].outputs;
        let mut next = vec![0.0; batch * prev_width];
        for (s, d_row) in delta.chunks_exact(n_out).enumerate() {
            let out_row = &mut next[s * prev_width..(s + 1) * prev_width];
            for (o, &d) in d_row.iter().enumerate() {
                let w_row = &layer.weights[o * n_in..o * n_in + prev_width];
                for (acc, &w) in out_row.iter_mut().zip(w_row) {
                    *acc += d * w;
                }
            }
        }
        debug_assert!(n_in == prev_width || (index == split && n_in == prev_width + 1));
        for (g, &a) in next.iter_mut().zip(&prev.post) {
            *g *= 1.0 - a * a;
        }
        delta = next;
    }
    Ok(grads)
}

#[cfg(test)]
mod tests {
    use super::super::xavier_init;
    use super::*;

    fn tiny() -> MlpTopology {
        MlpTopology::new(vec![3, 4], vec![5, 1], ConcatPoint::Stage2).unwrap()
    }

    #[test]
    fn zero_network_outputs_zero() {
        let t = MlpTopology::two_stage(8, ConcatPoint::Stage2);
        let w = MlpWeights::zeros(&t);
        let (y, _) = forward(&w, &t, &[1.0, -2.0, 3.0, 0.5, 0.1, 9.0, -4.0, 0.2], 0.3).unwrap();
        assert_eq!(y, 0.0);
    }

    #[test]
    fn hidden_activations_bounded() {
        let t = MlpTopology::two_stage(8, ConcatPoint::Stage2);
        let w = xavier_init(&t, 5).unwrap();
        let x: Vec<f64> = (0..8 * 4).map(|i| (i as f64 - 10.0) * 0.1).collect();
        let (_, cache) = forward_batch(&w, &t, &x, &[0.1, -0.2, 0.0, 0.05]).unwrap();
        for layer in &cache.layers[..cache.layers.len() - 1] {
            assert!(layer.post.iter().all(|a| a.abs() < 1.0));
        }
    }

    #[test]
    fn dimension_mismatch() {
        let t = tiny();
        let w = MlpWeights::zeros(&t);
        assert!(matches!(forward(&w, &t, &[1.0, 2.0], 0.0), Err(Error::Shape(_))));
    }

    #[test]
    fn batch_rows_match_single_rows() {
        let t = MlpTopology::two_stage(8, ConcatPoint::Stage2);
        let w = xavier_init(&t, 9).unwrap();
        let x: Vec<f64> = (0..8 * 3).map(|i| libm::sin(i as f64)).collect();
        let b = [0.01, -0.03, 0.2];
        let batch = predict_batch(&w, &t, &x, &b).unwrap();
        for s in 0..3 {
            let (y, _) = forward(&w, &t, &x[s * 8..(s + 1) * 8], b[s]).unwrap();
            assert_eq!(y, batch[s]);
        }
    }

    #[test]
    fn loss_examples() {
        let t = tiny();
        let w = MlpWeights::zeros(&t);
        assert_eq!(loss(&[0.2, 0.1], &[0.2, 0.1], &w, 1e-5).unwrap(), 0.0);
        assert!((mse(&[0.01], &[0.03]).unwrap() - 4e-4).abs() < 1e-18);
        assert!((loss(&[0.01], &[0.03], &w, 0.0).unwrap() - 4e-4).abs() < 1e-18);
        assert!(loss(&[], &[], &w, 1e-5).is_err());
    }

    #[test]
    fn perfect_fit_zero_weights_has_zero_gradient() {
        let t = tiny();
        let w = MlpWeights::zeros(&t);
        let x = [0.3, -0.1, 0.8, 1.0, 2.0, 3.0];
        let (_, cache) = forward_batch(&w, &t, &x, &[0.1, 0.2]).unwrap();
        let g = backward(&w, &t, &cache, &[0.0, 0.0], 1e-3).unwrap();
        assert!(g.layers.iter().all(|l| l.weights.iter().chain(&l.biases).all(|v| *v == 0.0)));
    }

    #[test]
    fn l2_gradient_term() {
        let t = tiny();
        let w = xavier_init(&t, 3).unwrap();
        let x = [0.3, -0.1, 0.8];
        let (y, cache) = forward(&w, &t, &x, 0.1).unwrap();
        let g0 = backward(&w, &t, &cache, &[y], 0.0).unwrap();
        let g1 = backward(&w, &t, &cache, &[y], 0.25).unwrap();
        for ((a, b), l) in g0.layers.iter().zip(&g1.layers).zip(&w.layers) {
            for ((ga, gb), w) in a.weights.iter().zip(&b.weights).zip(&l.weights) {
                assert!((gb - ga - 0.5 * w).abs() < 1e-15);
            }
            assert_eq!(a.biases, b.biases);
        }
    }

    #[test]
    fn stale_cache_rejected() {
        let t = tiny();
        let w = MlpWeights::zeros(&t);
        let (_, cache) = forward_batch(&w, &t, &[0.0; 6], &[0.0, 0.0]).unwrap();
        assert!(backward(&w, &t, &cache, &[0.0], 0.0).is_err());
        let other = MlpTopology::new(vec![3, 5], vec![6, 1], ConcatPoint::Stage2).unwrap();
        let w2 = MlpWeights::zeros(&other);
        assert!(backward(&w2, &other, &cache, &[0.0, 0.0], 0.0).is_err());
    }
}
