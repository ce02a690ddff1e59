use rand::Rng;
use sideslip_core::mlp::{
    adam_step_slice, backward, forward, forward_batch, loss, train, xavier_init, AdamState, ConcatPoint, MlpTopology,
    MlpWeights, TrainConfig, TrainingSet,
};
use sideslip_core::seed::rng_from_seed;

fn batch_loss(w: &MlpWeights, t: &MlpTopology, x: &[f64], kin: &[f64], y: &[f64], l2: f64) -> f64 {
    let (out, _) = forward_batch(w, t, x, kin).unwrap();
    loss(&out, y, w, l2).unwrap()
}

fn random_topology(rng: &mut impl Rng) -> MlpTopology {
    let concat = if rng.random_bool(0.5) { ConcatPoint::Stage2 } else { ConcatPoint::Stage1Input };
    let features = rng.random_range(1..5);
    let mut s1 = vec![features + usize::from(concat == ConcatPoint::Stage1Input)];
    for _ in 0..rng.random_range(1..3) {
        s1.push(rng.random_range(2..6));
    }
    let last = *s1.last().unwrap();
    let mut s2 = vec![last + usize::from(concat == ConcatPoint::Stage2)];
    for _ in 0..rng.random_range(0..2) {
        s2.push(rng.random_range(2..5));
    }
    s2.push(1);
    MlpTopology::new(s1, s2, concat).unwrap()
}

/// Weights first, then biases, of layer `li`.
fn param_mut(w: &mut MlpWeights, li: usize, k: usize) -> &mut f64 {
    let layer = &mut w.layers[li];
    let n_w = layer.weights.len();
    if k < n_w {
        &mut layer.weights[k]
    } else {
        &mut layer.biases[k - n_w]
    }
}

/// Backprop against central differences, max(1e-6 abs, 1e-4 rel).
fn check_gradients(topology: &MlpTopology, seed: u64) {
    let mut rng = rng_from_seed(seed);
    let mut weights = xavier_init(topology, seed).unwrap();
    for layer in &mut weights.layers {
        for b in &mut layer.biases {
            *b = rng.random_range(-0.5..0.5);
        }
    }
    let batch = rng.random_range(1..6);
    let dim = topology.feature_dim();
    let x: Vec<f64> = (0..batch * dim).map(|_| rng.random_range(-2.0..2.0)).collect();
    let kin: Vec<f64> = (0..batch).map(|_| rng.random_range(-0.2..0.2)).collect();
    let y: Vec<f64> = (0..batch).map(|_| rng.random_range(-0.3..0.3)).collect();
    let l2 = 1e-3;

    let (_, cache) = forward_batch(&weights, topology, &x, &kin).unwrap();
    let grads = backward(&weights, topology, &cache, &y, l2).unwrap();
    let h = 1e-6;
    for li in 0..weights.layers.len() {
        let n_w = weights.layers[li].weights.len();
        let n_b = weights.layers[li].biases.len();
        for k in 0..n_w + n_b {
            let mut plus = weights.clone();
            let mut minus = weights.clone();
            *param_mut(&mut plus, li, k) += h;
            *param_mut(&mut minus, li, k) -= h;
            let fd = (batch_loss(&plus, topology, &x, &kin, &y, l2) - batch_loss(&minus, topology, &x, &kin, &y, l2))
                / (2.0 * h);
            let bp = if k < n_w { grads.layers[li].weights[k] } else { grads.layers[li].biases[k - n_w] };
            let tol = 1e-6f64.max(1e-4 * fd.abs());
            assert!((fd - bp).abs() <= tol, "layer {li} param {k}: fd {fd:e} vs backprop {bp:e} ({topology:?})");
        }
    }
}

#[test]
fn gradients_match_finite_differences_on_random_nets() {
    let mut rng = rng_from_seed(2024);
    for case in 0..20 {
        let topology = random_topology(&mut rng);
        check_gradients(&topology, 100 + case);
    }
}

#[test]
fn gradients_match_on_small_concat_net() {
    for concat in [ConcatPoint::Stage2, ConcatPoint::Stage1Input] {
        let s2_in = if concat == ConcatPoint::Stage2 { 5 } else { 4 };
        let s1_in = if concat == ConcatPoint::Stage2 { 3 } else { 4 };
        let t = MlpTopology::new(vec![s1_in, 4], vec![s2_in, 1], concat).unwrap();
        check_gradients(&t, 9);
    }
}

#[test]
fn kinematic_input_moves_output() {
    let t = MlpTopology::two_stage(8, ConcatPoint::Stage2);
    let w = xavier_init(&t, 4).unwrap();
    let x = [0.3, -0.1, 0.2, 1.0, -1.0, 0.5, 0.0, 0.7];
    let h = 1e-6;
    let (up, _) = forward(&w, &t, &x, 0.05 + h).unwrap();
    let (down, _) = forward(&w, &t, &x, 0.05 - h).unwrap();
    let slope = (up - down) / (2.0 * h);
    assert!(slope.abs() > 1e-6, "slope {slope}");
}

#[test]
fn adam_first_step_by_hand() {
    let config = TrainConfig { learning_rate: 1e-3, ..TrainConfig::default() };
    let mut w = [1.0];
    let mut s = AdamState::new(1);
    adam_step_slice(&mut w, &[2.0], &mut s, &config);
    // m = 0.2, v = 0.004, m_hat = 2, v_hat = 4: w' = 1 - 1e-3 * 2 / (2 + 1e-8).
    assert!((w[0] - 0.999_000_000_005).abs() < 1e-12, "{}", w[0]);
}

#[test]
fn adam_minimises_scalar_quadratic() {
    let config = TrainConfig { learning_rate: 1e-2, ..TrainConfig::default() };
    let mut w = [0.0];
    let mut s = AdamState::new(1);
    let mut reached = None;
    for step in 1..=10_000 {
        let g = 2.0 * (w[0] - 3.0);
        adam_step_slice(&mut w, &[g], &mut s, &config);
        if (w[0] - 3.0).abs() < 1e-3 {
            reached = Some(step);
            break;
        }
    }
    assert!(reached.is_some(), "w = {}", w[0]);
}

fn toy_set(n: usize, seed: u64) -> TrainingSet {
    let mut rng = rng_from_seed(seed);
    let mut set = TrainingSet::new(3);
    for _ in 0..n {
        let x: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let kin = 0.1 * x[0];
        set.push(&x, kin, kin + 0.02 * (x[1] * x[2]).sin());
    }
    set
}

#[test]
fn training_is_deterministic() {
    let t = MlpTopology::new(vec![3, 6, 6], vec![7, 4, 1], ConcatPoint::Stage2).unwrap();
    let set = toy_set(300, 1);
    let config = TrainConfig { epochs: 5, batch_size: 32, seed: 11, ..TrainConfig::default() };
    let a = train(&set, &config, &t).unwrap();
    let b = train(&set, &config, &t).unwrap();
    assert_eq!(a.weights, b.weights);
    assert_eq!(a.history, b.history);
    let c = train(&set, &TrainConfig { seed: 12, ..config }, &t).unwrap();
    assert_ne!(a.weights, c.weights);
}

fn single_sample_error(epochs: usize, seed: u64) -> f64 {
    let t = MlpTopology::two_stage(8, ConcatPoint::Stage2);
    let mut set = TrainingSet::new(8);
    let x = [0.4, -1.1, 0.3, 0.9, 1.2, -0.2, 0.1, -0.6];
    set.push(&x, 0.03, 0.05);
    let config = TrainConfig { seed, epochs, ..TrainConfig::default() };
    let out = train(&set, &config, &t).unwrap();
    assert_eq!(out.history.len(), epochs);
    let (beta, _) = forward(&out.weights, &t, &x, 0.03).unwrap();
    (beta - 0.05).abs()
}

/// One sample means one Adam step per epoch; 30 steps at lr 1e-3 leave a
/// momentum oscillation of several mrad (5e-3 to 5e-2 rad over seeds 0..5).
#[test]
#[ignore = "30 single-sample epochs are 30 Adam steps, too few to settle below 1e-3 rad"]
fn single_sample_is_fitted_within_30_epochs() {
    for seed in 0..5 {
        let err = single_sample_error(30, seed);
        assert!(err < 1e-3, "seed {seed}: error {err}");
    }
}

#[test]
fn single_sample_is_fitted_within_150_epochs() {
    for seed in 0..5 {
        let err = single_sample_error(150, seed);
        assert!(err < 1e-3, "seed {seed}: error {err}");
    }
}
