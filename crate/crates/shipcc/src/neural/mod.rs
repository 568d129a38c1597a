//! Dense MLP stack: forward, exact backprop, Adam, and the training loops
//! for algebraic-state inference, state-dynamics compensation, and the
//! black-box baselines.
//!
//! Activations are tanh after the input and hidden layers, identity at the
//! output. All training operates on normalized inputs/targets; callers own
//! denormalization.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::Dataset;
use crate::{Error, Result};

/// Layer sizes of the algebraic-state inference network.
pub const INFERENCE_SIZES: [usize; 3] = [107, 150, 7];
/// Layer sizes of the state-dynamics compensation network.
pub const COMPENSATION_SIZES: [usize; 3] = [114, 600, 103];
/// Layer sizes of the NN1 black-box baseline.
pub const NN1_SIZES: [usize; 3] = [114, 500, 110];
/// Layer sizes of the NN2 black-box baseline.
pub const NN2_SIZES: [usize; 3] = [114, 150, 110];

/// Black-box baseline flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlackboxVariant {
    Nn1,
    Nn2,
}

impl BlackboxVariant {
    pub fn sizes(self) -> Vec<usize> {
        match self {
            BlackboxVariant::Nn1 => NN1_SIZES.to_vec(),
            BlackboxVariant::Nn2 => NN2_SIZES.to_vec(),
        }
    }
}

/// A fully-connected network; weights are stored `(fan_in, fan_out)` so a
/// batch forward pass is a plain row-major GEMM.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub sizes: Vec<usize>,
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl MlpModel {
    /// Uniform init in +-sqrt(6/(fan_in+fan_out)), deterministic in the seed.
    pub fn init(sizes: &[usize], seed: u64) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::Shape("an MLP needs at least two layers".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push(Array2::from_shape_fn((fan_in, fan_out), |_| {
                rng.gen_range(-bound..bound)
            }));
            biases.push(Array1::zeros(fan_out));
        }
        Ok(MlpModel {
            sizes: sizes.to_vec(),
            weights,
            biases,
        })
    }

    pub fn zeroed(sizes: &[usize]) -> Result<Self> {
        let mut m = Self::init(sizes, 0)?;
        for w in &mut m.weights {
            w.fill(0.0);
        }
        Ok(m)
    }

    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("at least two layers")
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// Forward pass for one record.
    pub fn forward(&self, input: &ArrayView1<f64>) -> Result<Array1<f64>> {
        if input.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "forward expects {} inputs, got {}",
                self.input_dim(),
                input.len()
            )));
        }
        let mut a = input.to_owned();
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut pre = a.dot(w) + b;
            if l + 1 < self.n_layers() {
                pre.mapv_inplace(f64::tanh);
            }
            a = pre;
        }
        Ok(a)
    }

    /// Batched forward pass (records as rows).
    pub fn forward_batch(&self, inputs: &ArrayView2<f64>) -> Result<Array2<f64>> {
        Ok(self.forward_batch_cached(inputs)?.pop().expect("output layer"))
    }

    /// Forward pass keeping every post-activation (index 0 is the input).
    fn forward_batch_cached(&self, inputs: &ArrayView2<f64>) -> Result<Vec<Array2<f64>>> {
        if inputs.ncols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "forward expects {} inputs, got {}",
                self.input_dim(),
                inputs.ncols()
            )));
        }
        let mut acts = Vec::with_capacity(self.n_layers() + 1);
        acts.push(inputs.to_owned());
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut pre = acts[l].dot(w);
            for mut row in pre.rows_mut() {
                row += b;
            }
            if l + 1 < self.n_layers() {
                pre.mapv_inplace(f64::tanh);
            }
            acts.push(pre);
        }
        Ok(acts)
    }
}

/// Parameter-shaped gradient buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub d_weights: Vec<Array2<f64>>,
    pub d_biases: Vec<Array1<f64>>,
}

impl Gradients {
    fn zeros_like(model: &MlpModel) -> Self {
        Gradients {
            d_weights: model.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            d_biases: model.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
        }
    }

    fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.d_weights.iter_mut().zip(&other.d_weights) {
            *a += b;
        }
        for (a, b) in self.d_biases.iter_mut().zip(&other.d_biases) {
            *a += b;
        }
    }

    fn scale(&mut self, s: f64) {
        for a in &mut self.d_weights {
            a.mapv_inplace(|v| v * s);
        }
        for a in &mut self.d_biases {
            a.mapv_inplace(|v| v * s);
        }
    }
}

/// Exact gradients of the batch MSE loss
/// `L = (1/(B*D)) * sum ||y - t||^2` with respect to all parameters.
///
/// Work is sharded over fixed row chunks and reduced in chunk order, so the
/// result does not depend on the worker count.
pub fn mlp_backprop(
    model: &MlpModel,
    inputs: &ArrayView2<f64>,
    targets: &ArrayView2<f64>,
) -> Result<(f64, Gradients)> {
    if inputs.nrows() == 0 {
        return Err(Error::Empty("backprop needs a non-empty batch".into()));
    }
    if inputs.nrows() != targets.nrows() || targets.ncols() != model.output_dim() {
        return Err(Error::Shape(format!(
            "backprop batch shapes: inputs {}x{}, targets {}x{}, model {}->{}",
            inputs.nrows(),
            inputs.ncols(),
            targets.nrows(),
            targets.ncols(),
            model.input_dim(),
            model.output_dim()
        )));
    }
    let n_rows = inputs.nrows();
    let chunk = 64usize;
    let n_chunks = n_rows.div_ceil(chunk);
    let partials: Vec<(f64, Gradients)> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let lo = ci * chunk;
            let hi = (lo + chunk).min(n_rows);
            backprop_chunk(
                model,
                &inputs.slice(ndarray::s![lo..hi, ..]),
                &targets.slice(ndarray::s![lo..hi, ..]),
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let mut loss_sum = 0.0;
    let mut grads = Gradients::zeros_like(model);
    for (l, g) in &partials {
        loss_sum += l;
        grads.add_assign(g);
    }
    let denom = (n_rows * model.output_dim()) as f64;
    grads.scale(1.0 / denom);
    Ok((loss_sum / denom, grads))
}

/// Unscaled (sum-form) loss and gradients for one row chunk.
fn backprop_chunk(
    model: &MlpModel,
    inputs: &ArrayView2<f64>,
    targets: &ArrayView2<f64>,
) -> Result<(f64, Gradients)> {
    let acts = model.forward_batch_cached(inputs)?;
    let output = acts.last().expect("output activation");
    let diff = output - targets;
    let loss_sum = diff.iter().map(|v| v * v).sum::<f64>();

    let n_layers = model.n_layers();
    let mut grads = Gradients::zeros_like(model);
    // d loss_sum / d output = 2 * diff; the 1/(B*D) scale is applied by the caller.
    let mut delta = 2.0 * diff;
    for l in (0..n_layers).rev() {
        grads.d_weights[l] = acts[l].t().dot(&delta);
        grads.d_biases[l] = delta.sum_axis(Axis(0));
        if l > 0 {
            // tanh'(u) = 1 - tanh(u)^2, and acts[l] already holds tanh(u).
            let mut prev = delta.dot(&model.weights[l].t());
            prev.zip_mut_with(&acts[l], |d, a| *d *= 1.0 - a * a);
            delta = prev;
        }
    }
    Ok((loss_sum, grads))
}

/// Adam optimizer state (first/second moments plus the step counter).
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m_weights: Vec<Array2<f64>>,
    pub v_weights: Vec<Array2<f64>>,
    pub m_biases: Vec<Array1<f64>>,
    pub v_biases: Vec<Array1<f64>>,
    pub step: u64,
}

impl AdamState {
    pub fn new(model: &MlpModel) -> Self {
        AdamState {
            m_weights: model.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            v_weights: model.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            m_biases: model.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
            v_biases: model.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
            step: 0,
        }
    }
}

/// Optimizer and loop settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Stop after this many epochs without a validation improvement.
    pub early_stop_patience: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 200,
            epochs: 300,
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
            early_stop_patience: Some(50),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.epochs == 0 || self.learning_rate <= 0.0 {
            return Err(Error::Config(
                "training needs positive batch size, epochs, learning rate".into(),
            ));
        }
        Ok(())
    }
}

/// One standard Adam update with bias correction; increments the step count.
pub fn adam_update(
    model: &mut MlpModel,
    state: &mut AdamState,
    grads: &Gradients,
    cfg: &TrainConfig,
) {
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - cfg.beta1.powi(t);
    let bc2 = 1.0 - cfg.beta2.powi(t);
    for l in 0..model.n_layers() {
        adam_apply(
            model.weights[l].as_slice_mut().expect("contiguous"),
            state.m_weights[l].as_slice_mut().expect("contiguous"),
            state.v_weights[l].as_slice_mut().expect("contiguous"),
            grads.d_weights[l].as_slice().expect("contiguous"),
            cfg,
            bc1,
            bc2,
        );
        adam_apply(
            model.biases[l].as_slice_mut().expect("contiguous"),
            state.m_biases[l].as_slice_mut().expect("contiguous"),
            state.v_biases[l].as_slice_mut().expect("contiguous"),
            grads.d_biases[l].as_slice().expect("contiguous"),
            cfg,
            bc1,
            bc2,
        );
    }
}

fn adam_apply(
    params: &mut [f64],
    m: &mut [f64],
    v: &mut [f64],
    g: &[f64],
    cfg: &TrainConfig,
    bc1: f64,
    bc2: f64,
) {
    for i in 0..params.len() {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
}

/// Mean-squared error over all dimensions and records:
/// `MSE = (1/(N_dim*N_data)) * sum ||r - r_hat||^2`.
pub fn evaluate_mse(predictions: &ArrayView2<f64>, truth: &ArrayView2<f64>) -> Result<f64> {
    if predictions.nrows() == 0 {
        return Err(Error::Empty("evaluate_mse needs at least one record".into()));
    }
    if predictions.dim() != truth.dim() {
        return Err(Error::Shape(format!(
            "evaluate_mse shapes differ: {:?} vs {:?}",
            predictions.dim(),
            truth.dim()
        )));
    }
    let diff = predictions - truth;
    Ok(diff.iter().map(|v| v * v).sum::<f64>() / (diff.nrows() * diff.ncols()) as f64)
}

/// Per-epoch loss record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
}

/// A trained network with its loss curves and checkpoint metadata.
#[derive(Debug, Clone)]
pub struct TrainedNet {
    pub model: MlpModel,
    pub curves: Vec<EpochStats>,
    pub best_epoch: usize,
    pub best_val_mse: f64,
}

/// Minibatch Adam training with per-epoch validation and best-checkpoint
/// selection. Deterministic under a fixed seed: initialization and the
/// batch shuffling order derive from one seeded stream.
pub fn train(
    sizes: &[usize],
    train_x: &ArrayView2<f64>,
    train_y: &ArrayView2<f64>,
    val_x: &ArrayView2<f64>,
    val_y: &ArrayView2<f64>,
    cfg: &TrainConfig,
) -> Result<TrainedNet> {
    cfg.validate()?;
    if train_x.nrows() == 0 || val_x.nrows() == 0 {
        return Err(Error::Empty("training and validation sets must be non-empty".into()));
    }
    if cfg.batch_size > train_x.nrows() {
        return Err(Error::Config(format!(
            "batch size {} exceeds training set size {}",
            cfg.batch_size,
            train_x.nrows()
        )));
    }
    let mut model = MlpModel::init(sizes, cfg.seed)?;
    let mut adam = AdamState::new(&model);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x5EED));

    let n = train_x.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    let mut best: Option<(usize, f64, MlpModel)> = None;
    let mut curves = Vec::with_capacity(cfg.epochs);
    let mut stagnant = 0usize;

    let mut batch_x = Array2::zeros((cfg.batch_size, train_x.ncols()));
    let mut batch_y = Array2::zeros((cfg.batch_size, train_y.ncols()));

    for epoch in 0..cfg.epochs {
        // Fisher-Yates shuffle from the seeded stream.
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for start in (0..n).step_by(cfg.batch_size) {
            let end = start + cfg.batch_size;
            if end > n {
                break; // drop the ragged tail batch
            }
            for (row, &src) in order[start..end].iter().enumerate() {
                batch_x.row_mut(row).assign(&train_x.row(src));
                batch_y.row_mut(row).assign(&train_y.row(src));
            }
            let (loss, grads) = mlp_backprop(&model, &batch_x.view(), &batch_y.view())?;
            if !loss.is_finite() {
                return Err(Error::TrainingDiverged { epoch, loss });
            }
            adam_update(&mut model, &mut adam, &grads, cfg);
            epoch_loss += loss;
            batches += 1;
        }
        let train_mse = epoch_loss / batches.max(1) as f64;
        let val_pred = model.forward_batch(val_x)?;
        let val_mse = evaluate_mse(&val_pred.view(), val_y)?;
        if !val_mse.is_finite() {
            return Err(Error::TrainingDiverged {
                epoch,
                loss: val_mse,
            });
        }
        curves.push(EpochStats {
            epoch,
            train_mse,
            val_mse,
        });
        let improved = best.as_ref().map_or(true, |(_, b, _)| val_mse < *b);
        if improved {
            best = Some((epoch, val_mse, model.clone()));
            stagnant = 0;
        } else {
            stagnant += 1;
            if let Some(patience) = cfg.early_stop_patience {
                if stagnant >= patience {
                    break;
                }
            }
        }
    }
    let (best_epoch, best_val_mse, best_model) = best.expect("at least one epoch ran");
    Ok(TrainedNet {
        model: best_model,
        curves,
        best_epoch,
        best_val_mse,
    })
}

/// Train the algebraic-state inference network `(x, u, p) -> z`.
pub fn train_inference_net(ds: &Dataset, cfg: &TrainConfig) -> Result<TrainedNet> {
    let tr = ds.split.train();
    let va = ds.split.val();
    train(
        &INFERENCE_SIZES,
        &ds.inference_inputs(tr.clone()).view(),
        &ds.z_targets(tr).view(),
        &ds.inference_inputs(va.clone()).view(),
        &ds.z_targets(va).view(),
        cfg,
    )
}

/// Train the state-dynamics compensation network `(x, z, u, p) -> x_e`.
pub fn train_compensation_net(ds: &Dataset, cfg: &TrainConfig) -> Result<TrainedNet> {
    if ds.mismatch.is_none() {
        return Err(Error::Empty(
            "compensation training needs mismatch labels".into(),
        ));
    }
    let tr = ds.split.train();
    let va = ds.split.val();
    train(
        &COMPENSATION_SIZES,
        &ds.dynamics_inputs(tr.clone()).view(),
        &ds.mismatch_targets(tr)?.view(),
        &ds.dynamics_inputs(va.clone()).view(),
        &ds.mismatch_targets(va)?.view(),
        cfg,
    )
}

/// Train a purely data-driven baseline `(x, z, u, p) -> (x_next, z_next)`.
pub fn train_blackbox_net(
    ds: &Dataset,
    variant: BlackboxVariant,
    cfg: &TrainConfig,
) -> Result<TrainedNet> {
    let tr = ds.split.train();
    let va = ds.split.val();
    train(
        &variant.sizes(),
        &ds.dynamics_inputs(tr.clone()).view(),
        &ds.blackbox_targets(tr).view(),
        &ds.dynamics_inputs(va.clone()).view(),
        &ds.blackbox_targets(va).view(),
        cfg,
    )
}
