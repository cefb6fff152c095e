use ndarray::{s, Array2, ArrayView2, Axis};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::adam::{adam_step, AdamConfig, AdamState};
use super::mlp::{Gradients, Mlp};
use crate::embedding::DelayState;
use crate::error::{check_dim, Error, Result};
use crate::metrics::{mmd_value_and_grad_samples, mse, KernelSpec};
use crate::partition::MeasurePair;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// Mean squared reconstruction error over paired samples.
    Pointwise,
    /// Mean MMD² between each full-state measure and the pushforward of its
    /// delay-space partner.
    Measure,
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LossKind::Pointwise => "pointwise",
            LossKind::Measure => "measure",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub n_steps: usize,
    pub lr: f64,
    pub seed: u64,
    pub loss: LossKind,
    pub kernel: KernelSpec,
    /// Samples drawn per measure each step; `None` uses every sample.
    pub minibatch_per_measure: Option<usize>,
    /// Off allows per-cell work to run on the rayon pool.
    pub deterministic: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            n_steps: 1000,
            lr: 1e-3,
            seed: 0,
            loss: LossKind::Pointwise,
            kernel: KernelSpec::Energy,
            minibatch_per_measure: None,
            deterministic: true,
        }
    }
}

pub enum TrainingData<'a> {
    Pointwise {
        inputs: ArrayView2<'a, f64>,
        targets: ArrayView2<'a, f64>,
    },
    Measure(&'a [MeasurePair]),
}

/// Loss and exact gradient of the mean squared row error.
pub fn grad_pointwise(
    params: &Mlp,
    inputs: ArrayView2<'_, f64>,
    targets: ArrayView2<'_, f64>,
) -> Result<(f64, Gradients)> {
    check_dim("pointwise batch size", inputs.nrows(), targets.nrows())?;
    check_dim("target width", params.output_dim(), targets.ncols())?;
    if inputs.nrows() == 0 {
        return Err(Error::invalid("empty training batch"));
    }
    let cache = params.forward_cached(inputs)?;
    let mut residual = cache.output() - &targets;
    let loss = residual.iter().map(|r| r * r).sum::<f64>() / inputs.nrows() as f64;
    residual *= 2.0 / inputs.nrows() as f64;
    Ok((loss, params.backward(&cache, residual)))
}

/// Loss and gradient of the measure-matching objective.
pub fn grad_measure<R: Rng>(
    params: &Mlp,
    pairs: &[MeasurePair],
    kernel: KernelSpec,
    minibatch: Option<usize>,
    rng: &mut R,
) -> Result<(f64, Gradients)> {
    grad_measure_with(params, pairs, kernel, minibatch, rng, false)
}

/// [`grad_measure`] with optional data-parallel evaluation of the per-cell
/// discrepancies. Results are collected in cell order either way.
pub fn grad_measure_with<R: Rng>(
    params: &Mlp,
    pairs: &[MeasurePair],
    kernel: KernelSpec,
    minibatch: Option<usize>,
    rng: &mut R,
    parallel: bool,
) -> Result<(f64, Gradients)> {
    if pairs.is_empty() {
        return Err(Error::invalid("measure loss needs at least one pair"));
    }
    if minibatch == Some(0) {
        return Err(Error::invalid("minibatch size must be positive"));
    }
    // choose the atoms used this step
    let mut chosen: Vec<Vec<usize>> = Vec::with_capacity(pairs.len());
    for pair in pairs {
        if pair.full.len() != pair.delayed.len() {
            return Err(Error::invalid(format!("cell {} has unequal sides", pair.cell_id)));
        }
        check_dim("measure full-state dim", params.output_dim(), pair.full.dim())?;
        check_dim("measure delay dim", params.input_dim(), pair.delayed.dim())?;
        let n = pair.full.len();
        let idx = match minibatch {
            Some(b) if b < n => {
                let mut v = index::sample(rng, n, b).into_vec();
                v.sort_unstable();
                v
            }
            _ => (0..n).collect(),
        };
        chosen.push(idx);
    }

    let mut offsets = Vec::with_capacity(pairs.len() + 1);
    offsets.push(0);
    for idx in &chosen {
        offsets.push(offsets.last().unwrap() + idx.len());
    }
    let total = *offsets.last().unwrap();
    let mut inputs = Array2::zeros((total, params.input_dim()));
    for (c, (pair, idx)) in pairs.iter().zip(&chosen).enumerate() {
        let block = pair.delayed.samples().select(Axis(0), idx);
        inputs.slice_mut(s![offsets[c]..offsets[c + 1], ..]).assign(&block);
    }
    let cache = params.forward_cached(inputs.view())?;
    let output = cache.output();

    let per_cell = |c: usize| -> Result<(f64, Array2<f64>)> {
        let target = pairs[c].full.samples().select(Axis(0), &chosen[c]);
        let pred = output.slice(s![offsets[c]..offsets[c + 1], ..]);
        mmd_value_and_grad_samples(kernel, target.view(), pred)
    };
    let results: Vec<Result<(f64, Array2<f64>)>> = if parallel {
        (0..pairs.len()).into_par_iter().map(per_cell).collect()
    } else {
        (0..pairs.len()).map(per_cell).collect()
    };

    let k = pairs.len() as f64;
    let mut loss = 0.0;
    let mut d_output = Array2::zeros(output.dim());
    for (c, r) in results.into_iter().enumerate() {
        let (l, g) = r?;
        loss += l;
        d_output
            .slice_mut(s![offsets[c]..offsets[c + 1], ..])
            .assign(&(g / k));
    }
    Ok((loss / k, params.backward(&cache, d_output)))
}

/// Runs `cfg.n_steps` Adam steps and returns the trained network with the
/// loss recorded before each update.
pub fn train(params: &Mlp, data: TrainingData<'_>, cfg: &TrainConfig) -> Result<(Mlp, Vec<f64>)> {
    if !(cfg.lr > 0.0 && cfg.lr.is_finite()) {
        return Err(Error::invalid(format!("learning rate must be positive, got {}", cfg.lr)));
    }
    params.validate()?;
    match (&data, cfg.loss) {
        (TrainingData::Pointwise { .. }, LossKind::Pointwise) | (TrainingData::Measure(_), LossKind::Measure) => {}
        _ => return Err(Error::invalid(format!("training data does not match loss kind {}", cfg.loss))),
    }
    let mut net = params.clone();
    let mut adam = AdamState::new(
        &net,
        AdamConfig {
            lr: cfg.lr,
            ..AdamConfig::default()
        },
    );
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut history = Vec::with_capacity(cfg.n_steps);
    for step in 0..cfg.n_steps {
        let (loss, grads) = match &data {
            TrainingData::Pointwise { inputs, targets } => grad_pointwise(&net, inputs.view(), targets.view())?,
            TrainingData::Measure(pairs) => grad_measure_with(
                &net,
                pairs,
                cfg.kernel,
                cfg.minibatch_per_measure,
                &mut rng,
                !cfg.deterministic,
            )?,
        };
        if !loss.is_finite() {
            return Err(Error::NonFinite {
                context: format!("loss at step {step}"),
            });
        }
        history.push(loss);
        adam_step(&mut net, &grads, &mut adam)?;
    }
    Ok((net, history))
}

/// Test MSE of the network applied to clean delay coordinates.
pub fn evaluate_mse(params: &Mlp, clean_delay: &DelayState, clean_full: ArrayView2<'_, f64>) -> Result<f64> {
    check_dim("evaluation rows", clean_delay.len(), clean_full.nrows())?;
    let pred = params.forward(clean_delay.data.view())?;
    mse(pred.view(), clean_full)
}
