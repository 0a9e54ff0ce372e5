//! Desk-scale training of a small MLP with a BEL head against a direct
//! regression head on synthetic data.
//!
//! The BEL network is `input -> hidden (ReLU) -> theta (linear) -> P*M logits`.
//! The direct baseline is `input -> hidden (ReLU) -> P outputs` regressing the
//! target normalized to `[0, 1]`. Both are trained with plain mini-batch
//! gradient descent from a Glorot-uniform initialization. [`train`] feeds the
//! networks inputs rescaled from the unit box to `[-1, 1]`.

pub mod data;
pub mod mlp;

use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codebook::{CodeKind, CodeMatrix};
use crate::decoder::{decode, DecoderKind};
use crate::error::{BelError, Result};
use crate::losses::{bce_loss, ce_loss, regression_loss, LossKind, Norm};
use crate::quantizer::QuantizationSpec;

pub use data::{make_dataset, Dataset, Task, TaskKind};
pub use mlp::{Activation, Cache, Mlp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub task: Task,
    pub n_train: usize,
    pub n_test: usize,
    pub levels: usize,
    pub encoding: CodeKind,
    pub loss: LossKind,
    pub decoder: DecoderKind,
    pub theta: usize,
    pub hidden: Vec<usize>,
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
    pub seed: u64,
    /// Number of training runs; run `i` initializes from `seed + i`.
    pub runs: usize,
    /// Loss of the direct baseline on normalized targets.
    pub direct_loss: Norm,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            task: Task {
                kind: TaskKind::Sinusoid,
                noise: 0.02,
                input_dim: 2,
                range: (0.0, 1.0),
                outputs: 1,
            },
            n_train: 1000,
            n_test: 500,
            levels: 64,
            encoding: CodeKind::Unary,
            loss: LossKind::Bce,
            decoder: DecoderKind::GenEx,
            theta: 10,
            hidden: vec![32, 32],
            lr: 0.05,
            epochs: 200,
            batch: 16,
            seed: 0,
            runs: 5,
            direct_loss: Norm::L2,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(BelError::InvalidConfig(msg.to_string()));
        if self.theta == 0 {
            return bad("theta must be at least 1");
        }
        if self.levels < 2 {
            return bad("levels must be at least 2");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("learning rate must be positive");
        }
        if self.batch == 0 || self.runs == 0 {
            return bad("batch and runs must be at least 1");
        }
        if self.hidden.contains(&0) {
            return bad("hidden widths must be at least 1");
        }
        self.decoder.check(self.encoding)?;
        QuantizationSpec::new(self.task.range.0, self.task.range.1, self.levels)?;
        Ok(())
    }
}

/// Output head and target encoding of a network.
#[derive(Debug, Clone)]
pub enum Head {
    Bel {
        code: CodeMatrix,
        loss: LossKind,
        decoder: DecoderKind,
        quant: QuantizationSpec,
    },
    Direct {
        norm: Norm,
        quant: QuantizationSpec,
    },
}

impl Head {
    /// Network outputs needed per target dimension.
    pub fn width(&self) -> usize {
        match self {
            Head::Bel { code, .. } => code.bits(),
            Head::Direct { .. } => 1,
        }
    }

    /// Loss of one output slice against one label, and its gradient.
    fn loss(&self, out: &[f64], y: f64, grad: &mut [f64]) -> Result<f64> {
        match self {
            Head::Bel {
                code, loss, quant, ..
            } => {
                let r = match loss {
                    LossKind::Bce => bce_loss(out, code.row(quant.quantize(y)?))?,
                    LossKind::Ce => ce_loss(out, code, quant.quantize(y)?)?,
                    LossKind::L1 => regression_loss(out, code, quant.coordinate(y)?, Norm::L1)?,
                    LossKind::L2 => regression_loss(out, code, quant.coordinate(y)?, Norm::L2)?,
                };
                grad.copy_from_slice(&r.grad);
                Ok(r.value)
            }
            Head::Direct { norm, quant } => {
                let t = (y - quant.lower()) / (quant.upper() - quant.lower());
                let d = out[0] - t;
                let (v, g) = match norm {
                    Norm::L1 => (d.abs(), d.signum() * f64::from(u8::from(d != 0.0))),
                    Norm::L2 => (d * d, 2.0 * d),
                };
                grad[0] = g;
                Ok(v)
            }
        }
    }

    /// Label prediction from one output slice.
    fn predict(&self, out: &[f64]) -> Result<f64> {
        match self {
            Head::Bel {
                code,
                decoder,
                quant,
                ..
            } => quant.dequantize(decode(out, code, *decoder)?),
            Head::Direct { quant, .. } => {
                let u = out[0].clamp(0.0, 1.0);
                Ok(quant.lower() + u * (quant.upper() - quant.lower()))
            }
        }
    }
}

fn check_shapes(net: &Mlp, head: &Head, data: &Dataset) -> Result<()> {
    if net.input_dim() != data.input_dim {
        return Err(BelError::ShapeMismatch {
            expected: net.input_dim(),
            found: data.input_dim,
        });
    }
    if net.output_dim() != head.width() * data.outputs {
        return Err(BelError::ShapeMismatch {
            expected: net.output_dim(),
            found: head.width() * data.outputs,
        });
    }
    Ok(())
}

/// Mean loss over the samples `idx`; accumulates the mean gradient into `grad` if given.
fn batch_loss(
    net: &Mlp,
    head: &Head,
    data: &Dataset,
    idx: &[usize],
    mut grad: Option<&mut [f64]>,
) -> Result<f64> {
    let width = head.width();
    let scale = 1.0 / idx.len() as f64;
    let mut cache = Cache::default();
    let mut d_out = vec![0.0; net.output_dim()];
    let mut total = 0.0;
    for &i in idx {
        net.forward(data.input(i), &mut cache);
        let out = cache.output();
        for (p, &y) in data.target(i).iter().enumerate() {
            let slice = p * width..(p + 1) * width;
            total += head.loss(&out[slice.clone()], y, &mut d_out[slice])?;
        }
        if let Some(g) = grad.as_deref_mut() {
            d_out.iter_mut().for_each(|d| *d *= scale);
            net.backward(&cache, &d_out, g);
        }
    }
    Ok(total * scale)
}

/// Mean loss over `batch` and its gradient with respect to every parameter.
pub fn forward_backward(net: &Mlp, head: &Head, batch: &Dataset) -> Result<(f64, Vec<f64>)> {
    check_shapes(net, head, batch)?;
    if batch.is_empty() {
        return Err(BelError::InvalidConfig("empty batch".into()));
    }
    let idx: Vec<usize> = (0..batch.len()).collect();
    let mut grad = vec![0.0; net.num_params()];
    let loss = batch_loss(net, head, batch, &idx, Some(&mut grad))?;
    Ok((loss, grad))
}

/// Mean absolute error in label units over every sample and output dimension.
pub fn mean_abs_error(net: &Mlp, head: &Head, data: &Dataset) -> Result<f64> {
    check_shapes(net, head, data)?;
    let width = head.width();
    let mut cache = Cache::default();
    let mut total = 0.0;
    for i in 0..data.len() {
        net.forward(data.input(i), &mut cache);
        for (p, &y) in data.target(i).iter().enumerate() {
            let y_hat = head.predict(&cache.output()[p * width..(p + 1) * width])?;
            total += (y_hat - y).abs();
        }
    }
    Ok(total / data.targets.len() as f64)
}

/// Layer widths and activations for a head on top of the shared trunk.
pub fn architecture(config: &TrainConfig, head: &Head) -> (Vec<usize>, Vec<Activation>) {
    let mut sizes = vec![config.task.input_dim];
    sizes.extend(&config.hidden);
    let mut acts = vec![Activation::Relu; config.hidden.len()];
    if matches!(head, Head::Bel { .. }) {
        sizes.push(config.theta);
        acts.push(Activation::Linear);
    }
    sizes.push(head.width() * config.task.outputs);
    acts.push(Activation::Linear);
    (sizes, acts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub train_mae: f64,
    pub test_mae: f64,
    /// Mean mini-batch training loss of each epoch.
    pub trace: Vec<f64>,
    /// Set when training diverged; both MAE fields are then zero.
    pub failure: Option<String>,
}

impl RunResult {
    pub fn ok(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub bel: RunResult,
    pub direct: RunResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub config: TrainConfig,
    pub runs: Vec<RunReport>,
    /// Mean test MAE over successful runs.
    pub bel_mean_test_mae: Option<f64>,
    pub direct_mean_test_mae: Option<f64>,
}

fn mean_of<'a>(results: impl Iterator<Item = &'a RunResult>) -> Option<f64> {
    let ok: Vec<f64> = results.filter(|r| r.ok()).map(|r| r.test_mae).collect();
    (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64)
}

/// Trains one network; divergence ends the run early with a failure message.
pub fn train_head(
    config: &TrainConfig,
    head: &Head,
    train: &Dataset,
    test: &Dataset,
    seed: u64,
) -> Result<RunResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (sizes, acts) = architecture(config, head);
    let mut net = Mlp::glorot(&sizes, &acts, &mut rng);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut grad = vec![0.0; net.num_params()];
    let mut trace = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut sum = 0.0;
        for chunk in order.chunks(config.batch) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            sum += chunk.len() as f64 * batch_loss(&net, head, train, chunk, Some(&mut grad))?;
            for (w, g) in net.params_mut().iter_mut().zip(&grad) {
                *w -= config.lr * g;
            }
        }
        let loss = sum / train.len() as f64;
        if !loss.is_finite() || net.params().iter().any(|w| !w.is_finite()) {
            return Ok(RunResult {
                train_mae: 0.0,
                test_mae: 0.0,
                trace,
                failure: Some(format!("non-finite loss at epoch {epoch}")),
            });
        }
        trace.push(loss);
    }
    Ok(RunResult {
        train_mae: mean_abs_error(&net, head, train)?,
        test_mae: mean_abs_error(&net, head, test)?,
        trace,
        failure: None,
    })
}

/// Maps inputs from `[0, 1]` to `[-1, 1]`.
pub fn center_inputs(data: &mut Dataset) {
    for v in &mut data.inputs {
        *v = 2.0 * *v - 1.0;
    }
}

/// Trains the BEL and direct heads for every run, in parallel over runs.
pub fn train(config: &TrainConfig) -> Result<TrainReport> {
    config.validate()?;
    let quant = QuantizationSpec::new(config.task.range.0, config.task.range.1, config.levels)?;
    let bel = Head::Bel {
        code: config.encoding.generate(config.levels)?,
        loss: config.loss,
        decoder: config.decoder,
        quant,
    };
    let direct = Head::Direct {
        norm: config.direct_loss,
        quant,
    };
    let (mut train_set, mut test_set) =
        make_dataset(&config.task, config.n_train, config.n_test, config.seed)?;
    center_inputs(&mut train_set);
    center_inputs(&mut test_set);
    let runs = (0..config.runs as u64)
        .into_par_iter()
        .map(|i| {
            let seed = config.seed.wrapping_add(i);
            Ok(RunReport {
                seed,
                bel: train_head(config, &bel, &train_set, &test_set, seed)?,
                direct: train_head(config, &direct, &train_set, &test_set, seed)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrainReport {
        config: config.clone(),
        bel_mean_test_mae: mean_of(runs.iter().map(|r| &r.bel)),
        direct_mean_test_mae: mean_of(runs.iter().map(|r| &r.direct)),
        runs,
    })
}

/// Writes a loss trace as `epoch,loss` rows with 1-based epochs.
pub fn write_trace_csv<W: Write>(trace: &[f64], mut w: W) -> io::Result<()> {
    writeln!(w, "epoch,loss")?;
    for (i, loss) in trace.iter().enumerate() {
        writeln!(w, "{},{loss}", i + 1)?;
    }
    Ok(())
}
