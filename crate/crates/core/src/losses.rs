//! Training losses over classifier logits, with gradients w.r.t. the logits.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::codebook::CodeMatrix;
use crate::decoder::{expected_level, softmax};
use crate::error::{BelError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LossResult {
    pub value: f64,
    /// d value / d z
    pub grad: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
}

impl FromStr for Norm {
    type Err = BelError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            _ => Err(BelError::Unknown {
                what: "norm",
                name: s.to_string(),
            }),
        }
    }
}

/// Loss choices for the BEL head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Bce,
    Ce,
    L1,
    L2,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Bce => "bce",
            LossKind::Ce => "ce",
            LossKind::L1 => "l1",
            LossKind::L2 => "l2",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = BelError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bce" => Ok(LossKind::Bce),
            "ce" => Ok(LossKind::Ce),
            "l1" => Ok(LossKind::L1),
            "l2" => Ok(LossKind::L2),
            _ => Err(BelError::Unknown {
                what: "loss",
                name: s.to_string(),
            }),
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn logsumexp(u: &[f64]) -> f64 {
    let max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + u.iter().map(|&v| (v - max).exp()).sum::<f64>().ln()
}

/// Mean binary cross-entropy between `sigmoid(z)` and the target code.
pub fn bce_loss(z: &[f64], target: &[u8]) -> Result<LossResult> {
    if z.len() != target.len() {
        return Err(BelError::ShapeMismatch {
            expected: target.len(),
            found: z.len(),
        });
    }
    let m = z.len() as f64;
    let mut value = 0.0;
    let mut grad = Vec::with_capacity(z.len());
    for (&x, &t) in z.iter().zip(target) {
        let t = f64::from(t);
        // -[t log s(x) + (1 - t) log(1 - s(x))] = max(x, 0) - t x + ln(1 + e^-|x|)
        value += x.max(0.0) - t * x + (-x.abs()).exp().ln_1p();
        grad.push((sigmoid(x) - t) / m);
    }
    Ok(LossResult {
        value: value / m,
        grad,
    })
}

/// Cross-entropy of `softmax(C z)` against the 1-based target level.
pub fn ce_loss(z: &[f64], code: &CodeMatrix, target_level: usize) -> Result<LossResult> {
    let levels = code.levels();
    if !(1..=levels).contains(&target_level) {
        return Err(BelError::InvalidLevel {
            level: target_level,
            levels,
        });
    }
    let u = code.correlations(z)?;
    let value = (logsumexp(&u) - u[target_level - 1]).max(0.0);
    let mut p = softmax(&u);
    p[target_level - 1] -= 1.0;
    Ok(LossResult {
        value,
        grad: code.transpose_mul(&p),
    })
}

/// L1 or L2 distance between the expectation decoder's output and a level coordinate.
pub fn regression_loss(
    z: &[f64],
    code: &CodeMatrix,
    target: f64,
    norm: Norm,
) -> Result<LossResult> {
    let levels = code.levels();
    if !(1.0..=levels as f64).contains(&target) {
        return Err(BelError::InvalidTarget { target, levels });
    }
    let p = softmax(&code.correlations(z)?);
    let y = expected_level(&p);
    let diff = y - target;
    let (value, dy) = match norm {
        Norm::L1 => (diff.abs(), diff.signum() * f64::from(u8::from(diff != 0.0))),
        Norm::L2 => (diff * diff, 2.0 * diff),
    };
    // dy/du_q = p_q (q - y); dy/dz = C^T (dy/du)
    let dy_du: Vec<f64> = p
        .iter()
        .enumerate()
        .map(|(i, &pq)| dy * pq * ((i + 1) as f64 - y))
        .collect();
    Ok(LossResult {
        value,
        grad: code.transpose_mul(&dy_du),
    })
}
