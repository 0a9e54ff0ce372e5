//! Decoding classifier outputs back to levels.
//!
//! Custom decoders (`decode_unary`, `decode_johnson`) consume thresholded bits.
//! Correlation decoders consume raw logits: [`decode_gen`] picks the row of the
//! code matrix with the highest correlation, [`decode_gen_ex`] returns the
//! softmax-weighted mean level over those correlations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::codebook::{CodeKind, CodeMatrix};
use crate::error::{BelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecoderKind {
    #[serde(rename = "custom")]
    Custom,
    #[serde(rename = "gen")]
    Gen,
    #[serde(rename = "gen-ex")]
    GenEx,
}

impl DecoderKind {
    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Custom => "custom",
            DecoderKind::Gen => "gen",
            DecoderKind::GenEx => "gen-ex",
        }
    }

    pub fn supports(self, kind: CodeKind) -> bool {
        match self {
            DecoderKind::Custom => matches!(kind, CodeKind::Unary | CodeKind::Johnson),
            DecoderKind::Gen | DecoderKind::GenEx => true,
        }
    }

    pub(crate) fn check(self, kind: CodeKind) -> Result<()> {
        if self.supports(kind) {
            Ok(())
        } else {
            Err(BelError::UnsupportedDecoder {
                kind: kind.to_string(),
                decoder: self.to_string(),
            })
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecoderKind {
    type Err = BelError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "custom" => Ok(DecoderKind::Custom),
            "gen" => Ok(DecoderKind::Gen),
            "gen-ex" | "genex" | "gen_ex" => Ok(DecoderKind::GenEx),
            _ => Err(BelError::Unknown {
                what: "decoder",
                name: s.to_string(),
            }),
        }
    }
}

/// Bit `k` is 1 iff `z[k] > 0`.
pub fn threshold(z: &[f64]) -> Vec<u8> {
    z.iter().map(|&v| u8::from(v > 0.0)).collect()
}

/// Number of set bits plus one.
pub fn decode_unary(bits: &[u8]) -> usize {
    bits.iter().filter(|&&b| b == 1).count() + 1
}

/// The three terms of the custom Johnson decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JohnsonTerms {
    /// Minus the 1-based position of the last set bit.
    pub tl: i64,
    /// `M + 1` minus the 1-based position of the first set bit.
    pub tf: i64,
    /// `M`.
    pub tc: i64,
}

impl JohnsonTerms {
    /// `None` for the all-zero word.
    pub fn of(bits: &[u8]) -> Option<Self> {
        let first = bits.iter().position(|&b| b == 1)? as i64 + 1;
        let last = bits.iter().rposition(|&b| b == 1)? as i64 + 1;
        let m = bits.len() as i64;
        Some(JohnsonTerms {
            tl: -last,
            tf: m + 1 - first,
            tc: m,
        })
    }

    pub fn sum(&self) -> i64 {
        self.tl + self.tf + self.tc
    }
}

/// Custom Johnson decoder `Tl + Tf + Tc`, clamped to `[1, 2M]`.
///
/// The all-zero word decodes to `2M`, the level that owns it in [`crate::codebook::gen_johnson`].
pub fn decode_johnson(bits: &[u8]) -> usize {
    let top = 2 * bits.len().max(1);
    match JohnsonTerms::of(bits) {
        Some(t) => t.sum().clamp(1, top as i64) as usize,
        None => top,
    }
}

/// Argmax over levels of `z . C[q]`; ties go to the smallest level.
pub fn decode_gen(z: &[f64], code: &CodeMatrix) -> Result<usize> {
    let corr = code.correlations(z)?;
    let mut best = 0;
    for (i, &c) in corr.iter().enumerate() {
        if c > corr[best] {
            best = i;
        }
    }
    Ok(best + 1)
}

/// Softmax over level correlations, computed with max subtraction.
pub fn level_softmax(z: &[f64], code: &CodeMatrix) -> Result<Vec<f64>> {
    let corr = code.correlations(z)?;
    Ok(softmax(&corr))
}

pub(crate) fn softmax(u: &[f64]) -> Vec<f64> {
    let max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = u.iter().map(|&v| (v - max).exp()).collect();
    let total: f64 = p.iter().sum();
    for v in &mut p {
        *v /= total;
    }
    p
}

pub(crate) fn expected_level(p: &[f64]) -> f64 {
    let y: f64 = p.iter().enumerate().map(|(i, &w)| (i + 1) as f64 * w).sum();
    y.clamp(1.0, p.len() as f64)
}

/// Expected level `sum_q q * softmax(C z)_q`, a coordinate in `[1, L]`.
pub fn decode_gen_ex(z: &[f64], code: &CodeMatrix) -> Result<f64> {
    Ok(expected_level(&level_softmax(z, code)?))
}

/// Decodes logits with any decoder kind, returning a level coordinate.
pub fn decode(z: &[f64], code: &CodeMatrix, decoder: DecoderKind) -> Result<f64> {
    match decoder {
        DecoderKind::Gen => decode_gen(z, code).map(|q| q as f64),
        DecoderKind::GenEx => decode_gen_ex(z, code),
        DecoderKind::Custom => {
            code.check_len(z.len())?;
            decode_custom(&threshold(z), code).map(|q| q as f64)
        }
    }
}

/// Custom decoder for the code's kind, clamped to the code's level range.
pub fn decode_custom(bits: &[u8], code: &CodeMatrix) -> Result<usize> {
    DecoderKind::Custom.check(code.kind())?;
    let q = match code.kind() {
        CodeKind::Unary => decode_unary(bits),
        _ => decode_johnson(bits),
    };
    Ok(q.clamp(1, code.levels()))
}
