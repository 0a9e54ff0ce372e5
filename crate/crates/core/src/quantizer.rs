//! Uniform quantization of labels in `[a, b]` onto levels `1..=N`.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{BelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizationSpec {
    a: f64,
    b: f64,
    levels: usize,
}

impl QuantizationSpec {
    pub fn new(a: f64, b: f64, levels: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) || levels < 2 {
            return Err(BelError::InvalidQuantization { a, b, levels });
        }
        Ok(QuantizationSpec { a, b, levels })
    }

    pub fn lower(&self) -> f64 {
        self.a
    }

    pub fn upper(&self) -> f64 {
        self.b
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Label width of one quantization step.
    pub fn step(&self) -> f64 {
        (self.b - self.a) / (self.levels - 1) as f64
    }

    /// Continuous level coordinate in `[1, N]` before rounding.
    pub fn coordinate(&self, y: f64) -> Result<f64> {
        self.check_label(y)?;
        let x = (y - self.a) * (self.levels - 1) as f64 / (self.b - self.a) + 1.0;
        Ok(x.clamp(1.0, self.levels as f64))
    }

    /// Level of `y`, rounding half up.
    pub fn quantize(&self, y: f64) -> Result<usize> {
        let x = self.coordinate(y)?;
        Ok(((x + 0.5).floor() as usize).clamp(1, self.levels))
    }

    /// Label at the (possibly fractional) level coordinate `x`.
    pub fn dequantize(&self, x: f64) -> Result<f64> {
        let n = self.levels as f64;
        if !(1.0..=n).contains(&x) {
            return Err(BelError::OutOfRange {
                value: x,
                lo: 1.0,
                hi: n,
            });
        }
        Ok(self.a + (x - 1.0) * self.step())
    }

    fn check_label(&self, y: f64) -> Result<()> {
        if !(self.a..=self.b).contains(&y) {
            return Err(BelError::OutOfRange {
                value: y,
                lo: self.a,
                hi: self.b,
            });
        }
        Ok(())
    }
}

/// Parses the `a:b` range syntax used on the command line.
pub fn parse_range(s: &str) -> Result<(f64, f64)> {
    let bad = || BelError::InvalidConfig(format!("range must be a:b, got {s:?}"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo = f64::from_str(lo.trim()).map_err(|_| bad())?;
    let hi = f64::from_str(hi.trim()).map_err(|_| bad())?;
    Ok((lo, hi))
}
