//! Per-classifier misclassification probability.
//!
//! A classifier is most likely to be wrong near its bit transitions. The
//! Gaussian model puts one `r`-scaled normal density of width `sigma` on every
//! transition midpoint `q + 0.5` of the classifier's column in a code matrix.

use crate::codebook::CodeMatrix;
use crate::error::{BelError, Result};

/// Error probabilities `e_k(n)` for classifiers `k` (0-based) at levels `n` (1-based).
pub trait ErrorRates {
    fn levels(&self) -> usize;
    fn classifiers(&self) -> usize;
    fn rate(&self, classifier: usize, level: usize) -> Result<f64>;

    /// Evaluates every rate once; fails on the first invalid probability.
    fn tabulate(&self) -> Result<ErrorTable> {
        let levels = self.levels();
        let classifiers = self.classifiers();
        let mut rates = Vec::with_capacity(levels * classifiers);
        for n in 1..=levels {
            for k in 0..classifiers {
                rates.push(self.rate(k, n)?);
            }
        }
        Ok(ErrorTable {
            levels,
            classifiers,
            rates,
        })
    }
}

/// Explicit table of error probabilities, stored level-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    levels: usize,
    classifiers: usize,
    rates: Vec<f64>,
}

impl ErrorTable {
    /// `rates[k][n - 1]` is the error probability of classifier `k` at level `n`.
    pub fn from_rows(rates: &[Vec<f64>]) -> Result<Self> {
        let classifiers = rates.len();
        let levels = rates.first().map_or(0, Vec::len);
        let mut flat = vec![0.0; levels * classifiers];
        for (k, row) in rates.iter().enumerate() {
            if row.len() != levels {
                return Err(BelError::ShapeMismatch {
                    expected: levels,
                    found: row.len(),
                });
            }
            for (i, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    return Err(BelError::InvalidModel {
                        classifier: k,
                        y: (i + 1) as f64,
                        prob: p,
                    });
                }
                flat[i * classifiers + k] = p;
            }
        }
        Ok(ErrorTable {
            levels,
            classifiers,
            rates: flat,
        })
    }

    /// Error probabilities of all classifiers at `level`.
    pub fn at_level(&self, level: usize) -> &[f64] {
        let start = (level - 1) * self.classifiers;
        &self.rates[start..start + self.classifiers]
    }

    pub fn max_rate(&self) -> f64 {
        self.rates.iter().copied().fold(0.0, f64::max)
    }
}

impl ErrorRates for ErrorTable {
    fn levels(&self) -> usize {
        self.levels
    }

    fn classifiers(&self) -> usize {
        self.classifiers
    }

    fn rate(&self, classifier: usize, level: usize) -> Result<f64> {
        if classifier >= self.classifiers || !(1..=self.levels).contains(&level) {
            return Err(BelError::InvalidLevel {
                level,
                levels: self.levels,
            });
        }
        Ok(self.at_level(level)[classifier])
    }

    fn tabulate(&self) -> Result<ErrorTable> {
        Ok(self.clone())
    }
}

/// Gaussian mixture error model with shared `r` and `sigma`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierErrorModel {
    centers: Vec<Vec<f64>>,
    r: f64,
    sigma: f64,
    levels: usize,
}

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

impl ClassifierErrorModel {
    pub fn new(centers: Vec<Vec<f64>>, r: f64, sigma: f64, levels: usize) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(BelError::InvalidSigma(sigma));
        }
        if !(r >= 0.0 && r.is_finite()) {
            return Err(BelError::InvalidScale(r));
        }
        Ok(ClassifierErrorModel {
            centers,
            r,
            sigma,
            levels,
        })
    }

    /// Transition midpoints of each classifier's column in `code`.
    pub fn from_code(code: &CodeMatrix, r: f64, sigma: f64) -> Result<Self> {
        let mut centers = vec![Vec::new(); code.bits()];
        let rows: Vec<&[u8]> = code.rows().collect();
        for (q, pair) in rows.windows(2).enumerate() {
            for (k, c) in centers.iter_mut().enumerate() {
                if pair[0][k] != pair[1][k] {
                    c.push(q as f64 + 1.5);
                }
            }
        }
        Self::new(centers, r, sigma, code.levels())
    }

    pub fn centers(&self, classifier: usize) -> &[f64] {
        &self.centers[classifier]
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Mixture value at any real coordinate `y`, without the probability check.
    pub fn density(&self, classifier: usize, y: f64) -> f64 {
        self.centers[classifier]
            .iter()
            .map(|&mu| {
                let t = (y - mu) / self.sigma;
                self.r * INV_SQRT_2PI * (-0.5 * t * t).exp() / self.sigma
            })
            .sum()
    }

    /// Error probability of `classifier` at coordinate `y`; fails if it exceeds one.
    pub fn error_prob(&self, classifier: usize, y: f64) -> Result<f64> {
        let p = self.density(classifier, y);
        if p > 1.0 {
            return Err(BelError::InvalidModel {
                classifier,
                y,
                prob: p,
            });
        }
        Ok(p)
    }
}

/// Builds the Gaussian model whose centers are the transitions of `code`.
pub fn model_from_code(code: &CodeMatrix, r: f64, sigma: f64) -> Result<ClassifierErrorModel> {
    ClassifierErrorModel::from_code(code, r, sigma)
}

impl ErrorRates for ClassifierErrorModel {
    fn levels(&self) -> usize {
        self.levels
    }

    fn classifiers(&self) -> usize {
        self.centers.len()
    }

    fn rate(&self, classifier: usize, level: usize) -> Result<f64> {
        self.error_prob(classifier, level as f64)
    }
}
