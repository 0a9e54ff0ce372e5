//! Monte-Carlo simulation of independent classifier bit flips.
//!
//! Each sample draws a level uniformly, flips every bit of its codeword with
//! that classifier's error probability, decodes, and records the absolute
//! level error. Samples are split over `streams` independent ChaCha8 streams
//! derived from `(seed, stream index)`; the merged result depends on the stream
//! count but not on how many threads run them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{bound_unary, expected_err_johnson};
use crate::codebook::{CodeKind, CodeMatrix};
use crate::decoder::{decode_custom, decode_gen, decode_gen_ex, DecoderKind};
use crate::error::{BelError, Result};
use crate::error_model::{ErrorRates, ErrorTable};

pub const RNG_NAME: &str = "chacha8";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub kind: CodeKind,
    pub decoder: DecoderKind,
    pub levels: usize,
    pub samples: u64,
    pub seed: u64,
    pub streams: u32,
    pub mean_abs_error: f64,
    pub std_error: f64,
    pub rng: String,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(self, o: Moments) -> Moments {
        Moments {
            count: self.count + o.count,
            sum: self.sum + o.sum,
            sum_sq: self.sum_sq + o.sum_sq,
        }
    }

    fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }

    /// Sample standard deviation over `sqrt(count)`.
    fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

fn stream_rng(seed: u64, stream: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(stream));
    rng
}

fn run_stream(
    code: &CodeMatrix,
    decoder: DecoderKind,
    table: &ErrorTable,
    samples: u64,
    seed: u64,
    stream: u32,
) -> Result<Moments> {
    let mut rng = stream_rng(seed, stream);
    let mut moments = Moments::default();
    let mut bits = vec![0u8; code.bits()];
    let mut logits = vec![0.0f64; code.bits()];
    for _ in 0..samples {
        let level = rng.random_range(1..=code.levels());
        let rates = table.at_level(level);
        for ((b, &target), &e) in bits.iter_mut().zip(code.row(level)).zip(rates) {
            let flip = rng.random::<f64>() < e;
            *b = target ^ u8::from(flip);
        }
        let decoded = match decoder {
            DecoderKind::Custom => decode_custom(&bits, code)? as f64,
            DecoderKind::Gen | DecoderKind::GenEx => {
                for (z, &b) in logits.iter_mut().zip(&bits) {
                    *z = 2.0 * f64::from(b) - 1.0;
                }
                if decoder == DecoderKind::Gen {
                    decode_gen(&logits, code)? as f64
                } else {
                    decode_gen_ex(&logits, code)?
                }
            }
        };
        moments.push((decoded - level as f64).abs());
    }
    Ok(moments)
}

/// Simulates `samples` noisy predictions split over `streams` seeded streams.
pub fn simulate(
    code: &CodeMatrix,
    decoder: DecoderKind,
    rates: &impl ErrorRates,
    samples: u64,
    seed: u64,
    streams: u32,
) -> Result<SimulationReport> {
    decoder.check(code.kind())?;
    if rates.levels() != code.levels() || rates.classifiers() != code.bits() {
        return Err(BelError::InvalidConvention(format!(
            "model covers {} classifiers over {} levels, code has {} over {}",
            rates.classifiers(),
            rates.levels(),
            code.bits(),
            code.levels()
        )));
    }
    if streams == 0 {
        return Err(BelError::InvalidConfig("streams must be at least 1".into()));
    }
    let table = rates.tabulate()?;
    let per_stream = samples / u64::from(streams);
    let extra = samples % u64::from(streams);
    let parts = (0..streams)
        .into_par_iter()
        .map(|s| {
            let n = per_stream + u64::from(u64::from(s) < extra);
            run_stream(code, decoder, &table, n, seed, s)
        })
        .collect::<Result<Vec<_>>>()?;
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    Ok(SimulationReport {
        kind: code.kind(),
        decoder,
        levels: code.levels(),
        samples,
        seed,
        streams,
        mean_abs_error: total.mean(),
        std_error: total.std_error(),
        rng: RNG_NAME.to_string(),
    })
}

/// Outcome of checking an analytic expected error against simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundValidation {
    pub analytic: f64,
    pub mc_mean: f64,
    pub std_error: f64,
    /// `analytic + 3 SE - mc_mean`; non-negative on success.
    pub margin: f64,
    pub pass: bool,
}

impl BoundValidation {
    pub fn new(analytic: f64, mc_mean: f64, std_error: f64) -> Self {
        let margin = analytic + 3.0 * std_error - mc_mean;
        BoundValidation {
            analytic,
            mc_mean,
            std_error,
            margin,
            pass: margin >= 0.0,
        }
    }

    /// Same comparison against a different analytic value.
    pub fn against(&self, analytic: f64) -> Self {
        Self::new(analytic, self.mc_mean, self.std_error)
    }
}

/// Compares the closed-form expected error of a unary or Johnson code with a
/// custom-decoder simulation. The code uses the analysis convention `L = N - 1`.
pub fn validate_bound(
    code: &CodeMatrix,
    rates: &impl ErrorRates,
    samples: u64,
    seed: u64,
) -> Result<BoundValidation> {
    let n = code.levels() + 1;
    let analytic = match code.kind() {
        CodeKind::Unary => bound_unary(rates, n)?.aggregate,
        CodeKind::Johnson => expected_err_johnson(rates, n)?.aggregate,
        other => {
            return Err(BelError::UnsupportedDecoder {
                kind: other.to_string(),
                decoder: DecoderKind::Custom.to_string(),
            })
        }
    };
    let report = simulate(code, DecoderKind::Custom, rates, samples, seed, 1)?;
    Ok(BoundValidation::new(
        analytic,
        report.mean_abs_error,
        report.std_error,
    ))
}
