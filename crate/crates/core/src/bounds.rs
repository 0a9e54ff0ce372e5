//! Closed-form expected absolute error for unary and Johnson codes.
//!
//! Everything here uses the analysis convention: a convention size `N`, labels
//! `n` in `1..=N-1`, and therefore code matrices with `L = N - 1` levels. The
//! unary code has `N - 2` classifiers; the Johnson code needs `N` even and has
//! `N / 2` classifiers.

use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::codebook::{gen_johnson, gen_unary, CodeKind};
use crate::error::{BelError, Result};
use crate::error_model::{model_from_code, ErrorRates, ErrorTable};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: CodeKind,
    /// Convention size `N`.
    pub n: usize,
    /// Expected error at labels `1..=N-1`.
    pub per_label: Vec<f64>,
    /// Mean of `per_label`.
    pub aggregate: f64,
}

impl BoundReport {
    fn new(kind: CodeKind, n: usize, per_label: Vec<f64>) -> Self {
        let aggregate = per_label.iter().sum::<f64>() / per_label.len() as f64;
        BoundReport {
            kind,
            n,
            per_label,
            aggregate,
        }
    }
}

fn check_shape(rates: &impl ErrorRates, n: usize, classifiers: usize) -> Result<()> {
    if rates.levels() != n - 1 || rates.classifiers() != classifiers {
        return Err(BelError::InvalidConvention(format!(
            "N = {n} needs {classifiers} classifiers over {} labels, model has {} over {}",
            n - 1,
            rates.classifiers(),
            rates.levels()
        )));
    }
    Ok(())
}

fn check_johnson_convention(n: usize) -> Result<()> {
    if n < 4 || n % 2 == 1 {
        return Err(BelError::InvalidConvention(format!(
            "Johnson analysis needs an even N >= 4, got {n}"
        )));
    }
    Ok(())
}

/// Unary bound: `sum_k e_k(n)` per label, averaged over labels.
pub fn bound_unary(rates: &impl ErrorRates, n: usize) -> Result<BoundReport> {
    if n < 3 {
        return Err(BelError::InvalidConvention(format!(
            "unary analysis needs N >= 3, got {n}"
        )));
    }
    check_shape(rates, n, n - 2)?;
    let table = rates.tabulate()?;
    let per_label = (1..n).map(|q| table.at_level(q).iter().sum()).collect();
    Ok(BoundReport::new(CodeKind::Unary, n, per_label))
}

/// `E|Tf' - Tf|` for label `n <= M` given the error rates `e` of the `M` classifiers.
pub(crate) fn tf_term(e: &[f64], n: usize) -> f64 {
    let m = e.len();
    let start = m - n; // 0-based index of the first set bit
    let mut first = 0.0;
    let mut correct_prefix = 1.0;
    for (k, &ek) in e.iter().enumerate().take(start) {
        first += (start - k) as f64 * ek * correct_prefix;
        correct_prefix *= 1.0 - ek;
    }
    let mut second = 0.0;
    let mut run = 1.0;
    for &ek in &e[start..] {
        run *= ek;
        second += run;
    }
    first + second
}

/// `E|Tl' - Tl|` for label `n <= M`.
pub(crate) fn tl_term(e: &[f64], n: usize) -> f64 {
    let m = e.len();
    let start = m - n;
    let mut tail = 0.0;
    let mut run = 1.0;
    for &ek in e[start..].iter().rev() {
        run *= ek;
        tail += run;
    }
    // `run` is now the product of all errors inside the window of ones.
    let mut lead = 0.0;
    let mut correct = 1.0;
    for &ek in e[..start].iter().rev() {
        correct *= 1.0 - ek;
        lead += correct;
    }
    tail + run * lead
}

fn johnson_rates(rates: &impl ErrorRates, label: usize, n: usize) -> Result<()> {
    check_johnson_convention(n)?;
    check_shape(rates, n, n / 2)?;
    if !(1..=n / 2).contains(&label) {
        return Err(BelError::InvalidLevel {
            level: label,
            levels: n / 2,
        });
    }
    Ok(())
}

/// Expected first-one displacement of the Johnson decoder at `label <= N/2`.
pub fn expected_tf(rates: &impl ErrorRates, label: usize, n: usize) -> Result<f64> {
    johnson_rates(rates, label, n)?;
    let e = level_rates(rates, label)?;
    Ok(tf_term(&e, label))
}

/// Expected last-one displacement of the Johnson decoder at `label <= N/2`.
pub fn expected_tl(rates: &impl ErrorRates, label: usize, n: usize) -> Result<f64> {
    johnson_rates(rates, label, n)?;
    let e = level_rates(rates, label)?;
    Ok(tl_term(&e, label))
}

fn level_rates(rates: &impl ErrorRates, label: usize) -> Result<Vec<f64>> {
    (0..rates.classifiers())
        .map(|k| rates.rate(k, label))
        .collect()
}

fn johnson_per_label(table: &ErrorTable, n: usize) -> Vec<f64> {
    let half = n / 2;
    (1..n)
        .map(|q| {
            let e = table.at_level(q);
            if q <= half {
                tf_term(e, q) + tl_term(e, q)
            } else {
                // mirror: label N - q with classifier order reversed
                let rev: Vec<f64> = e.iter().rev().copied().collect();
                tf_term(&rev, n - q) + tl_term(&rev, n - q)
            }
        })
        .collect()
}

/// Johnson expected error `E|dTf| + E|dTl|` per label, mirrored above `N/2`.
pub fn expected_err_johnson(rates: &impl ErrorRates, n: usize) -> Result<BoundReport> {
    check_johnson_convention(n)?;
    check_shape(rates, n, n / 2)?;
    let table = rates.tabulate()?;
    Ok(BoundReport::new(
        CodeKind::Johnson,
        n,
        johnson_per_label(&table, n),
    ))
}

/// Analytic expected error for the Gaussian model of `kind` at `(r, sigma)`.
pub fn gaussian_bound(kind: CodeKind, n: usize, r: f64, sigma: f64) -> Result<BoundReport> {
    match kind {
        CodeKind::Unary => {
            let code = gen_unary(n.saturating_sub(1))?;
            bound_unary(&model_from_code(&code, r, sigma)?, n)
        }
        CodeKind::Johnson => {
            check_johnson_convention(n)?;
            let code = gen_johnson(n - 1)?;
            expected_err_johnson(&model_from_code(&code, r, sigma)?, n)
        }
        other => Err(BelError::InvalidConvention(format!(
            "no closed form for {other} codes"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    InvalidProb,
    Degenerate,
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CellStatus::Ok => "ok",
            CellStatus::InvalidProb => "invalid_prob",
            CellStatus::Degenerate => "degenerate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepCell {
    pub r: f64,
    pub sigma: f64,
    /// `100 (unary - johnson) / johnson`; `None` unless `status` is `Ok`.
    pub pct_increase: Option<f64>,
    pub status: CellStatus,
}

/// Percentage increase of the unary bound over the Johnson bound on an `(r, sigma)` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGrid {
    pub n: usize,
    pub r_values: Vec<f64>,
    pub sigma_values: Vec<f64>,
    /// Row-major over `r_values` then `sigma_values`.
    pub cells: Vec<SweepCell>,
}

impl SweepGrid {
    pub fn cell(&self, r_index: usize, sigma_index: usize) -> &SweepCell {
        &self.cells[r_index * self.sigma_values.len() + sigma_index]
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "r,sigma,pct_increase,status")?;
        for c in &self.cells {
            let pct = c.pct_increase.map(|p| p.to_string()).unwrap_or_default();
            writeln!(w, "{},{},{},{}", c.r, c.sigma, pct, c.status)?;
        }
        Ok(())
    }
}

fn sweep_cell(n: usize, r: f64, sigma: f64) -> Result<SweepCell> {
    let unary = model_from_code(&gen_unary(n - 1)?, r, sigma)?;
    let johnson = model_from_code(&gen_johnson(n - 1)?, r, sigma)?;
    let tables = unary.tabulate().and_then(|u| Ok((u, johnson.tabulate()?)));
    let (ut, jt) = match tables {
        Ok(t) => t,
        Err(BelError::InvalidModel { .. }) => {
            return Ok(SweepCell {
                r,
                sigma,
                pct_increase: None,
                status: CellStatus::InvalidProb,
            })
        }
        Err(e) => return Err(e),
    };
    let u = bound_unary(&ut, n)?.aggregate;
    let j = expected_err_johnson(&jt, n)?.aggregate;
    let (pct_increase, status) = if j > 0.0 {
        (Some(100.0 * (u - j) / j), CellStatus::Ok)
    } else {
        (None, CellStatus::Degenerate)
    };
    Ok(SweepCell {
        r,
        sigma,
        pct_increase,
        status,
    })
}

/// Evaluates every grid cell (in parallel); output order follows the grid.
pub fn compare_sweep(n: usize, r_grid: &[f64], sigma_grid: &[f64]) -> Result<SweepGrid> {
    check_johnson_convention(n)?;
    if r_grid.is_empty() || sigma_grid.is_empty() {
        return Err(BelError::InvalidConfig(
            "sweep grids must be non-empty".into(),
        ));
    }
    let pairs: Vec<(f64, f64)> = r_grid
        .iter()
        .flat_map(|&r| sigma_grid.iter().map(move |&s| (r, s)))
        .collect();
    let cells = pairs
        .par_iter()
        .map(|&(r, s)| sweep_cell(n, r, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepGrid {
        n,
        r_values: r_grid.to_vec(),
        sigma_values: sigma_grid.to_vec(),
        cells,
    })
}

/// Default sweep grid: `r` in `0.25..=5` (20 points), `sigma` in `0.25..=4` (16 points).
pub fn default_grid() -> (Vec<f64>, Vec<f64>) {
    (linspace(0.25, 5.0, 20), linspace(0.25, 4.0, 16))
}

/// `count` evenly spaced values with inclusive endpoints.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count)
                .map(|i| {
                    if i + 1 == count {
                        stop
                    } else {
                        start + i as f64 * step
                    }
                })
                .collect()
        }
    }
}

/// Parses `start:stop:count` (inclusive endpoints); a bare number is a one-point grid.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || BelError::InvalidConfig(format!("grid must be start:stop:count, got {s:?}"));
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [v] => Ok(vec![v.parse().map_err(|_| bad())?]),
        [a, b, c] => {
            let start: f64 = a.parse().map_err(|_| bad())?;
            let stop: f64 = b.parse().map_err(|_| bad())?;
            let count: usize = c.parse().map_err(|_| bad())?;
            if count == 0 || !start.is_finite() || !stop.is_finite() {
                return Err(bad());
            }
            Ok(linspace(start, stop, count))
        }
        _ => Err(bad()),
    }
}
