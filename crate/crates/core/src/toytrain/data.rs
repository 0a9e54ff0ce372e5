//! Synthetic scalar regression tasks.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{BelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    /// `y` equals the first input coordinate, scaled to the label range.
    Identity,
    /// Mixture of sinusoids.
    Sinusoid,
    /// Triangle wave plus a ramp.
    PiecewiseLinear,
    /// Staircase with a gentle slope.
    StepHeavy,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Identity => "identity",
            TaskKind::Sinusoid => "sinusoid",
            TaskKind::PiecewiseLinear => "piecewise-linear",
            TaskKind::StepHeavy => "step-heavy",
        }
    }

    /// Normalized target in `[0, 1]` for an input in the unit box.
    fn shape(self, x: &[f64]) -> f64 {
        use std::f64::consts::PI;
        let x0 = x[0];
        let x1 = x.get(1).copied().unwrap_or(0.5);
        match self {
            TaskKind::Identity => x0,
            TaskKind::Sinusoid => {
                0.5 + 0.4 * (2.0 * PI * x0).sin()
                    + 0.12 * (6.0 * PI * x0 + 1.0).sin()
                    + 0.05 * (2.0 * PI * x1).cos()
            }
            TaskKind::PiecewiseLinear => {
                let tri = (2.0 * (2.0 * x0).fract() - 1.0).abs();
                0.6 * tri + 0.3 * x0 + 0.1 * x1
            }
            TaskKind::StepHeavy => 0.8 * (4.0 * x0).floor().min(3.0) / 3.0 + 0.1 * x0 + 0.1 * x1,
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = BelError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "identity" => Ok(TaskKind::Identity),
            "sinusoid" => Ok(TaskKind::Sinusoid),
            "piecewise-linear" | "piecewise" => Ok(TaskKind::PiecewiseLinear),
            "step-heavy" | "step" => Ok(TaskKind::StepHeavy),
            _ => Err(BelError::Unknown {
                what: "task",
                name: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub kind: TaskKind,
    /// Noise standard deviation as a fraction of the label range.
    pub noise: f64,
    pub input_dim: usize,
    /// Label range `[a, b]`.
    pub range: (f64, f64),
    /// Target dimensions per sample.
    pub outputs: usize,
}

/// Row-major inputs and targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub input_dim: usize,
    pub outputs: usize,
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.targets.len() / self.outputs.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.input_dim..(i + 1) * self.input_dim]
    }

    pub fn target(&self, i: usize) -> &[f64] {
        &self.targets[i * self.outputs..(i + 1) * self.outputs]
    }

    /// Subset by sample indices.
    pub fn select(&self, idx: &[usize]) -> Dataset {
        Dataset {
            input_dim: self.input_dim,
            outputs: self.outputs,
            inputs: idx
                .iter()
                .flat_map(|&i| self.input(i).iter().copied())
                .collect(),
            targets: idx
                .iter()
                .flat_map(|&i| self.target(i).iter().copied())
                .collect(),
        }
    }
}

fn sample(task: &Task, n: usize, rng: &mut ChaCha8Rng) -> Dataset {
    let (a, b) = task.range;
    let mut inputs = Vec::with_capacity(n * task.input_dim);
    let mut targets = Vec::with_capacity(n * task.outputs);
    let mut x = vec![0.0; task.input_dim];
    for _ in 0..n {
        for v in x.iter_mut() {
            *v = rng.random::<f64>();
        }
        inputs.extend_from_slice(&x);
        for p in 0..task.outputs {
            // each output dimension reads the input rotated by p
            let rotated: Vec<f64> = (0..task.input_dim)
                .map(|i| x[(i + p) % task.input_dim])
                .collect();
            let mut y = a + (b - a) * task.kind.shape(&rotated);
            if task.noise > 0.0 {
                let g: f64 = rng.sample(StandardNormal);
                y += task.noise * (b - a) * g;
            }
            targets.push(y.clamp(a, b));
        }
    }
    Dataset {
        input_dim: task.input_dim,
        outputs: task.outputs,
        inputs,
        targets,
    }
}

/// Train and test sets drawn from the same task, deterministic per seed.
pub fn make_dataset(
    task: &Task,
    n_train: usize,
    n_test: usize,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if n_train == 0 || n_test == 0 {
        return Err(BelError::InvalidConfig(
            "dataset sizes must be at least 1".into(),
        ));
    }
    if task.input_dim == 0 || task.outputs == 0 {
        return Err(BelError::InvalidConfig(
            "input and output dims must be at least 1".into(),
        ));
    }
    let (a, b) = task.range;
    if !(a < b && task.noise >= 0.0) {
        return Err(BelError::InvalidConfig(format!(
            "bad task range [{a}, {b}] or noise {}",
            task.noise
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let train = sample(task, n_train, &mut rng);
    let test = sample(task, n_test, &mut rng);
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantizer::QuantizationSpec;

    fn task(kind: TaskKind, noise: f64) -> Task {
        Task {
            kind,
            noise,
            input_dim: 1,
            range: (0.0, 1.0),
            outputs: 1,
        }
    }

    #[test]
    fn identity_without_noise() {
        let (train, _) = make_dataset(&task(TaskKind::Identity, 0.0), 50, 5, 3).unwrap();
        for i in 0..train.len() {
            assert_eq!(train.target(i)[0], train.input(i)[0]);
        }
    }

    #[test]
    fn deterministic() {
        let t = task(TaskKind::Sinusoid, 0.05);
        assert_eq!(
            make_dataset(&t, 30, 10, 8).unwrap(),
            make_dataset(&t, 30, 10, 8).unwrap()
        );
        assert_ne!(
            make_dataset(&t, 30, 10, 8).unwrap(),
            make_dataset(&t, 30, 10, 9).unwrap()
        );
    }

    #[test]
    fn sinusoid_covers_levels() {
        let (train, _) = make_dataset(&task(TaskKind::Sinusoid, 0.02), 1000, 1, 42).unwrap();
        let q = QuantizationSpec::new(0.0, 1.0, 64).unwrap();
        let mut seen = [false; 64];
        for &y in &train.targets {
            seen[q.quantize(y).unwrap() - 1] = true;
        }
        let covered = seen.iter().filter(|&&s| s).count();
        assert!(covered as f64 >= 0.9 * 64.0, "covered {covered}");
    }

    #[test]
    fn targets_stay_in_range() {
        for kind in [
            TaskKind::Sinusoid,
            TaskKind::PiecewiseLinear,
            TaskKind::StepHeavy,
        ] {
            let t = Task {
                kind,
                noise: 0.2,
                input_dim: 3,
                range: (-2.0, 5.0),
                outputs: 2,
            };
            let (train, _) = make_dataset(&t, 200, 1, 1).unwrap();
            assert_eq!(train.targets.len(), 400);
            assert!(train.targets.iter().all(|y| (-2.0..=5.0).contains(y)));
        }
    }

    #[test]
    fn bad_inputs() {
        assert!(make_dataset(&task(TaskKind::Sinusoid, 0.0), 0, 1, 0).is_err());
        assert!("spiral".parse::<TaskKind>().is_err());
    }
}
