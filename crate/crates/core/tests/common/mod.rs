#![allow(dead_code)]

use bel_core::codebook::{gen_johnson, gen_unary};
use bel_core::error_model::{model_from_code, ClassifierErrorModel};
use bel_core::toytrain::{
    architecture, forward_backward, make_dataset, Head, Mlp, Task, TaskKind, TrainConfig,
};
use bel_core::{CodeKind, CodeMatrix, ErrorRates};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Finite-difference step for loss gradients.
pub const STEP: f64 = 1e-4;
/// Smaller than `STEP` so probes rarely straddle a ReLU kink.
pub const MLP_STEP: f64 = 1e-5;

/// Central differences of `f` at `x` with step `h`.
pub fn central_diff(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            xp[i] = x[i] + h;
            let up = f(&xp);
            xp[i] = x[i] - h;
            let down = f(&xp);
            xp[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `|a - b| / (|a| + |b|)` over whole vectors; zero when both vanish.
pub fn rel_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &mut dyn Iterator<Item = f64>| v.map(|x| x * x).sum::<f64>().sqrt();
    let diff = norm(&mut a.iter().zip(b).map(|(x, y)| x - y));
    let scale = norm(&mut a.iter().copied()) + norm(&mut b.iter().copied());
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Johnson word of `m` bits for 1-based level `q`, built from the ring-counter rule.
pub fn johnson_word(m: usize, q: usize) -> Vec<u8> {
    // levels 1..=m fill ones in from the right end, levels m+1..=2m clear them from the right end
    (1..=m)
        .map(|k| {
            let on = if q <= m { k > m - q } else { k <= 2 * m - q };
            u8::from(on)
        })
        .collect()
}

fn first_last(bits: &[u8]) -> Option<(usize, usize)> {
    let first = bits.iter().position(|&b| b == 1)? + 1;
    let last = bits.iter().rposition(|&b| b == 1)? + 1;
    Some((first, last))
}

/// Exact expectations for a Johnson code over all flip patterns at one label.
pub struct JohnsonExact {
    /// `E|decoded - q|` with the all-zero word decoded as `2M`, clamped to `[1, N-1]`.
    pub err: f64,
    /// Same, but decoding the all-zero word as `Tl + Tf + Tc = M`.
    pub err_zero_terms: f64,
    /// `E|dTl|` and `E|dTf|` taking `Tl = Tf = 0` for the all-zero word.
    pub d_tl: f64,
    pub d_tf: f64,
}

pub fn exact_johnson(e: &[f64], n: usize, q: usize) -> JohnsonExact {
    let m = n / 2;
    assert_eq!(e.len(), m);
    let word = johnson_word(m, q);
    let terms = |bits: &[u8]| match first_last(bits) {
        Some((f, l)) => (-(l as i64), (m + 1 - f) as i64),
        None => (0, 0),
    };
    let (tl, tf) = terms(&word);
    let mut out = JohnsonExact {
        err: 0.0,
        err_zero_terms: 0.0,
        d_tl: 0.0,
        d_tf: 0.0,
    };
    let mut noisy = vec![0u8; m];
    for mask in 0u64..(1 << m) {
        let mut p = 1.0;
        for k in 0..m {
            let flip = mask >> k & 1 == 1;
            p *= if flip { e[k] } else { 1.0 - e[k] };
            noisy[k] = word[k] ^ u8::from(flip);
        }
        if p == 0.0 {
            continue;
        }
        let (ntl, ntf) = terms(&noisy);
        let decoded = match first_last(&noisy) {
            Some(_) => ntl + ntf + m as i64,
            None => 2 * m as i64,
        }
        .clamp(1, n as i64 - 1);
        let by_terms = (ntl + ntf + m as i64).clamp(1, n as i64 - 1);
        out.err += p * (decoded - q as i64).abs() as f64;
        out.err_zero_terms += p * (by_terms - q as i64).abs() as f64;
        out.d_tl += p * (ntl - tl).abs() as f64;
        out.d_tf += p * (ntf - tf).abs() as f64;
    }
    out
}

/// Exact `E|decoded - q|` for a unary code whose decoder counts ones.
pub fn exact_unary(e: &[f64], q: usize) -> f64 {
    // distribution of the number of ones, by dynamic programming
    let mut dist = vec![1.0];
    for (k, &ek) in e.iter().enumerate() {
        let target_one = k + 1 < q;
        let p_one = if target_one { 1.0 - ek } else { ek };
        let mut next = vec![0.0; dist.len() + 1];
        for (c, &p) in dist.iter().enumerate() {
            next[c] += p * (1.0 - p_one);
            next[c + 1] += p * p_one;
        }
        dist = next;
    }
    dist.iter()
        .enumerate()
        .map(|(ones, &p)| p * ((ones + 1) as f64 - q as f64).abs())
        .sum()
}

/// Gaussian models for unary and Johnson codes at convention size `n`
/// with `r` in `[0.05, 0.35]` and `sigma` in `[0.5, 3]`, redrawn until every
/// probability is valid for both codes.
pub fn random_models<R: Rng>(
    rng: &mut R,
    n: usize,
) -> (f64, f64, ClassifierErrorModel, ClassifierErrorModel) {
    let unary = gen_unary(n - 1).unwrap();
    let johnson = gen_johnson(n - 1).unwrap();
    loop {
        let r = rng.random_range(0.05..=0.35);
        let sigma = rng.random_range(0.5..=3.0);
        let mu = model_from_code(&unary, r, sigma).unwrap();
        let mj = model_from_code(&johnson, r, sigma).unwrap();
        if mu.tabulate().is_ok() && mj.tabulate().is_ok() {
            return (r, sigma, mu, mj);
        }
    }
}

/// Error rates of every classifier at `level`.
pub fn rates_at(m: &impl ErrorRates, level: usize) -> Vec<f64> {
    (0..m.classifiers())
        .map(|k| m.rate(k, level).unwrap())
        .collect()
}

pub fn random_code(rng: &mut ChaCha8Rng) -> CodeMatrix {
    let kind = CodeKind::ALL[rng.random_range(0..CodeKind::ALL.len())];
    kind.generate(rng.random_range(4..=24)).unwrap()
}

pub fn logits(rng: &mut ChaCha8Rng, bits: usize) -> Vec<f64> {
    (0..bits).map(|_| rng.random_range(-3.0..3.0)).collect()
}

pub fn small_config() -> TrainConfig {
    TrainConfig {
        task: Task {
            kind: TaskKind::Sinusoid,
            noise: 0.05,
            input_dim: 2,
            range: (-1.0, 3.0),
            outputs: 1,
        },
        hidden: vec![6, 5],
        theta: 4,
        ..TrainConfig::default()
    }
}

pub fn mlp_gradcheck(head: &Head, config: &TrainConfig, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (sizes, acts) = architecture(config, head);
    let mut net = Mlp::glorot(&sizes, &acts, &mut rng);
    for b in net.params_mut().iter_mut() {
        *b += rng.random_range(-0.1..0.1);
    }
    let (batch, _) = make_dataset(&config.task, 2, 1, seed).unwrap();
    let (_, analytic) = forward_backward(&net, head, &batch).unwrap();
    let numeric = central_diff(
        |p| {
            let mut probe = net.clone();
            probe.params_mut().copy_from_slice(p);
            forward_backward(&probe, head, &batch).unwrap().0
        },
        net.params(),
        MLP_STEP,
    );
    rel_error(&analytic, &numeric)
}
