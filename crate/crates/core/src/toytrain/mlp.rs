//! Dense feed-forward network with all parameters in one flat vector.

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Linear,
}

/// Layer `l` maps `sizes[l]` inputs to `sizes[l + 1]` outputs. Its weights are
/// stored row-major (`out x in`) followed by its biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    acts: Vec<Activation>,
    params: Vec<f64>,
    offsets: Vec<usize>,
}

/// Per-layer activations from a forward pass; `0` is the input.
#[derive(Debug, Clone, Default)]
pub struct Cache {
    acts: Vec<Vec<f64>>,
}

impl Cache {
    pub fn output(&self) -> &[f64] {
        self.acts.last().map_or(&[], Vec::as_slice)
    }
}

impl Mlp {
    pub fn zeros(sizes: &[usize], acts: &[Activation]) -> Self {
        assert!(sizes.len() >= 2, "need at least one layer");
        assert_eq!(acts.len(), sizes.len() - 1, "one activation per layer");
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut total = 0;
        for w in sizes.windows(2) {
            offsets.push(total);
            total += w[0] * w[1] + w[1];
        }
        offsets.push(total);
        Mlp {
            sizes: sizes.to_vec(),
            acts: acts.to_vec(),
            params: vec![0.0; total],
            offsets,
        }
    }

    /// Weights uniform in `+-sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn glorot<R: Rng>(sizes: &[usize], acts: &[Activation], rng: &mut R) -> Self {
        let mut net = Self::zeros(sizes, acts);
        for l in 0..net.layers() {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let start = net.offsets[l];
            for w in &mut net.params[start..start + fan_in * fan_out] {
                *w = rng.random_range(-limit..=limit);
            }
        }
        net
    }

    pub fn layers(&self) -> usize {
        self.acts.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn forward(&self, x: &[f64], cache: &mut Cache) {
        assert_eq!(x.len(), self.input_dim(), "input width");
        cache.acts.resize(self.sizes.len(), Vec::new());
        cache.acts[0].clear();
        cache.acts[0].extend_from_slice(x);
        for l in 0..self.layers() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let off = self.offsets[l];
            let (w, b) = self.params[off..off + n_in * n_out + n_out].split_at(n_in * n_out);
            let (prev, rest) = cache.acts.split_at_mut(l + 1);
            let input = &prev[l];
            let out = &mut rest[0];
            out.clear();
            for (row, &bias) in w.chunks_exact(n_in).zip(b) {
                let mut v = bias + row.iter().zip(input).map(|(a, c)| a * c).sum::<f64>();
                if self.acts[l] == Activation::Relu {
                    v = v.max(0.0);
                }
                out.push(v);
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        let mut cache = Cache::default();
        self.forward(x, &mut cache);
        cache.output().to_vec()
    }

    /// Adds `d loss / d params` for one sample into `grad`, given `d loss / d output`.
    pub fn backward(&self, cache: &Cache, d_out: &[f64], grad: &mut [f64]) {
        assert_eq!(grad.len(), self.params.len());
        assert_eq!(d_out.len(), self.output_dim());
        let mut delta = d_out.to_vec();
        for l in (0..self.layers()).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            if self.acts[l] == Activation::Relu {
                for (d, &a) in delta.iter_mut().zip(&cache.acts[l + 1]) {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            let off = self.offsets[l];
            let input = &cache.acts[l];
            let (gw, gb) = grad[off..off + n_in * n_out + n_out].split_at_mut(n_in * n_out);
            for ((grow, gbias), &d) in gw.chunks_exact_mut(n_in).zip(gb.iter_mut()).zip(&delta) {
                if d == 0.0 {
                    continue;
                }
                *gbias += d;
                for (g, &a) in grow.iter_mut().zip(input) {
                    *g += d * a;
                }
            }
            if l > 0 {
                let w = &self.params[off..off + n_in * n_out];
                let mut prev = vec![0.0; n_in];
                for (row, &d) in w.chunks_exact(n_in).zip(&delta) {
                    if d == 0.0 {
                        continue;
                    }
                    for (p, &wv) in prev.iter_mut().zip(row) {
                        *p += d * wv;
                    }
                }
                delta = prev;
            }
        }
    }
}
