//! Code matrices mapping quantization levels to binary codewords.
//!
//! Row `q` (1-based level) of a [`CodeMatrix`] is the codeword classifiers are
//! trained to emit for targets quantized to level `q`. Column `k` is the target
//! bit of classifier `k` across all levels.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{BelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeKind {
    Unary,
    Johnson,
    B1jdj,
    B2jdj,
    Hexj,
    Hadamard,
}

impl CodeKind {
    pub const ALL: [CodeKind; 6] = [
        CodeKind::Unary,
        CodeKind::Johnson,
        CodeKind::B1jdj,
        CodeKind::B2jdj,
        CodeKind::Hexj,
        CodeKind::Hadamard,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CodeKind::Unary => "unary",
            CodeKind::Johnson => "johnson",
            CodeKind::B1jdj => "b1jdj",
            CodeKind::B2jdj => "b2jdj",
            CodeKind::Hexj => "hexj",
            CodeKind::Hadamard => "hadamard",
        }
    }

    /// Number of bits the construction uses for `levels` levels.
    pub fn bit_count(self, levels: usize) -> usize {
        match self {
            CodeKind::Unary => levels.saturating_sub(1),
            CodeKind::Johnson => levels.div_ceil(2),
            CodeKind::B1jdj => levels.div_ceil(2).div_ceil(2) + 1,
            CodeKind::B2jdj => levels.div_ceil(4).div_ceil(2) + 2,
            CodeKind::Hexj => 8 * hex_digits(levels),
            CodeKind::Hadamard => levels.next_power_of_two(),
        }
    }

    /// Builds the code matrix of this kind.
    pub fn generate(self, levels: usize) -> Result<CodeMatrix> {
        match self {
            CodeKind::Unary => gen_unary(levels),
            CodeKind::Johnson => gen_johnson(levels),
            CodeKind::B1jdj => gen_base_johnson(levels, Base::Two),
            CodeKind::B2jdj => gen_base_johnson(levels, Base::Four),
            CodeKind::Hexj => gen_hexj(levels),
            CodeKind::Hadamard => gen_hadamard(levels),
        }
    }
}

impl fmt::Display for CodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CodeKind {
    type Err = BelError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "unary" | "u" => Ok(CodeKind::Unary),
            "johnson" | "j" => Ok(CodeKind::Johnson),
            "b1jdj" => Ok(CodeKind::B1jdj),
            "b2jdj" => Ok(CodeKind::B2jdj),
            "hexj" => Ok(CodeKind::Hexj),
            "hadamard" | "had" => Ok(CodeKind::Hadamard),
            _ => Err(BelError::Unknown {
                what: "code kind",
                name: s.to_string(),
            }),
        }
    }
}

/// Base of a base+displacement code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Base {
    Two,
    Four,
}

impl Base {
    pub fn value(self) -> usize {
        match self {
            Base::Two => 2,
            Base::Four => 4,
        }
    }
}

/// An `L x M` binary matrix, one codeword per quantization level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeMatrix {
    kind: CodeKind,
    levels: usize,
    bits: usize,
    data: Vec<u8>,
}

impl CodeMatrix {
    fn from_rows(kind: CodeKind, rows: Vec<Vec<u8>>) -> Self {
        let levels = rows.len();
        let bits = rows.first().map_or(0, Vec::len);
        debug_assert!(rows.iter().all(|r| r.len() == bits));
        CodeMatrix {
            kind,
            levels,
            bits,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn kind(&self) -> CodeKind {
        self.kind
    }

    /// Number of levels `L`.
    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Number of bits (classifiers) `M`.
    pub fn bits(&self) -> usize {
        self.bits
    }

    /// Codeword for 1-based `level`.
    ///
    /// Panics if `level` is not in `1..=L`.
    pub fn row(&self, level: usize) -> &[u8] {
        assert!(
            (1..=self.levels).contains(&level),
            "level {level} outside 1..={}",
            self.levels
        );
        let start = (level - 1) * self.bits;
        &self.data[start..start + self.bits]
    }

    /// Codewords in ascending level order.
    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[u8]> + '_ {
        self.data.chunks_exact(self.bits)
    }

    pub fn get(&self, level: usize, bit: usize) -> u8 {
        self.row(level)[bit]
    }

    /// Codeword mapped to noiseless logits: 1 -> +1, 0 -> -1.
    pub fn signed_row(&self, level: usize) -> Vec<f64> {
        self.row(level)
            .iter()
            .map(|&b| 2.0 * f64::from(b) - 1.0)
            .collect()
    }

    /// Correlation `C z` of the logits with every row.
    pub fn correlations(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_len(z.len())?;
        Ok(self
            .rows()
            .map(|row| {
                row.iter()
                    .zip(z)
                    .filter(|(&b, _)| b == 1)
                    .map(|(_, &v)| v)
                    .sum()
            })
            .collect())
    }

    /// `C^T w` for a weight per level.
    pub fn transpose_mul(&self, w: &[f64]) -> Vec<f64> {
        debug_assert_eq!(w.len(), self.levels);
        let mut out = vec![0.0; self.bits];
        for (row, &wl) in self.rows().zip(w) {
            for (o, &b) in out.iter_mut().zip(row) {
                if b == 1 {
                    *o += wl;
                }
            }
        }
        out
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.bits {
            return Err(BelError::ShapeMismatch {
                expected: self.bits,
                found: len,
            });
        }
        Ok(())
    }

    pub fn metrics(&self) -> CodeMetrics {
        metrics(self)
    }

    /// Writes the matrix as CSV: a `kind,levels,bits` line, then one line per level.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{},{},{}", self.kind, self.levels, self.bits)?;
        let mut line = String::with_capacity(2 * self.bits);
        for row in self.rows() {
            line.clear();
            for (i, b) in row.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                line.push(if *b == 1 { '1' } else { '0' });
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Structural metrics of a code matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CodeMetrics {
    /// Number of adjacent-level bit flips per classifier.
    pub transitions_per_classifier: Vec<usize>,
    /// Hamming distance between levels `q` and `q + 1`.
    pub adjacent_hamming: Vec<usize>,
    /// Full `L x L` hamming-distance matrix.
    pub pairwise_hamming: Vec<Vec<usize>>,
}

impl CodeMetrics {
    pub fn max_transitions(&self) -> usize {
        self.transitions_per_classifier
            .iter()
            .copied()
            .max()
            .unwrap_or(0)
    }

    pub fn min_adjacent_hamming(&self) -> usize {
        self.adjacent_hamming.iter().copied().min().unwrap_or(0)
    }
}

/// Hamming distance between two 0/1 words over their common prefix.
pub fn hamming(a: &[u8], b: &[u8]) -> usize {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let word = |c: &[u8]| u64::from_ne_bytes(c.try_into().unwrap());
    // with 0/1 entries each mismatching byte contributes exactly one set bit
    let packed: u32 = a
        .chunks_exact(8)
        .zip(b.chunks_exact(8))
        .map(|(x, y)| (word(x) ^ word(y)).count_ones())
        .sum();
    let tail = a[n - n % 8..]
        .iter()
        .zip(&b[n - n % 8..])
        .filter(|(x, y)| x != y)
        .count();
    packed as usize + tail
}

pub fn metrics(c: &CodeMatrix) -> CodeMetrics {
    let rows: Vec<&[u8]> = c.rows().collect();
    let mut transitions = vec![0usize; c.bits];
    for pair in rows.windows(2) {
        for (t, (x, y)) in transitions.iter_mut().zip(pair[0].iter().zip(pair[1])) {
            if x != y {
                *t += 1;
            }
        }
    }
    let adjacent_hamming = rows.windows(2).map(|p| hamming(p[0], p[1])).collect();
    let mut pairwise = vec![vec![0usize; c.levels]; c.levels];
    for i in 0..c.levels {
        for j in (i + 1)..c.levels {
            let d = hamming(rows[i], rows[j]);
            pairwise[i][j] = d;
            pairwise[j][i] = d;
        }
    }
    CodeMetrics {
        transitions_per_classifier: transitions,
        adjacent_hamming,
        pairwise_hamming: pairwise,
    }
}

fn check_levels(levels: usize, min: usize) -> Result<()> {
    if levels < min {
        return Err(BelError::InvalidLevels { levels, min });
    }
    Ok(())
}

/// Unary code: `M = L - 1`, bit `k` (1-based) of level `Q` is set iff `k < Q`.
pub fn gen_unary(levels: usize) -> Result<CodeMatrix> {
    check_levels(levels, 2)?;
    let bits = levels - 1;
    let rows = (1..=levels)
        .map(|q| (0..bits).map(|k| u8::from(k + 1 < q)).collect())
        .collect();
    Ok(CodeMatrix::from_rows(CodeKind::Unary, rows))
}

/// Johnson word of `bits` bits for 1-based `level`: bit `k` is set iff
/// `bits - level < k <= 2 bits - level`. Level `2 bits` is the all-zero word.
fn johnson_word(bits: usize, level: usize) -> impl Iterator<Item = u8> {
    let m = bits as isize;
    let q = level as isize;
    (1..=m).map(move |k| u8::from(m - q < k && k <= 2 * m - q))
}

/// Johnson (twisted ring counter) code with `M = ceil(L / 2)` bits.
pub fn gen_johnson(levels: usize) -> Result<CodeMatrix> {
    check_levels(levels, 2)?;
    let bits = levels.div_ceil(2);
    let rows = (1..=levels)
        .map(|q| johnson_word(bits, q).collect())
        .collect();
    Ok(CodeMatrix::from_rows(CodeKind::Johnson, rows))
}

/// Base+displacement code with a reflected displacement term.
pub fn gen_base_johnson(levels: usize, base: Base) -> Result<CodeMatrix> {
    gen_base_johnson_with(levels, base, true)
}

/// Base+displacement code; `reflect = false` gives the plain variant whose
/// base-boundary steps flip more than one bit.
pub fn gen_base_johnson_with(levels: usize, base: Base, reflect: bool) -> Result<CodeMatrix> {
    let k = base.value();
    check_levels(levels, k.max(2))?;
    let base_bits = levels.div_ceil(k).div_ceil(2);
    let disp_bits = k / 2;
    let rows = (0..levels)
        .map(|v| {
            let b = v / k;
            let mut d = v % k;
            if reflect && b % 2 == 1 {
                d = k - 1 - d;
            }
            johnson_word(base_bits, b + 1)
                .chain(johnson_word(disp_bits, d + 1))
                .collect()
        })
        .collect();
    let kind = match base {
        Base::Two => CodeKind::B1jdj,
        Base::Four => CodeKind::B2jdj,
    };
    Ok(CodeMatrix::from_rows(kind, rows))
}

/// Smallest `D >= 1` with `16^D >= levels`.
fn hex_digits(levels: usize) -> usize {
    let mut digits = 1;
    let mut cap = 16usize;
    while cap < levels {
        digits += 1;
        cap = cap.saturating_mul(16);
    }
    digits
}

/// Hex digits of `level - 1`, each as an 8-bit Johnson word, most significant first.
pub fn gen_hexj(levels: usize) -> Result<CodeMatrix> {
    check_levels(levels, 2)?;
    let digits = hex_digits(levels);
    let rows = (0..levels)
        .map(|v| {
            (0..digits)
                .rev()
                .flat_map(|i| johnson_word(8, ((v >> (4 * i)) & 0xF) + 1))
                .collect()
        })
        .collect();
    Ok(CodeMatrix::from_rows(CodeKind::Hexj, rows))
}

/// First `L` rows of the Sylvester Hadamard matrix of order `M = next_pow2(L)`,
/// with +1 mapped to 1 and -1 to 0.
pub fn gen_hadamard(levels: usize) -> Result<CodeMatrix> {
    check_levels(levels, 2)?;
    let order = levels.next_power_of_two();
    // H[i][j] = (-1)^popcount(i & j) for the Sylvester recursion.
    let rows = (0..levels)
        .map(|i| {
            (0..order)
                .map(|j| u8::from((i & j).count_ones() % 2 == 0))
                .collect()
        })
        .collect();
    Ok(CodeMatrix::from_rows(CodeKind::Hadamard, rows))
}
