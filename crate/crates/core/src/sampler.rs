//! Seedable multinomial sampling into coincidence-count tables.
//!
//! The generator is ChaCha with 8 rounds (`rand_chacha::ChaCha8Rng`), seeded
//! with `seed_from_u64(seed)` and positioned on stream `stream`. Each shot
//! draws one `u64` (two 32-bit words) and turns it into a uniform
//! `u = (x >> 11)·2⁻⁵³`; the category is the first one whose cumulative
//! probability exceeds `u`, in declared label order.
//!
//! Shots are processed in chunks of [`CHUNK_SHOTS`]. Chunk `c` seeks the
//! stream to word `2·c·CHUNK_SHOTS` so every shot consumes the same words
//! whether chunks run in order or in parallel; merged totals are identical.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::qstate::IMPOSSIBLE_CUTOFF;

pub const CHUNK_SHOTS: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SeedSpec {
    pub seed: u64,
    pub stream: u64,
}

impl SeedSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Generator positioned at the first word of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Uniform double in `[0, 1)` from the top 53 bits of one `u64`.
pub fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Labeled categorical distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    labels: Vec<String>,
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        probs: Vec<f64>,
    ) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() || labels.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} labels for {} probabilities",
                labels.len(),
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "probability {p} is negative or not finite"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { labels, probs })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    labels: Vec<String>,
    counts: Vec<u64>,
}

impl CountTable {
    pub fn zeros(labels: Vec<String>) -> Self {
        let counts = vec![0; labels.len()];
        Self { labels, counts }
    }

    /// Table from explicit counts; `labels` and `counts` must have equal length.
    pub fn from_counts(labels: Vec<String>, counts: Vec<u64>) -> Result<Self> {
        if labels.len() != counts.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} labels for {} counts",
                labels.len(),
                counts.len()
            )));
        }
        Ok(Self { labels, counts })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn count(&self, label: &str) -> Option<u64> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.counts[i])
    }

    fn absorb(&mut self, chunk: &[u64]) {
        for (c, n) in self.counts.iter_mut().zip(chunk) {
            *c += n;
        }
    }
}

fn sample_chunk(
    cumulative: &[f64],
    fallback: usize,
    seed: SeedSpec,
    chunk: u64,
    shots: u64,
) -> Vec<u64> {
    let mut rng = seed.rng();
    rng.set_word_pos(u128::from(chunk) * u128::from(CHUNK_SHOTS) * 2);
    let mut counts = vec![0u64; cumulative.len()];
    for _ in 0..shots {
        let u = uniform(&mut rng);
        let k = cumulative.iter().position(|&c| u < c).unwrap_or(fallback);
        counts[k] += 1;
    }
    counts
}

/// Multinomial sample of `shots` draws using the default execution path.
pub fn sample_counts(dist: &Distribution, shots: u64, seed: SeedSpec) -> CountTable {
    sample_counts_with(dist, shots, seed, Execution::default())
}

pub fn sample_counts_with(
    dist: &Distribution,
    shots: u64,
    seed: SeedSpec,
    exec: Execution,
) -> CountTable {
    let cumulative: Vec<f64> = dist
        .probs
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    // Rounding can leave the last cumulative value just below 1.
    let fallback = dist.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let chunks = shots.div_ceil(CHUNK_SHOTS);
    let partials = exec.map_indices(chunks as usize, |c| {
        let c = c as u64;
        let n = CHUNK_SHOTS.min(shots - c * CHUNK_SHOTS);
        sample_chunk(&cumulative, fallback, seed, c, n)
    });
    let mut table = CountTable::zeros(dist.labels.clone());
    for partial in &partials {
        table.absorb(partial);
    }
    table
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// Per-category binomial z-score; `±∞` when a certain or impossible
    /// category is violated.
    pub z: Vec<f64>,
    pub max_abs_z: f64,
}

/// Binomial z-scores of `table` against `expected`.
pub fn compare_counts(table: &CountTable, expected: &Distribution) -> Result<Comparison> {
    if table.labels != expected.labels {
        return Err(Error::CategoryMismatch {
            table: table.labels.clone(),
            expected: expected.labels.clone(),
        });
    }
    let n = table.total() as f64;
    let z: Vec<f64> = table
        .counts
        .iter()
        .zip(&expected.probs)
        .map(|(&count, &p)| {
            let count = count as f64;
            if p < IMPOSSIBLE_CUTOFF || 1.0 - p < IMPOSSIBLE_CUTOFF {
                let exact = (n * p).round();
                if count == exact {
                    0.0
                } else {
                    (count - exact).signum() * f64::INFINITY
                }
            } else {
                (count - n * p) / (n * p * (1.0 - p)).sqrt()
            }
        })
        .collect();
    let max_abs_z = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(Comparison { z, max_abs_z })
}
