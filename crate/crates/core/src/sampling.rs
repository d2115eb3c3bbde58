//! Seeded Monte Carlo draws from exact outcome distributions.
//!
//! Every draw stream is ChaCha8 seeded with `seed_from_u64(seed ^ shard)` and
//! switched to a stream number with `set_stream`. Stream 0 is the plain
//! [`sample`] call; paired estimator runs use [`B1_STREAM`] and [`B2_STREAM`]
//! offset by twice the sweep point index, so every grid point of a sweep gets
//! independent samples. Each shard draws uniform variates on `[0, 1)` and bins
//! them by inverse CDF over the dense outcome order of the distribution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocols::distribution::OutcomeDistribution;
use crate::protocols::estimator::{assemble, FFactors};
use crate::C64;

pub const B1_STREAM: u64 = 1;
pub const B2_STREAM: u64 = 2;

/// Stream number of run `role` at sweep point `point`.
pub fn stream_for(point: u64, role: u64) -> u64 {
    2 * point + role
}

/// Observed counts over the outcomes of an [`OutcomeDistribution`], in the same order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTable {
    registers: Vec<String>,
    values: Vec<Vec<f64>>,
    counts: Vec<u64>,
    total: u64,
}

impl FrequencyTable {
    pub fn new(registers: Vec<String>, values: Vec<Vec<f64>>, counts: Vec<u64>) -> Result<Self> {
        let len: usize = values.iter().map(Vec::len).product();
        if counts.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                actual: counts.len(),
            });
        }
        let total = counts.iter().sum();
        if total == 0 {
            return Err(Error::InvalidArgument("a frequency table needs at least one count".into()));
        }
        Ok(FrequencyTable {
            registers,
            values,
            counts,
            total,
        })
    }

    fn empty_like(dist: &OutcomeDistribution) -> Self {
        FrequencyTable {
            registers: dist.registers().to_vec(),
            values: dist.values().to_vec(),
            counts: vec![0; dist.len()],
            total: 0,
        }
    }

    pub fn registers(&self) -> &[String] {
        &self.registers
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts_f64(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }

    /// Adds the counts of another table over the same outcomes.
    pub fn merge(&mut self, other: &FrequencyTable) -> Result<()> {
        if other.counts.len() != self.counts.len() || other.values != self.values {
            return Err(Error::DimensionMismatch {
                expected: self.counts.len(),
                actual: other.counts.len(),
            });
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
        Ok(())
    }

    /// Product of the eigenvalues of the registers in `of` for every outcome.
    pub fn weights(&self, of: &[usize]) -> Vec<f64> {
        let shape: Vec<usize> = self.values.iter().map(Vec::len).collect();
        (0..self.counts.len())
            .map(|index| {
                let levels = crate::protocols::distribution::levels_of(index, &shape);
                of.iter().map(|&k| self.values[k][levels[k]]).product()
            })
            .collect()
    }

    /// `Σ (Π_{k ∈ of} m_k) n_m / n`.
    pub fn correlate_registers(&self, of: &[usize]) -> f64 {
        let n = self.total as f64;
        self.weights(of)
            .iter()
            .zip(&self.counts)
            .map(|(w, &c)| w * c as f64)
            .sum::<f64>()
            / n
    }
}

/// `𝒞_n = Σ m_a m_b n_{m_a m_b} / n` over all registers.
pub fn empirical_correlate(table: &FrequencyTable) -> f64 {
    let all: Vec<usize> = (0..table.values.len()).collect();
    table.correlate_registers(&all)
}

fn cumulative(dist: &OutcomeDistribution) -> Vec<f64> {
    let mut acc = 0.0;
    dist.probabilities()
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

fn draw(dist: &OutcomeDistribution, cdf: &[f64], n: u64, seed: u64, stream: u64) -> FrequencyTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut table = FrequencyTable::empty_like(dist);
    // rounding can leave the last cumulative value just below one
    let last = dist.probabilities().iter().rposition(|&p| p > 0.0).unwrap_or(0);
    for _ in 0..n {
        let u: f64 = rng.random();
        let k = cdf.partition_point(|&c| c <= u).min(last);
        table.counts[k] += 1;
    }
    table.total = n;
    table
}

/// Draws `n` outcomes on stream 0.
pub fn sample(dist: &OutcomeDistribution, n: u64, seed: u64) -> Result<FrequencyTable> {
    sample_stream(dist, n, seed, 0)
}

pub fn sample_stream(dist: &OutcomeDistribution, n: u64, seed: u64, stream: u64) -> Result<FrequencyTable> {
    sample_sharded(dist, n, seed, stream, 1)
}

/// Shard `k` of `shards` draws `n / shards` outcomes, plus one if `k < n % shards`,
/// from seed `seed ^ k`; the counts are summed. One shard is the serial draw.
pub fn sample_sharded(dist: &OutcomeDistribution, n: u64, seed: u64, stream: u64, shards: u64) -> Result<FrequencyTable> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    if shards == 0 {
        return Err(Error::InvalidArgument("shard count must be at least 1".into()));
    }
    let cdf = cumulative(dist);
    let share = |k: u64| n / shards + u64::from(k < n % shards);
    let run = |k: u64| draw(dist, &cdf, share(k), seed ^ k, stream);
    #[cfg(feature = "parallel")]
    let parts: Vec<FrequencyTable> = {
        use rayon::prelude::*;
        (0..shards).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<FrequencyTable> = (0..shards).map(run).collect();
    let mut merged = FrequencyTable::empty_like(dist);
    for part in &parts {
        merged.merge(part)?;
    }
    Ok(merged)
}

/// One seeded sample of a protocol run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRun {
    pub seed: u64,
    pub stream: u64,
    pub n: u64,
    pub table: FrequencyTable,
}

impl SampleRun {
    pub fn draw(dist: &OutcomeDistribution, n: u64, seed: u64, stream: u64) -> Result<Self> {
        Ok(SampleRun {
            seed,
            stream,
            n,
            table: sample_stream(dist, n, seed, stream)?,
        })
    }
}

/// `C^λ_n` from the `B^(1)` and `B^(2)` samples.
pub fn finite_sample_estimator(run_b1: &SampleRun, run_b2: &SampleRun, factors: FFactors, lambda: f64, levels: usize) -> Result<C64> {
    if run_b1.table.counts.len() != run_b2.table.counts.len() {
        return Err(Error::DimensionMismatch {
            expected: run_b1.table.counts.len(),
            actual: run_b2.table.counts.len(),
        });
    }
    assemble(
        empirical_correlate(&run_b1.table),
        empirical_correlate(&run_b2.table),
        factors,
        lambda,
        levels,
    )
}
