use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::clamp_probability;

/// Allowed deviation of the total probability from one.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Exact joint probabilities over the outcomes of several measured registers.
///
/// Outcomes are stored densely in descending lexicographic order: the first
/// register is the most significant digit, and each register's levels run from
/// its largest eigenvalue to its smallest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    registers: Vec<String>,
    values: Vec<Vec<f64>>,
    probabilities: Vec<f64>,
}

/// Decomposes a dense outcome index into per-register level indices.
pub(crate) fn levels_of(mut index: usize, shape: &[usize]) -> Vec<usize> {
    let mut out = vec![0; shape.len()];
    for k in (0..shape.len()).rev() {
        out[k] = index % shape[k];
        index /= shape[k];
    }
    out
}

impl OutcomeDistribution {
    pub fn new(registers: Vec<String>, values: Vec<Vec<f64>>, probabilities: Vec<f64>) -> Result<Self> {
        if registers.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: values.len(),
                actual: registers.len(),
            });
        }
        let count: usize = values.iter().map(Vec::len).product();
        if probabilities.len() != count {
            return Err(Error::DimensionMismatch {
                expected: count,
                actual: probabilities.len(),
            });
        }
        let probabilities = probabilities
            .into_iter()
            .map(clamp_probability)
            .collect::<Result<Vec<_>>>()?;
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::Tolerance(format!("outcome probabilities sum to {total}")));
        }
        Ok(OutcomeDistribution {
            registers,
            values,
            probabilities,
        })
    }

    pub fn registers(&self) -> &[String] {
        &self.registers
    }

    /// Eigenvalues of each register, descending.
    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn shape(&self) -> Vec<usize> {
        self.values.iter().map(Vec::len).collect()
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Eigenvalue tuple of outcome `index`.
    pub fn outcome(&self, index: usize) -> Vec<f64> {
        levels_of(index, &self.shape())
            .into_iter()
            .zip(&self.values)
            .map(|(level, vals)| vals[level])
            .collect()
    }

    /// Probability of an eigenvalue tuple.
    pub fn probability_of(&self, outcome: &[f64]) -> Result<f64> {
        if outcome.len() != self.values.len() {
            return Err(Error::DimensionMismatch {
                expected: self.values.len(),
                actual: outcome.len(),
            });
        }
        let mut index = 0;
        for (value, vals) in outcome.iter().zip(&self.values) {
            let level = vals
                .iter()
                .position(|v| (v - value).abs() < 1e-9)
                .ok_or(Error::NotInSpectrum { value: *value })?;
            index = index * vals.len() + level;
        }
        Ok(self.probabilities[index])
    }

    pub fn register_index(&self, name: &str) -> Result<usize> {
        self.registers
            .iter()
            .position(|r| r == name)
            .ok_or_else(|| Error::InvalidArgument(format!("no measured register named '{name}'")))
    }

    /// Distribution of a subset of registers, in the order given.
    pub fn marginal(&self, keep: &[usize]) -> Result<OutcomeDistribution> {
        let shape = self.shape();
        for &k in keep {
            if k >= shape.len() {
                return Err(Error::FactorOutOfRange {
                    index: k,
                    factors: shape.len(),
                });
            }
        }
        let sub: Vec<usize> = keep.iter().map(|&k| shape[k]).collect();
        let mut probs = vec![0.0; sub.iter().product()];
        for (index, &p) in self.probabilities.iter().enumerate() {
            let levels = levels_of(index, &shape);
            let target = keep.iter().fold(0, |acc, &k| acc * shape[k] + levels[k]);
            probs[target] += p;
        }
        OutcomeDistribution::new(
            keep.iter().map(|&k| self.registers[k].clone()).collect(),
            keep.iter().map(|&k| self.values[k].clone()).collect(),
            probs,
        )
    }

    /// Product of the eigenvalues of registers `of` for every outcome.
    pub fn weights(&self, of: &[usize]) -> Vec<f64> {
        let shape = self.shape();
        (0..self.len())
            .map(|index| {
                let levels = levels_of(index, &shape);
                of.iter().map(|&k| self.values[k][levels[k]]).product()
            })
            .collect()
    }

    /// `Σ (Π_{k ∈ of} m_k) P(m)`.
    pub fn correlate_registers(&self, of: &[usize]) -> f64 {
        self.weights(of)
            .iter()
            .zip(&self.probabilities)
            .map(|(w, p)| w * p)
            .sum()
    }

    /// `Σ m_a m_b P(m_a, m_b)` over all registers.
    pub fn correlate(&self) -> f64 {
        let all: Vec<usize> = (0..self.values.len()).collect();
        self.correlate_registers(&all)
    }
}

/// `𝒞 = Σ m_a m_b P(m_a, m_b)`.
pub fn correlate(dist: &OutcomeDistribution) -> f64 {
    dist.correlate()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(p: [f64; 4]) -> OutcomeDistribution {
        OutcomeDistribution::new(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, -1.0], vec![1.0, -1.0]],
            p.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn uniform_correlates_to_zero() {
        assert_eq!(correlate(&pair([0.25; 4])), 0.0);
    }

    #[test]
    fn perfectly_correlated() {
        assert_eq!(correlate(&pair([0.5, 0.0, 0.0, 0.5])), 1.0);
    }

    #[test]
    fn ordering_is_descending_lexicographic() {
        let d = pair([0.1, 0.2, 0.3, 0.4]);
        assert_eq!(d.outcome(0), vec![1.0, 1.0]);
        assert_eq!(d.outcome(1), vec![1.0, -1.0]);
        assert_eq!(d.outcome(2), vec![-1.0, 1.0]);
        assert_eq!(d.probability_of(&[-1.0, 1.0]).unwrap(), 0.3);
    }

    #[test]
    fn marginals() {
        let d = pair([0.1, 0.2, 0.3, 0.4]);
        let b = d.marginal(&[1]).unwrap();
        assert!((b.probabilities()[0] - 0.4).abs() < 1e-15);
        let swapped = d.marginal(&[1, 0]).unwrap();
        assert_eq!(swapped.probabilities(), &[0.1, 0.3, 0.2, 0.4]);
    }

    #[test]
    fn rejects_unnormalized() {
        let r = OutcomeDistribution::new(vec!["a".into()], vec![vec![1.0, -1.0]], vec![0.5, 0.4]);
        assert!(matches!(r, Err(Error::Tolerance(_))));
    }
}
