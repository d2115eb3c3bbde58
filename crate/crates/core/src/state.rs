//! State vectors over a factorized Hilbert space and local operator action.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operator::Operator;
use crate::C64;

/// Normalization tolerance enforced on construction.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Index bookkeeping for acting on a subset of factors.
///
/// The selected factors form the "local" multi-index in the order given; all
/// remaining factors form the "rest" multi-index in register order.
#[derive(Clone, Debug)]
pub(crate) struct FactorLayout {
    local_strides: Vec<usize>,
    local_dims: Vec<usize>,
    rest_strides: Vec<usize>,
    rest_dims: Vec<usize>,
}

impl FactorLayout {
    pub(crate) fn new(dims: &[usize], factors: &[usize]) -> Result<Self> {
        let n = dims.len();
        let mut strides = vec![1usize; n];
        for k in (0..n.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        for (pos, &f) in factors.iter().enumerate() {
            if f >= n {
                return Err(Error::FactorOutOfRange {
                    index: f,
                    factors: n,
                });
            }
            if factors[..pos].contains(&f) {
                return Err(Error::InvalidArgument(format!("factor {f} listed twice")));
            }
        }
        let rest: Vec<usize> = (0..n).filter(|k| !factors.contains(k)).collect();
        Ok(FactorLayout {
            local_strides: factors.iter().map(|&f| strides[f]).collect(),
            local_dims: factors.iter().map(|&f| dims[f]).collect(),
            rest_strides: rest.iter().map(|&f| strides[f]).collect(),
            rest_dims: rest.iter().map(|&f| dims[f]).collect(),
        })
    }

    pub(crate) fn local_count(&self) -> usize {
        self.local_dims.iter().product()
    }

    pub(crate) fn rest_count(&self) -> usize {
        self.rest_dims.iter().product()
    }

    fn offset(strides: &[usize], dims: &[usize], mut flat: usize) -> usize {
        let mut off = 0;
        for k in (0..dims.len()).rev() {
            off += (flat % dims[k]) * strides[k];
            flat /= dims[k];
        }
        off
    }

    pub(crate) fn rest_offset(&self, rest: usize) -> usize {
        Self::offset(&self.rest_strides, &self.rest_dims, rest)
    }

    pub(crate) fn local_offset(&self, local: usize) -> usize {
        Self::offset(&self.local_strides, &self.local_dims, local)
    }

    pub(crate) fn global_index(&self, rest: usize, local: usize) -> usize {
        self.rest_offset(rest) + self.local_offset(local)
    }
}

/// A normalized pure state on a register with the given factor dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
    dims: Vec<usize>,
}

impl StateVector {
    /// Wraps amplitudes that must already be normalized.
    pub fn new(amplitudes: DVector<C64>, dims: Vec<usize>) -> Result<Self> {
        let expected: usize = dims.iter().product();
        if amplitudes.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm });
        }
        Ok(StateVector { amplitudes, dims })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(amplitudes: DVector<C64>, dims: Vec<usize>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Self::new(amplitudes / C64::new(norm, 0.0), dims)
    }

    /// Single-factor state.
    pub fn local(amplitudes: &[C64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(amplitudes), vec![amplitudes.len()])
    }

    /// Tensor product in the given order.
    pub fn product(factors: &[StateVector]) -> Result<Self> {
        let mut iter = factors.iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::InvalidArgument("empty product state".into()))?;
        let mut amplitudes = first.amplitudes.clone();
        let mut dims = first.dims.clone();
        for f in iter {
            amplitudes = amplitudes.kronecker(&f.amplitudes);
            dims.extend_from_slice(&f.dims);
        }
        Self::normalized(amplitudes, dims)
    }

    /// `|0...0⟩` (all factors at their highest-`m` level).
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let total: usize = dims.iter().product();
        if index >= total {
            return Err(Error::FactorOutOfRange {
                index,
                factors: total,
            });
        }
        let mut a = DVector::zeros(total);
        a[index] = C64::new(1.0, 0.0);
        Self::new(a, dims)
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.check_dim(other.dim())?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `⟨ψ|O|ψ⟩`.
    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        self.check_dim(op.dim())?;
        Ok(self.amplitudes.dotc(&(op.matrix() * &self.amplitudes)))
    }

    /// `Σ |ψ_k - φ_k|`-free comparison: max amplitude difference.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        (&self.amplitudes - &other.amplitudes)
            .iter()
            .fold(0.0_f64, |acc, z| acc.max(z.norm()))
    }

    /// Multiplies the state by a global operator without renormalizing.
    pub(crate) fn apply_raw(&self, op: &DMatrix<C64>) -> Result<DVector<C64>> {
        self.check_dim(op.nrows())?;
        Ok(op * &self.amplitudes)
    }

    /// Applies a unitary acting on the whole register.
    pub fn apply_unitary(&self, op: &Operator) -> Result<StateVector> {
        let out = self.apply_raw(op.matrix())?;
        Self::normalized(out, self.dims.clone())
    }

    /// Applies a unitary acting on `factors` (in the order of its Kronecker factors).
    pub fn apply_local_unitary(&self, op: &DMatrix<C64>, factors: &[usize]) -> Result<StateVector> {
        let out = apply_factors(&self.amplitudes, &self.dims, op, factors)?;
        Self::normalized(out, self.dims.clone())
    }

    /// Makes the first amplitude with modulus above 1e-14 real and positive.
    pub fn fix_global_phase(mut self) -> Self {
        if let Some(z) = self.amplitudes.iter().find(|z| z.norm() > 1e-14).copied() {
            let phase = z.conj() / C64::new(z.norm(), 0.0);
            self.amplitudes *= phase;
        }
        self
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: dim,
            });
        }
        Ok(())
    }
}

/// `(1 ⊗ ... ⊗ op ⊗ ... ⊗ 1) v` without forming the embedded matrix.
pub(crate) fn apply_factors(
    v: &DVector<C64>,
    dims: &[usize],
    op: &DMatrix<C64>,
    factors: &[usize],
) -> Result<DVector<C64>> {
    let total: usize = dims.iter().product();
    if v.len() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            actual: v.len(),
        });
    }
    let layout = FactorLayout::new(dims, factors)?;
    let d = layout.local_count();
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: op.nrows(),
        });
    }
    let local_offsets: Vec<usize> = (0..d).map(|k| layout.local_offset(k)).collect();
    let mut out = DVector::zeros(total);
    let mut chunk = DVector::zeros(d);
    for rest in 0..layout.rest_count() {
        let base = layout.rest_offset(rest);
        for (k, &off) in local_offsets.iter().enumerate() {
            chunk[k] = v[base + off];
        }
        let mapped = op * &chunk;
        for (k, &off) in local_offsets.iter().enumerate() {
            out[base + off] = mapped[k];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{embed_factors, spin_component};
    use crate::spin::{Axis, Convention, Spin};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rejects_unnormalized() {
        let a = DVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(StateVector::new(a, vec![2]), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn identity_expectation_is_one() {
        let s = StateVector::normalized(DVector::from_vec(vec![c(0.3, 0.1), c(-0.2, 0.7)]), vec![2]).unwrap();
        let e = s.expectation(&Operator::identity(2)).unwrap();
        assert!((e - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn sigma_z_expectation() {
        let (alpha, beta) = (c(0.6, 0.0), c(0.0, 0.8));
        let s = StateVector::local(&[alpha, beta]).unwrap();
        let z = spin_component(Spin::HALF, Axis::Z, Convention::Pauli).unwrap();
        let e = s.expectation(&z).unwrap();
        assert!((e.re - (alpha.norm_sqr() - beta.norm_sqr())).abs() < 1e-14);
        assert!(e.im.abs() < 1e-14);
    }

    #[test]
    fn local_application_matches_embedding() {
        let dims = vec![2, 3, 2];
        let amps: Vec<C64> = (0..12).map(|k| c((k as f64).sin(), (k as f64 * 0.7).cos())).collect();
        let s = StateVector::normalized(DVector::from_vec(amps), dims.clone()).unwrap();
        let op = DMatrix::from_fn(6, 6, |r, col| c((r * 7 + col) as f64 * 0.1, r as f64 - col as f64));
        for factors in [[0usize, 1], [1, 0], [2, 0], [1, 2]] {
            let d: usize = factors.iter().map(|&f| dims[f]).product();
            let local = Operator::new(op.view((0, 0), (d, d)).into_owned()).unwrap();
            let full = embed_factors(&local, &factors, &dims).unwrap();
            let direct = full.matrix() * s.amplitudes();
            let fast = apply_factors(s.amplitudes(), &dims, local.matrix(), &factors).unwrap();
            assert!((direct - fast).norm() < 1e-12);
        }
    }

    #[test]
    fn phase_fix_makes_first_amplitude_positive() {
        let s = StateVector::local(&[c(0.0, 0.6), c(0.8, 0.0)]).unwrap().fix_global_phase();
        assert!((s.amplitudes()[0] - c(0.6, 0.0)).norm() < 1e-15);
        assert!((s.amplitudes()[1] - c(0.0, -0.8)).norm() < 1e-15);
    }
}
