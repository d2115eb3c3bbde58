//! Unitary time evolution `exp(-iHt)` from a cached Hermitian eigendecomposition.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operator::{hermitian_deviation, Operator, HERMITIAN_TOLERANCE};
use crate::state::StateVector;
use crate::C64;

/// `H = V diag(E) V†`, decomposed once and reused for every `t`.
#[derive(Clone, Debug)]
pub struct Propagator {
    energies: DVector<f64>,
    vectors: DMatrix<C64>,
    vectors_adjoint: DMatrix<C64>,
}

impl Propagator {
    pub fn new(h: &Operator) -> Result<Self> {
        let deviation = hermitian_deviation(h.matrix());
        if deviation > HERMITIAN_TOLERANCE {
            return Err(Error::NonHermitian { deviation });
        }
        // symmetrize so the solver sees an exactly Hermitian input
        let m = (h.matrix() + h.matrix().adjoint()) * C64::new(0.5, 0.0);
        let eig = m.symmetric_eigen();
        let vectors_adjoint = eig.eigenvectors.adjoint();
        Ok(Propagator {
            energies: eig.eigenvalues,
            vectors: eig.eigenvectors,
            vectors_adjoint,
        })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    fn phases(&self, t: f64) -> DVector<C64> {
        self.energies.map(|e| C64::from_polar(1.0, -e * t))
    }

    /// The dense matrix `exp(-iHt)`.
    pub fn unitary(&self, t: f64) -> DMatrix<C64> {
        let phases = self.phases(t);
        let mut scaled = self.vectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[k];
        }
        scaled * &self.vectors_adjoint
    }

    pub fn unitary_operator(&self, t: f64) -> Operator {
        Operator::new(self.unitary(t)).expect("square")
    }

    /// `exp(-iHt) v` on a raw vector of the propagator's dimension.
    pub(crate) fn apply(&self, v: &DVector<C64>, t: f64) -> DVector<C64> {
        let mut coeffs = &self.vectors_adjoint * v;
        coeffs.component_mul_assign(&self.phases(t));
        &self.vectors * coeffs
    }

    /// Evolves a state on exactly the Hamiltonian's space.
    pub fn evolve(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: state.dim(),
            });
        }
        StateVector::normalized(self.apply(state.amplitudes(), t), state.dims().to_vec())
    }

    /// Evolves a state whose trailing factors carry the Hamiltonian, with the
    /// identity on the leading (ancilla) factors.
    pub fn evolve_trailing(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        let out = self.apply_trailing(state.amplitudes(), t)?;
        StateVector::normalized(out, state.dims().to_vec())
    }

    pub(crate) fn apply_trailing(&self, v: &DVector<C64>, t: f64) -> Result<DVector<C64>> {
        let d = self.dim();
        if !v.len().is_multiple_of(d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: v.len(),
            });
        }
        if t == 0.0 {
            return Ok(v.clone());
        }
        let mut out = DVector::zeros(v.len());
        for block in 0..v.len() / d {
            let chunk = v.rows(block * d, d).into_owned();
            out.rows_mut(block * d, d).copy_from(&self.apply(&chunk, t));
        }
        Ok(out)
    }
}

/// One-shot `exp(-iHt)|ψ⟩`.
pub fn evolve(state: &StateVector, h: &Operator, t: f64) -> Result<StateVector> {
    Propagator::new(h)?.evolve(state, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{c, site_component};
    use crate::spin::{Axis, SpinRegister};

    fn ising_xx() -> Operator {
        let reg = SpinRegister::qubits(2, 0).unwrap();
        let x0 = site_component(&reg, 0, Axis::X).unwrap();
        let x1 = site_component(&reg, 1, Axis::X).unwrap();
        Operator::hermitian(x0.matrix() * x1.matrix()).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let p = Propagator::new(&ising_xx()).unwrap();
        let u = p.unitary(0.0);
        assert!((u - DMatrix::<C64>::identity(4, 4)).norm() < 1e-14);
    }

    #[test]
    fn ising_closed_form() {
        let h = ising_xx();
        let p = Propagator::new(&h).unwrap();
        for t in [0.3_f64, 1.0, 2.7, 10.0] {
            let expected = DMatrix::<C64>::identity(4, 4) * c(t.cos(), 0.0) - h.matrix() * c(0.0, t.sin());
            let u = p.unitary(t);
            for (a, b) in u.iter().zip(expected.iter()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn energy_is_conserved() {
        let h = ising_xx();
        let p = Propagator::new(&h).unwrap();
        let psi = StateVector::normalized(
            DVector::from_vec(vec![c(0.5, 0.1), c(0.2, -0.3), c(-0.4, 0.0), c(0.1, 0.6)]),
            vec![2, 2],
        )
        .unwrap();
        let e0 = psi.expectation(&h).unwrap();
        for t in [0.5, 3.0, 17.0] {
            let e = p.evolve(&psi, t).unwrap().expectation(&h).unwrap();
            assert!((e - e0).norm() < 1e-12);
        }
    }

    #[test]
    fn trailing_evolution_matches_kron() {
        let h = ising_xx();
        let p = Propagator::new(&h).unwrap();
        let v = DVector::from_fn(8, |k, _| c((k as f64).cos(), (k as f64 * 1.3).sin()));
        let psi = StateVector::normalized(v, vec![2, 2, 2]).unwrap();
        let full = Operator::new(DMatrix::identity(2, 2)).unwrap().kron(&p.unitary_operator(0.8));
        let direct = psi.apply_unitary(&full).unwrap();
        let fast = p.evolve_trailing(&psi, 0.8).unwrap();
        assert!(direct.max_abs_diff(&fast) < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        let op = Operator::new(m).unwrap();
        assert!(matches!(Propagator::new(&op), Err(Error::NonHermitian { .. })));
    }
}
