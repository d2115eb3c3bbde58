//! Fixed `σ^z ⊗ σ_i^z` coupling dressed with ancilla and system rotations.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::LocalObservable;
use crate::models::{build_ancilla_state, AncillaStateSpec, System};
use crate::operator::{pauli_along, spin_half_rotation, Operator};
use crate::oracle::CorrelationQuery;
use crate::protocols::estimator::{assemble, f_imaginary_part, f_real_part, FFactors};
use crate::protocols::snimp::{coupled_distribution, coupling_unitary, Timing};
use crate::spin::{Axis, Convention, Spin};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    Re,
    Im,
}

/// System rotation `R_S(θ, n)` and ancilla rotation `R_A(α, m)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TpmRotation {
    pub axis: Axis,
    pub component: Component,
    pub n: [f64; 3],
    pub theta: f64,
    pub m: [f64; 3],
    pub alpha: f64,
}

const X: [f64; 3] = [1.0, 0.0, 0.0];
const Y: [f64; 3] = [0.0, 1.0, 0.0];
const Z: [f64; 3] = [0.0, 0.0, 1.0];

/// Rotation parameters that turn `σ^z ⊗ σ^z` into a coupling for the requested component.
pub fn tpm_rotation(axis: Axis, component: Component) -> TpmRotation {
    let (n, theta) = match axis {
        Axis::X => (Y, 3.0 * PI / 2.0),
        Axis::Y => (X, FRAC_PI_2),
        Axis::Z => (Z, 0.0),
    };
    let (m, alpha) = match (axis, component) {
        (Axis::X, Component::Re) | (Axis::Y, Component::Im) | (Axis::Z, Component::Re) => (X, FRAC_PI_2),
        (Axis::X, Component::Im) | (Axis::Y, Component::Re) => (Y, 3.0 * PI / 2.0),
        (Axis::Z, Component::Im) => (Z, 0.0),
    };
    TpmRotation {
        axis,
        component,
        n,
        theta,
        m,
        alpha,
    }
}

/// The dressed coupling: effective `A_i(θ) = R†σ^zR` and `B(α)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TpmCoupling {
    pub rotation: TpmRotation,
    pub system_rotation: Operator,
    pub ancilla_rotation: Operator,
    pub effective_a: Operator,
    pub effective_b: Operator,
}

fn conjugate(r: &Operator, op: &Operator) -> Result<Operator> {
    r.adjoint().compose(op)?.compose(r)
}

pub fn tpm_rotated_coupling(axis: Axis, component: Component) -> Result<TpmCoupling> {
    let rotation = tpm_rotation(axis, component);
    let sz = pauli_along(Z)?;
    let system_rotation = spin_half_rotation(rotation.theta, rotation.n)?;
    let ancilla_rotation = spin_half_rotation(rotation.alpha, rotation.m)?;
    let effective_a = Operator::hermitian(conjugate(&system_rotation, &sz)?.into_matrix())?;
    let effective_b = Operator::hermitian(conjugate(&ancilla_rotation, &sz)?.into_matrix())?;
    if effective_a.max_abs_diff(&pauli_along(axis.unit_vector())?) > 1e-12 {
        return Err(Error::Unsupported(format!("rotated coupling does not act along {axis}")));
    }
    Ok(TpmCoupling {
        rotation,
        system_rotation,
        ancilla_rotation,
        effective_a,
        effective_b,
    })
}

impl TpmCoupling {
    /// `(R_A ⊗ R_i)† exp(−iλ σ^z⊗σ^z) (R_A ⊗ R_i)` on (ancilla, site `i`).
    pub fn unitary(&self, lambda: f64) -> Result<Operator> {
        let sz = pauli_along(Z)?;
        let r = self.ancilla_rotation.kron(&self.system_rotation);
        conjugate(&r, &coupling_unitary(&sz, &sz, lambda)?)
    }
}

fn check(system: &System) -> Result<()> {
    let reg = system.register();
    if reg.spin() != Spin::HALF || reg.convention() != Convention::Pauli {
        return Err(Error::Unsupported("the rotated coupling needs a Pauli spin-1/2 register".into()));
    }
    Ok(())
}

/// `𝒞` and its f-factor for one component through the dressed coupling.
pub fn tpm_component(system: &System, query: &CorrelationQuery, lambda: f64, component: Component) -> Result<(f64, f64)> {
    check(system)?;
    let coupling = tpm_rotated_coupling(query.axis_a, component)?;
    let phi = build_ancilla_state(&AncillaStateSpec::Uniform, Spin::HALF, query.axis_a)?;
    let obs = LocalObservable::for_register(system.register(), query.axis_a);
    let u = coupling.unitary(lambda)?;
    let dist = coupled_distribution(system, query, &phi, &obs, u.matrix(), Timing::Deferred, false)?;
    let f = match component {
        Component::Re => f_real_part(2, &phi, &obs, &coupling.effective_b)?,
        Component::Im => f_imaginary_part(2, &phi, &obs, &coupling.effective_b)?,
    };
    Ok((dist.correlate(), f))
}

/// `C^λ` assembled from the two dressed-coupling runs.
pub fn tpm_estimate(system: &System, query: &CorrelationQuery, lambda: f64) -> Result<C64> {
    if lambda == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    let (c2, f2) = tpm_component(system, query, lambda, Component::Re)?;
    let (c1, f1) = tpm_component(system, query, lambda, Component::Im)?;
    assemble(c1, c2, FFactors { f1, f2 }, lambda, 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{HamiltonianSpec, SystemStateSpec};
    use crate::protocols::snimp::{snimp_estimate, CouplingChoice, Snimp};
    use crate::spin::SpinRegister;

    #[test]
    fn z_imaginary_needs_no_rotation() {
        let c = tpm_rotated_coupling(Axis::Z, Component::Im).unwrap();
        assert_eq!((c.rotation.theta, c.rotation.alpha), (0.0, 0.0));
        assert!(c.effective_b.max_abs_diff(&pauli_along(Z).unwrap()) < 1e-15);
    }

    #[test]
    fn x_real_row() {
        let c = tpm_rotated_coupling(Axis::X, Component::Re).unwrap();
        assert_eq!(c.rotation.n, Y);
        assert_eq!(c.rotation.m, X);
        assert!((c.rotation.theta - 3.0 * PI / 2.0).abs() < 1e-15);
        assert!(c.effective_b.max_abs_diff(&pauli_along(Y).unwrap()) < 1e-12);
        assert!(c.effective_a.max_abs_diff(&pauli_along(X).unwrap()) < 1e-12);
    }

    #[test]
    fn rotated_pipeline_equals_direct_coupling() {
        let reg = SpinRegister::qubits(2, 0).unwrap();
        let amps: Vec<C64> = (0..4).map(|k| C64::new(0.3 + 0.2 * k as f64, 0.1 - 0.15 * k as f64)).collect();
        let sys = System::new(&reg, &HamiltonianSpec::IsingXx, &SystemStateSpec::Full(amps)).unwrap();
        for a in Axis::ALL {
            for b in Axis::ALL {
                let q = CorrelationQuery::new(0, a, 0.4, 1, b, 1.7);
                let direct = snimp_estimate(&sys, &Snimp::new(q, 0.3, CouplingChoice::B1)).unwrap();
                let rotated = tpm_estimate(&sys, &q, 0.3).unwrap();
                assert!((direct - rotated).norm() < 1e-10, "{a}{b}: {direct} vs {rotated}");
            }
        }
    }
}
