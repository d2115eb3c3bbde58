//! f-factors and assembly of the complex estimator from the two ancilla correlations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::LocalObservable;
use crate::operator::{eigenbasis, Operator};
use crate::spin::{Axis, Convention, Spin};
use crate::state::StateVector;
use crate::C64;

/// Imaginary (or real) parts below this count as zero when classifying a coupling.
const COMPONENT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FFactors {
    pub f1: f64,
    pub f2: f64,
}

/// `⟨φ|M B|φ⟩` for the measured ancilla observable `M`.
pub fn ancilla_weight(phi: &StateVector, measured: &LocalObservable, b: &Operator) -> Result<C64> {
    let mb = Operator::new(measured.matrix() * b.matrix())?;
    phi.expectation(&mb)
}

/// `f = (2s+1) ⟨φ|M B|φ⟩` for a coupling that picks out `Im C`; the weight must be real.
pub fn f_imaginary_part(levels: usize, phi: &StateVector, measured: &LocalObservable, b: &Operator) -> Result<f64> {
    let w = ancilla_weight(phi, measured, b)?;
    if w.im.abs() > COMPONENT_TOLERANCE {
        return Err(Error::DegenerateFactor {
            factor: format!("B mixes real and imaginary parts, <M B> = {w}"),
        });
    }
    Ok(levels as f64 * w.re)
}

/// `f = Re(i (2s+1) ⟨φ|M B|φ⟩)` for a coupling that picks out `Re C`; the weight must be imaginary.
pub fn f_real_part(levels: usize, phi: &StateVector, measured: &LocalObservable, b: &Operator) -> Result<f64> {
    let w = ancilla_weight(phi, measured, b)?;
    if w.re.abs() > COMPONENT_TOLERANCE {
        return Err(Error::DegenerateFactor {
            factor: format!("B mixes real and imaginary parts, <M B> = {w}"),
        });
    }
    Ok((C64::new(0.0, levels as f64) * w).re)
}

/// f-factors computed from the actual ancilla state and coupling operators.
pub fn f_factors(
    levels: usize,
    phi: &StateVector,
    measured: &LocalObservable,
    b1: &Operator,
    b2: &Operator,
) -> Result<FFactors> {
    Ok(FFactors {
        f1: f_imaginary_part(levels, phi, measured, b1)?,
        f2: f_real_part(levels, phi, measured, b2)?,
    })
}

/// `f1 = Σ m²` and `f2 = i Σ m ⟨m|B|m'⟩`, summed in the `axis` eigenbasis.
pub fn f_factors_from_definition(spin: Spin, axis: Axis, convention: Convention, b2: &Operator) -> Result<FFactors> {
    let values = convention.eigenvalues(spin)?;
    let f1 = values.iter().map(|m| m * m).sum();
    let v = eigenbasis(spin, axis);
    let local = v.adjoint() * b2.matrix() * &v;
    let mut sum = C64::new(0.0, 0.0);
    for (r, m) in values.iter().enumerate() {
        for col in 0..values.len() {
            sum += local[(r, col)] * *m;
        }
    }
    Ok(FFactors {
        f1,
        f2: (C64::new(0.0, 1.0) * sum).re,
    })
}

/// Everything needed to form `C^λ` from the two ancilla–system correlations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorComponents {
    /// `𝒞` measured with the coupling `B^(1)`.
    pub c1: f64,
    /// `𝒞` measured with the coupling `B^(2)`.
    pub c2: f64,
    pub factors: FFactors,
    pub lambda: f64,
    /// `2s + 1`.
    pub levels: usize,
    pub convention: Convention,
}

/// `C^λ = −(2s+1)/(2λ) (𝒞^(2)/f2 + i 𝒞^(1)/f1)`.
pub fn assemble_estimator(c: &EstimatorComponents) -> Result<C64> {
    assemble(c.c1, c.c2, c.factors, c.lambda, c.levels)
}

pub(crate) fn assemble(c1: f64, c2: f64, f: FFactors, lambda: f64, levels: usize) -> Result<C64> {
    if lambda == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    for (name, value) in [("f1", f.f1), ("f2", f.f2)] {
        if value.abs() < COMPONENT_TOLERANCE {
            return Err(Error::DegenerateFactor {
                factor: format!("{name} = {value}"),
            });
        }
    }
    let prefactor = -(levels as f64) / (2.0 * lambda);
    Ok(C64::new(prefactor * c2 / f.f2, prefactor * c1 / f.f1))
}
