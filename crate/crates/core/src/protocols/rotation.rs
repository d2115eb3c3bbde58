//! Imaginary part of `C` from a pair of opposite local rotations at `t1`.

use crate::error::{Error, Result};
use crate::models::System;
use crate::operator::spin_half_rotation;
use crate::oracle::CorrelationQuery;
use crate::spin::Spin;

/// Rotation angles with `|sin θ|` below this are rejected.
pub const MIN_SIN_THETA: f64 = 1e-12;

/// `⟨σ_j^b(t2)⟩` after rotating site `i` by `θ` about the `a` axis at `t1`.
pub fn rotated_expectation(system: &System, query: &CorrelationQuery, theta: f64) -> Result<f64> {
    let reg = system.register();
    if reg.spin() != Spin::HALF {
        return Err(Error::Unsupported("the rotation protocol needs spin 1/2".into()));
    }
    query.validate(reg.system_site_count())?;
    let u = system.propagator();
    let psi1 = u.evolve(system.state(), query.t1)?;
    let r = spin_half_rotation(theta, query.axis_a.unit_vector())?;
    let rotated = psi1.apply_local_unitary(r.matrix(), &[reg.site(query.site_i)?])?;
    let later = u.evolve(&rotated, query.t2 - query.t1)?;
    Ok(later.expectation(&system.component(query.site_j, query.axis_b)?)?.re)
}

/// Both branch expectations `(E_θ, E_{−θ})`.
pub fn rotation_expectations(system: &System, query: &CorrelationQuery, theta: f64) -> Result<(f64, f64)> {
    Ok((
        rotated_expectation(system, query, theta)?,
        rotated_expectation(system, query, -theta)?,
    ))
}

/// `Im C = (E_θ − E_{−θ}) / (−2 sin θ)`, rescaled to the register convention.
pub fn rotation_protocol(system: &System, query: &CorrelationQuery, theta: f64) -> Result<f64> {
    let sin = theta.sin();
    if !theta.is_finite() || sin.abs() < MIN_SIN_THETA {
        return Err(Error::DegenerateAngle { theta });
    }
    let (plus, minus) = rotation_expectations(system, query, theta)?;
    // the rotation uses Pauli matrices, so undo their factor relative to S^a
    let scale = system.register().scale() / 2.0;
    Ok(scale * (plus - minus) / (-2.0 * sin))
}
