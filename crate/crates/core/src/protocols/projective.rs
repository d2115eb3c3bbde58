//! Projective measurements at both times, and the backaction operator `Γ`.

use nalgebra::DMatrix;
use crate::error::{Error, Result};
use crate::measurement::{collapse_factor, factor_probabilities, LocalObservable};
use crate::models::System;
use crate::operator::{embed, max_abs, Operator};
use crate::oracle::{heisenberg, CorrelationQuery};
use crate::protocols::distribution::OutcomeDistribution;
use crate::C64;

pub const PROJECTIVE_REGISTERS: [&str; 2] = ["site_i", "site_j"];

/// Above this `‖Γ + Γ†‖_max` the backaction operator is not antihermitian.
pub const ANTIHERMITIAN_TOLERANCE: f64 = 1e-10;

/// Collapse at site `i` at `t1` with `obs_a`, then read out site `j` along `b` at `t2`.
pub fn projective_distribution_with(
    system: &System,
    query: &CorrelationQuery,
    obs_a: &LocalObservable,
) -> Result<OutcomeDistribution> {
    let reg = system.register();
    query.validate(reg.system_site_count())?;
    let u = system.propagator();
    let psi1 = u.evolve(system.state(), query.t1)?;
    let b_obs = LocalObservable::for_register(reg, query.axis_b);
    let (fi, fj) = (reg.site(query.site_i)?, reg.site(query.site_j)?);
    let mut probabilities = Vec::with_capacity(obs_a.len() * b_obs.len());
    for level in 0..obs_a.len() {
        let (branch, p_a) = collapse_factor(&psi1, fi, obs_a, level)?;
        let later = u.evolve(&branch, query.t2 - query.t1)?;
        for p_b in factor_probabilities(&later, fj, &b_obs)? {
            probabilities.push(p_a * p_b);
        }
    }
    OutcomeDistribution::new(
        PROJECTIVE_REGISTERS.iter().map(|s| s.to_string()).collect(),
        vec![obs_a.values().to_vec(), b_obs.values().to_vec()],
        probabilities,
    )
}

/// Projective distribution for the spin component `a` at `t1`.
pub fn projective_distribution(system: &System, query: &CorrelationQuery) -> Result<OutcomeDistribution> {
    let obs = LocalObservable::for_register(system.register(), query.axis_a);
    projective_distribution_with(system, query, &obs)
}

/// `𝒞^proj = Σ m_a m_b P(m_a) P(m_b|m_a)`.
pub fn projective_correlate(system: &System, query: &CorrelationQuery) -> Result<f64> {
    Ok(projective_distribution(system, query)?.correlate())
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammaReport {
    pub gamma: Operator,
    pub antihermitian: bool,
    /// `‖Γ + Γ†‖_max`.
    pub deviation: f64,
    /// `⟨O_a(t1) O_b(t2)⟩` for the observable measured at `t1`.
    pub correlation: C64,
    pub expectation: C64,
    /// `|𝒞^proj − (C − ⟨Γ⟩)|`.
    pub identity_residual: f64,
}

/// Identity check tolerance between the projective correlation and `C − ⟨Γ⟩`.
pub const GAMMA_IDENTITY_TOLERANCE: f64 = 1e-10;

/// `Γ = Σ_m m Σ_{m'≠m} Π^m(t1) S_j^b(t2) Π^{m'}(t1)` for an arbitrary observable at site `i`.
pub fn gamma_operator_with(system: &System, query: &CorrelationQuery, obs_a: &LocalObservable) -> Result<GammaReport> {
    let reg = system.register();
    query.validate(reg.system_site_count())?;
    let fi = reg.site(query.site_i)?;
    let projectors = obs_a
        .projectors()
        .iter()
        .map(|p| heisenberg(system, &embed(&Operator::hermitian(p.clone())?, fi, reg)?, query.t1))
        .collect::<Result<Vec<_>>>()?;
    let ob = heisenberg(system, &system.component(query.site_j, query.axis_b)?, query.t2)?;
    let d = ob.dim();
    let mut gamma = DMatrix::<C64>::zeros(d, d);
    for (k, pk) in projectors.iter().enumerate() {
        let left = pk.matrix() * ob.matrix();
        for (l, pl) in projectors.iter().enumerate() {
            if k != l {
                gamma += &left * pl.matrix() * C64::new(obs_a.values()[k], 0.0);
            }
        }
    }
    let deviation = max_abs(&(&gamma + gamma.adjoint()));
    let gamma = Operator::new(gamma)?;
    let oa = heisenberg(system, &embed(&Operator::hermitian(obs_a.matrix())?, fi, reg)?, query.t1)?;
    let psi = system.state();
    let correlation = psi.expectation(&oa.compose(&ob)?)?;
    let expectation = psi.expectation(&gamma)?;
    let proj = projective_distribution_with(system, query, obs_a)?.correlate();
    let identity_residual = (C64::new(proj, 0.0) - (correlation - expectation)).norm();
    if identity_residual > GAMMA_IDENTITY_TOLERANCE {
        return Err(Error::Tolerance(format!(
            "projective correlation differs from C - <Gamma> by {identity_residual:e}"
        )));
    }
    Ok(GammaReport {
        gamma,
        antihermitian: deviation <= ANTIHERMITIAN_TOLERANCE,
        deviation,
        correlation,
        expectation,
        identity_residual,
    })
}

/// Backaction operator for the spin component `a` at `t1`.
pub fn gamma_operator(system: &System, query: &CorrelationQuery) -> Result<GammaReport> {
    let obs = LocalObservable::for_register(system.register(), query.axis_a);
    gamma_operator_with(system, query, &obs)
}
