//! Ground-truth correlators: direct evaluation of `C(t1, t2)` on the dense
//! engine, plus closed forms for the two-spin examples that share no code
//! with the engine.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::System;
use crate::operator::Operator;
use crate::spin::Axis;
use crate::state::apply_factors;
use crate::C64;

/// `⟨S_i^a(t1) S_j^b(t2)⟩`, with an optional third time for three-time protocols.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationQuery {
    pub site_i: usize,
    pub site_j: usize,
    pub axis_a: Axis,
    pub axis_b: Axis,
    pub t1: f64,
    pub t2: f64,
    pub t3: Option<f64>,
}

impl CorrelationQuery {
    pub fn new(site_i: usize, axis_a: Axis, t1: f64, site_j: usize, axis_b: Axis, t2: f64) -> Self {
        CorrelationQuery {
            site_i,
            site_j,
            axis_a,
            axis_b,
            t1,
            t2,
            t3: None,
        }
    }

    pub fn with_t3(mut self, t3: f64) -> Self {
        self.t3 = Some(t3);
        self
    }

    /// Sites inside `system` and `t1 ≤ t2 (≤ t3)`.
    pub fn validate(&self, system_sites: usize) -> Result<()> {
        for site in [self.site_i, self.site_j] {
            if site >= system_sites {
                return Err(Error::FactorOutOfRange {
                    index: site,
                    factors: system_sites,
                });
            }
        }
        if !(self.t1.is_finite() && self.t2.is_finite()) || self.t2 < self.t1 {
            return Err(Error::UnorderedTimes(format!("t1 = {}, t2 = {}", self.t1, self.t2)));
        }
        if let Some(t3) = self.t3 {
            if !t3.is_finite() || t3 < self.t2 {
                return Err(Error::UnorderedTimes(format!("t2 = {}, t3 = {t3}", self.t2)));
            }
        }
        Ok(())
    }
}

/// `⟨ψ|U†(t1) S_i^a U(t1) U†(t2) S_j^b U(t2)|ψ⟩` for any pair of times.
pub fn two_time_correlation(
    system: &System,
    site_i: usize,
    axis_a: Axis,
    t1: f64,
    site_j: usize,
    axis_b: Axis,
    t2: f64,
) -> Result<C64> {
    let reg = system.register();
    let dims = reg.dims();
    let scale = C64::new(reg.scale(), 0.0);
    let sa = crate::spin::spin_matrix(reg.spin(), axis_a) * scale;
    let sb = crate::spin::spin_matrix(reg.spin(), axis_b) * scale;
    let u = system.propagator();
    let psi = system.state().amplitudes();
    let mut v = u.apply(psi, t2);
    v = apply_factors(&v, &dims, &sb, &[reg.site(site_j)?])?;
    v = u.apply(&v, t1 - t2);
    v = apply_factors(&v, &dims, &sa, &[reg.site(site_i)?])?;
    let w = u.apply(psi, t1);
    Ok(w.dotc(&v))
}

/// The exact correlation `C(t1, t2)` of the query.
pub fn exact_correlation(system: &System, query: &CorrelationQuery) -> Result<C64> {
    query.validate(system.register().system_site_count())?;
    two_time_correlation(
        system,
        query.site_i,
        query.axis_a,
        query.t1,
        query.site_j,
        query.axis_b,
        query.t2,
    )
}

/// Heisenberg-picture operator `U†(t) O U(t)` on the system space.
pub fn heisenberg(system: &System, op: &Operator, t: f64) -> Result<Operator> {
    let u = system.propagator().unitary(t);
    Operator::new(u.adjoint() * op.matrix() * u)
}

/// `Re C` and `Im C`, where `Im C` is checked against the commutator route.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReImSplit {
    pub re: f64,
    pub im: f64,
    /// `⟨[S_i^a(t1), S_j^b(t2)]⟩ / 2i`.
    pub im_from_commutator: f64,
    pub deviation: f64,
}

/// Tolerance of the commutator cross-check.
pub const SPLIT_TOLERANCE: f64 = 1e-10;

pub fn im_re_split(system: &System, query: &CorrelationQuery) -> Result<ReImSplit> {
    let c = exact_correlation(system, query)?;
    let a = heisenberg(system, &system.component(query.site_i, query.axis_a)?, query.t1)?;
    let b = heisenberg(system, &system.component(query.site_j, query.axis_b)?, query.t2)?;
    let comm = system.state().expectation(&a.commutator(&b)?)?;
    let im_from_commutator = (comm / C64::new(0.0, 2.0)).re;
    let deviation = (im_from_commutator - c.im).abs();
    if deviation > SPLIT_TOLERANCE {
        return Err(Error::Tolerance(format!(
            "Im C = {} but the commutator gives {im_from_commutator}",
            c.im
        )));
    }
    Ok(ReImSplit {
        re: c.re,
        im: c.im,
        im_from_commutator,
        deviation,
    })
}

/// Parameters of the two-spin example: `H = σ^x σ^x`, product state from
/// angles `(α_k, θ_k)`, `zz` correlation between sites 0 and 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoSpinParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub t1: f64,
    pub t2: f64,
}

/// Closed-form `C(t1, t2)` of the two-spin example, Pauli convention.
pub fn closed_form_c_two_spin(p: &TwoSpinParams) -> C64 {
    let dt = 2.0 * (p.t2 - p.t1);
    let re = (2.0 * p.alpha1).cos() * (2.0 * p.alpha2).cos() * dt.cos();
    let im = (2.0 * p.alpha1).sin() * (2.0 * p.alpha2).sin() * p.theta1.sin() * p.theta2.sin() * dt.sin();
    C64::new(re, im)
}

/// `sin(2λ)/(2λ)`, with its limit 1 at `λ = 0`.
fn sinc2(lambda: f64) -> f64 {
    if lambda == 0.0 {
        1.0
    } else {
        (2.0 * lambda).sin() / (2.0 * lambda)
    }
}

/// All-orders ancilla estimator `C^λ` of the two-spin example.
pub fn closed_form_c_lambda_two_spin(p: &TwoSpinParams, lambda: f64) -> C64 {
    closed_form_c_two_spin(p) * sinc2(lambda)
}

/// `|C − C^λ| = |2λ − sin 2λ| / (2λ) · |C|` for the two-spin example.
pub fn closed_form_systematic_error(p: &TwoSpinParams, lambda: f64) -> f64 {
    (1.0 - sinc2(lambda)).abs() * closed_form_c_two_spin(p).norm()
}

/// `⟨σ^z(0) σ^z(t)⟩` for `H = σ^x σ^x` and both spins in `α|+⟩ + β|−⟩`.
pub fn closed_form_intro_example(alpha: C64, beta: C64, t: f64) -> C64 {
    let pol = alpha.norm_sqr() - beta.norm_sqr();
    let cross = alpha.conj() * beta - alpha * beta.conj();
    C64::new((2.0 * t).cos() * pol * pol, 0.0) - C64::new(0.0, (2.0 * t).sin()) * cross * cross
}

/// A 2×2 complex matrix in row-major order, independent of the dense engine.
type M2 = [[C64; 2]; 2];

fn pauli(n: [f64; 3]) -> M2 {
    [
        [C64::new(n[2], 0.0), C64::new(n[0], -n[1])],
        [C64::new(n[0], n[1]), C64::new(-n[2], 0.0)],
    ]
}

fn mul(a: &M2, b: &M2) -> M2 {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

fn sandwich(u: &[C64; 2], m: &M2, v: &[C64; 2]) -> C64 {
    let mv = [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]];
    u[0].conj() * mv[0] + u[1].conj() * mv[1]
}

/// Eigenvectors `|+_a⟩`, `|−_a⟩` of a Pauli matrix, written out explicitly.
fn pauli_eigenvectors(axis: Axis) -> [[C64; 2]; 2] {
    let r = C64::new(FRAC_1_SQRT_2, 0.0);
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    match axis {
        Axis::Z => [[one, zero], [zero, one]],
        Axis::X => [[r, r], [r, -r]],
        Axis::Y => [[r, C64::new(0.0, FRAC_1_SQRT_2)], [r, C64::new(0.0, -FRAC_1_SQRT_2)]],
    }
}

/// Inputs of the projective example: `H = (n·σ)_1 (m·σ)_2` and product state `ψ1 ⊗ ψ2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectiveExample {
    pub psi1: [C64; 2],
    pub psi2: [C64; 2],
    pub n: [f64; 3],
    pub m: [f64; 3],
    pub axis_a: Axis,
    pub axis_b: Axis,
}

impl ProjectiveExample {
    fn check(&self) -> Result<()> {
        for v in [self.n, self.m] {
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::NonUnitAxis(v));
            }
        }
        for psi in [self.psi1, self.psi2] {
            let norm = (psi[0].norm_sqr() + psi[1].norm_sqr()).sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::NotNormalized { norm });
            }
        }
        Ok(())
    }
}

/// The exact `C(0, t)` of the projective example.
pub fn closed_form_axis_pair_correlation(e: &ProjectiveExample, t: f64) -> Result<C64> {
    e.check()?;
    let (sa, sb) = (pauli(e.axis_a.unit_vector()), pauli(e.axis_b.unit_vector()));
    let (ns, ms) = (pauli(e.n), pauli(e.m));
    let a1 = sandwich(&e.psi1, &sa, &e.psi1);
    let b2 = sandwich(&e.psi2, &sb, &e.psi2);
    let mbm = sandwich(&e.psi2, &mul(&mul(&ms, &sb), &ms), &e.psi2);
    let an = sandwich(&e.psi1, &mul(&sa, &ns), &e.psi1);
    let bm = mul(&sb, &ms);
    let mb = mul(&ms, &sb);
    let comm = sandwich(&e.psi2, &bm, &e.psi2) - sandwich(&e.psi2, &mb, &e.psi2);
    let (s, c) = t.sin_cos();
    Ok(a1 * b2 * (c * c) + a1 * mbm * (s * s) - C64::new(0.0, 0.5 * (2.0 * t).sin()) * an * comm)
}

/// The projectively constructed `𝒞^proj(0, t)` of the projective example.
pub fn closed_form_projective_example(e: &ProjectiveExample, t: f64) -> Result<f64> {
    e.check()?;
    let basis = pauli_eigenvectors(e.axis_a);
    let mut weights = [0.0; 2];
    for (k, v) in basis.iter().enumerate() {
        let p = (v[0].conj() * e.psi1[0] + v[1].conj() * e.psi1[1]).norm_sqr();
        if p <= crate::measurement::COLLAPSE_EPSILON {
            return Err(Error::ZeroProbabilityBranch { probability: p });
        }
        weights[k] = p;
    }
    let (sa, sb) = (pauli(e.axis_a.unit_vector()), pauli(e.axis_b.unit_vector()));
    let (ns, ms) = (pauli(e.n), pauli(e.m));
    let a1 = sandwich(&e.psi1, &sa, &e.psi1);
    let b2 = sandwich(&e.psi2, &sb, &e.psi2);
    let mbm = sandwich(&e.psi2, &mul(&mul(&ms, &sb), &ms), &e.psi2);
    let n_plus = sandwich(&basis[0], &ns, &basis[0]);
    let n_minus = sandwich(&basis[1], &ns, &basis[1]);
    let comm = sandwich(&e.psi2, &mul(&sb, &ms), &e.psi2) - sandwich(&e.psi2, &mul(&ms, &sb), &e.psi2);
    let (s, c) = t.sin_cos();
    let value = a1 * b2 * (c * c) + a1 * mbm * (s * s)
        - C64::new(0.0, 0.5 * (2.0 * t).sin()) * (n_plus * weights[0] - n_minus * weights[1]) * comm;
    Ok(value.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{HamiltonianSpec, SiteAngles, SystemStateSpec};
    use crate::spin::SpinRegister;
    use std::f64::consts::PI;

    fn two_spin_params() -> TwoSpinParams {
        TwoSpinParams {
            alpha1: PI / 3.0,
            alpha2: PI / 3.0,
            theta1: PI / 7.0,
            theta2: PI / 5.0,
            t1: 1.0,
            t2: 10.0,
        }
    }

    fn two_spin_system(p: &TwoSpinParams) -> System {
        let reg = SpinRegister::qubits(2, 0).unwrap();
        let state = SystemStateSpec::Angles(vec![
            SiteAngles {
                alpha: p.alpha1,
                theta: p.theta1,
            },
            SiteAngles {
                alpha: p.alpha2,
                theta: p.theta2,
            },
        ]);
        System::new(&reg, &HamiltonianSpec::IsingXx, &state).unwrap()
    }

    #[test]
    fn frozen_two_spin_value() {
        let c = closed_form_c_two_spin(&two_spin_params());
        // cos(2π/3)² cos 18 and (3/4) sin(π/7) sin(π/5) sin 18
        assert!((c.re - 0.165_079_177_061_019_9).abs() < 1e-12, "{}", c.re);
        assert!((c.im + 0.143_643_468_973_837_1).abs() < 1e-12, "{}", c.im);
    }

    #[test]
    fn engine_matches_closed_form() {
        let p = two_spin_params();
        let sys = two_spin_system(&p);
        let q = CorrelationQuery::new(0, Axis::Z, p.t1, 1, Axis::Z, p.t2);
        let exact = exact_correlation(&sys, &q).unwrap();
        assert!((exact - closed_form_c_two_spin(&p)).norm() < 1e-10);
    }

    #[test]
    fn equal_times_factorize() {
        let p = two_spin_params();
        let sys = two_spin_system(&p);
        let q = CorrelationQuery::new(0, Axis::Z, 0.0, 1, Axis::Z, 0.0);
        let c = exact_correlation(&sys, &q).unwrap();
        let expected = (2.0 * p.alpha1).cos() * (2.0 * p.alpha2).cos();
        assert!((c - C64::new(expected, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn lambda_forms() {
        let p = two_spin_params();
        assert_eq!(closed_form_c_lambda_two_spin(&p, 0.0), closed_form_c_two_spin(&p));
        assert!(closed_form_c_lambda_two_spin(&p, PI / 2.0).norm() < 1e-16);
        let rel = closed_form_systematic_error(&p, 0.42) / closed_form_c_two_spin(&p).norm();
        assert!((rel - (0.84 - 0.84f64.sin()) / 0.84).abs() < 1e-15);
    }

    #[test]
    fn intro_example_through_engine() {
        let (alpha, beta) = (C64::new(0.6, 0.0), C64::new(0.0, 0.8));
        let reg = SpinRegister::qubits(2, 0).unwrap();
        let spec = SystemStateSpec::Product(vec![vec![alpha, beta], vec![alpha, beta]]);
        let sys = System::new(&reg, &HamiltonianSpec::IsingXx, &spec).unwrap();
        for t in [0.0, 0.4, 2.5] {
            let q = CorrelationQuery::new(0, Axis::Z, 0.0, 1, Axis::Z, t);
            let c = exact_correlation(&sys, &q).unwrap();
            assert!((c - closed_form_intro_example(alpha, beta, t)).norm() < 1e-12);
        }
    }

    #[test]
    fn projective_example_reduces_to_real_part() {
        let (alpha, beta) = (C64::new(0.6, 0.0), C64::new(0.0, 0.8));
        let x = [1.0, 0.0, 0.0];
        let e = ProjectiveExample {
            psi1: [alpha, beta],
            psi2: [alpha, beta],
            n: x,
            m: x,
            axis_a: Axis::Z,
            axis_b: Axis::Z,
        };
        for t in [0.3, 1.1, 4.0] {
            let proj = closed_form_projective_example(&e, t).unwrap();
            let pol = alpha.norm_sqr() - beta.norm_sqr();
            assert!((proj - (2.0 * t).cos() * pol * pol).abs() < 1e-14);
            let exact = closed_form_axis_pair_correlation(&e, t).unwrap();
            assert!((exact - closed_form_intro_example(alpha, beta, t)).norm() < 1e-14);
        }
        let up = ProjectiveExample {
            psi1: [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            psi2: [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            axis_a: Axis::X,
            ..e
        };
        assert!((closed_form_projective_example(&up, 0.7).unwrap() - 0.0).abs() < 1e-15);
        let blocked = ProjectiveExample { axis_a: Axis::Z, ..up };
        assert!(matches!(
            closed_form_projective_example(&blocked, 0.7),
            Err(Error::ZeroProbabilityBranch { .. })
        ));
    }

    #[test]
    fn split_agrees_with_commutator() {
        let p = two_spin_params();
        let sys = two_spin_system(&p);
        let q = CorrelationQuery::new(0, Axis::Z, p.t1, 1, Axis::Z, p.t2);
        let split = im_re_split(&sys, &q).unwrap();
        assert!((split.im - closed_form_c_two_spin(&p).im).abs() < 1e-10);
        let same = CorrelationQuery::new(0, Axis::X, 2.0, 1, Axis::Y, 2.0);
        assert!(im_re_split(&sys, &same).unwrap().im.abs() < 1e-12);
    }

    #[test]
    fn unordered_times_rejected() {
        let sys = two_spin_system(&two_spin_params());
        let q = CorrelationQuery::new(0, Axis::Z, 2.0, 1, Axis::Z, 1.0);
        assert!(matches!(exact_correlation(&sys, &q), Err(Error::UnorderedTimes(_))));
    }
}
