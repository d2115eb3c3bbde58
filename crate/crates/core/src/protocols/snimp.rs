//! Single noninvasive measurement: one ancilla coupled at `t1`, site `j` read out at `t2`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::Propagator;
use crate::measurement::{collapse_factor, factor_probabilities, joint_probabilities, LocalObservable};
use crate::models::{build_ancilla_state, AncillaStateSpec, System};
use crate::operator::{coupling_b1, coupling_b2, spin_component, Operator};
use crate::oracle::CorrelationQuery;
use crate::protocols::distribution::OutcomeDistribution;
use crate::protocols::estimator::{assemble, f_imaginary_part, f_real_part, EstimatorComponents, FFactors};
use crate::state::{apply_factors, StateVector};
use crate::C64;

/// Which ancilla operator enters the coupling `B ⊗ S_i^a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CouplingChoice {
    /// `B = S^a`, sensitive to `Im C`.
    B1,
    /// `B = −(i/2)(S_a^+ − S_a^−)`, sensitive to `Re C`.
    B2,
}

/// When the ancilla is read out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Timing {
    /// Right after the coupling, collapsing the joint state on each branch.
    Immediate,
    /// Together with the system at `t2`.
    Deferred,
}

/// Exact `exp(−iλ B⊗A)` or its first-order truncation `1 − iλ B⊗A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CouplingForm {
    Exact,
    Linearized,
}

/// `exp(−iλ B⊗A)` on the (ancilla, site) pair, computed from the eigendecomposition of `B⊗A`.
pub fn coupling_unitary(b: &Operator, a: &Operator, lambda: f64) -> Result<Operator> {
    let generator = Operator::hermitian(b.kron(a).into_matrix())?;
    Ok(Propagator::new(&generator)?.unitary_operator(lambda))
}

/// `1 − iλ B⊗A`, only for order-of-convergence checks.
pub fn linearized_coupling(b: &Operator, a: &Operator, lambda: f64) -> Result<Operator> {
    let ba = b.kron(a);
    let d = ba.dim();
    Operator::new(DMatrix::identity(d, d) - ba.matrix() * C64::new(0.0, lambda))
}

/// A fully specified sNIMP run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snimp {
    pub query: CorrelationQuery,
    pub ancilla: AncillaStateSpec,
    pub lambda: f64,
    pub coupling: CouplingChoice,
    pub timing: Timing,
    pub form: CouplingForm,
}

impl Snimp {
    pub fn new(query: CorrelationQuery, lambda: f64, coupling: CouplingChoice) -> Self {
        Snimp {
            query,
            ancilla: AncillaStateSpec::Uniform,
            lambda,
            coupling,
            timing: Timing::Deferred,
            form: CouplingForm::Exact,
        }
    }

    pub fn with_timing(mut self, timing: Timing) -> Self {
        self.timing = timing;
        self
    }

    pub fn with_form(mut self, form: CouplingForm) -> Self {
        self.form = form;
        self
    }

    pub fn with_ancilla(mut self, ancilla: AncillaStateSpec) -> Self {
        self.ancilla = ancilla;
        self
    }
}

/// Ancilla coupling operator `B^(k)` for axis `a` in the register's convention.
pub fn coupling_operator(system: &System, choice: CouplingChoice, axis: crate::spin::Axis) -> Result<Operator> {
    let reg = system.register();
    match choice {
        CouplingChoice::B1 => coupling_b1(reg.spin(), axis, reg.convention()),
        CouplingChoice::B2 => coupling_b2(reg.spin(), axis, reg.convention()),
    }
}

/// Names of the measured registers of an sNIMP distribution.
pub const SNIMP_REGISTERS: [&str; 2] = ["ancilla", "site_j"];

/// The general ancilla pipeline with an arbitrary coupling unitary on (ancilla, site `i`).
///
/// The ancilla is prepared in `phi`, the unitary acts at `t1`, and the ancilla
/// is read out with `ancilla_obs` (immediately or at `t2`) while site `j` is
/// read out with the `b` component at `t2`.
pub fn coupled_distribution(
    system: &System,
    query: &CorrelationQuery,
    phi: &StateVector,
    ancilla_obs: &LocalObservable,
    coupling: &DMatrix<C64>,
    timing: Timing,
    renormalize: bool,
) -> Result<OutcomeDistribution> {
    let reg = system.register();
    query.validate(reg.system_site_count())?;
    let u = system.propagator();
    let psi1 = u.evolve(system.state(), query.t1)?;
    let joint = StateVector::product(&[phi.clone(), psi1])?;
    let dims = joint.dims().to_vec();
    let site_i = 1 + query.site_i;
    let site_j = 1 + query.site_j;
    let coupled = apply_factors(joint.amplitudes(), &dims, coupling, &[0, site_i])?;
    let coupled = if renormalize {
        StateVector::normalized(coupled, dims.clone())?
    } else {
        StateVector::new(coupled, dims.clone())?
    };
    let b_obs = LocalObservable::for_register(reg, query.axis_b);
    let dt = query.t2 - query.t1;
    let probabilities = match timing {
        Timing::Deferred => {
            let later = u.evolve_trailing(&coupled, dt)?;
            joint_probabilities(&later, &[(0, ancilla_obs), (site_j, &b_obs)])?
        }
        Timing::Immediate => {
            let mut out = Vec::with_capacity(ancilla_obs.len() * b_obs.len());
            for level in 0..ancilla_obs.len() {
                let (branch, p_a) = collapse_factor(&coupled, 0, ancilla_obs, level)?;
                let later = u.evolve_trailing(&branch, dt)?;
                for p_b in factor_probabilities(&later, site_j, &b_obs)? {
                    out.push(p_a * p_b);
                }
            }
            out
        }
    };
    OutcomeDistribution::new(
        SNIMP_REGISTERS.iter().map(|s| s.to_string()).collect(),
        vec![ancilla_obs.values().to_vec(), b_obs.values().to_vec()],
        probabilities,
    )
}

/// Exact joint distribution `P(m_a, m_b)` of the ancilla and site `j`.
pub fn snimp_distribution(system: &System, run: &Snimp) -> Result<OutcomeDistribution> {
    let reg = system.register();
    let axis = run.query.axis_a;
    let phi = build_ancilla_state(&run.ancilla, reg.spin(), axis)?;
    let ancilla_obs = LocalObservable::for_register(reg, axis);
    let b = coupling_operator(system, run.coupling, axis)?;
    let a = spin_component(reg.spin(), axis, reg.convention())?;
    let (coupling, renormalize) = match run.form {
        CouplingForm::Exact => (coupling_unitary(&b, &a, run.lambda)?, false),
        CouplingForm::Linearized => (linearized_coupling(&b, &a, run.lambda)?, true),
    };
    coupled_distribution(system, &run.query, &phi, &ancilla_obs, coupling.matrix(), run.timing, renormalize)
}

/// f-factors of the configured ancilla state on `system`'s register.
pub fn snimp_f_factors(system: &System, ancilla: &AncillaStateSpec, axis: crate::spin::Axis) -> Result<FFactors> {
    let reg = system.register();
    let phi = build_ancilla_state(ancilla, reg.spin(), axis)?;
    let m = LocalObservable::for_register(reg, axis);
    let levels = reg.local_dimension();
    Ok(FFactors {
        f1: f_imaginary_part(levels, &phi, &m, &coupling_operator(system, CouplingChoice::B1, axis)?)?,
        f2: f_real_part(levels, &phi, &m, &coupling_operator(system, CouplingChoice::B2, axis)?)?,
    })
}

/// Both sNIMP distributions (for `B^(1)` and `B^(2)`) of one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct SnimpPair {
    pub b1: OutcomeDistribution,
    pub b2: OutcomeDistribution,
    pub components: EstimatorComponents,
}

fn collect_pair(system: &System, base: &Snimp) -> Result<SnimpPair> {
    let reg = system.register();
    let b1 = snimp_distribution(system, &Snimp { coupling: CouplingChoice::B1, ..base.clone() })?;
    let b2 = snimp_distribution(system, &Snimp { coupling: CouplingChoice::B2, ..base.clone() })?;
    let components = EstimatorComponents {
        c1: b1.correlate(),
        c2: b2.correlate(),
        factors: snimp_f_factors(system, &base.ancilla, base.query.axis_a)?,
        lambda: base.lambda,
        levels: reg.local_dimension(),
        convention: reg.convention(),
    };
    Ok(SnimpPair { b1, b2, components })
}

/// Runs the pipeline for both couplings and collects the estimator inputs.
///
/// Unbalanced ancilla states add a background `⟨S^a⟩_φ ⟨S_j^b(t2)⟩` to both
/// correlations, so they are rejected here; see [`snimp_estimate_with_background`].
pub fn snimp_pair(system: &System, base: &Snimp) -> Result<SnimpPair> {
    let polarization = base.ancilla.polarization(system.register().spin())?;
    if polarization.abs() > 1e-12 {
        return Err(Error::UnbalancedAncilla {
            expectation: polarization,
        });
    }
    collect_pair(system, base)
}

/// The all-orders sNIMP estimator `C^λ`.
pub fn snimp_estimate(system: &System, base: &Snimp) -> Result<C64> {
    if base.lambda == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    let c = snimp_pair(system, base)?.components;
    assemble(c.c1, c.c2, c.factors, c.lambda, c.levels)
}

/// `C^λ` for any ancilla state, subtracting the background with the exact `⟨S_j^b(t2)⟩`.
pub fn snimp_estimate_with_background(system: &System, base: &Snimp) -> Result<C64> {
    if base.lambda == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    let reg = system.register();
    let polarization = base.ancilla.polarization(reg.spin())? * reg.scale();
    let later = system.propagator().evolve(system.state(), base.query.t2)?;
    let sb = later.expectation(&system.component(base.query.site_j, base.query.axis_b)?)?.re;
    let c = collect_pair(system, base)?.components;
    let background = polarization * sb;
    assemble(c.c1 - background, c.c2 - background, c.factors, c.lambda, c.levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{HamiltonianSpec, SiteAngles, SystemStateSpec};
    use crate::operator::max_abs;
    use crate::oracle::{closed_form_c_lambda_two_spin, TwoSpinParams};
    use crate::spin::{Axis, Spin, SpinRegister};
    use std::f64::consts::PI;

    fn two_spins() -> (System, TwoSpinParams) {
        let p = TwoSpinParams {
            alpha1: PI / 3.0,
            alpha2: PI / 3.0,
            theta1: PI / 7.0,
            theta2: PI / 5.0,
            t1: 1.0,
            t2: 10.0,
        };
        let reg = SpinRegister::qubits(2, 0).unwrap();
        let state = SystemStateSpec::Angles(vec![
            SiteAngles { alpha: p.alpha1, theta: p.theta1 },
            SiteAngles { alpha: p.alpha2, theta: p.theta2 },
        ]);
        (System::new(&reg, &HamiltonianSpec::IsingXx, &state).unwrap(), p)
    }

    fn zz(p: &TwoSpinParams) -> CorrelationQuery {
        CorrelationQuery::new(0, Axis::Z, p.t1, 1, Axis::Z, p.t2)
    }

    #[test]
    fn zero_coupling_is_identity() {
        let b = coupling_b1(Spin::HALF, Axis::Z, crate::spin::Convention::Pauli).unwrap();
        let u = coupling_unitary(&b, &b, 0.0).unwrap();
        assert!(u.max_abs_diff(&Operator::identity(4)) < 1e-15);
    }

    #[test]
    fn zz_coupling_closed_form() {
        let z = coupling_b1(Spin::HALF, Axis::Z, crate::spin::Convention::Pauli).unwrap();
        let zz = z.kron(&z);
        for lambda in [0.1_f64, 0.42, 1.3] {
            let u = coupling_unitary(&z, &z, lambda).unwrap();
            let expected = DMatrix::identity(4, 4) * C64::new(lambda.cos(), 0.0) - zz.matrix() * C64::new(0.0, lambda.sin());
            assert!(max_abs(&(u.matrix() - expected)) < 1e-14);
        }
    }

    #[test]
    fn linearization_error_is_second_order() {
        let spin = Spin::ONE;
        let b = coupling_b2(spin, Axis::X, crate::spin::Convention::SpinS).unwrap();
        let a = spin_component(spin, Axis::Y, crate::spin::Convention::SpinS).unwrap();
        let mut ratios = Vec::new();
        for lambda in [0.2, 0.1, 0.05, 0.025] {
            let exact = coupling_unitary(&b, &a, lambda).unwrap();
            let lin = linearized_coupling(&b, &a, lambda).unwrap();
            ratios.push(exact.max_abs_diff(&lin) / (lambda * lambda));
        }
        assert!(ratios.windows(2).all(|w| (w[0] / w[1] - 1.0).abs() < 0.1), "{ratios:?}");
    }

    #[test]
    fn zero_lambda_factorizes() {
        let (sys, p) = two_spins();
        let d = snimp_distribution(&sys, &Snimp::new(zz(&p), 0.0, CouplingChoice::B1)).unwrap();
        let site = crate::measurement::born_probabilities(
            &sys.propagator().evolve(sys.state(), p.t2).unwrap(),
            sys.register(),
            1,
            Axis::Z,
        )
        .unwrap();
        for (k, prob) in d.probabilities().iter().enumerate() {
            assert!((prob - 0.5 * site[k % 2].1).abs() < 1e-12);
        }
    }

    #[test]
    fn immediate_equals_deferred() {
        let (sys, p) = two_spins();
        for lambda in [0.0, 0.3, 0.9] {
            for choice in [CouplingChoice::B1, CouplingChoice::B2] {
                let base = Snimp::new(zz(&p), lambda, choice);
                let d = snimp_distribution(&sys, &base).unwrap();
                let i = snimp_distribution(&sys, &base.clone().with_timing(Timing::Immediate)).unwrap();
                for (x, y) in d.probabilities().iter().zip(i.probabilities()) {
                    assert!((x - y).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn all_orders_estimator_matches_closed_form() {
        let (sys, p) = two_spins();
        for lambda in [0.05, 0.1, 0.42, 0.9] {
            let c = snimp_estimate(&sys, &Snimp::new(zz(&p), lambda, CouplingChoice::B1)).unwrap();
            assert!((c - closed_form_c_lambda_two_spin(&p, lambda)).norm() < 1e-10, "{lambda}");
        }
    }

    #[test]
    fn small_coupling_recovers_imaginary_part() {
        let (sys, p) = two_spins();
        let c = crate::oracle::exact_correlation(&sys, &zz(&p)).unwrap();
        let lambda = 1e-4;
        let pair = snimp_pair(&sys, &Snimp::new(zz(&p), lambda, CouplingChoice::B1)).unwrap();
        let f1 = pair.components.factors.f1;
        let predicted = -2.0 * lambda * f1 * c.im / 2.0;
        assert!((pair.components.c1 - predicted).abs() < 1e-8);
    }

    #[test]
    fn unbalanced_ancilla_needs_oracle() {
        let (sys, p) = two_spins();
        let spec = AncillaStateSpec::Coefficients(vec![C64::new(0.8, 0.0), C64::new(0.6, 0.0)]);
        let run = Snimp::new(zz(&p), 0.2, CouplingChoice::B1).with_ancilla(spec);
        assert!(matches!(snimp_estimate(&sys, &run), Err(Error::UnbalancedAncilla { .. })));
        assert!(snimp_distribution(&sys, &run).is_ok());
        let exact = crate::oracle::exact_correlation(&sys, &zz(&p)).unwrap();
        // the background leaves an error linear in λ
        let err = |lambda| (snimp_estimate_with_background(&sys, &Snimp { lambda, ..run.clone() }).unwrap() - exact).norm();
        let (coarse, fine) = (err(1e-3), err(1e-4));
        assert!(coarse < 1e-3 && (coarse / fine - 10.0).abs() < 1.0, "{coarse} {fine}");
    }
}
