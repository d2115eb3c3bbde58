//! Two noninvasive measurements at `t1` and `t2`, with a projective readout of the system at `t3`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{joint_probabilities, LocalObservable};
use crate::models::{build_ancilla_state, AncillaStateSpec, System};
use crate::operator::{coupling_b1, coupling_b2, spin_component, Operator};
use crate::oracle::{two_time_correlation, CorrelationQuery};
use crate::protocols::distribution::OutcomeDistribution;
use crate::protocols::snimp::{coupling_unitary, CouplingChoice};
use crate::spin::{Axis, Convention, Spin};
use crate::state::{apply_factors, StateVector};
use crate::C64;

pub const CNIMP_REGISTERS: [&str; 4] = ["ancilla_1", "ancilla_2", "site_i", "site_j"];
const ANC1: usize = 0;
const ANC2: usize = 1;
const SITE_I: usize = 2;
const SITE_J: usize = 3;

/// Query with `t3`, two coupling strengths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cnimp {
    pub query: CorrelationQuery,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Cnimp {
    pub fn new(query: CorrelationQuery, lambda1: f64, lambda2: f64) -> Self {
        Cnimp { query, lambda1, lambda2 }
    }

    fn t3(&self) -> Result<f64> {
        self.query
            .t3
            .ok_or_else(|| Error::InvalidQuery("cNIMP needs a third time t3".into()))
    }
}

fn check(system: &System, run: &Cnimp) -> Result<f64> {
    let reg = system.register();
    if reg.spin() != Spin::HALF || reg.convention() != Convention::Pauli {
        return Err(Error::Unsupported("cNIMP is implemented for Pauli spin-1/2 registers".into()));
    }
    let t3 = run.t3()?;
    run.query.validate(reg.system_site_count())?;
    if run.query.site_i == run.query.site_j {
        return Err(Error::InvalidQuery("cNIMP reads out sites i and j together, they must differ".into()));
    }
    Ok(t3)
}

fn coupling(choice: CouplingChoice, axis: Axis) -> Result<Operator> {
    match choice {
        CouplingChoice::B1 => coupling_b1(Spin::HALF, axis, Convention::Pauli),
        CouplingChoice::B2 => coupling_b2(Spin::HALF, axis, Convention::Pauli),
    }
}

/// Exact distribution over both ancillas and sites `i`, `j` at `t3`.
///
/// Ancilla 1 starts uniform in the `a` basis and couples to site `i` at `t1`;
/// ancilla 2 starts uniform in the `b` basis and couples to site `j` at `t2`.
pub fn cnimp_distribution(
    system: &System,
    run: &Cnimp,
    b1: CouplingChoice,
    b2: CouplingChoice,
) -> Result<OutcomeDistribution> {
    let t3 = check(system, run)?;
    let q = &run.query;
    let reg = system.register();
    let u = system.propagator();
    let phi1 = build_ancilla_state(&AncillaStateSpec::Uniform, Spin::HALF, q.axis_a)?;
    let phi2 = build_ancilla_state(&AncillaStateSpec::Uniform, Spin::HALF, q.axis_b)?;
    let psi1 = u.evolve(system.state(), q.t1)?;
    let state = StateVector::product(&[phi1, phi2, psi1])?;
    let dims = state.dims().to_vec();
    let (fi, fj) = (2 + q.site_i, 2 + q.site_j);

    let a = spin_component(Spin::HALF, q.axis_a, Convention::Pauli)?;
    let b = spin_component(Spin::HALF, q.axis_b, Convention::Pauli)?;
    let u1 = coupling_unitary(&coupling(b1, q.axis_a)?, &a, run.lambda1)?;
    let u2 = coupling_unitary(&coupling(b2, q.axis_b)?, &b, run.lambda2)?;

    let v = apply_factors(state.amplitudes(), &dims, u1.matrix(), &[0, fi])?;
    let v = u.evolve_trailing(&StateVector::new(v, dims.clone())?, q.t2 - q.t1)?;
    let v = apply_factors(v.amplitudes(), &dims, u2.matrix(), &[1, fj])?;
    let v = u.evolve_trailing(&StateVector::new(v, dims.clone())?, t3 - q.t2)?;

    let obs_a = LocalObservable::for_register(reg, q.axis_a);
    let obs_b = LocalObservable::for_register(reg, q.axis_b);
    let probabilities = joint_probabilities(&v, &[(0, &obs_a), (1, &obs_b), (fi, &obs_a), (fj, &obs_b)])?;
    OutcomeDistribution::new(
        CNIMP_REGISTERS.iter().map(|s| s.to_string()).collect(),
        vec![
            obs_a.values().to_vec(),
            obs_b.values().to_vec(),
            obs_a.values().to_vec(),
            obs_b.values().to_vec(),
        ],
        probabilities,
    )
}

/// The three runs that together give all six components.
#[derive(Clone, Debug, PartialEq)]
pub struct CnimpRuns {
    /// `B1 = σ^a`, `B2` quadrature.
    pub run1: OutcomeDistribution,
    /// Both quadratures.
    pub run2: OutcomeDistribution,
    /// `B1` quadrature, `B2 = σ^b`.
    pub run3: OutcomeDistribution,
}

/// `(B1, B2)` of runs 1, 2 and 3.
pub const CNIMP_RUN_COUPLINGS: [(CouplingChoice, CouplingChoice); 3] = [
    (CouplingChoice::B1, CouplingChoice::B2),
    (CouplingChoice::B2, CouplingChoice::B2),
    (CouplingChoice::B2, CouplingChoice::B1),
];

pub fn cnimp_runs(system: &System, run: &Cnimp) -> Result<CnimpRuns> {
    let [r1, r2, r3] = CNIMP_RUN_COUPLINGS.map(|(b1, b2)| cnimp_distribution(system, run, b1, b2));
    Ok(CnimpRuns {
        run1: r1?,
        run2: r2?,
        run3: r3?,
    })
}

/// Estimates of `C(t1,t2)`, `C(t1,t3)` and `⟨σ_j^b(t2) σ_i^a(t3)⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CnimpEstimates {
    pub c12: C64,
    pub c13: C64,
    pub c23: C64,
}

/// Which run supplies the real and imaginary part of each estimator, and the registers it pairs.
pub(crate) struct EstimatorPlan {
    pub re_run: usize,
    pub im_run: usize,
    pub pair: [usize; 2],
}

pub(crate) const PLANS: [EstimatorPlan; 3] = [
    EstimatorPlan { re_run: 1, im_run: 0, pair: [ANC1, ANC2] },
    EstimatorPlan { re_run: 1, im_run: 0, pair: [ANC1, SITE_J] },
    EstimatorPlan { re_run: 1, im_run: 2, pair: [ANC2, SITE_I] },
];

/// Prefactors multiplying `𝒞_re + i 𝒞_im` for each estimator.
pub(crate) fn amplification(lambda1: f64, lambda2: f64) -> [f64; 3] {
    [
        1.0 / (4.0 * lambda1 * lambda2),
        -1.0 / (2.0 * lambda1),
        -1.0 / (2.0 * lambda2),
    ]
}

/// Assembles the three estimators from per-run pair correlations `corr[run][plan]`.
pub(crate) fn assemble_cnimp(corr: impl Fn(usize, &[usize; 2]) -> f64, lambda1: f64, lambda2: f64) -> Result<CnimpEstimates> {
    if lambda1 == 0.0 || lambda2 == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    let amp = amplification(lambda1, lambda2);
    let mut out = [C64::new(0.0, 0.0); 3];
    for (k, plan) in PLANS.iter().enumerate() {
        out[k] = C64::new(corr(plan.re_run, &plan.pair), corr(plan.im_run, &plan.pair)) * amp[k];
    }
    Ok(CnimpEstimates {
        c12: out[0],
        c13: out[1],
        c23: out[2],
    })
}

pub fn cnimp_estimators(runs: &CnimpRuns, lambda1: f64, lambda2: f64) -> Result<CnimpEstimates> {
    let dists = [&runs.run1, &runs.run2, &runs.run3];
    assemble_cnimp(|run, pair| dists[run].correlate_registers(pair), lambda1, lambda2)
}

pub fn cnimp_estimate(system: &System, run: &Cnimp) -> Result<CnimpEstimates> {
    if run.lambda1 == 0.0 || run.lambda2 == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    cnimp_estimators(&cnimp_runs(system, run)?, run.lambda1, run.lambda2)
}

/// The exact values the three estimators approach.
pub fn cnimp_exact(system: &System, run: &Cnimp) -> Result<CnimpEstimates> {
    let t3 = check(system, run)?;
    let q = &run.query;
    Ok(CnimpEstimates {
        c12: two_time_correlation(system, q.site_i, q.axis_a, q.t1, q.site_j, q.axis_b, q.t2)?,
        c13: two_time_correlation(system, q.site_i, q.axis_a, q.t1, q.site_j, q.axis_b, t3)?,
        c23: two_time_correlation(system, q.site_j, q.axis_b, q.t2, q.site_i, q.axis_a, t3)?,
    })
}
