//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use dyncorr::bounds::{
    cnimp_error_surface, default_cnimp_grid, default_lambda_grid, default_sample_sizes, lambda_star,
    protocol_efficiency_compare, sweep_lambda, CnimpTarget,
};
use dyncorr::measurement::LocalObservable;
use dyncorr::models::{HamiltonianSpec, SiteAngles, System, SystemStateSpec};
use dyncorr::operator::{spin_component, Operator};
use dyncorr::oracle::{
    closed_form_c_lambda_two_spin, closed_form_c_two_spin, closed_form_intro_example, closed_form_systematic_error,
    exact_correlation, CorrelationQuery, TwoSpinParams,
};
use dyncorr::protocols::estimator::assemble_estimator;
use dyncorr::protocols::projective::{gamma_operator, gamma_operator_with, projective_correlate};
use dyncorr::protocols::snimp::{snimp_distribution, snimp_estimate, snimp_pair, CouplingChoice, Snimp, Timing};
use dyncorr::protocols::tpm::{tpm_component, Component};
use dyncorr::protocols::rotation_protocol;
use dyncorr::sampling::{sample, sample_sharded};
use dyncorr::spin::{Axis, Convention, Spin, SpinRegister};
use dyncorr::state::StateVector;
use dyncorr::C64;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn two_spin_params(t1: f64, t2: f64) -> TwoSpinParams {
    TwoSpinParams { alpha1: PI / 3.0, alpha2: PI / 3.0, theta1: PI / 7.0, theta2: PI / 5.0, t1, t2 }
}

fn angles_system(p: &TwoSpinParams) -> System {
    let reg = SpinRegister::qubits(2, 0).unwrap();
    let state = SystemStateSpec::Angles(vec![
        SiteAngles { alpha: p.alpha1, theta: p.theta1 },
        SiteAngles { alpha: p.alpha2, theta: p.theta2 },
    ]);
    System::new(&reg, &HamiltonianSpec::IsingXx, &state).unwrap()
}

fn zz(t1: f64, t2: f64) -> CorrelationQuery {
    CorrelationQuery::new(0, Axis::Z, t1, 1, Axis::Z, t2)
}

fn random_c(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_system(rng: &mut ChaCha8Rng, spin: Spin, sites: usize, convention: Convention) -> System {
    let reg = SpinRegister::new(sites, spin, 0, convention).unwrap();
    let d = reg.dimension();
    let m = DMatrix::from_fn(d, d, |_, _| random_c(rng));
    let h = Operator::hermitian((&m + m.adjoint()) * C64::new(0.5, 0.0)).unwrap();
    let psi = StateVector::normalized(DVector::from_fn(d, |_, _| random_c(rng)), reg.dims()).unwrap();
    System::from_parts(&reg, h, psi).unwrap()
}

fn random_axis(rng: &mut ChaCha8Rng) -> Axis {
    Axis::ALL[rng.random_range(0..3)]
}

fn random_query(rng: &mut ChaCha8Rng, sites: usize, distinct: bool) -> CorrelationQuery {
    let i = rng.random_range(0..sites);
    let mut j = rng.random_range(0..sites);
    while distinct && j == i {
        j = rng.random_range(0..sites);
    }
    let t1 = rng.random_range(0.0..3.0);
    let t2 = t1 + rng.random_range(0.0..3.0);
    CorrelationQuery::new(i, random_axis(rng), t1, j, random_axis(rng), t2)
}

fn a1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let t1 = rng.random_range(0.0..5.0);
        let p = TwoSpinParams {
            alpha1: rng.random_range(0.0..PI),
            alpha2: rng.random_range(0.0..PI),
            theta1: rng.random_range(0.0..2.0 * PI),
            theta2: rng.random_range(0.0..2.0 * PI),
            t1,
            t2: t1 + rng.random_range(0.0..10.0),
        };
        let c = exact_correlation(&angles_system(&p), &zz(p.t1, p.t2)).unwrap();
        worst = worst.max((c - closed_form_c_two_spin(&p)).norm());

        let (alpha, beta) = (random_c(&mut rng), random_c(&mut rng));
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        let psi = vec![alpha / norm, beta / norm];
        let reg = SpinRegister::qubits(2, 0).unwrap();
        let sys = System::new(&reg, &HamiltonianSpec::IsingXx, &SystemStateSpec::Product(vec![psi.clone(), psi])).unwrap();
        let t = rng.random_range(0.0..10.0);
        let c = exact_correlation(&sys, &zz(0.0, t)).unwrap();
        worst = worst.max((c - closed_form_intro_example(alpha / norm, beta / norm, t)).norm());
    }
    outcome(worst <= 1e-10, format!("max deviation {worst:.2e} over 100 draws of each closed form"))
}

fn a2() -> Outcome {
    let p = two_spin_params(1.0, 10.0);
    let sys = angles_system(&p);
    let exact = exact_correlation(&sys, &zz(1.0, 10.0)).unwrap();
    let mut worst: f64 = 0.0;
    for lambda in [0.05, 0.42, 0.9] {
        let c = snimp_estimate(&sys, &Snimp::new(zz(1.0, 10.0), lambda, CouplingChoice::B1)).unwrap();
        worst = worst.max((c - closed_form_c_lambda_two_spin(&p, lambda)).norm());
        worst = worst.max(((exact - c).norm() - closed_form_systematic_error(&p, lambda)).abs());
    }
    outcome(worst <= 1e-10, format!("max deviation {worst:.2e} for estimator and systematic error"))
}

fn a3() -> Outcome {
    let p = two_spin_params(1.0, 10.0);
    let sys = angles_system(&p);
    let base = Snimp::new(zz(1.0, 10.0), 0.1, CouplingChoice::B1);
    let (star, min) = lambda_star(&sys, &base, 10_000, &default_lambda_grid()).unwrap();
    let pass = (min - 0.33).abs() <= 0.02 && (star - 0.42).abs() <= 0.02;
    outcome(pass, format!("minimum {min:.4} at lambda* = {star:.3} (target 0.33 at 0.42)"))
}

fn a4() -> Outcome {
    let p = two_spin_params(1.0, 10.0);
    let sys = angles_system(&p);
    let base = Snimp::new(zz(1.0, 10.0), 0.1, CouplingChoice::B1);
    let grid = default_lambda_grid();
    let (mut below, mut total) = (0usize, 0usize);
    for seed in 0..20 {
        let sweep = sweep_lambda(&sys, &base, 10_000, &grid, Some(seed)).unwrap();
        for pt in &sweep.points {
            total += 1;
            if pt.report.measured_dev.unwrap() < pt.report.eps_tot_bound {
                below += 1;
            }
        }
    }
    let frac = below as f64 / total as f64;
    outcome(frac >= 0.9, format!("{below}/{total} sampled points below the bound ({:.1}%)", 100.0 * frac))
}

fn a5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut worst_gamma: f64 = 0.0;
    for k in 0..200 {
        let sites = 2 + k % 2;
        let sys = random_system(&mut rng, Spin::HALF, sites, Convention::Pauli);
        let q = random_query(&mut rng, sites, false);
        let proj = projective_correlate(&sys, &q).unwrap();
        worst = worst.max((proj - exact_correlation(&sys, &q).unwrap().re).abs());
        if k < 20 && q.site_i != q.site_j {
            worst_gamma = worst_gamma.max(gamma_operator(&sys, &q).unwrap().deviation);
        }
    }
    let spin_one = random_system(&mut rng, Spin::ONE, 2, Convention::SpinS);
    let q = CorrelationQuery::new(0, Axis::Z, 0.4, 1, Axis::X, 1.3);
    let g = gamma_operator(&spin_one, &q).unwrap();
    let sz = spin_component(Spin::ONE, Axis::Z, Convention::SpinS).unwrap();
    let two_level = sz.compose(&sz).unwrap().scaled(2.0).into_matrix() - DMatrix::identity(3, 3);
    let obs = LocalObservable::from_hermitian(&Operator::hermitian(two_level).unwrap()).unwrap();
    let degenerate = gamma_operator_with(&spin_one, &q, &obs).unwrap();
    let pass = worst <= 1e-10 && worst_gamma <= 1e-10 && g.deviation > 1e-6 && degenerate.deviation <= 1e-10;
    outcome(
        pass,
        format!(
            "max |Cproj - Re C| {worst:.2e}; spin-1/2 Gamma deviation {worst_gamma:.2e}; spin-1 {:.3e}; two-level spin-1 {:.2e}",
            g.deviation, degenerate.deviation
        ),
    )
}

fn a6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst, mut spread): (f64, f64) = (0.0, 0.0);
    for k in 0..100 {
        let sites = 2 + k % 2;
        let sys = random_system(&mut rng, Spin::HALF, sites, Convention::Pauli);
        let q = random_query(&mut rng, sites, false);
        let im = exact_correlation(&sys, &q).unwrap().im;
        let values: Vec<f64> = [PI / 6.0, PI / 2.0, 3.0 * PI / 2.0]
            .iter()
            .map(|&th| rotation_protocol(&sys, &q, th).unwrap())
            .collect();
        for v in &values {
            worst = worst.max((v - im).abs());
            spread = spread.max((v - values[0]).abs());
        }
    }
    outcome(worst <= 1e-10 && spread <= 1e-10, format!("max |rotation - Im C| {worst:.2e}, angle spread {spread:.2e}"))
}

fn a7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let (spin, conv) = if k % 5 == 4 { (Spin::ONE, Convention::SpinS) } else { (Spin::HALF, Convention::Pauli) };
        let sys = random_system(&mut rng, spin, 2, conv);
        let q = random_query(&mut rng, 2, false);
        let choice = if k % 2 == 0 { CouplingChoice::B1 } else { CouplingChoice::B2 };
        let run = Snimp::new(q, rng.random_range(0.0..1.0), choice);
        let d = snimp_distribution(&sys, &run).unwrap();
        let i = snimp_distribution(&sys, &run.clone().with_timing(Timing::Immediate)).unwrap();
        for (x, y) in d.probabilities().iter().zip(i.probabilities()) {
            worst = worst.max((x - y).abs());
        }
    }
    outcome(worst <= 1e-12, format!("max probability difference {worst:.2e} over 50 configs"))
}

fn a8() -> Outcome {
    let p = two_spin_params(0.0, 1.0);
    let sys = angles_system(&p);
    let q = zz(0.0, 1.0).with_t3(10.0);
    let grid = default_cnimp_grid();
    let surface = cnimp_error_surface(&sys, &q, &grid).unwrap();
    let at = |t: CnimpTarget| {
        let m = surface.model(t);
        let (k, v) = m.argmin(1e5);
        (v, m.points[k].0, m.points[k].1.unwrap())
    };
    let (v12, a12, b12) = at(CnimpTarget::C12);
    let (v13, a13, b13) = at(CnimpTarget::C13);
    let pass = (v12 - 0.37).abs() <= 0.03
        && (a12 - 0.40).abs() <= 0.03
        && (b12 - 0.41).abs() <= 0.03
        && (v13 - 0.25).abs() <= 0.03
        && (a13 - 0.37).abs() <= 0.03
        && b13.abs() <= 0.03;
    outcome(
        pass,
        format!("C(t1,t2) minimum {v12:.4} at ({a12:.2}, {b12:.2}); C(t1,t3) minimum {v13:.4} at ({a13:.2}, {b13:.2})"),
    )
}

fn a9() -> Outcome {
    let p = two_spin_params(0.0, 1.0);
    let sys = angles_system(&p);
    let q = zz(0.0, 1.0).with_t3(10.0);
    let rows = protocol_efficiency_compare(
        &sys,
        &q,
        0.1,
        &default_sample_sizes(),
        &default_lambda_grid(),
        &default_cnimp_grid(),
    )
    .unwrap();
    let find = |protocol: &str| {
        rows.iter()
            .find(|r| r.target == CnimpTarget::C12.name() && r.protocol == protocol)
            .unwrap()
            .total_measurements
    };
    let (s, c) = (find("sNIMP"), find("cNIMP"));
    let within = |x: f64, target: f64| x / target <= 3.0 && target / x <= 3.0;
    outcome(
        within(s, 2e6) && within(c, 2e8),
        format!("measurements for 10% on C(t1,t2): sNIMP {s:.2e} (target 2e6), cNIMP {c:.2e} (target 2e8)"),
    )
}

fn a10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let sys = random_system(&mut rng, Spin::HALF, 2, Convention::Pauli);
        let q = random_query(&mut rng, 2, false);
        let lambda = rng.random_range(0.05..1.0);
        for a in Axis::ALL {
            let q = CorrelationQuery { axis_a: a, ..q };
            let pair = snimp_pair(&sys, &Snimp::new(q, lambda, CouplingChoice::B1)).unwrap();
            let direct = assemble_estimator(&pair.components).unwrap();
            for component in [Component::Re, Component::Im] {
                let (c, f) = tpm_component(&sys, &q, lambda, component).unwrap();
                let rotated = -c / (f * lambda);
                let reference = match component {
                    Component::Re => direct.re,
                    Component::Im => direct.im,
                };
                worst = worst.max((rotated - reference).abs());
            }
        }
    }
    outcome(worst <= 1e-10, format!("max component difference {worst:.2e} over 6 rows x 10 configs"))
}

fn a11() -> Outcome {
    let sys = angles_system(&two_spin_params(1.0, 10.0));
    let d = snimp_distribution(&sys, &Snimp::new(zz(1.0, 10.0), 0.42, CouplingChoice::B1)).unwrap();
    let same = sample(&d, 100_000, 42).unwrap() == sample(&d, 100_000, 42).unwrap();
    let single = sample_sharded(&d, 100_000, 42, 0, 1).unwrap() == sample(&d, 100_000, 42).unwrap();
    let sharded = sample_sharded(&d, 100_001, 42, 0, 7).unwrap();
    let mut manual = vec![0u64; d.len()];
    for k in 0..7u64 {
        let part = sample(&d, 100_001 / 7 + u64::from(k < 100_001 % 7), 42 ^ k).unwrap();
        for (m, c) in manual.iter_mut().zip(part.counts()) {
            *m += c;
        }
    }
    let merged = sharded.counts() == manual.as_slice();
    outcome(same && single && merged, format!("repeatable {same}, single shard equals serial {single}, shard merge {merged}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, fn() -> Outcome); 11] = [
        ("A1", "closed-form oracle agreement", a1),
        ("A2", "all-orders estimator identity", a2),
        ("A3", "single-ancilla optimal coupling", a3),
        ("A4", "Monte Carlo below bound", a4),
        ("A5", "projective real part and Gamma", a5),
        ("A6", "rotation protocol exactness", a6),
        ("A7", "immediate equals deferred readout", a7),
        ("A8", "two-ancilla bound surfaces", a8),
        ("A9", "protocol efficiency comparison", a9),
        ("A10", "rotated fixed coupling equivalence", a10),
        ("A11", "sampling determinism and sharding", a11),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{id:<4} {} {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
