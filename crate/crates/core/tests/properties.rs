use dyncorr::measurement::{born_probabilities, LocalObservable};
use dyncorr::models::System;
use dyncorr::operator::Operator;
use dyncorr::oracle::{exact_correlation, CorrelationQuery};
use dyncorr::protocols::projective::projective_correlate;
use dyncorr::protocols::snimp::{snimp_distribution, CouplingChoice, Snimp, Timing};
use dyncorr::sampling::{sample, sample_sharded};
use dyncorr::spin::{Axis, Convention, Spin, SpinRegister};
use dyncorr::state::StateVector;
use dyncorr::C64;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), len).prop_map(|v| v.into_iter().map(|(a, b)| C64::new(a, b)).collect())
}

fn system(spin: Spin, sites: usize) -> impl Strategy<Value = System> {
    let conv = if spin == Spin::HALF { Convention::Pauli } else { Convention::SpinS };
    let reg = SpinRegister::new(sites, spin, 0, conv).unwrap();
    let d = reg.dimension();
    (complex_vec(d * d), complex_vec(d))
        .prop_filter("nonzero state", |(_, s)| s.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3)
        .prop_map(move |(h, s)| {
            let m = DMatrix::from_vec(d, d, h);
            let h = Operator::hermitian((&m + m.adjoint()) * C64::new(0.5, 0.0)).unwrap();
            let psi = StateVector::normalized(DVector::from_vec(s), reg.dims()).unwrap();
            System::from_parts(&reg, h, psi).unwrap()
        })
}

fn axis() -> impl Strategy<Value = Axis> {
    prop::sample::select(Axis::ALL.to_vec())
}

fn query(sites: usize) -> impl Strategy<Value = CorrelationQuery> {
    (0..sites, axis(), 0.0..3.0f64, 0..sites, axis(), 0.0..3.0f64)
        .prop_map(|(i, a, t1, j, b, dt)| CorrelationQuery::new(i, a, t1, j, b, t1 + dt))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evolution_is_unitary(sys in system(Spin::HALF, 3), t in 0.0..20.0f64) {
        let out = sys.propagator().evolve(sys.state(), t).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evolution_composes(sys in system(Spin::HALF, 2), t1 in -5.0..5.0f64, t2 in -5.0..5.0f64) {
        let u = sys.propagator();
        let a = u.evolve(&u.evolve(sys.state(), t1).unwrap(), t2).unwrap();
        let b = u.evolve(sys.state(), t1 + t2).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-10);
    }

    #[test]
    fn born_probabilities_are_complete(sys in system(Spin::ONE, 2), site in 0..2usize, a in axis()) {
        let p: f64 = born_probabilities(sys.state(), sys.register(), site, a).unwrap().iter().map(|x| x.1).sum();
        prop_assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn immediate_readout_equals_deferred(sys in system(Spin::HALF, 2), q in query(2), lambda in 0.0..1.0f64, b2 in any::<bool>()) {
        let choice = if b2 { CouplingChoice::B2 } else { CouplingChoice::B1 };
        let run = Snimp::new(q, lambda, choice);
        let d = snimp_distribution(&sys, &run).unwrap();
        let i = snimp_distribution(&sys, &run.clone().with_timing(Timing::Immediate)).unwrap();
        let total: f64 = d.probabilities().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for (x, y) in d.probabilities().iter().zip(i.probabilities()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn ancilla_correlation_is_bounded(sys in system(Spin::ONE, 2), q in query(2), lambda in -1.0..1.0f64) {
        let d = snimp_distribution(&sys, &Snimp::new(q, lambda, CouplingChoice::B1)).unwrap();
        prop_assert!(d.correlate().abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn projective_spin_half_gives_real_part(sys in system(Spin::HALF, 3), q in query(3)) {
        let proj = projective_correlate(&sys, &q).unwrap();
        prop_assert!((proj - exact_correlation(&sys, &q).unwrap().re).abs() < 1e-10);
    }

    #[test]
    fn disjoint_site_operators_commute(a in axis(), b in axis()) {
        let reg = SpinRegister::qubits(3, 0).unwrap();
        let x = dyncorr::operator::site_component(&reg, 0, a).unwrap();
        let y = dyncorr::operator::site_component(&reg, 2, b).unwrap();
        prop_assert!(x.commutator(&y).unwrap().operator_norm() < 1e-14);
    }

    #[test]
    fn sampled_counts_sum_to_n(sys in system(Spin::HALF, 2), q in query(2), n in 1u64..5000, seed in any::<u64>(), shards in 1u64..9) {
        let d = snimp_distribution(&sys, &Snimp::new(q, 0.3, CouplingChoice::B1)).unwrap();
        let t = sample_sharded(&d, n, seed, 0, shards).unwrap();
        prop_assert_eq!(t.counts().iter().sum::<u64>(), n);
        prop_assert_eq!(t.total(), n);
        for (c, p) in t.counts().iter().zip(d.probabilities()) {
            if *p == 0.0 {
                prop_assert_eq!(*c, 0);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>()) {
        let obs = LocalObservable::spin(Spin::ONE, Axis::Z, Convention::SpinS).unwrap();
        let d = dyncorr::protocols::OutcomeDistribution::new(
            vec!["a".into()],
            vec![obs.values().to_vec()],
            vec![0.2, 0.5, 0.3],
        ).unwrap();
        prop_assert_eq!(sample(&d, 1000, seed).unwrap(), sample(&d, 1000, seed).unwrap());
    }
}
