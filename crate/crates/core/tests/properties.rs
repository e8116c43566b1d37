mod common;

use proptest::prelude::*;
use qcorr::covariance::{pauli_covariance_scan, ScanMode};
use qcorr::cuts::{degree_of_correlations, product_distance, random_local_unitaries, Bipartition};
use qcorr::distill::{closed_forms, q_of_fidelity};
use qcorr::instrument::{enumerate_branches, random_instrument};
use qcorr::postulates::{
    run_postulate_scenario, Indicator, Scenario, Transformation, VerdictStatus,
};
use qcorr::work::{
    all_computational_protocol, delta_w_estimate, measure_broadcast_protocol, run_protocol,
    BasisSearch, CommunicationConstraint, ProtocolFamily,
};
use qcorr::{
    make_named_state, LocalObservableList, QuantumState, SingleQubitBasis, SingleQubitObservable,
};

fn random_list(n: usize, rng: &mut rand_chacha::ChaCha8Rng) -> LocalObservableList {
    LocalObservableList::new(
        (0..n)
            .map(|_| {
                let m = common::random_hermitian(rng);
                SingleQubitObservable::new(nalgebra::Matrix2::from_fn(|a, b| m[(a, b)])).unwrap()
            })
            .collect(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn partial_trace_recovers_tensor_factors(n1 in 1usize..=3, n2 in 1usize..=3, seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let a = QuantumState::random_dense(n1, 2, &mut rng).unwrap();
        let b = QuantumState::random_dense(n2, 3, &mut rng).unwrap();
        let ab = a.tensor(&b).unwrap();
        let left: Vec<usize> = (0..n1).collect();
        let right: Vec<usize> = (n1..n1 + n2).collect();
        prop_assert!(ab.partial_trace(&left).unwrap().trace_distance(&a).unwrap() < 1e-10);
        prop_assert!(ab.partial_trace(&right).unwrap().trace_distance(&b).unwrap() < 1e-10);
    }

    #[test]
    fn trace_distance_is_a_bounded_symmetric_metric(n in 1usize..=3, seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let a = QuantumState::random_dense(n, 2, &mut rng).unwrap();
        let b = QuantumState::random_dense(n, 1, &mut rng).unwrap();
        let ab = a.trace_distance(&b).unwrap();
        let ba = b.trace_distance(&a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&ab));
        prop_assert!(a.trace_distance(&a).unwrap() < 1e-10);
    }

    #[test]
    fn product_states_have_no_covariance(n in 2usize..=4, seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let mut s = QuantumState::random_dense(1, 2, &mut rng).unwrap();
        for _ in 1..n {
            s = s.tensor(&QuantumState::random_dense(1, 2, &mut rng).unwrap()).unwrap();
        }
        let scan = pauli_covariance_scan(&s, ScanMode::Full).unwrap();
        prop_assert!(scan.max_abs < 1e-10, "max {} at {}", scan.max_abs, scan.argmax);
    }

    #[test]
    fn structured_and_dense_agree(n in 2usize..=6, f in 0.0f64..=1.0, seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s = make_named_state("w_mixture", n, &[f]).unwrap();
        let d = s.densified().unwrap();
        let obs = random_list(n, &mut rng);
        prop_assert!((s.expectation(&obs).unwrap() - d.expectation(&obs).unwrap()).abs() < 1e-10);
        prop_assert!((qcorr::covariance(&s, &obs).unwrap() - qcorr::covariance(&d, &obs).unwrap()).abs() < 1e-10);
        let keep = [0, n - 1];
        let ps = s.partial_trace(&keep).unwrap();
        let pd = d.partial_trace(&keep).unwrap();
        prop_assert!(ps.trace_distance(&pd).unwrap() < 1e-10);
    }

    #[test]
    fn filter_trades_probability_for_fidelity(n in 3usize..=40, e1 in 0.01f64..0.99, e2 in 0.01f64..0.99) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let a = closed_forms(n, lo).unwrap();
        let b = closed_forms(n, hi).unwrap();
        prop_assert!(a.fidelity >= b.fidelity - 1e-12);
        prop_assert!(a.success_probability <= b.success_probability + 1e-12);
        if a.fidelity < 1.0 - 1e-12 {
            // 1 - F loses relative precision as F approaches 1.
            let rel = 1e-12 + 1e-15 / (1.0 - a.fidelity);
            let inv = q_of_fidelity(n, a.fidelity).unwrap();
            prop_assert!((inv - a.success_probability).abs() <= rel * a.success_probability);
        }
    }

    #[test]
    fn instrument_branches_are_complete(n in 1usize..=3, seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s = QuantumState::random_dense(n, 2, &mut rng).unwrap();
        let instruments: Vec<_> = (0..n).map(|_| random_instrument(&mut rng)).collect();
        let total: f64 = enumerate_branches(&s, &instruments).unwrap().iter().map(|b| b.1).sum();
        prop_assert!((total - 1.0).abs() < 1e-9, "branch total {}", total);
    }

    #[test]
    fn work_respects_entropy_bound(n in 2usize..=3, theta in 0.0f64..3.14, phi in 0.0f64..6.28, seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s = QuantumState::random_dense(n, 1 + (seed % 4) as usize, &mut rng).unwrap();
        let bound = n as f64 - s.entropy_bits().unwrap();
        let basis = SingleQubitBasis::from_angles(theta, phi);
        for protocol in [
            all_computational_protocol(n),
            measure_broadcast_protocol(n, (seed % n as u64) as usize, &basis).unwrap(),
        ] {
            let r = run_protocol(&s, &protocol, &CommunicationConstraint::Unrestricted).unwrap();
            prop_assert!(r.work_bits <= bound + 1e-9, "work {} above {}", r.work_bits, bound);
            prop_assert!(r.work_bits >= -1e-12);
            let sides: f64 = r.sides.iter().map(|sw| sw.work_bits).sum();
            prop_assert!((sides - r.work_bits).abs() < 1e-10);
            for sw in &r.sides {
                prop_assert!((sw.parties.len() as f64 - sw.entropy_bits - sw.work_bits).abs() < 1e-10);
            }
            let branches: f64 = r.transcript.iter().map(|t| t.probability).sum();
            let dist: f64 = r.distribution.values().sum();
            prop_assert!((branches - 1.0).abs() < 1e-10);
            prop_assert!((dist - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn bipartitions_are_canonical(n in 2usize..=8, mask in any::<u32>()) {
        let full = (1u32 << n) - 1;
        let mask = (mask % (full - 1)) + 1;
        let side: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let other: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 0).collect();
        let a = Bipartition::new(n, &side).unwrap();
        let b = Bipartition::new(n, &other).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.left().contains(&0));
        prop_assert_eq!(a.left().len() + a.right().len(), n);
    }

    #[test]
    fn symmetric_states_look_alike_across_equal_cuts(n in 3usize..=6, f in 0.0f64..=1.0) {
        for s in [
            make_named_state("w_mixture", n, &[f]).unwrap(),
            make_named_state("ghz_diag", n, &[]).unwrap(),
        ] {
            let mut by_size: std::collections::BTreeMap<usize, f64> = Default::default();
            for cut in Bipartition::all(n).unwrap() {
                let k = cut.left().len().min(n - cut.left().len());
                let d = product_distance(&s, &cut).unwrap();
                let first = *by_size.entry(k).or_insert(d);
                prop_assert!((first - d).abs() < 1e-10, "cut {} distance {} vs {}", cut, d, first);
            }
        }
    }

    #[test]
    fn local_unitaries_preserve_degree(n in 2usize..=5, seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let (s, largest) = common::random_factorized_state(n, &mut rng).unwrap();
        let t = random_local_unitaries(&s, &mut rng).unwrap();
        prop_assert_eq!(degree_of_correlations(&t, 1e-8).unwrap(), largest);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn ancilla_exchange_raises_degree_by_at_most_k(n in 2usize..=5, k in 1usize..=2, seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let (s, _) = common::random_factorized_state(n, &mut rng).unwrap();
        let parties: Vec<usize> = (0..k.min(n)).map(|i| (seed as usize + i) % n).collect();
        let scenario = Scenario {
            id: "ancilla".into(),
            initial: s,
            transformation: Transformation::AncillaSend { parties: parties.clone(), seed },
        };
        let r = run_postulate_scenario(&Indicator::degree(1e-8), &scenario).unwrap();
        prop_assert_eq!(r.status("Observation 4"), Some(VerdictStatus::Satisfied), "{:?}", r.steps);
        prop_assert!(r.after().unwrap() <= r.before() + parties.len() as f64);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn cut_restriction_never_helps(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s = QuantumState::random_dense(3, 2, &mut rng).unwrap();
        let search = BasisSearch { theta_points: 16, phi_points: 8, refine_rounds: 1, ..BasisSearch::default() };
        let families = [ProtocolFamily::AllComputational, ProtocolFamily::MeasureBroadcast { measuring: None }];
        let dw = delta_w_estimate(&s, &families, &search).unwrap();
        prop_assert!(dw.delta_w_bits >= -1e-9, "delta W {}", dw.delta_w_bits);
        for cut in &dw.cuts {
            prop_assert!(dw.unrestricted_work_bits >= cut.restricted_work_bits - 1e-9);
        }
    }
}
