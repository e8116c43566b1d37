//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the test
//! fails if any criterion fails.

mod common;

use std::time::Instant;

use nalgebra::Matrix2;
use qcorr::covariance::{
    cov_all_z, covariance_curve, pauli_covariance_scan, wmix_closed_form, ScanMode,
};
use qcorr::cuts::{
    analyze, combinations, degree_of_correlations, distance_from_maximally_mixed,
    split_party_with_cnot,
};
use qcorr::distill::{
    asymptotic_epsilon, asymptotic_forms, closed_forms, default_fidelity_grid, distill,
    fidelity_curve, q_of_fidelity, success_lower_bound, FilterInstrument, CURVE_PARTY_COUNTS,
};
use qcorr::postulates::{
    check_measure_monotonicity, run_postulate_scenario, Indicator, Scenario, Transformation,
    VerdictStatus,
};
use qcorr::work::{
    all_computational_protocol, best_work, delta_w_estimate, measure_broadcast_protocol,
    optimize_basis, parse_gate, run_protocol, BasisSearch, CommunicationConstraint, ProtocolFamily,
    ProtocolStep, UnitaryRule, WorkProtocol,
};
use qcorr::{
    make_named_state, KrausInstrument, LocalObservableList, QuantumState, Result, SingleQubitBasis,
    SingleQubitObservable,
};

type Failures = Vec<String>;

macro_rules! check {
    ($fails:expr, $cond:expr, $($arg:tt)+) => {
        if !$cond {
            $fails.push(format!($($arg)+));
        }
    };
}

fn w_mix(n: usize, f: f64) -> Result<QuantumState> {
    make_named_state("w_mixture", n, &[f])
}

fn h2(x: f64) -> f64 {
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

fn families() -> [ProtocolFamily; 2] {
    [
        ProtocolFamily::AllComputational,
        ProtocolFamily::MeasureBroadcast { measuring: None },
    ]
}

fn criterion_1() -> Result<Failures> {
    let mut fails = Failures::new();
    for n in [3, 5, 7] {
        let s = w_mix(n, 0.5)?;
        let scan = pauli_covariance_scan(&s, ScanMode::Full)?;
        check!(
            fails,
            scan.values.len() == 3usize.pow(n as u32),
            "n={n}: scanned {} strings",
            scan.values.len()
        );
        check!(
            fails,
            scan.max_abs < 1e-10,
            "n={n}: max |Cov| = {:e} at {}",
            scan.max_abs,
            scan.argmax
        );
        if n == 3 {
            let rho = common::w_mixture(3, 0.5);
            for (string, v) in &scan.values {
                let oracle = common::covariance(&rho, &common::pauli_string_ops(string));
                check!(
                    fails,
                    (oracle - v).abs() < 1e-12,
                    "n=3 {string}: library {v:e}, oracle {oracle:e}"
                );
            }
        }
    }
    let s = w_mix(9, 0.5)?;
    let scan = pauli_covariance_scan(
        &s,
        ScanMode::Sampled {
            count: 5000,
            seed: 20240901,
        },
    )?;
    check!(
        fails,
        scan.max_abs < 1e-10,
        "n=9 sampled: max |Cov| = {:e} at {}",
        scan.max_abs,
        scan.argmax
    );
    Ok(fails)
}

fn criterion_2() -> Result<Failures> {
    let mut fails = Failures::new();
    let zs = |n: usize| common::pauli_string_ops(&"Z".repeat(n));
    for n in [3, 5, 7] {
        for k in 0..=20 {
            let f = k as f64 * 0.05;
            let oracle = common::covariance(&common::w_mixture(n, f), &zs(n));
            let closed = wmix_closed_form(n, f)?.cov_zz;
            let library = cov_all_z(&w_mix(n, f)?.densified()?)?;
            check!(
                fails,
                (oracle - closed).abs() < 1e-10,
                "n={n} F={f}: oracle {oracle:e} vs closed {closed:e}"
            );
            check!(
                fails,
                (library - closed).abs() < 1e-10,
                "n={n} F={f}: library {library:e} vs closed {closed:e}"
            );
        }
    }
    for n in [3, 9] {
        let rows = covariance_curve(
            &[n],
            &(0..=1000).map(|k| k as f64 / 1000.0).collect::<Vec<_>>(),
        )?;
        let mut roots = Vec::new();
        for w in rows.windows(2) {
            let (a, b) = ((w[0].1, w[0].2), (w[1].1, w[1].2));
            if a.1 == 0.0 {
                roots.push(a.0);
            } else if a.1 * b.1 < 0.0 {
                let (mut lo, mut hi) = (a.0, b.0);
                let sign_lo = a.1.signum();
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if wmix_closed_form(n, mid)?.cov_zz.signum() == sign_lo {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
        }
        let last = rows.last().expect("grid");
        if last.2 == 0.0 {
            roots.push(last.1);
        }
        if roots.len() != 1 || roots.iter().any(|r| (r - 0.5).abs() >= 1e-9) {
            // Cross-check the extra sign changes against the dense oracle.
            let probe: Vec<String> = [0.0, 1e-6, 0.25, 0.75, 1.0 - 1e-6, 1.0]
                .iter()
                .map(|&f| {
                    format!(
                        "F={f}: {:+.3e}",
                        common::covariance(&common::w_mixture(n, f), &zs(n))
                    )
                })
                .collect();
            fails.push(format!(
                "n={n}: zeros at {roots:?}; oracle Cov {}",
                probe.join(", ")
            ));
        }
    }
    let closed = wmix_closed_form(3, 1.0)?.cov_zz;
    let oracle = common::covariance(&common::w_mixture(3, 1.0), &zs(3));
    check!(
        fails,
        (closed + 16.0 / 27.0).abs() < 1e-12,
        "Cov(3,1) closed form {closed}"
    );
    check!(
        fails,
        (oracle + 16.0 / 27.0).abs() < 1e-12,
        "Cov(3,1) oracle {oracle}"
    );
    Ok(fails)
}

fn criterion_3() -> Result<Failures> {
    let mut fails = Failures::new();
    let grid: Vec<f64> = (1..=20).map(|k| k as f64 * 0.05).collect();
    for n in [3, 5, 7] {
        let dense = w_mix(n, 0.5)?.densified()?;
        let structured = w_mix(n, 0.5)?;
        let w = common::w_vector(n, 1);
        for &eps in &grid {
            let cf = closed_forms(n, eps)?;
            let (oq, orho) = common::filter(&common::w_mixture(n, 0.5), n, eps);
            let of = common::fidelity(&orho, &w);
            check!(
                fails,
                (oq - cf.success_probability).abs() < 1e-12,
                "n={n} eps={eps}: oracle q {oq}"
            );
            check!(
                fails,
                (of - cf.fidelity).abs() < 1e-12,
                "n={n} eps={eps}: oracle F {of}"
            );
            for (label, s) in [("dense", &dense), ("structured", &structured)] {
                let r = distill(s, eps)?;
                let f = r.fidelity.expect("W target");
                check!(
                    fails,
                    (r.success_probability - cf.success_probability).abs() < 1e-12,
                    "n={n} eps={eps} {label}: q {} vs {}",
                    r.success_probability,
                    cf.success_probability
                );
                check!(
                    fails,
                    (f - cf.fidelity).abs() < 1e-12,
                    "n={n} eps={eps} {label}: F {f} vs {}",
                    cf.fidelity
                );
            }
            if eps < 1.0 {
                let inv = q_of_fidelity(n, cf.fidelity)?;
                check!(
                    fails,
                    (inv - cf.success_probability).abs() < 1e-12,
                    "n={n} eps={eps}: inverse {inv}"
                );
                let bound = success_lower_bound(0.5, cf.fidelity)?;
                check!(
                    fails,
                    cf.success_probability > bound,
                    "n={n} eps={eps}: q {} <= bound {bound}",
                    cf.success_probability
                );
            }
        }
    }
    let fgrid = default_fidelity_grid(99);
    let rows = fidelity_curve(&CURVE_PARTY_COUNTS, &fgrid)?;
    check!(
        fails,
        rows.len() == CURVE_PARTY_COUNTS.len() * fgrid.len(),
        "figure rows {}",
        rows.len()
    );
    check!(
        fails,
        rows.iter().all(|r| r.2 > 0.0 && r.2 <= 1.0),
        "figure q out of range"
    );
    for (i, &f) in fgrid.iter().enumerate() {
        let col: Vec<f64> = (0..CURVE_PARTY_COUNTS.len())
            .map(|j| rows[j * fgrid.len() + i].2)
            .collect();
        check!(
            fails,
            col.windows(2).all(|w| w[0] < w[1]),
            "F={f}: curves not ordered by n: {col:?}"
        );
    }
    let q499 = q_of_fidelity(499, 0.99)?;
    check!(fails, (q499 - 0.5).abs() < 0.01, "n=499 F=0.99: q = {q499}");
    for n in [100, 144, 499, 1000, 10000] {
        let exact = closed_forms(n, asymptotic_epsilon(n))?;
        let approx = asymptotic_forms(n)?;
        let dq = (exact.success_probability - approx.success_probability).abs()
            / exact.success_probability;
        let df = (exact.fidelity - approx.fidelity).abs() / exact.fidelity;
        check!(
            fails,
            dq < 0.02 && df < 0.02,
            "n={n}: relative errors q {dq:e}, F {df:e}"
        );
    }
    Ok(fails)
}

fn criterion_4() -> Result<Failures> {
    let mut fails = Failures::new();
    let s = w_mix(3, 0.5)?;
    let scenario = Scenario {
        id: "filter-0.25".into(),
        initial: s.clone(),
        transformation: Transformation::LocalPostselect {
            instruments: vec![FilterInstrument::new(0.25)?.instrument(); 3],
            branch: vec![0; 3],
        },
    };
    let report = run_postulate_scenario(&Indicator::max_abs_covariance(), &scenario)?;
    check!(
        fails,
        report.before() < 1e-10,
        "pre-filter max |Cov| {:e}",
        report.before()
    );
    check!(
        fails,
        report.status("Postulate 2") == Some(VerdictStatus::Violated),
        "verdict {:?}",
        report.verdicts
    );
    let post = distill(&s, 0.25)?;
    let f = post.fidelity.expect("W target");
    let cov = cov_all_z(&post.post_state)?;
    let closed = wmix_closed_form(3, 0.8)?.cov_zz;
    check!(fails, (f - 0.8).abs() < 1e-12, "F(0.25) = {f}");
    check!(fails, cov.abs() > 1e-3, "post-filter Cov(ZZZ) = {cov:e}");
    check!(
        fails,
        (cov - closed).abs() < 1e-10,
        "post-filter Cov(ZZZ) {cov} vs closed form {closed}"
    );
    let mono = check_measure_monotonicity(
        &|st: &QuantumState| Ok(cov_all_z(st)?.abs()),
        &s,
        &vec![FilterInstrument::new(0.25)?.instrument(); 3],
    )?;
    check!(
        fails,
        !mono.holds,
        "average monotonicity unexpectedly holds: {mono:?}"
    );

    let mut split = s.densified()?;
    for p in 0..3 {
        split = split_party_with_cnot(&split, p)?;
    }
    check!(
        fails,
        split.is_dense() && split.num_parties() == 6,
        "n=3 split is not a dense 6-qubit state"
    );
    let v = cov_all_z(&split)?;
    check!(
        fails,
        (v - 1.0).abs() < 1e-10,
        "n=3 dense split covariance {v}"
    );
    for n in [5, 7] {
        let named = make_named_state("w_split_mixture", n, &[])?;
        let mut built = w_mix(n, 0.5)?;
        for p in 0..n {
            built = split_party_with_cnot(&built, p)?;
        }
        check!(
            fails,
            !named.is_dense() && !built.is_dense(),
            "n={n}: expected structured states"
        );
        for (label, st) in [("named", &named), ("constructed", &built)] {
            let v = cov_all_z(st)?;
            check!(
                fails,
                (v - 1.0).abs() < 1e-10,
                "n={n} {label}: split covariance {v}"
            );
        }
    }
    let scenario = Scenario {
        id: "split-all".into(),
        initial: s,
        transformation: Transformation::SplitParties {
            parties: vec![0, 1, 2],
        },
    };
    let report = run_postulate_scenario(&Indicator::max_abs_covariance(), &scenario)?;
    check!(
        fails,
        report.status("Postulate 3") == Some(VerdictStatus::Violated),
        "split verdict {:?}",
        report.verdicts
    );
    check!(
        fails,
        report.after().is_some_and(|a| (a - 1.0).abs() < 1e-10),
        "split final value {:?}",
        report.after()
    );
    Ok(fails)
}

fn criterion_5() -> Result<Failures> {
    let mut fails = Failures::new();
    let s = w_mix(3, 0.5)?;
    let free = CommunicationConstraint::Unrestricted;
    let comp = run_protocol(&s, &all_computational_protocol(3), &free)?.work_bits;
    let target = 3.0 - 6f64.log2();
    check!(
        fails,
        (comp - target).abs() < 1e-9,
        "computational protocol {comp} vs {target}"
    );
    let pm = run_protocol(
        &s,
        &measure_broadcast_protocol(3, 0, &SingleQubitBasis::hadamard())?,
        &free,
    )?
    .work_bits;
    check!(fails, (pm - 0.4499).abs() < 5e-4, "|+-> protocol {pm}");
    let opt = optimize_basis(&s, 0, &BasisSearch::default())?;
    check!(
        fails,
        opt.work_bits >= 0.4502 - 1e-3,
        "optimizer work {}",
        opt.work_bits
    );
    let angle = opt.basis.magnitude_angle();
    let targets = [(2f64).sqrt().atan(), (0.5f64).sqrt().atan()];
    let dist = targets
        .iter()
        .map(|t| (angle - t).abs())
        .fold(f64::INFINITY, f64::min);
    check!(
        fails,
        dist < 0.02,
        "optimal basis magnitude angle {angle} is {dist} rad from (sqrt(1/3), sqrt(2/3))"
    );

    let bell = make_named_state("bell_diag_example", 2, &[])?;
    let xh = parse_gate("x*h")?;
    let protocol = WorkProtocol::new(vec![
        ProtocolStep::DephaseAndBroadcast {
            party: 0,
            basis: SingleQubitBasis::hadamard(),
        },
        ProtocolStep::ConditionalLocalUnitary {
            party: 1,
            rule: UnitaryRule::Table([("0".to_string(), xh), ("1".to_string(), xh)].into()),
        },
        ProtocolStep::FinalCollect { destination: 0 },
    ]);
    let r = run_protocol(&bell, &protocol, &free)?;
    let target = 1.0 - h2(5.0 / 6.0);
    check!(
        fails,
        (r.work_bits - target).abs() < 1e-9,
        "Bell-diagonal protocol {} vs 1 - H(5/6) = {target}",
        r.work_bits
    );
    let mut weights: Vec<f64> = r.distribution.values().copied().collect();
    weights.sort_by(f64::total_cmp);
    let expect = [1.0 / 12.0, 1.0 / 12.0, 5.0 / 12.0, 5.0 / 12.0];
    check!(
        fails,
        weights.len() == 4
            && weights
                .iter()
                .zip(expect)
                .all(|(a, b)| (a - b).abs() < 1e-12),
        "final weights {weights:?}"
    );

    let dw = delta_w_estimate(&s, &families(), &BasisSearch::default())?;
    check!(
        fails,
        (dw.delta_w_bits - 0.100).abs() < 2e-3,
        "delta W {}",
        dw.delta_w_bits
    );
    println!(
        "    work: computational {comp:.9}, |+-> {pm:.6}, optimum {:.6} at theta {:.4}, Bell {:.9}, delta W {:.6}",
        opt.work_bits, opt.theta, r.work_bits, dw.delta_w_bits
    );
    Ok(fails)
}

fn criterion_6() -> Result<Failures> {
    let mut fails = Failures::new();
    let s = make_named_state("example2_tripartite", 3, &[])?;
    let search = BasisSearch::default();
    let free = best_work(&s, &families(), &search)?;
    check!(
        fails,
        (free.work_bits - 1.0).abs() < 1e-9,
        "unrestricted optimum {}",
        free.work_bits
    );
    let dw = delta_w_estimate(&s, &families(), &search)?;
    let restricted = dw
        .cuts
        .iter()
        .map(|c| c.restricted_work_bits)
        .fold(f64::NEG_INFINITY, f64::max);
    check!(
        fails,
        (restricted - 1.0).abs() < 1e-9,
        "cut-constrained optimum {restricted}"
    );
    let pair = best_work(&s.partial_trace(&[0, 1])?, &families(), &search)?;
    check!(
        fails,
        (pair.work_bits - 1.0).abs() < 1e-9,
        "parties {{0,1}} alone extract {}",
        pair.work_bits
    );
    let report = analyze(&s, qcorr::cuts::PRODUCT_TOL)?;
    check!(
        fails,
        report.cuts.len() == 3 && report.cuts.iter().all(|c| !c.product),
        "cut verdicts {:?}",
        report.cuts
    );
    check!(
        fails,
        report.genuine,
        "analysis does not flag genuine correlations"
    );
    Ok(fails)
}

fn criterion_7() -> Result<Failures> {
    let mut fails = Failures::new();
    let tol = qcorr::cuts::PRODUCT_TOL;
    for n in 3..=6 {
        for name in ["ghz_diag", "parity_even"] {
            let d = degree_of_correlations(&make_named_state(name, n, &[])?, tol)?;
            check!(fails, d == n, "{name} n={n}: degree {d}");
        }
        let s = make_named_state("parity_even", n, &[])?;
        let parties: Vec<usize> = (0..n).collect();
        for m in 2..n {
            for subset in combinations(&parties, m) {
                let dist = distance_from_maximally_mixed(&s.partial_trace(&subset)?)?;
                check!(
                    fails,
                    dist < 1e-10,
                    "parity_even n={n} marginal {subset:?}: distance {dist:e}"
                );
            }
        }
    }
    let mut rng = common::rng(7);
    let degree = Indicator::degree(1e-8);
    for trial in 0..20 {
        let n = 2 + trial % 4;
        let (s, largest) = common::random_factorized_state(n, &mut rng)?;
        let d = degree_of_correlations(&s, 1e-8)?;
        check!(
            fails,
            d == largest,
            "trial {trial}: degree {d}, construction {largest}"
        );

        let ancilla = QuantumState::random_dense(1, 2, &mut rng)?;
        let add = Scenario {
            id: format!("add-{trial}"),
            initial: s.clone(),
            transformation: Transformation::AddParty { ancilla },
        };
        let r = run_postulate_scenario(&degree, &add)?;
        check!(
            fails,
            r.status("Postulate 1\u{2032}") == Some(VerdictStatus::Satisfied),
            "trial {trial}: add party {:?}",
            r.steps
        );

        let unitaries: Vec<KrausInstrument> = (0..n)
            .map(|_| {
                let u = qcorr::linalg::haar_unitary(2, &mut rng);
                KrausInstrument::new(vec![Matrix2::from_fn(|a, b| u[(a, b)])])
            })
            .collect();
        let local = Scenario {
            id: format!("unitary-{trial}"),
            initial: s.clone(),
            transformation: Transformation::LocalPostselect {
                instruments: unitaries,
                branch: vec![0; n],
            },
        };
        let r = run_postulate_scenario(&degree, &local)?;
        check!(
            fails,
            r.status("Postulate 2\u{2032}") == Some(VerdictStatus::Satisfied)
                && r.after() == Some(r.before()),
            "trial {trial}: local unitaries {:?}",
            r.steps
        );

        let party = trial % n;
        let split = Scenario {
            id: format!("split-{trial}"),
            initial: s,
            transformation: Transformation::SplitParties {
                parties: vec![party],
            },
        };
        let r = run_postulate_scenario(&degree, &split)?;
        check!(
            fails,
            r.status("Postulate 3\u{2032}") == Some(VerdictStatus::Satisfied),
            "trial {trial}: split {:?}",
            r.steps
        );
    }
    Ok(fails)
}

fn to_observable(m: &common::M) -> Result<SingleQubitObservable> {
    SingleQubitObservable::new(Matrix2::from_fn(|a, b| m[(a, b)]))
}

fn criterion_8() -> Result<Failures> {
    let mut fails = Failures::new();
    let named: Vec<(&str, usize, Vec<f64>)> = vec![
        ("ghz_diag", 5, vec![]),
        ("parity_even", 4, vec![]),
        ("w", 6, vec![]),
        ("wbar", 5, vec![]),
        ("w_mixture", 3, vec![0.5]),
        ("w_mixture", 7, vec![0.3]),
        ("w_mixture", 8, vec![0.85]),
        ("w_split_mixture", 4, vec![]),
        ("example2_tripartite", 3, vec![]),
        ("bell_diag_example", 2, vec![]),
        ("bell:psi-", 2, vec![]),
        ("zeros", 3, vec![]),
        ("maximally_mixed", 3, vec![]),
    ];
    let mut rng = common::rng(99);
    for (name, n, params) in &named {
        let s = make_named_state(name, *n, params)?;
        let label = format!("{name}({n})");
        check!(fails, !s.is_dense(), "{label}: expected a structured state");
        let d = s.densified()?;
        let oracle_rho = common::to_matrix(&d);
        for _ in 0..5 {
            let ms: Vec<common::M> = (0..s.num_parties())
                .map(|_| common::random_hermitian(&mut rng))
                .collect();
            let obs =
                LocalObservableList::new(ms.iter().map(to_observable).collect::<Result<_>>()?);
            let (es, ed) = (s.expectation(&obs)?, d.expectation(&obs)?);
            check!(
                fails,
                (es - ed).abs() < 1e-10,
                "{label}: expectation {es} vs {ed}"
            );
            let (cs, cd) = (qcorr::covariance(&s, &obs)?, qcorr::covariance(&d, &obs)?);
            check!(
                fails,
                (cs - cd).abs() < 1e-10,
                "{label}: covariance {cs} vs {cd}"
            );
            let co = common::covariance(&oracle_rho, &ms);
            check!(
                fails,
                (cd - co).abs() < 1e-10,
                "{label}: covariance {cd} vs oracle {co}"
            );
        }
        if let (Ok(a), Ok(b)) = (distill(&s, 0.37), distill(&d, 0.37)) {
            check!(
                fails,
                (a.success_probability - b.success_probability).abs() < 1e-10,
                "{label}: filter q"
            );
            let td = a.post_state.trace_distance(&b.post_state)?;
            check!(
                fails,
                td < 1e-10,
                "{label}: filtered states differ by {td:e}"
            );
        }
    }
    for trial in 0..20 {
        let n = 3 + trial % 3;
        let s = if trial % 2 == 0 {
            w_mix(n, 0.3)?
        } else {
            QuantumState::random_dense(n, 3, &mut rng)?
        };
        let mut ms: Vec<common::M> = (0..n).map(|_| common::random_hermitian(&mut rng)).collect();
        let party = trial % n;
        let (a, b) = (
            common::random_hermitian(&mut rng),
            common::random_hermitian(&mut rng),
        );
        let (x, y) = (qcorr::linalg::c(1.7, 0.0), qcorr::linalg::c(-0.6, 0.0));
        let mut cov_with = |m: common::M| -> Result<f64> {
            ms[party] = m;
            let obs =
                LocalObservableList::new(ms.iter().map(to_observable).collect::<Result<_>>()?);
            qcorr::covariance(&s, &obs)
        };
        let lhs = cov_with(&a * x + &b * y)?;
        let rhs = 1.7 * cov_with(a)? - 0.6 * cov_with(b)?;
        check!(
            fails,
            (lhs - rhs).abs() < 1e-9,
            "multilinearity trial {trial}: {lhs} vs {rhs}"
        );
    }
    Ok(fails)
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Result<Failures>); 8] = [
        (
            "covariance vanishing on the equal W/W-bar mixture",
            criterion_1,
        ),
        ("closed-form covariance and its curve", criterion_2),
        (
            "distillation closed forms, inverse, curves, asymptotics",
            criterion_3,
        ),
        ("postulate 2 and 3 violations by covariance", criterion_4),
        ("work extraction, three-party W mixture", criterion_5),
        ("work extraction, tripartite Bell mixture", criterion_6),
        ("degree of correlations and postulate suites", criterion_7),
        (
            "structured versus dense agreement, multilinearity",
            criterion_8,
        ),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(f) if f.is_empty() => println!("criterion {}: PASS ({name}, {secs:.2}s)", i + 1),
            Ok(f) => {
                println!("criterion {}: FAIL ({name}, {secs:.2}s)", i + 1);
                for line in &f {
                    println!("    {line}");
                }
                failed.push(i + 1);
            }
            Err(e) => {
                println!("criterion {}: FAIL ({name}): error {e}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
