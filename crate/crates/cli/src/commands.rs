use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use qcorr::covariance::{
    covariance_curve, pauli_covariance_scan, ScanMode, FULL_SCAN_BUDGET, VANISHING_THRESHOLD,
};
use qcorr::distill::{
    closed_forms, default_fidelity_grid, epsilon_of_fidelity, fidelity_curve, CURVE_PARTY_COUNTS,
};
use qcorr::postulates::{
    check_measure_monotonicity, run_postulate_scenario, Indicator, ScenarioDocument, ScenarioJob,
};
use qcorr::work::{
    best_work, delta_w_estimate, run_protocol, BasisSearch, ProtocolDocument, ProtocolFamily,
};
use qcorr::{LocalObservableList, QuantumState};

use crate::report::{fmt12, InputId, ReportDocument};
use crate::{Cli, Command, FigureKind, Format, StateArgs, EXIT_DOMAIN, EXIT_SIZE, EXIT_USAGE};

#[derive(Debug)]
pub enum CliError {
    Core(qcorr::Error),
    Usage(String),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_size_limit() => EXIT_SIZE,
            CliError::Core(e) if e.is_domain_error() => EXIT_DOMAIN,
            _ => EXIT_USAGE,
        }
    }
}

impl From<qcorr::Error> for CliError {
    fn from(e: qcorr::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(format!("serialization failed: {e}"))
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Adds `n=` to a single named state that lacks it.
fn resolve_spec(spec: &str, n: Option<usize>) -> String {
    let Some(n) = n else { return spec.to_string() };
    if spec.ends_with(".json")
        || Path::new(spec).is_file()
        || spec.contains('*')
        || spec.starts_with("bell")
    {
        return spec.to_string();
    }
    match spec.split_once(':') {
        None => format!("{spec}:n={n}"),
        Some((_, args)) if args.split(',').any(|kv| kv.trim().starts_with("n=")) => {
            spec.to_string()
        }
        Some((name, "")) => format!("{name}:n={n}"),
        Some((name, args)) => format!("{name}:n={n},{args}"),
    }
}

fn load_state(args: &StateArgs) -> Result<(QuantumState, InputId)> {
    let spec = args
        .state
        .as_deref()
        .ok_or_else(|| CliError::Usage("--state is required".into()))?;
    let spec = resolve_spec(spec, args.n);
    let s = qcorr::parse_state_spec(&spec)?;
    let id = InputId::of_state(&spec, &s)?;
    Ok((s, id))
}

/// A file path or inline JSON text.
fn read_document(arg: &str) -> Result<String> {
    if arg.trim_start().starts_with('{') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(arg).map_err(|e| CliError::Io(format!("{arg}: {e}")))
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_report<T: Serialize>(
    cli: &Cli,
    argv: Vec<String>,
    input: Option<InputId>,
    result: &T,
) -> Result<()> {
    let doc = ReportDocument::new(argv, input, result)?;
    let text = match cli.format.unwrap_or(Format::Json) {
        Format::Json => doc.to_json()?,
        Format::Csv => doc.to_csv(),
    };
    emit(cli, &text)
}

#[derive(Serialize)]
struct FigureRow {
    n: usize,
    fidelity: f64,
    value: f64,
}

#[derive(Serialize)]
struct FigureData {
    figure: &'static str,
    columns: [&'static str; 3],
    rows: Vec<FigureRow>,
}

#[derive(Serialize)]
struct DistillReport {
    mode: &'static str,
    num_parties: usize,
    epsilon: f64,
    success_probability: f64,
    fidelity: Option<f64>,
    closed_form: Option<qcorr::distill::FilterOutcome>,
}

#[derive(Serialize)]
struct SingleCovariance {
    paulis: String,
    covariance: f64,
}

#[derive(Serialize)]
struct ScanReport {
    mode: String,
    strings: usize,
    max_abs: f64,
    argmax: String,
    all_vanish: bool,
    values: std::collections::BTreeMap<String, f64>,
}

#[derive(Serialize)]
struct MonotonicityReport {
    scenario_id: String,
    indicator: String,
    before: f64,
    branch_average: f64,
    holds: bool,
}

pub fn run(cli: &Cli, argv: Vec<String>) -> Result<()> {
    match &cli.command {
        Command::Analyze { state, tol } => {
            let (s, id) = load_state(state)?;
            let report = qcorr::cuts::analyze(&s, *tol)?;
            emit_report(cli, argv, Some(id), &report)
        }
        Command::Figure {
            which,
            n,
            fidelity,
            points,
        } => figure(cli, argv, *which, n, fidelity, *points),
        Command::Postulates {
            scenario,
            indicator,
            tol,
            seed,
        } => {
            let text = read_document(scenario)?;
            let mut doc = ScenarioDocument::parse(&text)?;
            if seed.is_some() {
                doc.seed = *seed;
            }
            let name = indicator
                .clone()
                .or_else(|| doc.indicator.clone())
                .unwrap_or_else(|| "covariance".into());
            let ind = Indicator::by_name(&name, *tol)?;
            let state_id = doc.state.clone();
            let job = doc.into_job()?;
            match job {
                ScenarioJob::Postulate(sc) => {
                    let id = InputId::of_state(&state_id, &sc.initial)?;
                    let report = run_postulate_scenario(&ind, &sc)?;
                    for v in &report.verdicts {
                        log::info!("{}: {}", v.postulate, v.status);
                    }
                    emit_report(cli, argv, Some(id), &report)
                }
                ScenarioJob::Monotonicity {
                    id,
                    state,
                    instruments,
                } => {
                    let input = InputId::of_state(&state_id, &state)?;
                    let check = check_measure_monotonicity(
                        &|st: &QuantumState| ind.evaluate(st),
                        &state,
                        &instruments,
                    )?;
                    let report = MonotonicityReport {
                        scenario_id: id,
                        indicator: ind.name().to_string(),
                        before: check.lhs,
                        branch_average: check.rhs,
                        holds: check.holds,
                    };
                    emit_report(cli, argv, Some(input), &report)
                }
            }
        }
        Command::Distill {
            state,
            epsilon,
            fidelity,
        } => distill(cli, argv, state, *epsilon, *fidelity),
        Command::Covariance {
            state,
            paulis,
            samples,
            seed,
        } => {
            let (s, id) = load_state(state)?;
            if let Some(p) = paulis {
                let obs = LocalObservableList::from_pauli_str(p)?;
                let value = qcorr::covariance(&s, &obs)?;
                return emit_report(
                    cli,
                    argv,
                    Some(id),
                    &SingleCovariance {
                        paulis: p.clone(),
                        covariance: value,
                    },
                );
            }
            let full = 3usize
                .checked_pow(s.num_parties() as u32)
                .unwrap_or(usize::MAX);
            let mode = match samples {
                Some(count) => ScanMode::Sampled {
                    count: *count,
                    seed: *seed,
                },
                None if full <= FULL_SCAN_BUDGET => ScanMode::Full,
                None => ScanMode::Sampled {
                    count: 5000,
                    seed: *seed,
                },
            };
            let scan = pauli_covariance_scan(&s, mode)?;
            let report = ScanReport {
                mode: match mode {
                    ScanMode::Full => "full".into(),
                    ScanMode::Sampled { count, seed } => {
                        format!("sampled(count={count},seed={seed})")
                    }
                },
                strings: scan.values.len(),
                max_abs: scan.max_abs,
                argmax: scan.argmax.clone(),
                all_vanish: scan.all_vanish(VANISHING_THRESHOLD),
                values: scan.values,
            };
            emit_report(cli, argv, Some(id), &report)
        }
        Command::Work {
            state,
            protocol,
            measuring,
        } => {
            let (s, id) = load_state(state)?;
            if let Some(p) = protocol {
                let doc = ProtocolDocument::parse(&read_document(p)?)?;
                let (protocol, constraint) = doc.to_protocol(s.num_parties())?;
                let result = run_protocol(&s, &protocol, &constraint)?;
                return emit_report(cli, argv, Some(id), &result);
            }
            let families = match measuring {
                Some(m) => vec![ProtocolFamily::MeasureBroadcast {
                    measuring: Some(*m),
                }],
                None => vec![
                    ProtocolFamily::AllComputational,
                    ProtocolFamily::MeasureBroadcast { measuring: None },
                ],
            };
            let best = best_work(&s, &families, &BasisSearch::default())?;
            emit_report(cli, argv, Some(id), &best)
        }
        Command::DeltaW { state } => {
            let (s, id) = load_state(state)?;
            let families = [
                ProtocolFamily::AllComputational,
                ProtocolFamily::MeasureBroadcast { measuring: None },
            ];
            let est = delta_w_estimate(&s, &families, &BasisSearch::default())?;
            emit_report(cli, argv, Some(id), &est)
        }
    }
}

fn figure(
    cli: &Cli,
    argv: Vec<String>,
    which: FigureKind,
    ns: &[usize],
    fidelity: &[f64],
    points: Option<usize>,
) -> Result<()> {
    if fidelity.iter().any(|f| !f.is_finite()) {
        return Err(CliError::Usage(
            "fidelity grid contains non-finite values".into(),
        ));
    }
    let (name, column, rows) = match which {
        FigureKind::Fig2 => {
            let ns = if ns.is_empty() {
                CURVE_PARTY_COUNTS.to_vec()
            } else {
                ns.to_vec()
            };
            let grid = if fidelity.is_empty() {
                default_fidelity_grid(points.unwrap_or(99))
            } else {
                fidelity.to_vec()
            };
            ("fig2", "q", fidelity_curve(&ns, &grid)?)
        }
        FigureKind::Fig3 => {
            let ns = if ns.is_empty() {
                vec![3, 9]
            } else {
                ns.to_vec()
            };
            let grid = if fidelity.is_empty() {
                let k = points.unwrap_or(101).max(2);
                (0..k).map(|i| i as f64 / (k - 1) as f64).collect()
            } else {
                fidelity.to_vec()
            };
            ("fig3", "cov_zz", covariance_curve(&ns, &grid)?)
        }
    };
    if rows.is_empty() {
        return Err(CliError::Usage("empty grid".into()));
    }
    match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut out = format!("n,F,{column}\n");
            for (n, f, v) in &rows {
                let _ = writeln!(out, "{n},{},{}", fmt12(*f), fmt12(*v));
            }
            emit(cli, &out)
        }
        Format::Json => {
            let data = FigureData {
                figure: name,
                columns: ["n", "F", column],
                rows: rows
                    .into_iter()
                    .map(|(n, fidelity, value)| FigureRow { n, fidelity, value })
                    .collect(),
            };
            emit_report(cli, argv, None, &data)
        }
    }
}

fn distill(
    cli: &Cli,
    argv: Vec<String>,
    state: &StateArgs,
    epsilon: Option<f64>,
    fidelity: Option<f64>,
) -> Result<()> {
    if let Some(f) = fidelity {
        if epsilon.is_some() {
            return Err(CliError::Usage(
                "give either --epsilon or --fidelity".into(),
            ));
        }
        let n = state
            .n
            .ok_or_else(|| CliError::Usage("--fidelity needs --n".into()))?;
        let eps = epsilon_of_fidelity(n, f)?;
        let cf = closed_forms(n, eps)?;
        let report = DistillReport {
            mode: "closed_form",
            num_parties: n,
            epsilon: eps,
            success_probability: cf.success_probability,
            fidelity: Some(f),
            closed_form: Some(cf),
        };
        return emit_report(cli, argv, None, &report);
    }
    let eps =
        epsilon.ok_or_else(|| CliError::Usage("--epsilon or --fidelity is required".into()))?;
    let args = match &state.state {
        Some(_) => state.clone(),
        None => StateArgs {
            state: Some("w_mixture:f=0.5".into()),
            n: Some(
                state
                    .n
                    .ok_or_else(|| CliError::Usage("--state or --n is required".into()))?,
            ),
        },
    };
    let (s, id) = load_state(&args)?;
    let result = qcorr::distill(&s, eps)?;
    let closed_form = (state.state.is_none())
        .then(|| closed_forms(s.num_parties(), eps))
        .transpose()?;
    let report = DistillReport {
        mode: "simulated",
        num_parties: s.num_parties(),
        epsilon: eps,
        success_probability: result.success_probability,
        fidelity: result.fidelity,
        closed_form,
    };
    emit_report(cli, argv, Some(id), &report)
}
