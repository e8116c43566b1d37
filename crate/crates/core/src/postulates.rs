//! Scenario runner for the correlation postulates.
//!
//! An indicator is any `state → real` functional. A scenario applies one
//! kind of transformation (adding a product party, local filtering with
//! unanimous postselection, splitting parties with CNOT ancillas, or the
//! ancilla-and-send construction) and the runner compares indicator values
//! before and after.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::covariance::{cov_all_z, max_abs_pauli_covariance};
use crate::cuts::{degree_of_correlations, has_genuine_correlations, split_party_with_cnot};
use crate::distill::FilterInstrument;
use crate::error::{Error, Result};
use crate::instrument::{apply_instrument, enumerate_branches, KrausInstrument};
use crate::io::parse_state_spec;
use crate::linalg;
use crate::state::QuantumState;

/// Slack used by every verdict.
pub const VERDICT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IndicatorKind {
    /// A real-valued correlation measure (covariance and the like).
    Measure,
    /// An integer degree of correlations.
    Degree,
}

type Functional = dyn Fn(&QuantumState) -> Result<f64> + Send + Sync;

pub struct Indicator {
    name: String,
    kind: IndicatorKind,
    func: Box<Functional>,
}

impl fmt::Debug for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Indicator")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .finish()
    }
}

impl Indicator {
    pub fn new(
        name: impl Into<String>,
        kind: IndicatorKind,
        func: impl Fn(&QuantumState) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            kind,
            func: Box::new(func),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> IndicatorKind {
        self.kind
    }

    pub fn evaluate(&self, s: &QuantumState) -> Result<f64> {
        (self.func)(s)
    }

    /// Largest |Cov| over all Pauli strings.
    pub fn max_abs_covariance() -> Self {
        Self::new(
            "max_abs_covariance",
            IndicatorKind::Measure,
            max_abs_pauli_covariance,
        )
    }

    /// |Cov(σz, …, σz)|.
    pub fn all_z_covariance() -> Self {
        Self::new("abs_cov_all_z", IndicatorKind::Measure, |s| {
            Ok(cov_all_z(s)?.abs())
        })
    }

    pub fn degree(tol: f64) -> Self {
        Self::new("degree_of_correlations", IndicatorKind::Degree, move |s| {
            Ok(degree_of_correlations(s, tol)? as f64)
        })
    }

    /// 1 if the state has genuine correlations across every cut, else 0.
    pub fn genuine(tol: f64) -> Self {
        Self::new("genuine_correlations", IndicatorKind::Measure, move |s| {
            Ok(if has_genuine_correlations(s, tol)? {
                1.0
            } else {
                0.0
            })
        })
    }

    /// Looks up `covariance`, `cov_z`, `degree` or `genuine`.
    pub fn by_name(name: &str, tol: f64) -> Result<Self> {
        match name {
            "covariance" | "max_abs_covariance" => Ok(Self::max_abs_covariance()),
            "cov_z" | "abs_cov_all_z" => Ok(Self::all_z_covariance()),
            "degree" | "degree_of_correlations" => Ok(Self::degree(tol)),
            "genuine" | "genuine_correlations" => Ok(Self::genuine(tol)),
            other => Err(Error::Scenario(format!("unknown indicator `{other}`"))),
        }
    }
}

/// How the transformation acts.
#[derive(Clone, Debug)]
pub enum Transformation {
    /// Appends `ancilla` as new trailing parties.
    AddParty { ancilla: QuantumState },
    /// Applies one Kraus operator per party and keeps that joint branch.
    LocalPostselect {
        instruments: Vec<KrausInstrument>,
        branch: Vec<usize>,
    },
    /// Splits the listed parties one after another with CNOT ancillas.
    SplitParties { parties: Vec<usize> },
    /// Each listed party adds a `|0⟩` ancilla, applies a seeded Haar-random
    /// two-qubit unitary to its qubit and ancilla, and sends the ancilla to
    /// a new party.
    AncillaSend { parties: Vec<usize>, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub id: String,
    pub initial: QuantumState,
    pub transformation: Transformation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Satisfied,
    Violated,
    Inconclusive,
}

impl fmt::Display for VerdictStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictStatus::Satisfied => "satisfied",
            VerdictStatus::Violated => "VIOLATED",
            VerdictStatus::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub postulate: String,
    pub status: VerdictStatus,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct StepValue {
    pub label: String,
    pub num_parties: usize,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PostulateReport {
    pub scenario_id: String,
    pub indicator: String,
    pub indicator_kind: IndicatorKind,
    pub steps: Vec<StepValue>,
    pub verdicts: Vec<Verdict>,
}

impl PostulateReport {
    pub fn before(&self) -> f64 {
        self.steps[0].value
    }

    pub fn after(&self) -> Option<f64> {
        (self.steps.len() > 1).then(|| self.steps[self.steps.len() - 1].value)
    }

    pub fn status(&self, postulate: &str) -> Option<VerdictStatus> {
        self.verdicts
            .iter()
            .find(|v| v.postulate == postulate)
            .map(|v| v.status)
    }
}

fn postulate_label(base: &str, kind: IndicatorKind) -> String {
    match kind {
        IndicatorKind::Measure => format!("Postulate {base}"),
        IndicatorKind::Degree => format!("Postulate {base}\u{2032}"),
    }
}

fn bound_verdict(postulate: String, before: f64, after: f64, allowance: f64) -> Verdict {
    let limit = before + allowance;
    let status = if after > limit + VERDICT_TOL {
        VerdictStatus::Violated
    } else {
        VerdictStatus::Satisfied
    };
    Verdict {
        postulate,
        status,
        detail: format!("before {before:.6e}, after {after:.6e}, allowed up to {limit:.6e}"),
    }
}

fn step(label: impl Into<String>, s: &QuantumState, value: f64) -> StepValue {
    StepValue {
        label: label.into(),
        num_parties: s.num_parties(),
        value,
    }
}

fn ancilla_send(s: &QuantumState, parties: &[usize], seed: u64) -> Result<QuantumState> {
    crate::state::validate_parties(s.num_parties(), parties)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = s.clone();
    for &p in parties {
        let anc = out.num_parties();
        out = out.tensor(&QuantumState::zeros(1))?;
        out = out.apply_unitary(&[p, anc], &linalg::haar_unitary(4, &mut rng))?;
    }
    Ok(out)
}

/// Evaluates the indicator along the scenario and issues verdicts.
pub fn run_postulate_scenario(
    indicator: &Indicator,
    scenario: &Scenario,
) -> Result<PostulateReport> {
    let kind = indicator.kind();
    let s0 = &scenario.initial;
    let before = indicator.evaluate(s0)?;
    let mut steps = vec![step("initial", s0, before)];
    let mut verdicts = Vec::new();
    match &scenario.transformation {
        Transformation::AddParty { ancilla } => {
            let s1 = s0.tensor(ancilla)?;
            let after = indicator.evaluate(&s1)?;
            steps.push(step("add_party", &s1, after));
            let mut v = bound_verdict(postulate_label("1", kind), before, after, 0.0);
            if kind == IndicatorKind::Degree && (after - before).abs() > VERDICT_TOL {
                v.status = VerdictStatus::Violated;
            }
            verdicts.push(v);
        }
        Transformation::LocalPostselect {
            instruments,
            branch,
        } => match apply_instrument(s0, instruments, branch) {
            Ok((s1, p)) => {
                let after = indicator.evaluate(&s1)?;
                steps.push(step(format!("postselect (p = {p:.6e})"), &s1, after));
                verdicts.push(bound_verdict(
                    postulate_label("2", kind),
                    before,
                    after,
                    0.0,
                ));
            }
            Err(Error::ImpossibleBranch { probability }) => verdicts.push(Verdict {
                postulate: postulate_label("2", kind),
                status: VerdictStatus::Inconclusive,
                detail: format!("postselected branch has probability {probability:.6e}"),
            }),
            Err(e) => return Err(e),
        },
        Transformation::SplitParties { parties } => {
            if parties.is_empty() {
                return Err(Error::Scenario(
                    "split_party needs at least one party".into(),
                ));
            }
            crate::state::validate_parties(s0.num_parties(), parties)?;
            let allowance = if kind == IndicatorKind::Degree {
                1.0
            } else {
                0.0
            };
            let mut current = s0.clone();
            let mut prev = before;
            let mut worst: Option<Verdict> = None;
            for &p in parties {
                current = split_party_with_cnot(&current, p)?;
                let value = indicator.evaluate(&current)?;
                steps.push(step(format!("split party {p}"), &current, value));
                let v = bound_verdict(postulate_label("3", kind), prev, value, allowance);
                if worst
                    .as_ref()
                    .is_none_or(|w| w.status != VerdictStatus::Violated)
                {
                    worst = Some(v);
                }
                prev = value;
            }
            verdicts.push(worst.expect("at least one split"));
        }
        Transformation::AncillaSend { parties, seed } => {
            if parties.is_empty() {
                return Err(Error::Scenario(
                    "ancilla scenario needs at least one party".into(),
                ));
            }
            let s1 = ancilla_send(s0, parties, *seed)?;
            let after = indicator.evaluate(&s1)?;
            steps.push(step(format!("{} ancillas sent", parties.len()), &s1, after));
            let allowance = if kind == IndicatorKind::Degree {
                parties.len() as f64
            } else {
                0.0
            };
            verdicts.push(bound_verdict(
                "Observation 4".into(),
                before,
                after,
                allowance,
            ));
        }
    }
    Ok(PostulateReport {
        scenario_id: scenario.id.clone(),
        indicator: indicator.name().to_string(),
        indicator_kind: kind,
        steps,
        verdicts,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonotonicityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Compares `μ(ρ)` with the branch average `Σ p_b μ(ρ_b)` over every joint
/// outcome of complete local instruments.
pub fn check_measure_monotonicity(
    measure: &dyn Fn(&QuantumState) -> Result<f64>,
    s: &QuantumState,
    instruments: &[KrausInstrument],
) -> Result<MonotonicityCheck> {
    for (party, inst) in instruments.iter().enumerate() {
        if !inst.is_complete() {
            return Err(Error::IncompleteInstrument {
                party,
                max_eigenvalue: inst.max_effect_eigenvalue(),
            });
        }
    }
    let lhs = measure(s)?;
    let mut rhs = 0.0;
    for (_, p, branch_state) in enumerate_branches(s, instruments)? {
        rhs += p * measure(&branch_state)?;
    }
    Ok(MonotonicityCheck {
        lhs,
        rhs,
        holds: lhs >= rhs - VERDICT_TOL,
    })
}

/// Party selection in a scenario document: `"all"` or explicit indices.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum PartySelection {
    Named(String),
    List(Vec<usize>),
}

impl PartySelection {
    pub fn resolve(&self, n: usize) -> Result<Vec<usize>> {
        match self {
            PartySelection::Named(s) if s == "all" => Ok((0..n).collect()),
            PartySelection::Named(s) => {
                Err(Error::Scenario(format!("unknown party selection `{s}`")))
            }
            PartySelection::List(v) => {
                crate::state::validate_parties(n, v)?;
                Ok(v.clone())
            }
        }
    }
}

fn all_parties() -> PartySelection {
    PartySelection::Named("all".into())
}

/// Text form of a scenario, e.g.
/// `{"scenario": "local_filter_postselect", "state": "w_mixture:n=3,f=0.5",
/// "epsilon": 0.25, "parties": "all"}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    #[serde(default)]
    pub id: Option<String>,
    pub scenario: String,
    pub state: String,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default = "all_parties")]
    pub parties: PartySelection,
    #[serde(default)]
    pub ancilla: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub indicator: Option<String>,
}

/// A parsed document: either a postulate scenario or an average
/// monotonicity check with filter instruments.
#[derive(Clone, Debug)]
pub enum ScenarioJob {
    Postulate(Scenario),
    Monotonicity {
        id: String,
        state: QuantumState,
        instruments: Vec<KrausInstrument>,
    },
}

fn filter_assignment(n: usize, parties: &[usize], epsilon: f64) -> Result<Vec<KrausInstrument>> {
    let filter = FilterInstrument::new(epsilon)?.instrument();
    Ok((0..n)
        .map(|p| {
            if parties.contains(&p) {
                filter.clone()
            } else {
                KrausInstrument::identity()
            }
        })
        .collect())
}

impl ScenarioDocument {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Scenario(e.to_string()))
    }

    pub fn into_job(self) -> Result<ScenarioJob> {
        let state = parse_state_spec(&self.state)?;
        let n = state.num_parties();
        let parties = self.parties.resolve(n)?;
        let id = self
            .id
            .clone()
            .unwrap_or_else(|| format!("{}:{}", self.scenario, self.state));
        let need_epsilon = || {
            self.epsilon.ok_or_else(|| {
                Error::Scenario(format!("scenario `{}` needs epsilon", self.scenario))
            })
        };
        let transformation = match self.scenario.as_str() {
            "add_party" => Transformation::AddParty {
                ancilla: parse_state_spec(self.ancilla.as_deref().unwrap_or("zeros:n=1"))?,
            },
            "local_filter_postselect" => {
                let instruments = filter_assignment(n, &parties, need_epsilon()?)?;
                Transformation::LocalPostselect {
                    instruments,
                    branch: vec![0; n],
                }
            }
            "split_party" => Transformation::SplitParties { parties },
            "observation4" | "ancilla_send" => Transformation::AncillaSend {
                parties,
                seed: self.seed.unwrap_or(0),
            },
            "monotonicity" => {
                return Ok(ScenarioJob::Monotonicity {
                    id,
                    instruments: filter_assignment(n, &parties, need_epsilon()?)?,
                    state,
                })
            }
            other => return Err(Error::Scenario(format!("unknown scenario `{other}`"))),
        };
        Ok(ScenarioJob::Postulate(Scenario {
            id,
            initial: state,
            transformation,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::named::make_named_state;

    fn w_half() -> QuantumState {
        make_named_state("w_mixture", 3, &[0.5]).unwrap()
    }

    fn filter_scenario(eps: f64) -> Scenario {
        Scenario {
            id: "filter".into(),
            initial: w_half(),
            transformation: Transformation::LocalPostselect {
                instruments: filter_assignment(3, &[0, 1, 2], eps).unwrap(),
                branch: vec![0; 3],
            },
        }
    }

    #[test]
    fn covariance_fails_local_postselection() {
        let r = run_postulate_scenario(&Indicator::max_abs_covariance(), &filter_scenario(0.25))
            .unwrap();
        assert!(r.before() < 1e-10);
        assert!(r.after().unwrap() > 0.1);
        assert_eq!(r.status("Postulate 2"), Some(VerdictStatus::Violated));
    }

    #[test]
    fn degree_is_stable_under_add_party() {
        let sc = Scenario {
            id: "add".into(),
            initial: w_half(),
            transformation: Transformation::AddParty {
                ancilla: QuantumState::zeros(1),
            },
        };
        let r = run_postulate_scenario(&Indicator::degree(1e-9), &sc).unwrap();
        assert_eq!(r.before(), 3.0);
        assert_eq!(r.after(), Some(3.0));
        assert_eq!(
            r.status("Postulate 1\u{2032}"),
            Some(VerdictStatus::Satisfied)
        );
    }

    #[test]
    fn covariance_fails_splitting() {
        let sc = Scenario {
            id: "split".into(),
            initial: w_half(),
            transformation: Transformation::SplitParties {
                parties: vec![0, 1, 2],
            },
        };
        let r = run_postulate_scenario(&Indicator::all_z_covariance(), &sc).unwrap();
        assert!(r.before() < 1e-12);
        assert!((r.after().unwrap() - 1.0).abs() < 1e-10);
        assert_eq!(r.status("Postulate 3"), Some(VerdictStatus::Violated));
    }

    #[test]
    fn impossible_branch_is_inconclusive() {
        let p1 = crate::linalg::Mat2::new(linalg::ZERO, linalg::ZERO, linalg::ZERO, linalg::ONE);
        let sc = Scenario {
            id: "zero".into(),
            initial: QuantumState::zeros(2),
            transformation: Transformation::LocalPostselect {
                instruments: vec![KrausInstrument::new(vec![p1]), KrausInstrument::identity()],
                branch: vec![0, 0],
            },
        };
        let r = run_postulate_scenario(&Indicator::degree(1e-9), &sc).unwrap();
        assert_eq!(
            r.status("Postulate 2\u{2032}"),
            Some(VerdictStatus::Inconclusive)
        );
    }

    #[test]
    fn monotonicity_examples() {
        let inst = filter_assignment(3, &[0, 1, 2], 0.25).unwrap();
        let zero = check_measure_monotonicity(&|_| Ok(0.0), &w_half(), &inst).unwrap();
        assert!(zero.holds);
        let tr = check_measure_monotonicity(&|s| Ok(s.trace()), &w_half(), &inst).unwrap();
        assert!((tr.lhs - 1.0).abs() < 1e-12 && (tr.rhs - 1.0).abs() < 1e-12 && tr.holds);
        let cov =
            check_measure_monotonicity(&|s| Ok(cov_all_z(s)?.abs()), &w_half(), &inst).unwrap();
        assert!(!cov.holds);
        let bad =
            vec![KrausInstrument::new(vec![FilterInstrument::new(0.5).unwrap().success_op()]); 3];
        assert!(check_measure_monotonicity(&|_| Ok(0.0), &w_half(), &bad).is_err());
    }

    #[test]
    fn document_parsing() {
        let doc = ScenarioDocument::parse(
            r#"{"scenario":"local_filter_postselect","state":"w_mixture:n=3,f=0.5","epsilon":0.25,"parties":"all"}"#,
        )
        .unwrap();
        let ScenarioJob::Postulate(sc) = doc.into_job().unwrap() else {
            panic!("expected a postulate scenario")
        };
        let r = run_postulate_scenario(&Indicator::max_abs_covariance(), &sc).unwrap();
        assert_eq!(r.status("Postulate 2"), Some(VerdictStatus::Violated));
        let doc = ScenarioDocument::parse(
            r#"{"scenario":"split_party","state":"zeros:n=2","parties":[1]}"#,
        )
        .unwrap();
        assert!(matches!(doc.into_job().unwrap(), ScenarioJob::Postulate(_)));
        assert!(ScenarioDocument::parse(r#"{"scenario":"x"}"#).is_err());
        let doc = ScenarioDocument::parse(r#"{"scenario":"warp","state":"zeros:n=2"}"#).unwrap();
        assert!(doc.into_job().is_err());
        let doc = ScenarioDocument::parse(
            r#"{"scenario":"local_filter_postselect","state":"zeros:n=2"}"#,
        )
        .unwrap();
        assert!(doc.into_job().is_err());
    }

    #[test]
    fn ancilla_send_respects_degree_bound() {
        let sc = Scenario {
            id: "obs4".into(),
            initial: make_named_state("bell:psi+", 2, &[])
                .unwrap()
                .tensor(&QuantumState::zeros(1))
                .unwrap(),
            transformation: Transformation::AncillaSend {
                parties: vec![1, 2],
                seed: 5,
            },
        };
        let r = run_postulate_scenario(&Indicator::degree(1e-8), &sc).unwrap();
        assert_eq!(r.before(), 2.0);
        assert!(r.after().unwrap() <= 4.0);
        assert_eq!(r.status("Observation 4"), Some(VerdictStatus::Satisfied));
    }
}
