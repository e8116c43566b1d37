//! Work extraction with closed local operations and classical communication.
//!
//! Parties dephase qubits (keeping the outcome as a classical record in the
//! qubit itself), broadcast or send the records, rotate unmeasured qubits
//! conditioned on the records they can see, and finally send everything
//! through a completely dephasing channel to a collector. The extracted work
//! in bits is `(number of qubits) − H(final classical distribution)`.
//!
//! Under a cut constraint no record crosses the cut and each side collects
//! its own qubits; the work is the sum over sides.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cuts::Bipartition;
use crate::error::{Error, Result};
use crate::linalg::{self, c, DMat, Mat2, C64};
use crate::observable::{pauli_x, pauli_y, pauli_z, SingleQubitBasis};
use crate::state::QuantumState;

/// Largest party count simulated by [`run_protocol`].
pub const PROTOCOL_LIMIT: usize = 10;
/// Largest party count accepted by [`delta_w_estimate`].
pub const DELTA_W_LIMIT: usize = 6;
/// Work values closer than this count as ties during optimization.
pub const TIE_TOL: f64 = 1e-12;

const BRANCH_CUTOFF: f64 = 1e-15;
const DIAGONAL_TOL: f64 = 1e-10;

/// How a conditional unitary is chosen from the visible records.
#[derive(Clone, Debug, PartialEq)]
pub enum UnitaryRule {
    /// Rotates the eigenbasis of the party's conditional reduced state onto
    /// the computational basis (largest eigenvalue to `|0⟩`).
    Diagonalize,
    /// Record key → unitary. The key lists the visible outcomes in party
    /// order, e.g. `"01"`; missing keys mean identity.
    Table(BTreeMap<String, Mat2>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProtocolStep {
    /// Dephase `party` in `basis`, keep the outcome, announce it to every
    /// party the constraint allows.
    DephaseAndBroadcast {
        party: usize,
        basis: SingleQubitBasis,
    },
    /// Dephase `party` in `basis` and hand the qubit (and its record) to
    /// `destination`.
    SendDephased {
        party: usize,
        destination: usize,
        basis: SingleQubitBasis,
    },
    /// Unitary on the unmeasured qubit of `party`, chosen from the records
    /// `party` has seen.
    ConditionalLocalUnitary { party: usize, rule: UnitaryRule },
    /// Dephase every remaining qubit reachable by `destination` in the
    /// computational basis and gather it there.
    FinalCollect { destination: usize },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct WorkProtocol {
    pub steps: Vec<ProtocolStep>,
}

impl WorkProtocol {
    pub fn new(steps: Vec<ProtocolStep>) -> Self {
        Self { steps }
    }

    /// Renames parties, e.g. to embed a side protocol into a larger system.
    pub fn relabeled(&self, map: &[usize]) -> Self {
        let steps = self
            .steps
            .iter()
            .map(|s| match s.clone() {
                ProtocolStep::DephaseAndBroadcast { party, basis } => {
                    ProtocolStep::DephaseAndBroadcast {
                        party: map[party],
                        basis,
                    }
                }
                ProtocolStep::SendDephased {
                    party,
                    destination,
                    basis,
                } => ProtocolStep::SendDephased {
                    party: map[party],
                    destination: map[destination],
                    basis,
                },
                ProtocolStep::ConditionalLocalUnitary { party, rule } => {
                    ProtocolStep::ConditionalLocalUnitary {
                        party: map[party],
                        rule,
                    }
                }
                ProtocolStep::FinalCollect { destination } => ProtocolStep::FinalCollect {
                    destination: map[destination],
                },
            })
            .collect();
        Self { steps }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub enum CommunicationConstraint {
    #[default]
    Unrestricted,
    /// No classical communication across this cut.
    NoCommunicationAcross(Bipartition),
}

impl CommunicationConstraint {
    fn side_of(&self, party: usize) -> usize {
        match self {
            CommunicationConstraint::Unrestricted => 0,
            CommunicationConstraint::NoCommunicationAcross(cut) => {
                usize::from(!cut.left().contains(&party))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TranscriptEntry {
    /// Outcome per party, `-` where nothing was measured before collection.
    pub record: String,
    pub probability: f64,
    /// Entropy of the branch's collected computational-basis distribution.
    pub conditional_entropy_bits: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SideWork {
    pub parties: Vec<usize>,
    pub destination: usize,
    pub entropy_bits: f64,
    pub work_bits: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WorkResult {
    pub work_bits: f64,
    pub final_classical_entropy_bits: f64,
    pub num_qubits: usize,
    pub sides: Vec<SideWork>,
    /// Final joint distribution over all qubits (nonzero entries only).
    pub distribution: BTreeMap<String, f64>,
    pub transcript: Vec<TranscriptEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum QubitStatus {
    Fresh,
    Measured,
    Collected,
}

struct Branch {
    rho: DMat,
    outcomes: Vec<Option<u8>>,
}

struct Simulation<'a> {
    n: usize,
    constraint: &'a CommunicationConstraint,
    branches: Vec<Branch>,
    status: Vec<QubitStatus>,
    /// Party currently holding each qubit.
    holder: Vec<usize>,
    /// Parties able to read each qubit's record.
    readers: Vec<BTreeSet<usize>>,
    collected_sides: Vec<SideWork>,
    side_done: BTreeSet<usize>,
}

fn check_party(n: usize, party: usize) -> Result<()> {
    if party >= n {
        Err(Error::InvalidParties(format!(
            "party {party} out of range for {n} parties"
        )))
    } else {
        Ok(())
    }
}

impl<'a> Simulation<'a> {
    fn new(s: &QuantumState, constraint: &'a CommunicationConstraint) -> Result<Self> {
        let n = s.num_parties();
        if n > PROTOCOL_LIMIT {
            return Err(Error::TooLarge {
                what: "protocol simulation",
                n,
                limit: PROTOCOL_LIMIT,
            });
        }
        if let CommunicationConstraint::NoCommunicationAcross(cut) = constraint {
            if cut.num_parties() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: cut.num_parties(),
                });
            }
        }
        Ok(Self {
            n,
            constraint,
            branches: vec![Branch {
                rho: s.to_dense()?,
                outcomes: vec![None; n],
            }],
            status: vec![QubitStatus::Fresh; n],
            holder: (0..n).collect(),
            readers: vec![BTreeSet::new(); n],
            collected_sides: Vec::new(),
            side_done: BTreeSet::new(),
        })
    }

    fn require_fresh(&self, party: usize, action: &str) -> Result<()> {
        check_party(self.n, party)?;
        match self.status[party] {
            QubitStatus::Fresh if self.holder[party] == party => Ok(()),
            QubitStatus::Fresh => Err(Error::NonClocc(format!(
                "{action}: qubit {party} is held by party {}",
                self.holder[party]
            ))),
            QubitStatus::Measured => Err(Error::NonClocc(format!(
                "{action}: qubit {party} was already dephased"
            ))),
            QubitStatus::Collected => Err(Error::NonClocc(format!(
                "{action}: qubit {party} was already collected"
            ))),
        }
    }

    fn measure(&mut self, party: usize, basis: &SingleQubitBasis) {
        let ops = [0, 1].map(|k| linalg::mat2_to_dmat(&basis.measure_and_relabel(k)));
        let mut next = Vec::with_capacity(self.branches.len() * 2);
        for b in self.branches.drain(..) {
            for (k, op) in ops.iter().enumerate() {
                let mut rho = b.rho.clone();
                linalg::apply_op(&mut rho, self.n, &[party], op);
                if linalg::trace(&rho).re > BRANCH_CUTOFF {
                    let mut outcomes = b.outcomes.clone();
                    outcomes[party] = Some(k as u8);
                    next.push(Branch { rho, outcomes });
                }
            }
        }
        self.branches = next;
        self.status[party] = QubitStatus::Measured;
    }

    fn record_key(&self, reader: usize, outcomes: &[Option<u8>]) -> String {
        (0..self.n)
            .filter(|&q| self.readers[q].contains(&reader))
            .filter_map(|q| outcomes[q].map(|k| char::from(b'0' + k)))
            .collect()
    }

    fn conditional_unitary(&mut self, party: usize, rule: &UnitaryRule) -> Result<()> {
        self.require_fresh(party, "conditional unitary")?;
        let keys: Vec<String> = self
            .branches
            .iter()
            .map(|b| self.record_key(party, &b.outcomes))
            .collect();
        let mut unitaries: BTreeMap<String, DMat> = BTreeMap::new();
        match rule {
            UnitaryRule::Diagonalize => {
                let mut reduced: BTreeMap<&str, DMat> = BTreeMap::new();
                for (b, key) in self.branches.iter().zip(&keys) {
                    let r = linalg::partial_trace(&b.rho, self.n, &[party]);
                    *reduced
                        .entry(key.as_str())
                        .or_insert_with(|| DMat::zeros(2, 2)) += r;
                }
                for (key, r) in reduced {
                    let (_, vecs) = linalg::hermitian_eigen(&r);
                    unitaries.insert(key.to_string(), vecs.adjoint());
                }
            }
            UnitaryRule::Table(table) => {
                for (key, u) in table {
                    let d = linalg::mat2_to_dmat(u);
                    if (d.adjoint() * &d - DMat::identity(2, 2)).norm() > 1e-10 {
                        return Err(Error::InvalidParameter {
                            name: "unitary",
                            value: (d.adjoint() * &d - DMat::identity(2, 2)).norm(),
                            reason: "table entry is not unitary",
                        });
                    }
                    unitaries.insert(key.clone(), d);
                }
            }
        }
        for (b, key) in self.branches.iter_mut().zip(&keys) {
            if let Some(u) = unitaries.get(key) {
                linalg::apply_op(&mut b.rho, self.n, &[party], u);
            }
        }
        Ok(())
    }

    fn collect(&mut self, destination: usize) -> Result<()> {
        check_party(self.n, destination)?;
        let side = self.constraint.side_of(destination);
        if !self.side_done.insert(side) {
            return Err(Error::NonClocc(format!(
                "side of party {destination} was already collected"
            )));
        }
        let qubits: Vec<usize> = (0..self.n)
            .filter(|&q| self.constraint.side_of(self.holder[q]) == side)
            .collect();
        let mut marginal: BTreeMap<usize, f64> = BTreeMap::new();
        for b in &self.branches {
            for i in 0..b.rho.nrows() {
                let p = b.rho[(i, i)].re;
                if p > 0.0 {
                    let key = qubits
                        .iter()
                        .fold(0usize, |acc, &q| (acc << 1) | ((i >> (self.n - 1 - q)) & 1));
                    *marginal.entry(key).or_insert(0.0) += p;
                }
            }
        }
        let entropy = linalg::shannon_bits(marginal.values().copied());
        for &q in &qubits {
            self.status[q] = QubitStatus::Collected;
        }
        self.collected_sides.push(SideWork {
            parties: qubits.clone(),
            destination,
            entropy_bits: entropy,
            work_bits: qubits.len() as f64 - entropy,
        });
        Ok(())
    }

    fn step(&mut self, step: &ProtocolStep) -> Result<()> {
        match step {
            ProtocolStep::DephaseAndBroadcast { party, basis } => {
                self.require_fresh(*party, "dephase")?;
                self.measure(*party, basis);
                let side = self.constraint.side_of(*party);
                self.readers[*party] = (0..self.n)
                    .filter(|&p| self.constraint.side_of(p) == side)
                    .collect();
            }
            ProtocolStep::SendDephased {
                party,
                destination,
                basis,
            } => {
                self.require_fresh(*party, "send")?;
                check_party(self.n, *destination)?;
                if self.constraint.side_of(*party) != self.constraint.side_of(*destination) {
                    return Err(Error::ConstraintViolation(format!(
                        "party {party} may not send to party {destination}"
                    )));
                }
                self.measure(*party, basis);
                self.readers[*party] = [*party, *destination].into_iter().collect();
                self.holder[*party] = *destination;
            }
            ProtocolStep::ConditionalLocalUnitary { party, rule } => {
                self.conditional_unitary(*party, rule)?
            }
            ProtocolStep::FinalCollect { destination } => self.collect(*destination)?,
        }
        Ok(())
    }

    fn finish(self) -> Result<WorkResult> {
        if let Some(q) = self
            .status
            .iter()
            .position(|s| *s != QubitStatus::Collected)
        {
            return Err(Error::NonClocc(format!("qubit {q} is never collected")));
        }
        let n = self.n;
        let mut joint: BTreeMap<usize, f64> = BTreeMap::new();
        let mut transcript = Vec::with_capacity(self.branches.len());
        for b in &self.branches {
            let diag: Vec<f64> = (0..b.rho.nrows()).map(|i| b.rho[(i, i)].re).collect();
            let p: f64 = diag.iter().sum();
            for (i, &v) in diag.iter().enumerate() {
                if v > 0.0 {
                    *joint.entry(i).or_insert(0.0) += v;
                }
            }
            transcript.push(TranscriptEntry {
                record: b
                    .outcomes
                    .iter()
                    .map(|o| o.map_or('-', |k| char::from(b'0' + k)))
                    .collect(),
                probability: p,
                conditional_entropy_bits: linalg::shannon_bits(diag.iter().map(|v| v / p)),
            });
        }
        let entropy: f64 = self.collected_sides.iter().map(|s| s.entropy_bits).sum();
        let work: f64 = self.collected_sides.iter().map(|s| s.work_bits).sum();
        let distribution = joint
            .into_iter()
            .filter(|(_, p)| *p > linalg::EIGEN_CUTOFF)
            .map(|(i, p)| (format!("{i:0n$b}"), p))
            .collect();
        Ok(WorkResult {
            work_bits: work,
            final_classical_entropy_bits: entropy,
            num_qubits: n,
            sides: self.collected_sides,
            distribution,
            transcript,
        })
    }
}

/// Simulates the protocol on a state of at most [`PROTOCOL_LIMIT`] parties.
pub fn run_protocol(
    s: &QuantumState,
    protocol: &WorkProtocol,
    constraint: &CommunicationConstraint,
) -> Result<WorkResult> {
    let mut sim = Simulation::new(s, constraint)?;
    for step in &protocol.steps {
        sim.step(step)?;
    }
    sim.finish()
}

/// `n − S(ρ)` for a state diagonal in the computational basis.
pub fn work_from_classical_state(s: &QuantumState) -> Result<f64> {
    let rho = s.to_dense()?;
    let off = linalg::max_off_diagonal(&rho);
    if off > DIAGONAL_TOL {
        return Err(Error::NotDiagonal(off));
    }
    let probs = (0..rho.nrows()).map(|i| rho[(i, i)].re);
    Ok(s.num_parties() as f64 - linalg::shannon_bits(probs))
}

/// Upper bound `n − S(ρ)` on the work any protocol can extract.
pub fn work_upper_bound(s: &QuantumState) -> Result<f64> {
    Ok(s.num_parties() as f64 - s.entropy_bits()?)
}

/// Protocol templates searched by the optimizer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum ProtocolFamily {
    /// Every party dephases in the computational basis; one collector.
    AllComputational,
    /// One party measures in a variable basis and broadcasts; the others
    /// except the last dephase in the computational basis and broadcast; the
    /// last diagonalizes its conditional state; everything is collected.
    /// `measuring = None` tries every party.
    MeasureBroadcast { measuring: Option<usize> },
}

impl ProtocolFamily {
    pub fn name(&self) -> String {
        match self {
            ProtocolFamily::AllComputational => "all_computational".into(),
            ProtocolFamily::MeasureBroadcast { measuring: Some(m) } => {
                format!("measure_broadcast(party {m})")
            }
            ProtocolFamily::MeasureBroadcast { measuring: None } => "measure_broadcast".into(),
        }
    }
}

/// The all-computational protocol on `n` parties.
pub fn all_computational_protocol(n: usize) -> WorkProtocol {
    let mut steps: Vec<ProtocolStep> = (0..n)
        .map(|party| ProtocolStep::DephaseAndBroadcast {
            party,
            basis: SingleQubitBasis::computational(),
        })
        .collect();
    steps.push(ProtocolStep::FinalCollect { destination: 0 });
    WorkProtocol::new(steps)
}

/// Measure-and-broadcast protocol with `measuring` using `basis`.
pub fn measure_broadcast_protocol(
    n: usize,
    measuring: usize,
    basis: &SingleQubitBasis,
) -> Result<WorkProtocol> {
    check_party(n, measuring)?;
    if n == 1 {
        return Ok(WorkProtocol::new(vec![
            ProtocolStep::ConditionalLocalUnitary {
                party: 0,
                rule: UnitaryRule::Diagonalize,
            },
            ProtocolStep::FinalCollect { destination: 0 },
        ]));
    }
    let last = (0..n).rev().find(|&p| p != measuring).expect("n >= 2");
    let mut steps = vec![ProtocolStep::DephaseAndBroadcast {
        party: measuring,
        basis: basis.clone(),
    }];
    for p in (0..n).filter(|&p| p != measuring && p != last) {
        steps.push(ProtocolStep::DephaseAndBroadcast {
            party: p,
            basis: SingleQubitBasis::computational(),
        });
    }
    steps.push(ProtocolStep::ConditionalLocalUnitary {
        party: last,
        rule: UnitaryRule::Diagonalize,
    });
    steps.push(ProtocolStep::FinalCollect {
        destination: measuring,
    });
    Ok(WorkProtocol::new(steps))
}

/// Grid-then-refine search over `(θ, φ)` of `from_angles`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BasisSearch {
    pub theta_points: usize,
    pub phi_points: usize,
    pub refine_rounds: usize,
    pub shrink: usize,
    /// Converged when the final θ step is below this.
    pub step_tol: f64,
}

impl Default for BasisSearch {
    fn default() -> Self {
        Self {
            theta_points: 64,
            phi_points: 32,
            refine_rounds: 3,
            shrink: 8,
            step_tol: 1e-4,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimizedBasis {
    pub theta: f64,
    pub phi: f64,
    pub basis: SingleQubitBasis,
    pub work_bits: f64,
    pub converged: bool,
    pub evaluations: usize,
}

/// Maximizes `objective(θ, φ)`; ties go to the lexicographically smallest
/// `(θ, φ)`.
pub fn optimize_angles(
    search: &BasisSearch,
    mut objective: impl FnMut(f64, f64) -> Result<f64>,
) -> Result<(f64, f64, f64, bool, usize)> {
    if search.theta_points < 2 || search.phi_points < 1 || search.shrink < 2 {
        return Err(Error::InvalidParameter {
            name: "search",
            value: search.theta_points as f64,
            reason: "grid needs at least 2 theta points, 1 phi point and shrink >= 2",
        });
    }
    let mut h_theta = PI / (search.theta_points - 1) as f64;
    let mut h_phi = 2.0 * PI / search.phi_points as f64;
    let mut evaluations = 0;
    let mut pick = |points: Vec<(f64, f64)>, evaluations: &mut usize| -> Result<(f64, f64, f64)> {
        let mut best: Option<(f64, f64, f64)> = None;
        let mut points = points;
        points.sort_by(|a, b| a.partial_cmp(b).expect("finite angles"));
        points.dedup();
        for (t, p) in points {
            let w = objective(t, p)?;
            *evaluations += 1;
            if best.is_none_or(|(_, _, bw)| w > bw + TIE_TOL) {
                best = Some((t, p, w));
            }
        }
        Ok(best.expect("nonempty grid"))
    };
    let coarse: Vec<(f64, f64)> = (0..search.theta_points)
        .flat_map(|i| (0..search.phi_points).map(move |j| (i as f64 * h_theta, j as f64 * h_phi)))
        .collect();
    let (mut theta, mut phi, mut work) = pick(coarse, &mut evaluations)?;
    let mut last_gain = f64::INFINITY;
    let span = search.shrink as i64;
    for _ in 0..search.refine_rounds {
        h_theta /= search.shrink as f64;
        h_phi /= search.shrink as f64;
        let mut local = Vec::new();
        for a in -span..=span {
            let t = theta + a as f64 * h_theta;
            if !(-1e-15..=PI + 1e-15).contains(&t) {
                continue;
            }
            for b in -span..=span {
                let p = (phi + b as f64 * h_phi).rem_euclid(2.0 * PI);
                local.push((t.clamp(0.0, PI), p));
            }
        }
        let (t, p, w) = pick(local, &mut evaluations)?;
        last_gain = w - work;
        theta = t;
        phi = p;
        work = w;
    }
    let converged = h_theta < search.step_tol || last_gain <= 1e-9;
    Ok((theta, phi, work, converged, evaluations))
}

/// Best measuring basis for the measure-and-broadcast family.
pub fn optimize_basis(
    s: &QuantumState,
    measuring_party: usize,
    search: &BasisSearch,
) -> Result<OptimizedBasis> {
    let n = s.num_parties();
    check_party(n, measuring_party)?;
    let dense = if s.is_dense() {
        s.clone()
    } else {
        s.densified()?
    };
    let unrestricted = CommunicationConstraint::Unrestricted;
    let (theta, phi, work, converged, evaluations) = optimize_angles(search, |t, p| {
        let protocol =
            measure_broadcast_protocol(n, measuring_party, &SingleQubitBasis::from_angles(t, p))?;
        Ok(run_protocol(&dense, &protocol, &unrestricted)?.work_bits)
    })?;
    if !converged {
        log::warn!("basis search stopped before converging; reporting best point found");
    }
    Ok(OptimizedBasis {
        theta,
        phi,
        basis: SingleQubitBasis::from_angles(theta, phi),
        work_bits: work,
        converged,
        evaluations,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyOptimum {
    pub family: String,
    pub work_bits: f64,
    pub measuring_party: Option<usize>,
    pub theta: Option<f64>,
    pub phi: Option<f64>,
    pub converged: bool,
    #[serde(skip)]
    pub protocol: WorkProtocol,
}

/// Best work over the given families with unrestricted communication.
pub fn best_work(
    s: &QuantumState,
    families: &[ProtocolFamily],
    search: &BasisSearch,
) -> Result<FamilyOptimum> {
    if families.is_empty() {
        return Err(Error::InvalidParameter {
            name: "families",
            value: 0.0,
            reason: "need at least one protocol family",
        });
    }
    let n = s.num_parties();
    let dense = if s.is_dense() {
        s.clone()
    } else {
        s.densified()?
    };
    let mut best: Option<FamilyOptimum> = None;
    let mut consider = |cand: FamilyOptimum| {
        if best
            .as_ref()
            .is_none_or(|b| cand.work_bits > b.work_bits + TIE_TOL)
        {
            best = Some(cand);
        }
    };
    for family in families {
        match family {
            ProtocolFamily::AllComputational => {
                let protocol = all_computational_protocol(n);
                let r = run_protocol(&dense, &protocol, &CommunicationConstraint::Unrestricted)?;
                consider(FamilyOptimum {
                    family: family.name(),
                    work_bits: r.work_bits,
                    measuring_party: None,
                    theta: None,
                    phi: None,
                    converged: true,
                    protocol,
                });
            }
            ProtocolFamily::MeasureBroadcast { measuring } => {
                let parties: Vec<usize> = match measuring {
                    Some(m) => vec![*m],
                    None => (0..n).collect(),
                };
                for m in parties {
                    if n == 1 {
                        let protocol =
                            measure_broadcast_protocol(1, 0, &SingleQubitBasis::computational())?;
                        let r = run_protocol(
                            &dense,
                            &protocol,
                            &CommunicationConstraint::Unrestricted,
                        )?;
                        consider(FamilyOptimum {
                            family: family.name(),
                            work_bits: r.work_bits,
                            measuring_party: Some(0),
                            theta: None,
                            phi: None,
                            converged: true,
                            protocol,
                        });
                        continue;
                    }
                    let opt = optimize_basis(&dense, m, search)?;
                    consider(FamilyOptimum {
                        family: ProtocolFamily::MeasureBroadcast { measuring: Some(m) }.name(),
                        work_bits: opt.work_bits,
                        measuring_party: Some(m),
                        theta: Some(opt.theta),
                        phi: Some(opt.phi),
                        converged: opt.converged,
                        protocol: measure_broadcast_protocol(n, m, &opt.basis)?,
                    });
                }
            }
        }
    }
    Ok(best.expect("families is nonempty"))
}

#[derive(Clone, Debug, Serialize)]
pub struct CutWork {
    pub cut: String,
    pub left: FamilyOptimum,
    pub right: FamilyOptimum,
    /// Work of the combined side protocols run under the cut constraint.
    pub restricted_work_bits: f64,
    pub difference_bits: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaWEstimate {
    pub unrestricted: FamilyOptimum,
    /// Best unrestricted value: the family optimum, or a cut-respecting
    /// protocol when one does better (those are unrestricted protocols too).
    pub unrestricted_work_bits: f64,
    pub cuts: Vec<CutWork>,
    pub delta_w_bits: f64,
    pub minimizing_cut: String,
}

/// Unrestricted optimum minus the best no-communication-across-the-cut
/// optimum, minimized over cuts, within the supplied families.
pub fn delta_w_estimate(
    s: &QuantumState,
    families: &[ProtocolFamily],
    search: &BasisSearch,
) -> Result<DeltaWEstimate> {
    let n = s.num_parties();
    if n > DELTA_W_LIMIT {
        return Err(Error::TooLarge {
            what: "delta-W estimate",
            n,
            limit: DELTA_W_LIMIT,
        });
    }
    let dense = if s.is_dense() {
        s.clone()
    } else {
        s.densified()?
    };
    let unrestricted = best_work(&dense, families, search)?;
    // Side families are templates; a fixed measuring party is meaningless on
    // a marginal, so every party of the side is tried.
    let side_families: Vec<ProtocolFamily> = families
        .iter()
        .map(|f| match f {
            ProtocolFamily::MeasureBroadcast { .. } => {
                ProtocolFamily::MeasureBroadcast { measuring: None }
            }
            other => *other,
        })
        .collect();
    let mut cuts = Vec::new();
    for cut in Bipartition::all(n)? {
        let left_parties = cut.left().to_vec();
        let right_parties = cut.right();
        let left = best_work(&dense.partial_trace(&left_parties)?, &side_families, search)?;
        let right = best_work(
            &dense.partial_trace(&right_parties)?,
            &side_families,
            search,
        )?;
        let mut combined = left.protocol.relabeled(&left_parties);
        combined
            .steps
            .extend(right.protocol.relabeled(&right_parties).steps);
        let constraint = CommunicationConstraint::NoCommunicationAcross(cut.clone());
        let restricted = run_protocol(&dense, &combined, &constraint)?.work_bits;
        cuts.push(CutWork {
            cut: cut.to_string(),
            difference_bits: 0.0,
            restricted_work_bits: restricted,
            left,
            right,
        });
    }
    let unrestricted_work_bits = cuts
        .iter()
        .map(|c| c.restricted_work_bits)
        .fold(unrestricted.work_bits, f64::max);
    for c in &mut cuts {
        c.difference_bits = unrestricted_work_bits - c.restricted_work_bits;
    }
    let (idx, _) = cuts
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, c)| {
            if c.difference_bits < bv - TIE_TOL {
                (i, c.difference_bits)
            } else {
                (bi, bv)
            }
        });
    Ok(DeltaWEstimate {
        delta_w_bits: cuts[idx].difference_bits,
        minimizing_cut: cuts[idx].cut.clone(),
        unrestricted,
        unrestricted_work_bits,
        cuts,
    })
}

/// Parses a product of named gates such as `x*h` (applied right to left, so
/// `x*h` is `X·H`). Letters: `i`, `x`, `y`, `z`, `h`, `s`.
pub fn parse_gate(text: &str) -> Result<Mat2> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut acc = Mat2::identity();
    for tok in text.split('*') {
        let m = match tok.trim().to_ascii_lowercase().as_str() {
            "i" => Mat2::identity(),
            "x" => pauli_x(),
            "y" => pauli_y(),
            "z" => pauli_z(),
            "h" => Mat2::new(c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)),
            "s" => Mat2::new(
                c(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                c(0.0, 1.0),
            ),
            other => return Err(Error::Parse(format!("unknown gate `{other}`"))),
        };
        acc *= m;
    }
    Ok(acc)
}

/// Text form of a protocol step.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum StepDocument {
    DephaseBroadcast {
        party: usize,
        #[serde(default = "default_basis")]
        basis: String,
    },
    SendDephased {
        party: usize,
        destination: usize,
        #[serde(default = "default_basis")]
        basis: String,
    },
    ConditionalUnitary {
        party: usize,
        #[serde(default)]
        table: Option<BTreeMap<String, String>>,
    },
    Collect {
        destination: usize,
    },
}

fn default_basis() -> String {
    "z".into()
}

/// Text form of a protocol, e.g.
/// `{"steps":[{"op":"dephase_broadcast","party":0,"basis":"x"},
/// {"op":"conditional_unitary","party":1},{"op":"collect","destination":0}]}`.
/// A conditional unitary without a table diagonalizes; `cut` lists one side
/// of a no-communication cut.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProtocolDocument {
    pub steps: Vec<StepDocument>,
    #[serde(default)]
    pub cut: Option<Vec<usize>>,
}

impl ProtocolDocument {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_protocol(&self, n: usize) -> Result<(WorkProtocol, CommunicationConstraint)> {
        let mut steps = Vec::with_capacity(self.steps.len());
        for s in &self.steps {
            steps.push(match s {
                StepDocument::DephaseBroadcast { party, basis } => {
                    ProtocolStep::DephaseAndBroadcast {
                        party: *party,
                        basis: basis.parse()?,
                    }
                }
                StepDocument::SendDephased {
                    party,
                    destination,
                    basis,
                } => ProtocolStep::SendDephased {
                    party: *party,
                    destination: *destination,
                    basis: basis.parse()?,
                },
                StepDocument::ConditionalUnitary { party, table } => {
                    ProtocolStep::ConditionalLocalUnitary {
                        party: *party,
                        rule: match table {
                            None => UnitaryRule::Diagonalize,
                            Some(t) => UnitaryRule::Table(
                                t.iter()
                                    .map(|(k, g)| Ok((k.clone(), parse_gate(g)?)))
                                    .collect::<Result<_>>()?,
                            ),
                        },
                    }
                }
                StepDocument::Collect { destination } => ProtocolStep::FinalCollect {
                    destination: *destination,
                },
            });
        }
        let constraint = match &self.cut {
            None => CommunicationConstraint::Unrestricted,
            Some(side) => {
                CommunicationConstraint::NoCommunicationAcross(Bipartition::new(n, side)?)
            }
        };
        Ok((WorkProtocol::new(steps), constraint))
    }
}
