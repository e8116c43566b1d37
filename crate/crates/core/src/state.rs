//! Multi-qubit states in dense or structured (sparse mixture) form.

use std::collections::BTreeMap;

use nalgebra::DVector;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::linalg::{self, c, DMat, Mat2, C64, ZERO};
use crate::observable::{LocalObservableList, SingleQubitBasis};

/// Largest party count for which a dense matrix is ever built.
pub const DENSE_LIMIT: usize = 12;
/// Structured spectra use a Gram matrix over mixture terms up to this size.
const GRAM_LIMIT: usize = 2048;

const NORM_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const NEG_EIGEN_TOL: f64 = 1e-8;
const SYMMETRIZE_WARN: f64 = 1e-8;

/// Pure state stored as its nonzero computational-basis amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsePureState {
    num_parties: usize,
    amplitudes: BTreeMap<BitString, C64>,
}

impl SparsePureState {
    /// Validated constructor: labels must have `num_parties` bits and the
    /// vector must have unit norm.
    pub fn new(num_parties: usize, amplitudes: BTreeMap<BitString, C64>) -> Result<Self> {
        let s = Self::from_amplitudes(num_parties, amplitudes)?;
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "pure state has squared norm {norm}, expected 1"
            )));
        }
        Ok(s)
    }

    /// Builds the normalized version of an arbitrary nonzero vector.
    pub fn normalized(num_parties: usize, amplitudes: BTreeMap<BitString, C64>) -> Result<Self> {
        let mut s = Self::from_amplitudes(num_parties, amplitudes)?;
        let norm = s.norm_sqr();
        if norm < 1e-300 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        s.scale(1.0 / norm.sqrt());
        Ok(s)
    }

    fn from_amplitudes(num_parties: usize, amplitudes: BTreeMap<BitString, C64>) -> Result<Self> {
        if num_parties == 0 {
            return Err(Error::InvalidState("state needs at least one party".into()));
        }
        if let Some(bad) = amplitudes.keys().find(|b| b.len() != num_parties) {
            return Err(Error::InvalidState(format!(
                "bitstring {bad} has {} bits, expected {num_parties}",
                bad.len()
            )));
        }
        let amplitudes = amplitudes.into_iter().filter(|(_, a)| *a != ZERO).collect();
        Ok(Self {
            num_parties,
            amplitudes,
        })
    }

    pub(crate) fn unchecked(num_parties: usize, amplitudes: BTreeMap<BitString, C64>) -> Self {
        Self {
            num_parties,
            amplitudes,
        }
    }

    pub fn basis(bits: BitString) -> Self {
        let n = bits.len();
        Self {
            num_parties: n,
            amplitudes: BTreeMap::from([(bits, c(1.0, 0.0))]),
        }
    }

    /// Equal-weight superposition of the given labels.
    pub fn uniform(
        num_parties: usize,
        labels: impl IntoIterator<Item = BitString>,
    ) -> Result<Self> {
        let amps: BTreeMap<_, _> = labels.into_iter().map(|b| (b, c(1.0, 0.0))).collect();
        Self::normalized(num_parties, amps)
    }

    pub fn num_parties(&self) -> usize {
        self.num_parties
    }

    pub fn amplitudes(&self) -> &BTreeMap<BitString, C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, bits: &BitString) -> C64 {
        self.amplitudes.get(bits).copied().unwrap_or(ZERO)
    }

    pub fn sparsity(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    fn scale(&mut self, f: f64) {
        for a in self.amplitudes.values_mut() {
            *a *= f;
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &SparsePureState) -> C64 {
        let (small, large, conj_small) = if self.sparsity() <= other.sparsity() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        let mut acc = ZERO;
        for (bits, a) in &small.amplitudes {
            if let Some(b) = large.amplitudes.get(bits) {
                acc += if conj_small {
                    a.conj() * b
                } else {
                    b.conj() * a
                };
            }
        }
        acc
    }

    pub fn to_dense_vector(&self) -> Result<DVector<C64>> {
        check_dense(self.num_parties, "dense vector")?;
        let mut v = DVector::from_element(linalg::dim(self.num_parties), ZERO);
        for (bits, a) in &self.amplitudes {
            v[bits.to_index()] = *a;
        }
        Ok(v)
    }

    pub fn tensor(&self, other: &SparsePureState) -> SparsePureState {
        let mut amps = BTreeMap::new();
        for (x, a) in &self.amplitudes {
            for (y, b) in &other.amplitudes {
                amps.insert(x.concat(y), a * b);
            }
        }
        Self::unchecked(self.num_parties + other.num_parties, amps)
    }

    /// `(⊗ ops)|ψ⟩`, unnormalized. Diagonal operators keep the support.
    pub fn apply_local(&self, ops: &[Mat2]) -> SparsePureState {
        let mut current = self.amplitudes.clone();
        for (party, op) in ops.iter().enumerate() {
            if *op == Mat2::identity() {
                continue;
            }
            let mut next: BTreeMap<BitString, C64> = BTreeMap::new();
            for (bits, amp) in current {
                let x = bits.get(party) as usize;
                for y in 0..2 {
                    let factor = op[(y, x)];
                    if factor == ZERO {
                        continue;
                    }
                    let mut out = bits.clone();
                    out.set(party, y == 1);
                    *next.entry(out).or_insert(ZERO) += factor * amp;
                }
            }
            next.retain(|_, a| *a != ZERO);
            current = next;
        }
        Self::unchecked(self.num_parties, current)
    }

    /// `O|ψ⟩` for an operator on `parties` (first listed = most significant
    /// operator index), unnormalized.
    pub fn apply_op(&self, parties: &[usize], op: &DMat) -> SparsePureState {
        let k = parties.len();
        let mut next: BTreeMap<BitString, C64> = BTreeMap::new();
        for (bits, amp) in &self.amplitudes {
            let x = parties
                .iter()
                .fold(0usize, |acc, &p| (acc << 1) | bits.get(p) as usize);
            for y in 0..1usize << k {
                let factor = op[(y, x)];
                if factor == ZERO {
                    continue;
                }
                let mut out = bits.clone();
                for (j, &p) in parties.iter().enumerate() {
                    out.set(p, (y >> (k - 1 - j)) & 1 == 1);
                }
                *next.entry(out).or_insert(ZERO) += factor * amp;
            }
        }
        next.retain(|_, a| a.norm_sqr() > 1e-300);
        Self::unchecked(self.num_parties, next)
    }

    /// `⟨ψ|(⊗ ops)|ψ⟩`.
    pub fn expectation(&self, ops: &[Mat2]) -> C64 {
        let mut acc = ZERO;
        for (x, ax) in &self.amplitudes {
            for (y, ay) in &self.amplitudes {
                let mut prod = ax.conj() * ay;
                for (party, op) in ops.iter().enumerate() {
                    prod *= op[(x.get(party) as usize, y.get(party) as usize)];
                    if prod == ZERO {
                        break;
                    }
                }
                acc += prod;
            }
        }
        acc
    }

    /// Flips every bit.
    pub fn complement(&self) -> SparsePureState {
        let amps = self
            .amplitudes
            .iter()
            .map(|(b, a)| {
                let mut f = b.clone();
                for p in 0..b.len() {
                    f.set(p, !b.get(p));
                }
                (f, *a)
            })
            .collect();
        Self::unchecked(self.num_parties, amps)
    }
}

/// Internal representation of a [`QuantumState`].
#[derive(Clone, Debug)]
pub enum Body {
    Dense(DMat),
    /// Convex combination of sparse pure states.
    Structured(Vec<(f64, SparsePureState)>),
}

/// An `n`-qubit density operator.
#[derive(Clone, Debug)]
pub struct QuantumState {
    num_parties: usize,
    body: Body,
}

fn check_dense(n: usize, what: &'static str) -> Result<()> {
    if n > DENSE_LIMIT {
        Err(Error::TooLarge {
            what,
            n,
            limit: DENSE_LIMIT,
        })
    } else {
        Ok(())
    }
}

pub(crate) fn validate_parties(n: usize, parties: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    for &p in parties {
        if p >= n {
            return Err(Error::InvalidParties(format!(
                "party {p} out of range for {n} parties"
            )));
        }
        if seen[p] {
            return Err(Error::InvalidParties(format!("party {p} listed twice")));
        }
        seen[p] = true;
    }
    Ok(())
}

impl QuantumState {
    /// Ingests a dense matrix: symmetrizes, then checks trace and spectrum.
    pub fn from_dense(num_parties: usize, matrix: DMat) -> Result<Self> {
        check_dense(num_parties, "dense state")?;
        let d = linalg::dim(num_parties);
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows(),
            });
        }
        let sym = (&matrix + matrix.adjoint()) * c(0.5, 0.0);
        let correction = (&sym - &matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if correction > SYMMETRIZE_WARN {
            log::warn!("input matrix symmetrized; largest correction {correction:e}");
        }
        let tr = linalg::trace(&sym).re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min_eig = linalg::hermitian_eigenvalues(&sym)[0];
        if min_eig < -NEG_EIGEN_TOL {
            return Err(Error::InvalidState(format!(
                "matrix is not positive semidefinite (eigenvalue {min_eig:e})"
            )));
        }
        Ok(Self {
            num_parties,
            body: Body::Dense(sym),
        })
    }

    /// Dense state produced by an internal operation that preserves validity.
    pub(crate) fn dense_unchecked(num_parties: usize, matrix: DMat) -> Self {
        Self {
            num_parties,
            body: Body::Dense(matrix),
        }
    }

    /// Validated mixture. Zero-weight terms are dropped.
    pub fn from_mixture(num_parties: usize, terms: Vec<(f64, SparsePureState)>) -> Result<Self> {
        if num_parties == 0 {
            return Err(Error::InvalidState("state needs at least one party".into()));
        }
        let mut kept = Vec::with_capacity(terms.len());
        let mut total = 0.0;
        for (w, psi) in terms {
            if !(w >= 0.0) {
                return Err(Error::InvalidState(format!(
                    "mixture weight {w} is negative"
                )));
            }
            if psi.num_parties != num_parties {
                return Err(Error::DimensionMismatch {
                    expected: num_parties,
                    found: psi.num_parties,
                });
            }
            let norm = psi.norm_sqr();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(Error::InvalidState(format!(
                    "mixture component has squared norm {norm}"
                )));
            }
            total += w;
            if w > 0.0 {
                kept.push((w, psi));
            }
        }
        if (total - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "mixture weights sum to {total}"
            )));
        }
        Ok(Self {
            num_parties,
            body: Body::Structured(kept),
        })
    }

    /// Mixture built internally; renormalizes weights to sum 1.
    pub(crate) fn mixture_unchecked(
        num_parties: usize,
        mut terms: Vec<(f64, SparsePureState)>,
    ) -> Self {
        let total: f64 = terms.iter().map(|(w, _)| *w).sum();
        for (w, _) in terms.iter_mut() {
            *w /= total;
        }
        Self {
            num_parties,
            body: Body::Structured(terms),
        }
    }

    pub fn pure(psi: SparsePureState) -> Self {
        Self {
            num_parties: psi.num_parties,
            body: Body::Structured(vec![(1.0, psi)]),
        }
    }

    /// `|bits⟩⟨bits|`.
    pub fn basis(bits: BitString) -> Self {
        Self::pure(SparsePureState::basis(bits))
    }

    pub fn zeros(n: usize) -> Self {
        Self::basis(BitString::zeros(n))
    }

    /// `I / 2^n`, as a uniform mixture of basis states.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        if n > 20 {
            return Err(Error::TooLarge {
                what: "maximally mixed state",
                n,
                limit: 20,
            });
        }
        let w = 1.0 / linalg::dim(n) as f64;
        let terms = (0..linalg::dim(n))
            .map(|i| (w, SparsePureState::basis(BitString::from_index(n, i))))
            .collect();
        Ok(Self {
            num_parties: n,
            body: Body::Structured(terms),
        })
    }

    pub fn num_parties(&self) -> usize {
        self.num_parties
    }

    /// Random dense state: mixture of `rank` Haar-random pure states with
    /// flat-Dirichlet weights.
    pub fn random_dense<R: rand::Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> Result<Self> {
        check_dense(n, "random dense state")?;
        if rank == 0 {
            return Err(Error::InvalidState("rank must be positive".into()));
        }
        let d = linalg::dim(n);
        let weights: Vec<f64> = (0..rank)
            .map(|_| -rng.random::<f64>().max(1e-300).ln())
            .collect();
        let total: f64 = weights.iter().sum();
        let mut m = DMat::zeros(d, d);
        for w in weights {
            let v = linalg::haar_vector(d, rng);
            m += (&v * v.adjoint()) * c(w / total, 0.0);
        }
        Ok(Self::dense_unchecked(n, m))
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.body, Body::Dense(_))
    }

    /// Mixture terms when structured.
    pub fn terms(&self) -> Option<&[(f64, SparsePureState)]> {
        match &self.body {
            Body::Structured(t) => Some(t),
            Body::Dense(_) => None,
        }
    }

    pub fn to_dense(&self) -> Result<DMat> {
        check_dense(self.num_parties, "dense conversion")?;
        match &self.body {
            Body::Dense(m) => Ok(m.clone()),
            Body::Structured(terms) => {
                let d = linalg::dim(self.num_parties);
                let mut m = DMat::zeros(d, d);
                for (w, psi) in terms {
                    let entries: Vec<(usize, C64)> = psi
                        .amplitudes
                        .iter()
                        .map(|(b, a)| (b.to_index(), *a))
                        .collect();
                    for &(i, ai) in &entries {
                        for &(j, aj) in &entries {
                            m[(i, j)] += ai * aj.conj() * *w;
                        }
                    }
                }
                Ok(m)
            }
        }
    }

    /// Same state in dense form.
    pub fn densified(&self) -> Result<QuantumState> {
        Ok(Self::dense_unchecked(self.num_parties, self.to_dense()?))
    }

    pub fn trace(&self) -> f64 {
        match &self.body {
            Body::Dense(m) => linalg::trace(m).re,
            Body::Structured(terms) => terms.iter().map(|(w, p)| w * p.norm_sqr()).sum(),
        }
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &QuantumState) -> Result<QuantumState> {
        let n = self.num_parties + other.num_parties;
        match (&self.body, &other.body) {
            (Body::Structured(a), Body::Structured(b)) => {
                let mut terms = Vec::with_capacity(a.len() * b.len());
                for (wa, pa) in a {
                    for (wb, pb) in b {
                        terms.push((wa * wb, pa.tensor(pb)));
                    }
                }
                Ok(Self {
                    num_parties: n,
                    body: Body::Structured(terms),
                })
            }
            _ => {
                check_dense(n, "dense tensor product")?;
                Ok(Self::dense_unchecked(
                    n,
                    linalg::kron(&self.to_dense()?, &other.to_dense()?),
                ))
            }
        }
    }

    /// Reduced state on `keep`, in ascending party order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<QuantumState> {
        if keep.is_empty() {
            return Err(Error::InvalidParties("keep set is empty".into()));
        }
        validate_parties(self.num_parties, keep)?;
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        if keep.len() == self.num_parties {
            return Ok(self.clone());
        }
        let traced: Vec<usize> = (0..self.num_parties)
            .filter(|p| !keep.contains(p))
            .collect();
        match &self.body {
            Body::Dense(m) => Ok(Self::dense_unchecked(
                keep.len(),
                linalg::partial_trace(m, self.num_parties, &keep),
            )),
            Body::Structured(terms) => {
                // Tr_B |ψ⟩⟨ψ| = Σ_e |φ_e⟩⟨φ_e| with φ_e = (I ⊗ ⟨e|)|ψ⟩.
                let mut out = Vec::new();
                for (w, psi) in terms {
                    let mut branches: BTreeMap<BitString, BTreeMap<BitString, C64>> =
                        BTreeMap::new();
                    for (bits, a) in &psi.amplitudes {
                        *branches
                            .entry(bits.select(&traced))
                            .or_default()
                            .entry(bits.select(&keep))
                            .or_insert(ZERO) += *a;
                    }
                    for amps in branches.into_values() {
                        let phi = SparsePureState::unchecked(keep.len(), amps);
                        let norm = phi.norm_sqr();
                        if norm > 0.0 {
                            let mut phi = phi;
                            phi.scale(1.0 / norm.sqrt());
                            out.push((w * norm, phi));
                        }
                    }
                }
                Ok(Self::mixture_unchecked(keep.len(), out))
            }
        }
    }

    /// Reorders parties: party `i` of the result is party `order[i]` here.
    pub fn permute_parties(&self, order: &[usize]) -> Result<QuantumState> {
        if order.len() != self.num_parties {
            return Err(Error::DimensionMismatch {
                expected: self.num_parties,
                found: order.len(),
            });
        }
        validate_parties(self.num_parties, order)?;
        match &self.body {
            Body::Dense(m) => Ok(Self::dense_unchecked(
                self.num_parties,
                linalg::permute_parties(m, self.num_parties, order),
            )),
            Body::Structured(terms) => {
                let terms = terms
                    .iter()
                    .map(|(w, psi)| {
                        let amps = psi
                            .amplitudes
                            .iter()
                            .map(|(b, a)| (b.select(order), *a))
                            .collect();
                        (*w, SparsePureState::unchecked(self.num_parties, amps))
                    })
                    .collect();
                Ok(Self {
                    num_parties: self.num_parties,
                    body: Body::Structured(terms),
                })
            }
        }
    }

    /// Applies `(⊗ ops) ρ (⊗ ops)†` without renormalizing. Returns the
    /// unnormalized result and its trace.
    pub(crate) fn apply_local_unnormalized(&self, ops: &[Mat2]) -> Result<(QuantumState, f64)> {
        debug_assert_eq!(ops.len(), self.num_parties);
        match &self.body {
            Body::Dense(m) => {
                let mut m = m.clone();
                for (party, op) in ops.iter().enumerate() {
                    if *op != Mat2::identity() {
                        linalg::apply_op(
                            &mut m,
                            self.num_parties,
                            &[party],
                            &linalg::mat2_to_dmat(op),
                        );
                    }
                }
                let p = linalg::trace(&m).re;
                Ok((Self::dense_unchecked(self.num_parties, m), p))
            }
            Body::Structured(terms) => {
                let mut out = Vec::with_capacity(terms.len());
                let mut p = 0.0;
                for (w, psi) in terms {
                    let phi = psi.apply_local(ops);
                    let norm = phi.norm_sqr();
                    p += w * norm;
                    if norm > 0.0 {
                        let mut phi = phi;
                        phi.scale(1.0 / norm.sqrt());
                        out.push((w * norm, phi));
                    }
                }
                Ok((
                    Self {
                        num_parties: self.num_parties,
                        body: Body::Structured(out),
                    },
                    p,
                ))
            }
        }
    }

    /// `O ρ O†` for an operator on `parties`, unnormalized, with its trace.
    pub(crate) fn apply_operator_unnormalized(
        &self,
        parties: &[usize],
        op: &DMat,
    ) -> Result<(QuantumState, f64)> {
        validate_parties(self.num_parties, parties)?;
        let d = 1usize << parties.len();
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: op.nrows(),
            });
        }
        match &self.body {
            Body::Dense(m) => {
                let mut m = m.clone();
                linalg::apply_op(&mut m, self.num_parties, parties, op);
                let p = linalg::trace(&m).re;
                Ok((Self::dense_unchecked(self.num_parties, m), p))
            }
            Body::Structured(terms) => {
                let mut out = Vec::with_capacity(terms.len());
                let mut p = 0.0;
                for (w, psi) in terms {
                    let mut phi = psi.apply_op(parties, op);
                    let norm = phi.norm_sqr();
                    p += w * norm;
                    if norm > 0.0 {
                        phi.scale(1.0 / norm.sqrt());
                        out.push((w * norm, phi));
                    }
                }
                Ok((
                    Self {
                        num_parties: self.num_parties,
                        body: Body::Structured(out),
                    },
                    p,
                ))
            }
        }
    }

    /// `U ρ U†` for a unitary acting on `parties`.
    pub fn apply_unitary(&self, parties: &[usize], u: &DMat) -> Result<QuantumState> {
        let d = u.nrows();
        if (u.adjoint() * u - DMat::identity(d, d)).norm() > 1e-10 {
            return Err(Error::InvalidParameter {
                name: "unitary",
                value: (u.adjoint() * u - DMat::identity(d, d)).norm(),
                reason: "operator is not unitary",
            });
        }
        let (out, p) = self.apply_operator_unnormalized(parties, u)?;
        Ok(out.renormalized(p))
    }

    /// Normalizes an unnormalized result of [`apply_local_unnormalized`].
    pub(crate) fn renormalized(self, p: f64) -> QuantumState {
        match self.body {
            Body::Dense(m) => Self::dense_unchecked(self.num_parties, m * c(1.0 / p, 0.0)),
            Body::Structured(terms) => Self::mixture_unchecked(self.num_parties, terms),
        }
    }

    /// Completely dephases `party` in `basis`: `ρ → Σ_k P_k ρ P_k`.
    pub fn dephase(&self, party: usize, basis: &SingleQubitBasis) -> Result<QuantumState> {
        validate_parties(self.num_parties, &[party])?;
        match &self.body {
            Body::Dense(m) => {
                let mut acc = DMat::zeros(m.nrows(), m.ncols());
                for k in 0..2 {
                    let mut branch = m.clone();
                    linalg::apply_op(
                        &mut branch,
                        self.num_parties,
                        &[party],
                        &linalg::mat2_to_dmat(&basis.projector(k)),
                    );
                    acc += branch;
                }
                Ok(Self::dense_unchecked(self.num_parties, acc))
            }
            Body::Structured(terms) => {
                let mut out = Vec::with_capacity(terms.len() * 2);
                for (w, psi) in terms {
                    for k in 0..2 {
                        let mut ops = vec![Mat2::identity(); self.num_parties];
                        ops[party] = basis.projector(k);
                        let phi = psi.apply_local(&ops);
                        let norm = phi.norm_sqr();
                        if norm > 1e-300 {
                            let mut phi = phi;
                            phi.scale(1.0 / norm.sqrt());
                            out.push((w * norm, phi));
                        }
                    }
                }
                Ok(Self::mixture_unchecked(self.num_parties, out))
            }
        }
    }

    /// `Tr(ρ · ⊗ X_i)`; the imaginary residue is dropped.
    pub fn expectation(&self, obs: &LocalObservableList) -> Result<f64> {
        if obs.len() != self.num_parties {
            return Err(Error::DimensionMismatch {
                expected: self.num_parties,
                found: obs.len(),
            });
        }
        Ok(self.expectation_ops(&obs.matrices()).re)
    }

    /// `Tr(ρ · ⊗ ops)` for arbitrary 2×2 operators.
    pub(crate) fn expectation_ops(&self, ops: &[Mat2]) -> C64 {
        match &self.body {
            Body::Dense(m) => linalg::contract_local(m, ops),
            Body::Structured(terms) => terms.iter().map(|(w, psi)| psi.expectation(ops) * *w).sum(),
        }
    }

    /// Nonzero spectrum (eigenvalues with |λ| above cutoff) of the state.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        match &self.body {
            Body::Dense(m) => Ok(linalg::hermitian_eigenvalues(m)),
            Body::Structured(terms) => {
                let signed: Vec<(f64, &SparsePureState)> =
                    terms.iter().map(|(w, p)| (*w, p)).collect();
                structured_spectrum(&signed).or_else(|e| match e {
                    Error::TooLarge { .. } => Ok(linalg::hermitian_eigenvalues(&self.to_dense()?)),
                    other => Err(other),
                })
            }
        }
    }

    /// Von Neumann entropy in bits.
    pub fn entropy_bits(&self) -> Result<f64> {
        Ok(linalg::shannon_bits(self.spectrum()?))
    }

    /// `⟨target|ρ|target⟩`.
    pub fn fidelity_with_pure(&self, target: &SparsePureState) -> Result<f64> {
        if target.num_parties != self.num_parties {
            return Err(Error::DimensionMismatch {
                expected: self.num_parties,
                found: target.num_parties,
            });
        }
        Ok(match &self.body {
            Body::Dense(m) => {
                let mut acc = ZERO;
                for (x, ax) in &target.amplitudes {
                    for (y, ay) in &target.amplitudes {
                        acc += ax.conj() * m[(x.to_index(), y.to_index())] * ay;
                    }
                }
                acc.re
            }
            Body::Structured(terms) => terms
                .iter()
                .map(|(w, psi)| w * target.inner(psi).norm_sqr())
                .sum(),
        })
    }

    /// `½‖a − b‖₁`.
    pub fn trace_distance(&self, other: &QuantumState) -> Result<f64> {
        if other.num_parties != self.num_parties {
            return Err(Error::DimensionMismatch {
                expected: self.num_parties,
                found: other.num_parties,
            });
        }
        if let (Body::Structured(a), Body::Structured(b)) = (&self.body, &other.body) {
            let signed: Vec<(f64, &SparsePureState)> = a
                .iter()
                .map(|(w, p)| (*w, p))
                .chain(b.iter().map(|(w, p)| (-*w, p)))
                .collect();
            match structured_spectrum(&signed) {
                Ok(spec) => return Ok(0.5 * spec.iter().map(|v| v.abs()).sum::<f64>()),
                Err(Error::TooLarge { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        let diff = self.to_dense()? - other.to_dense()?;
        Ok(0.5 * linalg::trace_norm(&diff))
    }
}

/// Nonzero eigenvalues of `Σ_k d_k |v_k⟩⟨v_k|` for unit vectors `v_k` and
/// real (possibly negative) weights `d_k`, via an orthonormal basis of the
/// span built from the Gram matrix.
fn structured_spectrum(terms: &[(f64, &SparsePureState)]) -> Result<Vec<f64>> {
    let k = terms.len();
    if k > GRAM_LIMIT {
        return Err(Error::TooLarge {
            what: "structured spectrum",
            n: k,
            limit: GRAM_LIMIT,
        });
    }
    if k == 0 {
        return Ok(vec![]);
    }
    let gram = DMat::from_fn(k, k, |i, j| terms[i].1.inner(terms[j].1));
    let (lambda, u) = linalg::hermitian_eigen(&gram);
    let cutoff = 1e-12 * lambda[0].max(1.0);
    let rank = lambda.iter().take_while(|&&l| l > cutoff).count();
    // B = V U Λ^{-1/2};  B† M B = Λ^{-1/2} U† G D G U Λ^{-1/2}.
    let d = DMat::from_diagonal(&DVector::from_iterator(
        k,
        terms.iter().map(|(w, _)| c(*w, 0.0)),
    ));
    let u_r = u.columns(0, rank).into_owned();
    let scale = DMat::from_diagonal(&DVector::from_iterator(
        rank,
        lambda[..rank].iter().map(|l| c(1.0 / l.sqrt(), 0.0)),
    ));
    let gu = &gram * &u_r;
    let core = &scale * gu.adjoint() * &d * &gu * &scale;
    let core = (&core + core.adjoint()) * c(0.5, 0.0);
    Ok(linalg::hermitian_eigenvalues(&core))
}
