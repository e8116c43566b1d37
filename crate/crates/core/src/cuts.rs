//! Product tests across bipartitions, genuine multipartite correlations,
//! degree of correlations and tensor factorization.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, DMat, ONE, ZERO};
use crate::state::{validate_parties, QuantumState};

/// Default trace-distance tolerance for product tests.
pub const PRODUCT_TOL: f64 = 1e-9;
/// Largest party count for which cuts and subsets are enumerated.
pub const SUBSET_LIMIT: usize = 10;

/// A bipartite cut, stored as the side containing party 0.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Bipartition {
    num_parties: usize,
    left: Vec<usize>,
}

impl Bipartition {
    /// Either side may be given; it is canonicalized.
    pub fn new(num_parties: usize, side: &[usize]) -> Result<Self> {
        validate_parties(num_parties, side)?;
        if side.is_empty() || side.len() >= num_parties {
            return Err(Error::InvalidParties(format!(
                "cut side must be a nonempty proper subset of {num_parties} parties"
            )));
        }
        let mut left = side.to_vec();
        left.sort_unstable();
        if left[0] != 0 {
            left = (0..num_parties).filter(|p| !left.contains(p)).collect();
        }
        Ok(Self { num_parties, left })
    }

    pub fn num_parties(&self) -> usize {
        self.num_parties
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> Vec<usize> {
        (0..self.num_parties)
            .filter(|p| !self.left.contains(p))
            .collect()
    }

    /// All `2^{n−1} − 1` cuts, ordered by the bitmask of parties `1..n`
    /// that join party 0.
    pub fn all(num_parties: usize) -> Result<Vec<Bipartition>> {
        if num_parties < 2 {
            return Err(Error::UnsupportedPartyCount {
                family: "bipartition",
                n: num_parties,
                reason: "cuts need at least 2 parties",
            });
        }
        if num_parties > SUBSET_LIMIT + 10 {
            return Err(Error::TooLarge {
                what: "cut enumeration",
                n: num_parties,
                limit: SUBSET_LIMIT + 10,
            });
        }
        let rest = num_parties - 1;
        Ok((0..(1usize << rest) - 1)
            .map(|mask| {
                let mut left = vec![0];
                left.extend((0..rest).filter(|j| (mask >> j) & 1 == 1).map(|j| j + 1));
                Self { num_parties, left }
            })
            .collect())
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| {
            v.iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "{{{}}}|{{{}}}", join(&self.left), join(&self.right()))
    }
}

/// Tensor product of states living on disjoint party sets, returned with
/// parties in ascending order.
pub fn tensor_on_parties(pieces: &[(Vec<usize>, QuantumState)]) -> Result<QuantumState> {
    let mut labels = Vec::new();
    let mut acc: Option<QuantumState> = None;
    for (parties, state) in pieces {
        if parties.len() != state.num_parties() {
            return Err(Error::DimensionMismatch {
                expected: parties.len(),
                found: state.num_parties(),
            });
        }
        labels.extend_from_slice(parties);
        acc = Some(match acc {
            None => state.clone(),
            Some(a) => a.tensor(state)?,
        });
    }
    let acc = acc.ok_or_else(|| Error::InvalidParties("no factors".into()))?;
    let n = labels.len();
    validate_parties(n, &labels)?;
    let order: Vec<usize> = (0..n)
        .map(|p| labels.iter().position(|&l| l == p).unwrap())
        .collect();
    if order.iter().enumerate().all(|(i, &o)| i == o) {
        Ok(acc)
    } else {
        acc.permute_parties(&order)
    }
}

fn marginal_product(s: &QuantumState, cut: &Bipartition) -> Result<QuantumState> {
    let left = cut.left().to_vec();
    let right = cut.right();
    tensor_on_parties(&[
        (left.clone(), s.partial_trace(&left)?),
        (right.clone(), s.partial_trace(&right)?),
    ])
}

fn check_cut(s: &QuantumState, cut: &Bipartition) -> Result<()> {
    if cut.num_parties() != s.num_parties() {
        return Err(Error::DimensionMismatch {
            expected: s.num_parties(),
            found: cut.num_parties(),
        });
    }
    Ok(())
}

/// Trace distance between `ρ` and the product of its two marginals.
pub fn product_distance(s: &QuantumState, cut: &Bipartition) -> Result<f64> {
    check_cut(s, cut)?;
    let prod = marginal_product(s, cut)?;
    if s.num_parties() <= SUBSET_LIMIT {
        let diff = s.to_dense()? - prod.to_dense()?;
        return Ok(0.5 * linalg::trace_norm(&diff));
    }
    s.trace_distance(&prod)
}

/// `ρ = ρ_L ⊗ ρ_R` within `tol` in trace distance.
pub fn is_product_across_cut(s: &QuantumState, cut: &Bipartition, tol: f64) -> Result<bool> {
    check_cut(s, cut)?;
    if s.num_parties() > SUBSET_LIMIT {
        return Ok(product_distance(s, cut)? <= tol);
    }
    let diff = s.to_dense()? - marginal_product(s, cut)?.to_dense()?;
    // ‖A‖_F ≤ ‖A‖_1 ≤ √d ‖A‖_F settles most cases without a diagonalization.
    let frob = diff.norm();
    if 0.5 * frob > tol {
        return Ok(false);
    }
    if 0.5 * (diff.nrows() as f64).sqrt() * frob <= tol {
        return Ok(true);
    }
    Ok(0.5 * linalg::trace_norm(&diff) <= tol)
}

fn densify_small(s: &QuantumState) -> Result<QuantumState> {
    if s.num_parties() <= SUBSET_LIMIT && !s.is_dense() {
        s.densified()
    } else {
        Ok(s.clone())
    }
}

/// Non-product across every bipartite cut.
pub fn has_genuine_correlations(s: &QuantumState, tol: f64) -> Result<bool> {
    let n = s.num_parties();
    if n < 2 {
        return Err(Error::UnsupportedPartyCount {
            family: "genuine correlations",
            n,
            reason: "need at least 2 parties",
        });
    }
    let s = densify_small(s)?;
    for cut in Bipartition::all(n)? {
        if is_product_across_cut(&s, &cut, tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_subset_limit(n: usize, what: &'static str) -> Result<()> {
    if n > SUBSET_LIMIT {
        Err(Error::TooLarge {
            what,
            n,
            limit: SUBSET_LIMIT,
        })
    } else {
        Ok(())
    }
}

/// k-subsets of `items` in lexicographic order.
pub fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(
        items: &[usize],
        k: usize,
        start: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - current.len() {
                break;
            }
            current.push(items[i]);
            rec(items, k, i + 1, current, out);
            current.pop();
        }
    }
    rec(items, k, 0, &mut current, &mut out);
    out
}

/// Largest `m` such that some `m`-party marginal has genuine `m`-partite
/// correlations; 1 if none does.
pub fn degree_of_correlations(s: &QuantumState, tol: f64) -> Result<usize> {
    let n = s.num_parties();
    check_subset_limit(n, "degree of correlations")?;
    let s = densify_small(s)?;
    let parties: Vec<usize> = (0..n).collect();
    for m in (2..=n).rev() {
        for subset in combinations(&parties, m) {
            let marginal = s.partial_trace(&subset)?;
            if has_genuine_correlations(&marginal, tol)? {
                return Ok(m);
            }
        }
    }
    Ok(1)
}

#[derive(Clone, Debug)]
pub struct Factor {
    pub parties: Vec<usize>,
    pub state: QuantumState,
}

/// Finest tensor decomposition, factors sorted by size (largest first,
/// then by smallest party).
#[derive(Clone, Debug)]
pub struct Factorization {
    num_parties: usize,
    factors: Vec<Factor>,
}

impl Factorization {
    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.parties.len()).collect()
    }

    pub fn partition(&self) -> Vec<Vec<usize>> {
        self.factors.iter().map(|f| f.parties.clone()).collect()
    }

    /// Size of the largest factor.
    pub fn degree(&self) -> usize {
        self.factors.first().map_or(0, |f| f.parties.len())
    }

    pub fn num_parties(&self) -> usize {
        self.num_parties
    }

    /// Tensor product of the factors in the original party order.
    pub fn reconstruct(&self) -> Result<QuantumState> {
        let pieces: Vec<_> = self
            .factors
            .iter()
            .map(|f| (f.parties.clone(), f.state.clone()))
            .collect();
        tensor_on_parties(&pieces)
    }
}

/// Repeatedly splits off the smallest subset that is product with the rest.
pub fn factorize(s: &QuantumState, tol: f64) -> Result<Factorization> {
    let n = s.num_parties();
    check_subset_limit(n, "factorization")?;
    let s = densify_small(s)?;
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut rest_state = s.clone();
    let mut factors = Vec::new();
    'outer: while remaining.len() > 1 {
        let r = remaining.len();
        let local: Vec<usize> = (0..r).collect();
        for k in 1..=r / 2 {
            for subset in combinations(&local, k) {
                let cut = Bipartition::new(r, &subset)?;
                if is_product_across_cut(&rest_state, &cut, tol)? {
                    let complement: Vec<usize> = local
                        .iter()
                        .copied()
                        .filter(|p| !subset.contains(p))
                        .collect();
                    factors.push(Factor {
                        parties: subset.iter().map(|&i| remaining[i]).collect(),
                        state: rest_state.partial_trace(&subset)?,
                    });
                    rest_state = rest_state.partial_trace(&complement)?;
                    remaining = complement.iter().map(|&i| remaining[i]).collect();
                    continue 'outer;
                }
            }
        }
        break;
    }
    factors.push(Factor {
        parties: remaining,
        state: rest_state,
    });
    factors.sort_by(|a, b| {
        b.parties
            .len()
            .cmp(&a.parties.len())
            .then(a.parties[0].cmp(&b.parties[0]))
    });
    Ok(Factorization {
        num_parties: n,
        factors,
    })
}

fn cnot() -> DMat {
    let mut m = DMat::from_element(4, 4, ZERO);
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    m[(2, 3)] = ONE;
    m[(3, 2)] = ONE;
    m
}

/// Appends an ancilla `|0⟩` as a new last party and applies CNOT with
/// `party` as control and the ancilla as target.
pub fn split_party_with_cnot(s: &QuantumState, party: usize) -> Result<QuantumState> {
    validate_parties(s.num_parties(), &[party])?;
    let n = s.num_parties();
    let extended = s.tensor(&QuantumState::zeros(1))?;
    extended.apply_unitary(&[party, n], &cnot())
}

/// Applies an independent Haar-random unitary to every party.
pub fn random_local_unitaries<R: rand::Rng + ?Sized>(
    s: &QuantumState,
    rng: &mut R,
) -> Result<QuantumState> {
    let mut out = s.clone();
    for party in 0..s.num_parties() {
        out = out.apply_unitary(&[party], &linalg::haar_unitary(2, rng))?;
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct CutVerdict {
    pub cut: String,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub distance: f64,
    pub product: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub num_parties: usize,
    pub tolerance: f64,
    pub cuts: Vec<CutVerdict>,
    pub genuine: bool,
    pub degree: usize,
    pub factors: Vec<Vec<usize>>,
    pub factor_sizes: Vec<usize>,
}

/// Per-cut product verdicts, genuine-correlation flag, degree and
/// factorization.
pub fn analyze(s: &QuantumState, tol: f64) -> Result<AnalysisReport> {
    let n = s.num_parties();
    check_subset_limit(n, "analysis")?;
    let s = densify_small(s)?;
    let mut cuts = Vec::new();
    if n >= 2 {
        for cut in Bipartition::all(n)? {
            let distance = product_distance(&s, &cut)?;
            cuts.push(CutVerdict {
                cut: cut.to_string(),
                left: cut.left().to_vec(),
                right: cut.right(),
                distance,
                product: distance <= tol,
            });
        }
    }
    let factorization = factorize(&s, tol)?;
    Ok(AnalysisReport {
        num_parties: n,
        tolerance: tol,
        genuine: n >= 2 && cuts.iter().all(|c| !c.product),
        degree: factorization.degree(),
        factors: factorization.partition(),
        factor_sizes: factorization.sizes(),
        cuts,
    })
}

/// Trace distance of `ρ` from `I/2^n`.
pub fn distance_from_maximally_mixed(s: &QuantumState) -> Result<f64> {
    let rho = s.to_dense()?;
    let d = rho.nrows();
    let diff = rho - DMat::identity(d, d) * c(1.0 / d as f64, 0.0);
    Ok(0.5 * linalg::trace_norm(&diff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::named::make_named_state;
    use rand::SeedableRng;

    fn psi_plus() -> QuantumState {
        make_named_state("bell:psi+", 2, &[]).unwrap()
    }

    #[test]
    fn canonical_cut() {
        let a = Bipartition::new(4, &[1, 3]).unwrap();
        assert_eq!(a.left(), &[0, 2]);
        assert_eq!(a.right(), vec![1, 3]);
        assert_eq!(a.to_string(), "{0,2}|{1,3}");
        assert!(Bipartition::new(3, &[]).is_err());
        assert!(Bipartition::new(3, &[0, 1, 2]).is_err());
        assert_eq!(Bipartition::all(4).unwrap().len(), 7);
        assert!(Bipartition::all(1).is_err());
    }

    #[test]
    fn product_examples() {
        let zz = QuantumState::zeros(2);
        let cut = Bipartition::new(2, &[0]).unwrap();
        assert!(is_product_across_cut(&zz, &cut, PRODUCT_TOL).unwrap());
        assert!(!is_product_across_cut(&psi_plus(), &cut, PRODUCT_TOL).unwrap());
        assert!((product_distance(&psi_plus(), &cut).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn genuine_examples() {
        let w = make_named_state("w_mixture", 3, &[0.5]).unwrap();
        assert!(has_genuine_correlations(&w, PRODUCT_TOL).unwrap());
        let s = QuantumState::zeros(1).tensor(&psi_plus()).unwrap();
        assert!(!has_genuine_correlations(&s, PRODUCT_TOL).unwrap());
        assert!(has_genuine_correlations(&QuantumState::zeros(1), PRODUCT_TOL).is_err());
    }

    #[test]
    fn degree_examples() {
        let g = make_named_state("ghz_diag", 5, &[]).unwrap();
        assert_eq!(degree_of_correlations(&g, PRODUCT_TOL).unwrap(), 5);
        let pp = psi_plus().tensor(&psi_plus()).unwrap();
        assert_eq!(degree_of_correlations(&pp, PRODUCT_TOL).unwrap(), 2);
        assert_eq!(
            degree_of_correlations(&QuantumState::zeros(3), PRODUCT_TOL).unwrap(),
            1
        );
    }

    #[test]
    fn factorization_recovers_construction() {
        let a = make_named_state("ghz_diag", 3, &[]).unwrap();
        let b = make_named_state("bell_diag_example", 2, &[]).unwrap();
        // interleave: parties {0, 2, 4} carry the GHZ part
        let s = tensor_on_parties(&[(vec![0, 2, 4], a), (vec![1, 3], b)]).unwrap();
        let f = factorize(&s, PRODUCT_TOL).unwrap();
        assert_eq!(f.sizes(), vec![3, 2]);
        assert_eq!(f.partition(), vec![vec![0, 2, 4], vec![1, 3]]);
        assert!(f.reconstruct().unwrap().trace_distance(&s).unwrap() < 1e-12);
        let s = psi_plus().tensor(&QuantumState::zeros(1)).unwrap();
        assert_eq!(factorize(&s, PRODUCT_TOL).unwrap().sizes(), vec![2, 1]);
    }

    #[test]
    fn split_zero_and_w_mixture() {
        let s = split_party_with_cnot(&QuantumState::zeros(1), 0).unwrap();
        assert!(s.trace_distance(&QuantumState::zeros(2)).unwrap() < 1e-15);
        let mut w = make_named_state("w_mixture", 3, &[0.5]).unwrap();
        for p in 0..3 {
            w = split_party_with_cnot(&w, p).unwrap();
        }
        let target = make_named_state("w_split_mixture", 3, &[]).unwrap();
        assert!(w.trace_distance(&target).unwrap() < 1e-12);
        let dense = split_party_with_cnot(
            &make_named_state("w_mixture", 3, &[0.5])
                .unwrap()
                .densified()
                .unwrap(),
            1,
        )
        .unwrap();
        let sparse =
            split_party_with_cnot(&make_named_state("w_mixture", 3, &[0.5]).unwrap(), 1).unwrap();
        assert!(dense.trace_distance(&sparse).unwrap() < 1e-12);
    }

    #[test]
    fn local_unitaries_keep_degree() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let s = make_named_state("parity_even", 4, &[]).unwrap();
        let u = random_local_unitaries(&s, &mut rng).unwrap();
        assert_eq!(degree_of_correlations(&u, 1e-8).unwrap(), 4);
    }

    #[test]
    fn analysis_of_example2() {
        let s = make_named_state("example2_tripartite", 3, &[]).unwrap();
        let r = analyze(&s, PRODUCT_TOL).unwrap();
        assert_eq!(r.cuts.len(), 3);
        assert!(r.cuts.iter().all(|c| !c.product));
        assert!(r.genuine);
        assert_eq!(r.degree, 3);
    }

    #[test]
    fn subset_limit() {
        let s = QuantumState::zeros(11);
        assert!(matches!(
            degree_of_correlations(&s, PRODUCT_TOL),
            Err(Error::TooLarge { .. })
        ));
        assert_eq!(combinations(&[0, 1, 2, 3], 2).len(), 6);
    }
}
