//! Local Kraus instruments and postselected branches.

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat2, C64};
use crate::state::QuantumState;

const COMPLETENESS_TOL: f64 = 1e-10;
/// Branches less likely than this are treated as impossible.
pub const MIN_BRANCH_PROBABILITY: f64 = 1e-15;

/// Kraus operators `{E_i}` acting on one qubit.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausInstrument(Vec<Mat2>);

impl KrausInstrument {
    pub fn new(ops: Vec<Mat2>) -> Self {
        Self(ops)
    }

    pub fn identity() -> Self {
        Self(vec![Mat2::identity()])
    }

    pub fn ops(&self) -> &[Mat2] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `Σ E_i† E_i`.
    pub fn effect_sum(&self) -> Mat2 {
        self.0
            .iter()
            .fold(Mat2::zeros(), |acc, e| acc + e.adjoint() * e)
    }

    /// Largest eigenvalue of `Σ E†E`.
    pub fn max_effect_eigenvalue(&self) -> f64 {
        let m = self.effect_sum();
        // Hermitian 2×2: λ_max = (a + d)/2 + sqrt(((a − d)/2)² + |b|²)
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = m[(0, 1)].norm();
        0.5 * (a + d) + (0.25 * (a - d) * (a - d) + b * b).sqrt()
    }

    /// `Σ E†E ≤ I` within tolerance.
    pub fn is_trace_non_increasing(&self) -> bool {
        self.max_effect_eigenvalue() <= 1.0 + COMPLETENESS_TOL
    }

    /// `Σ E†E = I` within tolerance.
    pub fn is_complete(&self) -> bool {
        (self.effect_sum() - Matrix2::<C64>::identity()).norm() <= COMPLETENESS_TOL
    }
}

/// Random complete two-outcome instrument obtained by coupling the qubit to
/// a `|0⟩` probe with a Haar unitary and reading the probe.
pub fn random_instrument<R: rand::Rng + ?Sized>(rng: &mut R) -> KrausInstrument {
    let u = linalg::haar_unitary(4, rng);
    let ops = (0..2)
        .map(|k| Mat2::from_fn(|a, b| u[(2 * a + k, 2 * b)]))
        .collect();
    KrausInstrument(ops)
}

fn check_assignment(s: &QuantumState, assignment: &[KrausInstrument]) -> Result<()> {
    if assignment.len() != s.num_parties() {
        return Err(Error::DimensionMismatch {
            expected: s.num_parties(),
            found: assignment.len(),
        });
    }
    for (party, inst) in assignment.iter().enumerate() {
        if inst.is_empty() {
            return Err(Error::InvalidParties(format!(
                "party {party} has no Kraus operators"
            )));
        }
        if !inst.is_trace_non_increasing() {
            return Err(Error::IncompleteInstrument {
                party,
                max_eigenvalue: inst.max_effect_eigenvalue(),
            });
        }
    }
    Ok(())
}

/// Applies the joint branch `⊗_j E^j_{branch[j]}` and postselects on it.
/// Returns the normalized post-branch state and the branch probability.
pub fn apply_instrument(
    s: &QuantumState,
    assignment: &[KrausInstrument],
    branch: &[usize],
) -> Result<(QuantumState, f64)> {
    check_assignment(s, assignment)?;
    if branch.len() != assignment.len() {
        return Err(Error::DimensionMismatch {
            expected: assignment.len(),
            found: branch.len(),
        });
    }
    let ops = assignment
        .iter()
        .zip(branch)
        .enumerate()
        .map(|(party, (inst, &k))| {
            inst.0
                .get(k)
                .copied()
                .ok_or_else(|| Error::InvalidParties(format!("party {party} has no outcome {k}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let (out, p) = s.apply_local_unnormalized(&ops)?;
    if !(p >= MIN_BRANCH_PROBABILITY) {
        return Err(Error::ImpossibleBranch { probability: p });
    }
    Ok((out.renormalized(p), p))
}

/// Every joint outcome in lexicographic order (party 0 slowest).
pub fn joint_branches(assignment: &[KrausInstrument]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for inst in assignment {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..inst.len()).map(move |k| {
                    let mut v = prefix.clone();
                    v.push(k);
                    v
                })
            })
            .collect();
    }
    out
}

/// Every possible joint branch with its probability and normalized state.
/// Impossible branches are skipped.
pub fn enumerate_branches(
    s: &QuantumState,
    assignment: &[KrausInstrument],
) -> Result<Vec<(Vec<usize>, f64, QuantumState)>> {
    check_assignment(s, assignment)?;
    let mut out = Vec::new();
    for branch in joint_branches(assignment) {
        match apply_instrument(s, assignment, &branch) {
            Ok((state, p)) => out.push((branch, p, state)),
            Err(Error::ImpossibleBranch { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Channel action `Σ_branches K ρ K†` as a dense matrix.
pub fn apply_channel_dense(
    s: &QuantumState,
    assignment: &[KrausInstrument],
) -> Result<linalg::DMat> {
    check_assignment(s, assignment)?;
    let rho = s.to_dense()?;
    let mut acc = linalg::DMat::zeros(rho.nrows(), rho.ncols());
    for branch in joint_branches(assignment) {
        let mut m = rho.clone();
        for (party, (inst, &k)) in assignment.iter().zip(&branch).enumerate() {
            linalg::apply_op(
                &mut m,
                s.num_parties(),
                &[party],
                &linalg::mat2_to_dmat(&inst.0[k]),
            );
        }
        acc += m;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, ONE, ZERO};
    use crate::named::make_named_state;

    #[test]
    fn identity_instrument_leaves_state() {
        let s = make_named_state("w_mixture", 3, &[0.3]).unwrap();
        let inst = vec![KrausInstrument::identity(); 3];
        let (out, p) = apply_instrument(&s, &inst, &[0, 0, 0]).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        assert!(out.trace_distance(&s).unwrap() < 1e-12);
    }

    #[test]
    fn rejects_over_complete_instrument() {
        let s = QuantumState::zeros(1);
        let inst = vec![KrausInstrument::new(vec![
            Mat2::identity(),
            Mat2::identity() * c(0.1, 0.0),
        ])];
        assert!(matches!(
            apply_instrument(&s, &inst, &[0]),
            Err(Error::IncompleteInstrument { party: 0, .. })
        ));
    }

    #[test]
    fn impossible_branch_is_signaled() {
        let s = QuantumState::zeros(1);
        let p1 = Mat2::new(ZERO, ZERO, ZERO, ONE);
        let inst = vec![KrausInstrument::new(vec![p1])];
        assert!(matches!(
            apply_instrument(&s, &inst, &[0]),
            Err(Error::ImpossibleBranch { .. })
        ));
    }

    #[test]
    fn complete_instrument_preserves_trace_across_branches() {
        let s = make_named_state("w_mixture", 3, &[0.5]).unwrap();
        let eps: f64 = 0.3;
        let es = Mat2::new(ONE, ZERO, ZERO, c(eps.sqrt(), 0.0));
        let ef = Mat2::new(ZERO, ZERO, ZERO, c((1.0 - eps).sqrt(), 0.0));
        let inst = vec![KrausInstrument::new(vec![es, ef]); 3];
        assert!(inst[0].is_complete());
        let branches = enumerate_branches(&s, &inst).unwrap();
        let total: f64 = branches.iter().map(|(_, p, _)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        // Σ p_b ρ_b equals the channel action
        let mut mix = linalg::DMat::zeros(8, 8);
        for (_, p, st) in &branches {
            mix += st.to_dense().unwrap() * c(*p, 0.0);
        }
        let channel = apply_channel_dense(&s, &inst).unwrap();
        assert!((mix - channel).norm() < 1e-12);
    }

    #[test]
    fn random_instruments_are_complete() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            assert!(random_instrument(&mut rng).is_complete());
        }
    }

    #[test]
    fn joint_branch_order() {
        let inst = vec![
            KrausInstrument::new(vec![Mat2::identity(); 2]),
            KrausInstrument::new(vec![Mat2::identity(); 3]),
        ];
        let b = joint_branches(&inst);
        assert_eq!(b.len(), 6);
        assert_eq!(b[0], vec![0, 0]);
        assert_eq!(b[1], vec![0, 1]);
        assert_eq!(b[5], vec![1, 2]);
    }
}
