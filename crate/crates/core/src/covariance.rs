//! n-party covariance `Cov(X_1, …, X_n) = ⟨∏ (X_i − ⟨X_i⟩)⟩`.
//!
//! The identity component of each `X_i` cancels after centering, and the
//! covariance is multilinear in the traceless parts. A scan over all Pauli
//! strings in `{X, Y, Z}^n` therefore covers every choice of local
//! observables: if all of them vanish, so does every covariance.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, Mat2};
use crate::observable::{pauli_string, LocalObservableList, Pauli};
use crate::state::QuantumState;

/// Upper bound on the number of strings a full scan may evaluate.
pub const FULL_SCAN_BUDGET: usize = 200_000;

/// Covariance values at or below this magnitude count as zero.
pub const VANISHING_THRESHOLD: f64 = 1e-10;

/// `Tr(ρ · ⊗(X_i − ⟨X_i⟩ I))`.
pub fn covariance(s: &QuantumState, obs: &LocalObservableList) -> Result<f64> {
    let n = s.num_parties();
    if obs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: obs.len(),
        });
    }
    let mats = obs.matrices();
    let mut centered = Vec::with_capacity(n);
    for (party, m) in mats.iter().enumerate() {
        let mut ops = vec![Mat2::identity(); n];
        ops[party] = *m;
        let mean = s.expectation_ops(&ops).re;
        centered.push(m - Mat2::identity() * c(mean, 0.0));
    }
    Ok(s.expectation_ops(&centered).re)
}

/// Which strings a scan visits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanMode {
    Full,
    Sampled { count: usize, seed: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct CovarianceScanResult {
    pub values: BTreeMap<String, f64>,
    pub max_abs: f64,
    /// Lexicographically smallest string attaining `max_abs`.
    pub argmax: String,
}

impl CovarianceScanResult {
    pub fn all_vanish(&self, threshold: f64) -> bool {
        self.max_abs <= threshold
    }
}

/// Precomputed single-site means for every (party, Pauli) pair.
struct CenteredPaulis {
    ops: Vec<[Mat2; 3]>,
}

impl CenteredPaulis {
    fn new(s: &QuantumState) -> Self {
        let n = s.num_parties();
        let ops = (0..n)
            .map(|party| {
                Pauli::ALL.map(|p| {
                    let mut single = vec![Mat2::identity(); n];
                    single[party] = p.matrix();
                    let mean = s.expectation_ops(&single).re;
                    p.matrix() - Mat2::identity() * c(mean, 0.0)
                })
            })
            .collect();
        Self { ops }
    }

    fn string_ops(&self, letters: &[Pauli]) -> Vec<Mat2> {
        letters
            .iter()
            .enumerate()
            .map(|(party, p)| self.ops[party][*p as usize])
            .collect()
    }
}

fn full_scan_size(n: usize) -> Option<usize> {
    3usize.checked_pow(n as u32)
}

/// Covariance of every (or a seeded random sample of) Pauli string.
pub fn pauli_covariance_scan(s: &QuantumState, mode: ScanMode) -> Result<CovarianceScanResult> {
    let n = s.num_parties();
    let strings: Vec<Vec<Pauli>> = match mode {
        ScanMode::Full => {
            let total = full_scan_size(n).filter(|&t| t <= FULL_SCAN_BUDGET).ok_or(
                Error::BudgetExceeded {
                    requested: full_scan_size(n).unwrap_or(usize::MAX),
                    budget: FULL_SCAN_BUDGET,
                },
            )?;
            (0..total)
                .map(|mut idx| {
                    let mut letters = vec![Pauli::X; n];
                    for slot in letters.iter_mut().rev() {
                        *slot = Pauli::ALL[idx % 3];
                        idx /= 3;
                    }
                    letters
                })
                .collect()
        }
        ScanMode::Sampled { count, seed } => {
            if count > FULL_SCAN_BUDGET {
                return Err(Error::BudgetExceeded {
                    requested: count,
                    budget: FULL_SCAN_BUDGET,
                });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| (0..n).map(|_| Pauli::ALL[rng.random_range(0..3)]).collect())
                .collect()
        }
    };
    let centered = CenteredPaulis::new(s);
    let mut values = BTreeMap::new();
    for letters in &strings {
        let key = pauli_string(letters);
        if values.contains_key(&key) {
            continue;
        }
        let v = s.expectation_ops(&centered.string_ops(letters)).re;
        values.insert(key, v);
    }
    let mut max_abs = 0.0;
    let mut argmax = String::new();
    for (k, v) in &values {
        if argmax.is_empty() || v.abs() > max_abs {
            max_abs = v.abs();
            argmax = k.clone();
        }
    }
    Ok(CovarianceScanResult {
        values,
        max_abs,
        argmax,
    })
}

/// Largest |Cov| over all Pauli strings.
pub fn max_abs_pauli_covariance(s: &QuantumState) -> Result<f64> {
    Ok(pauli_covariance_scan(s, ScanMode::Full)?.max_abs)
}

/// `Cov(σz, …, σz)`.
pub fn cov_all_z(s: &QuantumState) -> Result<f64> {
    covariance(
        s,
        &LocalObservableList::from_paulis(&vec![Pauli::Z; s.num_parties()]),
    )
}

/// Mean magnetization and all-Z covariance of `F|W⟩⟨W| + (1−F)|W̄⟩⟨W̄|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WMixtureClosedForm {
    pub mean_sigma_z: f64,
    pub cov_zz: f64,
}

/// Closed form for the W/W̄ mixture, odd `n ≥ 3`:
/// `m = (2F−1)(n−2)/n`,
/// `Cov = −F(1−m)^{n−1}(1+m) + (1−F)(−1)^{n−1}(1+m)^{n−1}(1−m)`.
pub fn wmix_closed_form(n: usize, fidelity: f64) -> Result<WMixtureClosedForm> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::UnsupportedPartyCount {
            family: "w_mixture closed form",
            n,
            reason: "derived for odd n >= 3",
        });
    }
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(Error::InvalidParameter {
            name: "F",
            value: fidelity,
            reason: "mixture weight must lie in [0, 1]",
        });
    }
    let nf = n as f64;
    let m = (2.0 * fidelity - 1.0) * (nf - 2.0) / nf;
    let e = (n - 1) as i32;
    let sign = if (n - 1) % 2 == 0 { 1.0 } else { -1.0 };
    let cov = -fidelity * (1.0 - m).powi(e) * (1.0 + m)
        + (1.0 - fidelity) * sign * (1.0 + m).powi(e) * (1.0 - m);
    Ok(WMixtureClosedForm {
        mean_sigma_z: m,
        cov_zz: cov,
    })
}

/// Rows `(n, F, Cov)` of the covariance-versus-fidelity curves.
pub fn covariance_curve(ns: &[usize], fidelities: &[f64]) -> Result<Vec<(usize, f64, f64)>> {
    let mut rows = Vec::with_capacity(ns.len() * fidelities.len());
    for &n in ns {
        for &f in fidelities {
            rows.push((n, f, wmix_closed_form(n, f)?.cov_zz));
        }
    }
    Ok(rows)
}
