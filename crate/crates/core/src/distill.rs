//! Local filtering of W/W̄ mixtures towards |W⟩.
//!
//! Every party applies the two-outcome instrument
//! `E_S = |0⟩⟨0| + √ε|1⟩⟨1|`, `E_F = √(1−ε)|1⟩⟨1|` and the run is kept only
//! when all parties see `S`. A basis string with `m` ones picks up a factor
//! `ε^{m/2}`, so the single-excitation component is suppressed far less than
//! the `(n−1)`-excitation one.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instrument::{KrausInstrument, MIN_BRANCH_PROBABILITY};
use crate::linalg::{c, Mat2, ONE, ZERO};
use crate::named::w_state;
use crate::state::{QuantumState, SparsePureState};

/// Party counts plotted in the probability-versus-fidelity figure.
pub const CURVE_PARTY_COUNTS: [usize; 6] = [3, 5, 7, 9, 49, 499];

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "epsilon",
            value: epsilon,
            reason: "filter strength must lie in (0, 1]",
        })
    }
}

fn check_n(n: usize) -> Result<()> {
    if n >= 3 {
        Ok(())
    } else {
        Err(Error::UnsupportedPartyCount {
            family: "filter closed forms",
            n,
            reason: "need at least 3 parties",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FilterInstrument {
    epsilon: f64,
}

impl FilterInstrument {
    pub fn new(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn success_op(&self) -> Mat2 {
        Mat2::new(ONE, ZERO, ZERO, c(self.epsilon.sqrt(), 0.0))
    }

    pub fn failure_op(&self) -> Mat2 {
        Mat2::new(ZERO, ZERO, ZERO, c((1.0 - self.epsilon).sqrt(), 0.0))
    }

    /// `{E_S, E_F}`; outcome 0 is success.
    pub fn instrument(&self) -> KrausInstrument {
        KrausInstrument::new(vec![self.success_op(), self.failure_op()])
    }
}

#[derive(Clone, Debug)]
pub struct DistillationResult {
    pub post_state: QuantumState,
    pub success_probability: f64,
    /// Fidelity with the target, when one applies.
    pub fidelity: Option<f64>,
}

/// Filters every party and keeps the all-success branch. Fidelity is taken
/// against |W⟩ on the same number of parties.
pub fn distill(s: &QuantumState, epsilon: f64) -> Result<DistillationResult> {
    let target = if s.num_parties() >= 2 {
        Some(w_state(s.num_parties())?)
    } else {
        None
    };
    distill_with_target(s, epsilon, target.as_ref())
}

pub fn distill_with_target(
    s: &QuantumState,
    epsilon: f64,
    target: Option<&SparsePureState>,
) -> Result<DistillationResult> {
    let filter = FilterInstrument::new(epsilon)?;
    let ops = vec![filter.success_op(); s.num_parties()];
    let (out, q) = s.apply_local_unnormalized(&ops)?;
    if !(q >= MIN_BRANCH_PROBABILITY) {
        return Err(Error::ImpossibleBranch { probability: q });
    }
    let post_state = out.renormalized(q);
    let fidelity = match target {
        Some(t) => Some(post_state.fidelity_with_pure(t)?),
        None => None,
    };
    Ok(DistillationResult {
        post_state,
        success_probability: q,
        fidelity,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FilterOutcome {
    pub success_probability: f64,
    pub fidelity: f64,
}

/// `q = ½ε(1 + ε^{n−2})`, `F = 1/(1 + ε^{n−2})` for the equal W/W̄ mixture.
pub fn closed_forms(n: usize, epsilon: f64) -> Result<FilterOutcome> {
    check_n(n)?;
    check_epsilon(epsilon)?;
    let r = epsilon.powi(n as i32 - 2);
    Ok(FilterOutcome {
        success_probability: 0.5 * epsilon * (1.0 + r),
        fidelity: 1.0 / (1.0 + r),
    })
}

fn check_fidelity_regime(fidelity: f64) -> Result<()> {
    if fidelity > 0.5 && fidelity < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "F",
            value: fidelity,
            reason: "target fidelity must lie in (1/2, 1)",
        })
    }
}

/// Filter strength reaching fidelity `F`: `((1−F)/F)^{1/(n−2)}`.
pub fn epsilon_of_fidelity(n: usize, fidelity: f64) -> Result<f64> {
    check_n(n)?;
    check_fidelity_regime(fidelity)?;
    Ok(((1.0 - fidelity) / fidelity).powf(1.0 / (n as f64 - 2.0)))
}

/// Success probability at fidelity `F`: `(1/(2F))·((1−F)/F)^{1/(n−2)}`.
pub fn q_of_fidelity(n: usize, fidelity: f64) -> Result<f64> {
    Ok(epsilon_of_fidelity(n, fidelity)? / (2.0 * fidelity))
}

/// Lower bound `p²(1−F)/((1−p)F)` on the success probability for
/// `p|W⟩⟨W| + (1−p)ρ` when fidelity `F` is reached.
pub fn success_lower_bound(p: f64, fidelity: f64) -> Result<f64> {
    if p == 1.0 {
        return Err(Error::InvalidParameter {
            name: "p",
            value: p,
            reason: "bound divides by 1 - p",
        });
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter {
            name: "p",
            value: p,
            reason: "W weight must lie in (0, 1)",
        });
    }
    if !(fidelity > 0.0 && fidelity < 1.0) {
        return Err(Error::InvalidParameter {
            name: "F",
            value: fidelity,
            reason: "fidelity must lie in (0, 1)",
        });
    }
    Ok(p * p * (1.0 - fidelity) / ((1.0 - p) * fidelity))
}

/// Large-n approximations at `ε = 1 − 1/√n`:
/// `q ≈ ½(1 − 1/√n)(1 + e^{−√n})`, `F ≈ 1/(1 + e^{−√n})`.
pub fn asymptotic_forms(n: usize) -> Result<FilterOutcome> {
    check_n(n)?;
    let root = (n as f64).sqrt();
    let decay = (-root).exp();
    Ok(FilterOutcome {
        success_probability: 0.5 * (1.0 - 1.0 / root) * (1.0 + decay),
        fidelity: 1.0 / (1.0 + decay),
    })
}

/// Filter strength used by the asymptotic scheme.
pub fn asymptotic_epsilon(n: usize) -> f64 {
    1.0 - 1.0 / (n as f64).sqrt()
}

/// Rows `(n, F, q)` of the probability-versus-fidelity curves.
pub fn fidelity_curve(ns: &[usize], fidelities: &[f64]) -> Result<Vec<(usize, f64, f64)>> {
    let mut rows = Vec::with_capacity(ns.len() * fidelities.len());
    for &n in ns {
        for &f in fidelities {
            rows.push((n, f, q_of_fidelity(n, f)?));
        }
    }
    Ok(rows)
}

/// Evenly spaced interior grid of `(1/2, 1)` with `points` entries.
pub fn default_fidelity_grid(points: usize) -> Vec<f64> {
    (1..=points)
        .map(|i| 0.5 + 0.5 * i as f64 / (points + 1) as f64)
        .collect()
}
