//! Named state families used throughout the analyses.

use std::fmt;
use std::str::FromStr;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::linalg::c;
use crate::state::{QuantumState, SparsePureState};

/// Largest `n` for which `parity_even` (2^(n-1) terms) is built.
const PARITY_LIMIT: usize = 20;

/// Which Bell state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bell {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

impl Bell {
    pub fn state(self) -> SparsePureState {
        let (a, b, sign) = match self {
            Bell::PsiPlus => ("01", "10", 1.0),
            Bell::PsiMinus => ("01", "10", -1.0),
            Bell::PhiPlus => ("00", "11", 1.0),
            Bell::PhiMinus => ("00", "11", -1.0),
        };
        let h = std::f64::consts::FRAC_1_SQRT_2;
        SparsePureState::new(
            2,
            [
                (a.parse().unwrap(), c(h, 0.0)),
                (b.parse().unwrap(), c(sign * h, 0.0)),
            ]
            .into_iter()
            .collect(),
        )
        .expect("Bell states are normalized")
    }

    fn name(self) -> &'static str {
        match self {
            Bell::PsiPlus => "psi+",
            Bell::PsiMinus => "psi-",
            Bell::PhiPlus => "phi+",
            Bell::PhiMinus => "phi-",
        }
    }
}

impl FromStr for Bell {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "psi+" | "psiplus" | "ψ+" => Ok(Bell::PsiPlus),
            "psi-" | "psiminus" | "ψ-" | "ψ−" => Ok(Bell::PsiMinus),
            "phi+" | "phiplus" | "φ+" => Ok(Bell::PhiPlus),
            "phi-" | "phiminus" | "φ-" | "φ−" => Ok(Bell::PhiMinus),
            other => Err(Error::UnknownState(format!("bell:{other}"))),
        }
    }
}

/// A state addressable by name and parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum NamedState {
    /// `½(|0…0⟩⟨0…0| + |1…1⟩⟨1…1|)`.
    GhzDiag {
        n: usize,
    },
    /// Uniform mixture of all even-parity basis states.
    ParityEven {
        n: usize,
    },
    W {
        n: usize,
    },
    WBar {
        n: usize,
    },
    /// `F|W⟩⟨W| + (1−F)|W̄⟩⟨W̄|`.
    WMixture {
        n: usize,
        fidelity: f64,
    },
    /// The 2n-party state obtained by CNOT-copying every party of the equal
    /// W/W̄ mixture onto a fresh ancilla appended at the end.
    WSplitMixture {
        n: usize,
    },
    /// `½|Ψ+⟩⟨Ψ+| ⊗ |0⟩⟨0| + ½|Ψ−⟩⟨Ψ−| ⊗ |1⟩⟨1|`.
    Example2Tripartite,
    Bell(Bell),
    /// `⅔|Ψ+⟩⟨Ψ+| + ⅙|Φ+⟩⟨Φ+| + ⅙|Φ−⟩⟨Φ−|`.
    BellDiagExample,
    Zeros {
        n: usize,
    },
    MaximallyMixed {
        n: usize,
    },
}

/// `|W⟩` on `n` qubits.
pub fn w_state(n: usize) -> Result<SparsePureState> {
    if n < 1 {
        return Err(Error::UnsupportedPartyCount {
            family: "w",
            n,
            reason: "needs n >= 1",
        });
    }
    SparsePureState::uniform(n, (0..n).map(|p| BitString::with_ones(n, &[p])))
}

/// `|W̄⟩` on `n` qubits.
pub fn wbar_state(n: usize) -> Result<SparsePureState> {
    Ok(w_state(n)?.complement())
}

fn check_fidelity(f: f64) -> Result<()> {
    if (0.0..=1.0).contains(&f) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "F",
            value: f,
            reason: "mixture weight must lie in [0, 1]",
        })
    }
}

fn need(family: &'static str, n: usize, min: usize, reason: &'static str) -> Result<()> {
    if n < min {
        Err(Error::UnsupportedPartyCount { family, n, reason })
    } else {
        Ok(())
    }
}

impl NamedState {
    /// Looks up a family by name, with `n` and an optional real parameter.
    pub fn from_parts(name: &str, n: Option<usize>, param: Option<f64>) -> Result<Self> {
        let req_n = || n.ok_or_else(|| Error::Parse(format!("state `{name}` needs n")));
        Ok(match name {
            "ghz_diag" => NamedState::GhzDiag { n: req_n()? },
            "parity_even" => NamedState::ParityEven { n: req_n()? },
            "w" => NamedState::W { n: req_n()? },
            "wbar" => NamedState::WBar { n: req_n()? },
            "w_mixture" => NamedState::WMixture {
                n: req_n()?,
                fidelity: param.unwrap_or(0.5),
            },
            "w_split_mixture" => NamedState::WSplitMixture { n: req_n()? },
            "example2_tripartite" => NamedState::Example2Tripartite,
            "bell_diag_example" => NamedState::BellDiagExample,
            "zeros" => NamedState::Zeros { n: req_n()? },
            "maximally_mixed" => NamedState::MaximallyMixed { n: req_n()? },
            other => return Err(Error::UnknownState(other.to_string())),
        })
    }

    pub fn build(&self) -> Result<QuantumState> {
        match *self {
            NamedState::GhzDiag { n } => {
                need("ghz_diag", n, 1, "needs n >= 1")?;
                QuantumState::from_mixture(
                    n,
                    vec![
                        (0.5, SparsePureState::basis(BitString::zeros(n))),
                        (
                            0.5,
                            SparsePureState::basis(BitString::with_ones(
                                n,
                                &(0..n).collect::<Vec<_>>(),
                            )),
                        ),
                    ],
                )
            }
            NamedState::ParityEven { n } => {
                need("parity_even", n, 2, "needs n >= 2")?;
                if n > PARITY_LIMIT {
                    return Err(Error::TooLarge {
                        what: "parity_even",
                        n,
                        limit: PARITY_LIMIT,
                    });
                }
                let w = 1.0 / (1usize << (n - 1)) as f64;
                let terms = (0..1usize << n)
                    .map(|i| BitString::from_index(n, i))
                    .filter(|b| b.count_ones() % 2 == 0)
                    .map(|b| (w, SparsePureState::basis(b)))
                    .collect();
                QuantumState::from_mixture(n, terms)
            }
            NamedState::W { n } => Ok(QuantumState::pure(w_state(n)?)),
            NamedState::WBar { n } => Ok(QuantumState::pure(wbar_state(n)?)),
            NamedState::WMixture { n, fidelity } => {
                check_fidelity(fidelity)?;
                need("w_mixture", n, 2, "needs n >= 2")?;
                QuantumState::from_mixture(
                    n,
                    vec![(fidelity, w_state(n)?), (1.0 - fidelity, wbar_state(n)?)],
                )
            }
            NamedState::WSplitMixture { n } => {
                need("w_split_mixture", n, 2, "needs n >= 2")?;
                let doubled = |psi: &SparsePureState| {
                    let amps = psi
                        .amplitudes()
                        .iter()
                        .map(|(b, a)| (b.concat(b), *a))
                        .collect();
                    SparsePureState::new(2 * n, amps)
                };
                QuantumState::from_mixture(
                    2 * n,
                    vec![
                        (0.5, doubled(&w_state(n)?)?),
                        (0.5, doubled(&wbar_state(n)?)?),
                    ],
                )
            }
            NamedState::Example2Tripartite => {
                let zero = SparsePureState::basis("0".parse().unwrap());
                let one = SparsePureState::basis("1".parse().unwrap());
                QuantumState::from_mixture(
                    3,
                    vec![
                        (0.5, Bell::PsiPlus.state().tensor(&zero)),
                        (0.5, Bell::PsiMinus.state().tensor(&one)),
                    ],
                )
            }
            NamedState::Bell(b) => Ok(QuantumState::pure(b.state())),
            NamedState::BellDiagExample => QuantumState::from_mixture(
                2,
                vec![
                    (2.0 / 3.0, Bell::PsiPlus.state()),
                    (1.0 / 6.0, Bell::PhiPlus.state()),
                    (1.0 / 6.0, Bell::PhiMinus.state()),
                ],
            ),
            NamedState::Zeros { n } => {
                need("zeros", n, 1, "needs n >= 1")?;
                Ok(QuantumState::zeros(n))
            }
            NamedState::MaximallyMixed { n } => {
                need("maximally_mixed", n, 1, "needs n >= 1")?;
                QuantumState::maximally_mixed(n)
            }
        }
    }
}

/// Builds a named state; `params` carries the family's real parameter (the
/// mixture fidelity for `w_mixture`).
pub fn make_named_state(name: &str, n: usize, params: &[f64]) -> Result<QuantumState> {
    if let Some(kind) = name.strip_prefix("bell:") {
        return NamedState::Bell(kind.parse()?).build();
    }
    NamedState::from_parts(name, Some(n), params.first().copied())?.build()
}

impl fmt::Display for NamedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamedState::GhzDiag { n } => write!(f, "ghz_diag:n={n}"),
            NamedState::ParityEven { n } => write!(f, "parity_even:n={n}"),
            NamedState::W { n } => write!(f, "w:n={n}"),
            NamedState::WBar { n } => write!(f, "wbar:n={n}"),
            NamedState::WMixture { n, fidelity } => write!(f, "w_mixture:n={n},f={fidelity}"),
            NamedState::WSplitMixture { n } => write!(f, "w_split_mixture:n={n}"),
            NamedState::Example2Tripartite => f.write_str("example2_tripartite"),
            NamedState::Bell(b) => write!(f, "bell:{}", b.name()),
            NamedState::BellDiagExample => f.write_str("bell_diag_example"),
            NamedState::Zeros { n } => write!(f, "zeros:n={n}"),
            NamedState::MaximallyMixed { n } => write!(f, "maximally_mixed:n={n}"),
        }
    }
}

impl FromStr for NamedState {
    type Err = Error;

    /// Parses `name`, `name:n=3`, `name:n=3,f=0.5` or `bell:psi+`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        if name == "bell" {
            return Ok(NamedState::Bell(args.parse()?));
        }
        let mut n = None;
        let mut param = None;
        for kv in args.split(',').filter(|t| !t.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{kv}`")))?;
            match k.trim().to_ascii_lowercase().as_str() {
                "n" => {
                    n = Some(
                        v.trim()
                            .parse()
                            .map_err(|_| Error::Parse(format!("invalid n `{v}`")))?,
                    );
                }
                "f" | "fidelity" | "p" => {
                    param = Some(
                        v.trim()
                            .parse()
                            .map_err(|_| Error::Parse(format!("invalid value `{v}`")))?,
                    );
                }
                other => return Err(Error::Parse(format!("unknown state parameter `{other}`"))),
            }
        }
        NamedState::from_parts(name, n, param)
    }
}
