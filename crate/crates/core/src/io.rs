//! State descriptions: JSON documents and the compact `name:args` syntax.
//!
//! Dense document:
//! `{"representation":"dense","num_parties":2,"re":[..],"im":[..]}` with the
//! matrix flattened row-major. Structured document:
//! `{"representation":"structured","num_parties":3,"mixture":[{"weight":0.5,
//! "terms":[{"bits":"100","re":0.577,"im":0.0}, ...]}, ...]}`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::linalg::{self, c, DMat};
use crate::named::NamedState;
use crate::state::{Body, QuantumState, SparsePureState};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AmplitudeEntry {
    pub bits: String,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MixtureEntry {
    pub weight: f64,
    pub terms: Vec<AmplitudeEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "representation", rename_all = "lowercase")]
pub enum StateDocument {
    Dense {
        num_parties: usize,
        re: Vec<f64>,
        #[serde(default)]
        im: Vec<f64>,
    },
    Structured {
        num_parties: usize,
        mixture: Vec<MixtureEntry>,
    },
}

impl StateDocument {
    pub fn from_state(s: &QuantumState) -> Result<Self> {
        let n = s.num_parties();
        Ok(match s.body() {
            Body::Dense(m) => {
                let d = m.nrows();
                let mut re = Vec::with_capacity(d * d);
                let mut im = Vec::with_capacity(d * d);
                for r in 0..d {
                    for col in 0..d {
                        re.push(m[(r, col)].re);
                        im.push(m[(r, col)].im);
                    }
                }
                StateDocument::Dense {
                    num_parties: n,
                    re,
                    im,
                }
            }
            Body::Structured(terms) => StateDocument::Structured {
                num_parties: n,
                mixture: terms
                    .iter()
                    .map(|(w, psi)| MixtureEntry {
                        weight: *w,
                        terms: psi
                            .amplitudes()
                            .iter()
                            .map(|(b, a)| AmplitudeEntry {
                                bits: b.to_string(),
                                re: a.re,
                                im: a.im,
                            })
                            .collect(),
                    })
                    .collect(),
            },
        })
    }

    pub fn to_state(&self) -> Result<QuantumState> {
        match self {
            StateDocument::Dense {
                num_parties,
                re,
                im,
            } => {
                let n = *num_parties;
                if n == 0 || n > crate::state::DENSE_LIMIT {
                    return Err(Error::TooLarge {
                        what: "dense state document",
                        n,
                        limit: crate::state::DENSE_LIMIT,
                    });
                }
                let d = linalg::dim(n);
                if re.len() != d * d {
                    return Err(Error::DimensionMismatch {
                        expected: d * d,
                        found: re.len(),
                    });
                }
                if !im.is_empty() && im.len() != d * d {
                    return Err(Error::DimensionMismatch {
                        expected: d * d,
                        found: im.len(),
                    });
                }
                let m = DMat::from_fn(d, d, |r, col| {
                    let k = r * d + col;
                    c(re[k], im.get(k).copied().unwrap_or(0.0))
                });
                QuantumState::from_dense(n, m)
            }
            StateDocument::Structured {
                num_parties,
                mixture,
            } => {
                let mut terms = Vec::with_capacity(mixture.len());
                for entry in mixture {
                    let mut amps = BTreeMap::new();
                    for t in &entry.terms {
                        let bits: BitString = t.bits.parse()?;
                        *amps.entry(bits).or_insert(linalg::ZERO) += c(t.re, t.im);
                    }
                    terms.push((entry.weight, SparsePureState::new(*num_parties, amps)?));
                }
                QuantumState::from_mixture(*num_parties, terms)
            }
        }
    }
}

pub fn state_from_json(text: &str) -> Result<QuantumState> {
    serde_json::from_str::<StateDocument>(text)?.to_state()
}

pub fn state_to_json(s: &QuantumState) -> Result<String> {
    Ok(serde_json::to_string_pretty(&StateDocument::from_state(
        s,
    )?)?)
}

pub fn read_state_file(path: &Path) -> Result<QuantumState> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    state_from_json(&text)
}

/// Parses a state description: a JSON file path, or named states such as
/// `w_mixture:n=3,f=0.5` joined with `*` for tensor products
/// (`bell:psi+*zeros:n=1`).
pub fn parse_state_spec(spec: &str) -> Result<QuantumState> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(Error::Parse("empty state description".into()));
    }
    let path = Path::new(spec);
    if spec.ends_with(".json") || path.is_file() {
        return read_state_file(path);
    }
    let mut acc: Option<QuantumState> = None;
    for part in spec.split('*') {
        let s = part.parse::<NamedState>()?.build()?;
        acc = Some(match acc {
            None => s,
            Some(a) => a.tensor(&s)?,
        });
    }
    Ok(acc.expect("split yields at least one part"))
}
