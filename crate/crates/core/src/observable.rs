//! Single-qubit observables, measurement bases, and per-party observable lists.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, Mat2, C64, ONE, ZERO};

const HERMITIAN_TOL: f64 = 1e-12;
const ORTHONORMAL_TOL: f64 = 1e-12;

pub fn pauli_x() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> Mat2 {
    Mat2::new(ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO)
}

pub fn pauli_z() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, -ONE)
}

/// A non-identity Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> Mat2 {
        match self {
            Pauli::X => pauli_x(),
            Pauli::Y => pauli_y(),
            Pauli::Z => pauli_z(),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_letter(ch: char) -> Result<Self> {
        match ch.to_ascii_uppercase() {
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::Parse(format!("not a Pauli letter: `{other}`"))),
        }
    }
}

/// Hermitian 2×2 observable.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleQubitObservable(Mat2);

impl SingleQubitObservable {
    pub fn new(m: Mat2) -> Result<Self> {
        let dev = (m - m.adjoint()).norm();
        if dev > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "observable is not Hermitian (deviation {dev:e})"
            )));
        }
        Ok(Self(m))
    }

    pub fn identity() -> Self {
        Self(Mat2::identity())
    }

    pub fn pauli(p: Pauli) -> Self {
        Self(p.matrix())
    }

    pub fn sigma_x() -> Self {
        Self(pauli_x())
    }

    pub fn sigma_y() -> Self {
        Self(pauli_y())
    }

    pub fn sigma_z() -> Self {
        Self(pauli_z())
    }

    /// `a0·I + ax·σx + ay·σy + az·σz`.
    pub fn from_bloch(a0: f64, ax: f64, ay: f64, az: f64) -> Self {
        Self(
            Mat2::identity() * c(a0, 0.0)
                + pauli_x() * c(ax, 0.0)
                + pauli_y() * c(ay, 0.0)
                + pauli_z() * c(az, 0.0),
        )
    }

    /// `X − mean·I`.
    pub fn centered(&self, mean: f64) -> Self {
        Self(self.0 - Mat2::identity() * c(mean, 0.0))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0 == Mat2::identity()
    }
}

/// One observable per party.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalObservableList(Vec<SingleQubitObservable>);

impl LocalObservableList {
    pub fn new(ops: Vec<SingleQubitObservable>) -> Self {
        Self(ops)
    }

    pub fn identity(n: usize) -> Self {
        Self(vec![SingleQubitObservable::identity(); n])
    }

    /// `obs` on `party`, identity elsewhere.
    pub fn single(n: usize, party: usize, obs: SingleQubitObservable) -> Self {
        let mut ops = vec![SingleQubitObservable::identity(); n];
        ops[party] = obs;
        Self(ops)
    }

    pub fn from_paulis(letters: &[Pauli]) -> Self {
        Self(
            letters
                .iter()
                .map(|&p| SingleQubitObservable::pauli(p))
                .collect(),
        )
    }

    /// Parses a string over `{X, Y, Z}`; `I` is accepted as identity.
    pub fn from_pauli_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|ch| {
                if ch.eq_ignore_ascii_case(&'I') {
                    Ok(SingleQubitObservable::identity())
                } else {
                    Pauli::from_letter(ch).map(SingleQubitObservable::pauli)
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ops(&self) -> &[SingleQubitObservable] {
        &self.0
    }

    pub fn matrices(&self) -> Vec<Mat2> {
        self.0.iter().map(|o| o.0).collect()
    }
}

/// Formats a Pauli string such as `XZZ`.
pub fn pauli_string(letters: &[Pauli]) -> String {
    letters.iter().map(|p| p.letter()).collect()
}

/// Orthonormal single-qubit basis `{|b0⟩, |b1⟩}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleQubitBasis {
    vectors: [[C64; 2]; 2],
}

impl SingleQubitBasis {
    pub fn new(b0: [C64; 2], b1: [C64; 2]) -> Result<Self> {
        let dot = |u: &[C64; 2], v: &[C64; 2]| u[0].conj() * v[0] + u[1].conj() * v[1];
        let worst = [
            (dot(&b0, &b0) - ONE).norm(),
            (dot(&b1, &b1) - ONE).norm(),
            dot(&b0, &b1).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        if worst > ORTHONORMAL_TOL {
            return Err(Error::InvalidState(format!(
                "basis is not orthonormal (deviation {worst:e})"
            )));
        }
        Ok(Self { vectors: [b0, b1] })
    }

    pub fn computational() -> Self {
        Self {
            vectors: [[ONE, ZERO], [ZERO, ONE]],
        }
    }

    /// `{|+⟩, |−⟩}`.
    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            vectors: [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
        }
    }

    /// `{cos θ|0⟩ + sin θ|1⟩, sin θ|0⟩ − cos θ|1⟩}`.
    pub fn real(theta: f64) -> Self {
        let (s, co) = theta.sin_cos();
        Self {
            vectors: [[c(co, 0.0), c(s, 0.0)], [c(s, 0.0), c(-co, 0.0)]],
        }
    }

    /// `{cos θ|0⟩ + e^{iφ} sin θ|1⟩, −e^{−iφ} sin θ|0⟩ + cos θ|1⟩}`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (s, co) = theta.sin_cos();
        let phase = C64::from_polar(1.0, phi);
        Self {
            vectors: [[c(co, 0.0), phase * s], [-phase.conj() * s, c(co, 0.0)]],
        }
    }

    pub fn vector(&self, k: usize) -> &[C64; 2] {
        &self.vectors[k]
    }

    /// `|b_k⟩⟨b_k|`.
    pub fn projector(&self, k: usize) -> Mat2 {
        let v = &self.vectors[k];
        Mat2::new(
            v[0] * v[0].conj(),
            v[0] * v[1].conj(),
            v[1] * v[0].conj(),
            v[1] * v[1].conj(),
        )
    }

    /// `|k⟩⟨b_k|`: projects on `b_k` and relabels it as `|k⟩`.
    pub fn measure_and_relabel(&self, k: usize) -> Mat2 {
        let v = &self.vectors[k];
        let mut m = Mat2::zeros();
        m[(k, 0)] = v[0].conj();
        m[(k, 1)] = v[1].conj();
        m
    }

    /// Unitary sending `|b_k⟩ → |k⟩`.
    pub fn to_computational(&self) -> Mat2 {
        self.measure_and_relabel(0) + self.measure_and_relabel(1)
    }

    /// Angle `atan2(|⟨1|b0⟩|, |⟨0|b0⟩|)` of the first basis vector.
    pub fn magnitude_angle(&self) -> f64 {
        self.vectors[0][1].norm().atan2(self.vectors[0][0].norm())
    }
}

impl fmt::Display for SingleQubitBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = &self.vectors;
        write!(
            f,
            "{{({:.6}{:+.6}i)|0> + ({:.6}{:+.6}i)|1>, ({:.6}{:+.6}i)|0> + ({:.6}{:+.6}i)|1>}}",
            v[0][0].re,
            v[0][0].im,
            v[0][1].re,
            v[0][1].im,
            v[1][0].re,
            v[1][0].im,
            v[1][1].re,
            v[1][1].im
        )
    }
}

impl FromStr for SingleQubitBasis {
    type Err = Error;

    /// Accepts `z`/`computational`, `x`/`hadamard`/`pm`, `real:θ`, `angles:θ,φ`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse_f = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("invalid angle `{t}`")))
        };
        match s {
            "z" | "computational" => return Ok(Self::computational()),
            "x" | "hadamard" | "pm" => return Ok(Self::hadamard()),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("real:") {
            return Ok(Self::real(parse_f(rest)?));
        }
        if let Some(rest) = s.strip_prefix("angles:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() == 2 {
                return Ok(Self::from_angles(parse_f(parts[0])?, parse_f(parts[1])?));
            }
        }
        Err(Error::Parse(format!("unknown basis `{s}`")))
    }
}
