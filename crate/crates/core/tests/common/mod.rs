//! Independent dense reference computations used by the integration tests.
//! Nothing here goes through the library's state constructors or
//! contraction routines.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qcorr::{QuantumState, Result};

pub type C = Complex64;
pub type M = DMatrix<C>;

pub fn cx(re: f64) -> C {
    C::new(re, 0.0)
}

pub fn eye(d: usize) -> M {
    M::identity(d, d)
}

pub fn pauli(letter: char) -> M {
    let z = cx(0.0);
    match letter {
        'I' => eye(2),
        'X' => M::from_row_slice(2, 2, &[z, cx(1.0), cx(1.0), z]),
        'Y' => M::from_row_slice(2, 2, &[z, C::new(0.0, -1.0), C::new(0.0, 1.0), z]),
        'Z' => M::from_row_slice(2, 2, &[cx(1.0), z, z, cx(-1.0)]),
        _ => panic!("bad letter {letter}"),
    }
}

pub fn kron_all(ms: &[M]) -> M {
    ms.iter()
        .skip(1)
        .fold(ms[0].clone(), |acc, m| acc.kronecker(m))
}

/// Basis index of a bitstring, party 0 most significant.
pub fn index_of(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

pub fn w_vector(n: usize, excited: u8) -> DVector<C> {
    let mut v = DVector::from_element(1 << n, cx(0.0));
    let amp = cx(1.0 / (n as f64).sqrt());
    for j in 0..n {
        let bits: Vec<u8> = (0..n)
            .map(|p| if p == j { excited } else { 1 - excited })
            .collect();
        v[index_of(&bits)] = amp;
    }
    v
}

pub fn projector(v: &DVector<C>) -> M {
    v * v.adjoint()
}

/// `F|W⟩⟨W| + (1−F)|W̄⟩⟨W̄|` built from explicit vectors.
pub fn w_mixture(n: usize, f: f64) -> M {
    projector(&w_vector(n, 1)) * cx(f) + projector(&w_vector(n, 0)) * cx(1.0 - f)
}

/// Single-party operator embedded at `party`.
pub fn embed(n: usize, party: usize, op: &M) -> M {
    let ms: Vec<M> = (0..n)
        .map(|p| if p == party { op.clone() } else { eye(2) })
        .collect();
    kron_all(&ms)
}

pub fn expect(rho: &M, op: &M) -> f64 {
    (rho * op).trace().re
}

/// `Tr(ρ ⊗(A_i − ⟨A_i⟩))` with full Kronecker products.
pub fn covariance(rho: &M, ops: &[M]) -> f64 {
    let n = ops.len();
    let centered: Vec<M> = ops
        .iter()
        .enumerate()
        .map(|(p, a)| a - eye(2) * cx(expect(rho, &embed(n, p, a))))
        .collect();
    expect(rho, &kron_all(&centered))
}

pub fn pauli_string_ops(s: &str) -> Vec<M> {
    s.chars().map(pauli).collect()
}

/// All-success branch of the local filter: `(q, ρ')`.
pub fn filter(rho: &M, n: usize, eps: f64) -> (f64, M) {
    let es = M::from_row_slice(2, 2, &[cx(1.0), cx(0.0), cx(0.0), cx(eps.sqrt())]);
    let k = kron_all(&vec![es; n]);
    let out = &k * rho * k.adjoint();
    let q = out.trace().re;
    (q, out / cx(q))
}

pub fn fidelity(rho: &M, v: &DVector<C>) -> f64 {
    (v.adjoint() * rho * v)[(0, 0)].re
}

pub fn to_matrix(s: &QuantumState) -> M {
    s.to_dense().expect("small state")
}

pub fn from_matrix(n: usize, m: M) -> QuantumState {
    QuantumState::from_dense(n, m).expect("valid dense state")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random state on `n` parties that factorizes over a random partition;
/// returns the state and the largest block size.
pub fn random_factorized_state(n: usize, rng: &mut ChaCha8Rng) -> Result<(QuantumState, usize)> {
    let mut parties: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        parties.swap(i, rng.random_range(0..=i));
    }
    let mut pieces = Vec::new();
    let mut largest = 0;
    let mut rest = &parties[..];
    while !rest.is_empty() {
        let k = rng.random_range(1..=rest.len().min(3));
        let (block, tail) = rest.split_at(k);
        let mut block = block.to_vec();
        block.sort_unstable();
        let rank = rng.random_range(1..=2);
        pieces.push((block, QuantumState::random_dense(k, rank, rng)?));
        largest = largest.max(k);
        rest = tail;
    }
    Ok((qcorr::cuts::tensor_on_parties(&pieces)?, largest))
}

pub fn random_hermitian(rng: &mut ChaCha8Rng) -> M {
    let a = C::new(rng.random_range(-1.0..1.0), 0.0);
    let d = C::new(rng.random_range(-1.0..1.0), 0.0);
    let b = C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    M::from_row_slice(2, 2, &[a, b, b.conj(), d])
}
