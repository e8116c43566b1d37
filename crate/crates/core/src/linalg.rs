//! Dense kernels over `2^n × 2^n` complex matrices.
//!
//! Index convention: party 0 is the most significant bit of a row/column
//! index, so a local operator on party `p` acts on bit `n - 1 - p`.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type DMat = DMatrix<C64>;

/// Eigenvalues below this magnitude are dropped from entropies.
pub const EIGEN_CUTOFF: f64 = 1e-12;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn dim(n: usize) -> usize {
    1usize << n
}

fn to_faer(m: &DMat) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |r, col| m[(r, col)])
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &DMat) -> Vec<f64> {
    let mut v = to_faer(m)
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .expect("Hermitian eigenvalue iteration diverged");
    v.sort_by(f64::total_cmp);
    v
}

/// Eigen-decomposition of a Hermitian matrix, eigenpairs sorted by
/// descending eigenvalue.
pub fn hermitian_eigen(m: &DMat) -> (Vec<f64>, DMat) {
    let eig = to_faer(m)
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("Hermitian eigendecomposition diverged");
    let (s, u) = (eig.S(), eig.U());
    let d = m.nrows();
    // faer orders ascending; reverse for descending.
    let values = (0..d).rev().map(|i| s[i].re).collect();
    let vectors = DMat::from_fn(d, d, |r, col| u[(r, d - 1 - col)]);
    (values, vectors)
}

/// Shannon entropy in bits; entries below [`EIGEN_CUTOFF`] contribute 0.
pub fn shannon_bits<I: IntoIterator<Item = f64>>(probs: I) -> f64 {
    probs
        .into_iter()
        .filter(|&p| p > EIGEN_CUTOFF)
        .map(|p| -p * p.log2())
        .sum()
}

/// Binary entropy `H(x)` in bits.
pub fn binary_entropy(x: f64) -> f64 {
    shannon_bits([x, 1.0 - x])
}

pub fn kron(a: &DMat, b: &DMat) -> DMat {
    a.kronecker(b)
}

pub fn mat2_to_dmat(m: &Mat2) -> DMat {
    DMat::from_fn(2, 2, |r, c| m[(r, c)])
}

/// Haar-random unit vector in `C^d`.
pub fn haar_vector<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> nalgebra::DVector<C64> {
    use rand_distr::{Distribution, StandardNormal};
    let v = nalgebra::DVector::from_fn(d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im)
    });
    let norm = v.norm();
    v / c(norm, 0.0)
}

/// Haar-random `d × d` unitary: QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> DMat {
    use rand_distr::{Distribution, StandardNormal};
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let z = DMat::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re * scale, im * scale)
    });
    let qr = z.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            ONE
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `ρ ← O ρ O†` where `O` acts on `parties` (first listed = most significant
/// operator index) and identity elsewhere.
pub fn apply_op(rho: &mut DMat, n: usize, parties: &[usize], op: &DMat) {
    left_apply(rho, n, parties, op);
    right_apply_adjoint(rho, n, parties, op);
}

fn local_offsets(n: usize, parties: &[usize]) -> (Vec<usize>, usize) {
    let k = parties.len();
    let offsets = (0..1usize << k)
        .map(|sub| {
            parties.iter().enumerate().fold(0usize, |acc, (j, &p)| {
                if (sub >> (k - 1 - j)) & 1 == 1 {
                    acc | (1usize << (n - 1 - p))
                } else {
                    acc
                }
            })
        })
        .collect();
    let mask = parties
        .iter()
        .fold(0usize, |acc, &p| acc | (1usize << (n - 1 - p)));
    (offsets, mask)
}

/// `ρ ← O ρ`.
pub fn left_apply(rho: &mut DMat, n: usize, parties: &[usize], op: &DMat) {
    let (offsets, mask) = local_offsets(n, parties);
    let d = dim(n);
    let k = offsets.len();
    let mut buf = vec![ZERO; k];
    for col in 0..d {
        for base in (0..d).filter(|i| i & mask == 0) {
            for (a, &off) in offsets.iter().enumerate() {
                buf[a] = rho[(base | off, col)];
            }
            for (a, &off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (b, &v) in buf.iter().enumerate() {
                    acc += op[(a, b)] * v;
                }
                rho[(base | off, col)] = acc;
            }
        }
    }
}

/// `ρ ← ρ O†`.
pub fn right_apply_adjoint(rho: &mut DMat, n: usize, parties: &[usize], op: &DMat) {
    let (offsets, mask) = local_offsets(n, parties);
    let d = dim(n);
    let k = offsets.len();
    let mut buf = vec![ZERO; k];
    for base in (0..d).filter(|j| j & mask == 0) {
        for row in 0..d {
            for (b, &off) in offsets.iter().enumerate() {
                buf[b] = rho[(row, base | off)];
            }
            for (a, &off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (b, &v) in buf.iter().enumerate() {
                    acc += v * op[(a, b)].conj();
                }
                rho[(row, base | off)] = acc;
            }
        }
    }
}

/// `Tr(ρ · (A_0 ⊗ A_1 ⊗ ... ⊗ A_{n-1}))` by contracting one qubit at a time.
pub fn contract_local(rho: &DMat, ops: &[Mat2]) -> C64 {
    let n = ops.len();
    let d = dim(n);
    debug_assert_eq!(rho.nrows(), d);
    // Row-major copy, then contract the last remaining qubit repeatedly.
    let mut cur: Vec<C64> = Vec::with_capacity(d * d);
    for r in 0..d {
        for col in 0..d {
            cur.push(rho[(r, col)]);
        }
    }
    let mut dcur = d;
    for op in ops.iter().rev() {
        let dn = dcur / 2;
        let mut next = vec![ZERO; dn * dn];
        for a in 0..dn {
            for b in 0..dn {
                let mut acc = ZERO;
                for s in 0..2 {
                    for t in 0..2 {
                        let a_ts = op[(t, s)];
                        if a_ts != ZERO {
                            acc += cur[(2 * a + s) * dcur + 2 * b + t] * a_ts;
                        }
                    }
                }
                next[a * dn + b] = acc;
            }
        }
        cur = next;
        dcur = dn;
    }
    cur[0]
}

/// Reduced density matrix on `keep` (ascending party order in the result).
pub fn partial_trace(rho: &DMat, n: usize, keep: &[usize]) -> DMat {
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    let traced: Vec<usize> = (0..n).filter(|p| !keep.contains(p)).collect();
    let k = keep.len();
    let compose = |ki: usize, ti: usize| -> usize {
        let mut idx = 0usize;
        for (j, &p) in keep.iter().enumerate() {
            if (ki >> (k - 1 - j)) & 1 == 1 {
                idx |= 1 << (n - 1 - p);
            }
        }
        for (j, &p) in traced.iter().enumerate() {
            if (ti >> (traced.len() - 1 - j)) & 1 == 1 {
                idx |= 1 << (n - 1 - p);
            }
        }
        idx
    };
    let dk = dim(k);
    let dt = dim(traced.len());
    let full: Vec<Vec<usize>> = (0..dk)
        .map(|ki| (0..dt).map(|ti| compose(ki, ti)).collect())
        .collect();
    DMat::from_fn(dk, dk, |i, j| {
        let mut acc = ZERO;
        for t in 0..dt {
            acc += rho[(full[i][t], full[j][t])];
        }
        acc
    })
}

/// Reorders tensor factors: party `i` of the result is party `order[i]` of
/// the input.
pub fn permute_parties(rho: &DMat, n: usize, order: &[usize]) -> DMat {
    let map: Vec<usize> = (0..dim(n))
        .map(|new_idx| {
            let mut old = 0usize;
            for (i, &p) in order.iter().enumerate() {
                if (new_idx >> (n - 1 - i)) & 1 == 1 {
                    old |= 1 << (n - 1 - p);
                }
            }
            old
        })
        .collect();
    DMat::from_fn(dim(n), dim(n), |i, j| rho[(map[i], map[j])])
}

/// Trace norm of a Hermitian matrix.
pub fn trace_norm(m: &DMat) -> f64 {
    hermitian_eigenvalues(m).iter().map(|v| v.abs()).sum()
}

pub fn trace(m: &DMat) -> C64 {
    m.diagonal().iter().sum()
}

/// Largest absolute off-diagonal entry.
pub fn max_off_diagonal(m: &DMat) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..m.nrows() {
        for col in 0..m.ncols() {
            if r != col {
                worst = worst.max(m[(r, col)].norm());
            }
        }
    }
    worst
}
