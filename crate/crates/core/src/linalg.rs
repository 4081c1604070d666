//! Dense complex linear algebra shared by the generator, steady-state,
//! and spectrum modules.
//!
//! Density matrices are vectorized by column stacking, so for matrices
//! A, X, B of matching dimension vec(A X B) = (B^T kron A) vec(X). All
//! superoperators in this crate are built and applied in that convention.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Column-stacks an n x n matrix into a length n^2 vector.
pub fn vectorize(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &CVec, n: usize) -> CMat {
    CMat::from_column_slice(n, n, v.as_slice())
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().sum()
}

/// Tr{op * rho}.
pub fn expectation(op: &CMat, rho: &CMat) -> C64 {
    (op * rho).diagonal().sum()
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).map(|x| x * cr(0.5))
}

/// Superoperator for the unitary part, -i [H, rho].
pub fn commutator_superop(h: &CMat) -> CMat {
    let n = h.nrows();
    let id = CMat::identity(n, n);
    let left = id.kronecker(h);
    let right = h.transpose().kronecker(&id);
    (left - right).map(|x| x * c(0.0, -1.0))
}

/// Superoperator for a single Lindblad dissipator
/// D[L] rho = L rho L^dag - 1/2 {L^dag L, rho}.
pub fn dissipator_superop(l: &CMat) -> CMat {
    let n = l.nrows();
    let id = CMat::identity(n, n);
    let ldl = l.adjoint() * l;
    let sandwich = l.map(|x| x.conj()).kronecker(l);
    let anti = id.kronecker(&ldl) + ldl.transpose().kronecker(&id);
    sandwich - anti.map(|x| x * cr(0.5))
}

/// Maximum absolute column sum (the matrix 1-norm).
pub fn one_norm(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues ascending
/// and a deterministic eigenvector phase: the largest-magnitude component
/// of each column is made real and positive (first such component on ties).
pub fn hermitian_eigen_ascending(h: &CMat) -> (Vec<f64>, CMat) {
    let n = h.nrows();
    let eig = hermitize(h).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());

    let mut values = Vec::with_capacity(n);
    let mut vectors = CMat::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        values.push(eig.eigenvalues[k]);
        let mut v: CVec = eig.eigenvectors.column(k).into_owned();
        let mut arg = 0usize;
        for i in 1..n {
            if v[i].norm() > v[arg].norm() {
                arg = i;
            }
        }
        let phase = v[arg] / cr(v[arg].norm());
        v.iter_mut().for_each(|x| *x *= phase.conj());
        vectors.set_column(col, &v);
    }
    (values, vectors)
}

/// Matrix exponential by scaling and squaring with a Taylor series taken
/// to machine precision. Intended for the small (<= 16 x 16 here)
/// superoperators this crate works with; the scaling step adapts to
/// ||A|| so arbitrarily stiff A * t products stay accurate.
pub fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    let norm = one_norm(a);
    let squarings = if norm <= 0.25 {
        0
    } else {
        (norm / 0.25).log2().ceil() as i32
    };
    let scale = cr(2f64.powi(-squarings));
    let scaled = a.map(|x| x * scale);

    let mut term = CMat::identity(n, n);
    let mut sum = CMat::identity(n, n);
    for k in 1..=48u32 {
        term = (&term * &scaled).map(|x| x / cr(k as f64));
        sum += &term;
        if one_norm(&term) <= 1e-18 * one_norm(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Eigenvalues of a general complex matrix, computed from the real
/// 2n x 2n embedding [[Re, -Im], [Im, Re]] whose spectrum is the spectrum
/// of the complex matrix together with its conjugates.
pub fn complex_eigenvalues_via_embedding(m: &CMat) -> Vec<C64> {
    let n = m.nrows();
    let mut emb = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let x = m[(i, j)];
            emb[(i, j)] = x.re;
            emb[(i, j + n)] = -x.im;
            emb[(i + n, j)] = x.im;
            emb[(i + n, j + n)] = x.re;
        }
    }
    emb.complex_eigenvalues().iter().copied().collect()
}

/// Trace distance 1/2 ||a - b||_1 for Hermitian a, b.
pub fn trace_distance(a: &CMat, b: &CMat) -> f64 {
    let diff = hermitize(&(a - b));
    let eig = diff.symmetric_eigen();
    0.5 * eig.eigenvalues.iter().map(|x| x.abs()).sum::<f64>()
}
