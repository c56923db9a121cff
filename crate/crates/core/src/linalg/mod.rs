//! Dense complex linear algebra: Kronecker products, vectorization, linear
//! solves, spectral norms and eigendecompositions.

mod io;
mod matrix;
mod schur;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub use io::{read_matrix, read_matrix_json, read_matrix_market, write_matrix, write_matrix_json,
    write_matrix_market, MatrixJson};
pub use matrix::ComplexMatrix;
pub use schur::{eig, eig_residual, schur, EigenDecomposition, Schur};

use crate::config::DEFAULT_MAX_KRON_DIM;
use crate::error::{Error, Result};

/// Kronecker product `P ⊗ Q` with the default size cap.
pub fn kron(p: &ComplexMatrix, q: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron_with_limit(p, q, DEFAULT_MAX_KRON_DIM)
}

/// Kronecker product; fails if either result dimension exceeds `limit`.
pub fn kron_with_limit(p: &ComplexMatrix, q: &ComplexMatrix, limit: usize) -> Result<ComplexMatrix> {
    let rows = p.rows().saturating_mul(q.rows());
    let cols = p.cols().saturating_mul(q.cols());
    let requested = rows.max(cols);
    if requested > limit {
        return Err(Error::SizeLimit { requested, limit });
    }
    Ok(ComplexMatrix::from_dmatrix(p.as_dmatrix().kronecker(q.as_dmatrix())))
}

/// `out += alpha · (P ⊗ Q)` without allocating the product.
pub(crate) fn kron_axpy(out: &mut ComplexMatrix, alpha: Complex64, p: &ComplexMatrix, q: &ComplexMatrix) {
    let (qr, qc) = q.shape();
    let o = out.as_dmatrix_mut();
    let qd = q.as_dmatrix();
    for pj in 0..p.cols() {
        for pi in 0..p.rows() {
            let coef = alpha * p.get(pi, pj);
            if coef == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..qc {
                let col = pj * qc + j;
                for i in 0..qr {
                    o[(pi * qr + i, col)] += coef * qd[(i, j)];
                }
            }
        }
    }
}

/// Column-stacking vectorization.
pub fn vec(x: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::column(x.column_major_entries())
}

/// Inverse of [`vec`].
pub fn unvec(v: &ComplexMatrix, rows: usize, cols: usize) -> Result<ComplexMatrix> {
    if v.cols() != 1 || v.rows() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "cannot reshape a {}x{} array into {rows}x{cols}",
            v.rows(),
            v.cols()
        )));
    }
    Ok(ComplexMatrix::from_dmatrix(DMatrix::from_column_slice(
        rows,
        cols,
        v.column_major_entries(),
    )))
}

/// LU factorization with partial pivoting, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct LuFactor {
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    n: usize,
}

impl LuFactor {
    pub fn new(m: &ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch("LU requires a square matrix".into()));
        }
        let n = m.rows();
        let lu = m.as_dmatrix().clone().lu();
        let u = lu.u();
        let pivots = u.diagonal();
        let max_pivot = pivots.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let min_pivot = pivots.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        let scale = m.max_abs();
        let threshold = f64::EPSILON * n as f64 * scale.max(max_pivot);
        if min_pivot.is_nan() || threshold.is_nan() || min_pivot <= threshold {
            return Err(Error::Singular { pivot: min_pivot });
        }
        Ok(Self { lu, n })
    }

    pub fn solve(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rhs.rows() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has {} rows, system has {}",
                rhs.rows(),
                self.n
            )));
        }
        self.lu
            .solve(rhs.as_dmatrix())
            .map(ComplexMatrix::from_dmatrix)
            .ok_or(Error::Singular { pivot: 0.0 })
    }

    pub fn inverse(&self) -> Result<ComplexMatrix> {
        self.solve(&ComplexMatrix::identity(self.n))
    }
}

/// Solves `M X = RHS`.
pub fn solve(m: &ComplexMatrix, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
    LuFactor::new(m)?.solve(rhs)
}

pub fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    LuFactor::new(m)?.inverse()
}

/// Largest singular value.
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    if m.max_abs() == 0.0 {
        return 0.0;
    }
    m.as_dmatrix().singular_values().max()
}

/// Smallest singular value.
pub fn min_singular_value(m: &ComplexMatrix) -> f64 {
    m.as_dmatrix().singular_values().min()
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and
/// matching unit eigenvectors.
pub fn hermitian_eigen(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let eig = SymmetricEigen::new(h.as_dmatrix().clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = h.rows();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Largest eigenvalue of a Hermitian matrix and a unit eigenvector for it.
pub fn hermitian_top_eigenpair(h: &ComplexMatrix) -> (f64, ComplexMatrix) {
    let eig = SymmetricEigen::new(h.as_dmatrix().clone());
    let (idx, &val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty matrix");
    (val, ComplexMatrix::from_dmatrix(eig.eigenvectors.columns(idx, 1).into_owned()))
}

/// Hermitian part `(A + A*)/2`.
pub fn hermitian_part(a: &ComplexMatrix) -> ComplexMatrix {
    (a + &a.adjoint()).scale_real(0.5)
}

/// `v* A v` for a column vector `v`.
pub fn rayleigh_quotient(a: &ComplexMatrix, v: &ComplexMatrix) -> Complex64 {
    let av = a * v;
    v.column_major_entries()
        .iter()
        .zip(av.column_major_entries())
        .map(|(x, y)| x.conj() * y)
        .sum()
}

/// Orthonormal basis of the column space via thin QR (Householder).
pub fn orthonormalize(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_dmatrix(m.as_dmatrix().clone().qr().q())
}

/// Perfect-shuffle permutation `P` with `P (X ⊗ Y) Pᵀ = Y ⊗ X` for
/// `X: m×m`, `Y: n×n`, as an index map on `vec` positions.
pub fn perfect_shuffle(m: usize, n: usize) -> Vec<usize> {
    // position (i + m*j) of vec(Z) for Z m×n maps to (j + n*i) of vec(Zᵀ)
    let mut perm = vec![0; m * n];
    for j in 0..n {
        for i in 0..m {
            perm[i + m * j] = j + n * i;
        }
    }
    perm
}
