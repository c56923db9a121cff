//! Reference evaluations that share no code with the quadrature path.

use num_complex::Complex64;

use crate::config::DEFAULT_MAX_KRON_DIM;
use crate::error::{Error, Result};
use crate::funexpr::{Polynomial, ScalarFunction};
use crate::linalg::{eig, inverse, kron, kron_with_limit, ComplexMatrix};

type C = Complex64;

fn eigenbasis(a: &ComplexMatrix) -> Result<(Vec<C>, ComplexMatrix, ComplexMatrix, f64)> {
    let d = eig(a, true)?;
    let s = d.vectors.ok_or_else(|| {
        Error::OracleUnavailable(format!(
            "matrix is not numerically diagonalizable (eigenvector condition {:.3e})",
            d.condition_estimate
        ))
    })?;
    let sinv = inverse(&s)?;
    Ok((d.values, s, sinv, d.condition_estimate))
}

/// `S f(Λ) S⁻¹`.
pub fn oracle_diag_univariate(f: &dyn ScalarFunction, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (values, s, sinv, _) = eigenbasis(a)?;
    let fl = values.iter().map(|&z| f.eval(&[z])).collect::<Result<Vec<_>>>()?;
    Ok(&(&s * &ComplexMatrix::from_diagonal(&fl)) * &sinv)
}

/// `(T ⊗ S) diag(f(λ_i, μ_j)) (T⁻¹ ⊗ S⁻¹)` for `A = S Λ S⁻¹`, `B = T M T⁻¹`.
/// Returns the explicit operator and `κ(S)·κ(T)`.
pub fn oracle_diag(f: &dyn ScalarFunction, a: &ComplexMatrix, b: &ComplexMatrix) -> Result<(ComplexMatrix, f64)> {
    if f.arity() != 2 {
        return Err(Error::Arity { expected: 2, got: f.arity() });
    }
    let (la, s, sinv, ka) = eigenbasis(a)?;
    let (lb, t, tinv, kb) = eigenbasis(b)?;
    let limit = DEFAULT_MAX_KRON_DIM;
    let left = kron_with_limit(&t, &s, limit)?;
    let right = kron_with_limit(&tinv, &sinv, limit)?;
    let mut diag = Vec::with_capacity(la.len() * lb.len());
    for &mu in &lb {
        for &lambda in &la {
            diag.push(f.eval(&[lambda, mu])?);
        }
    }
    Ok((&(&left * &ComplexMatrix::from_diagonal(&diag)) * &right, ka * kb))
}

/// `Σ_k c_k A^k` by Horner's rule.
pub fn oracle_polynomial_univariate(p: &Polynomial, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if p.arity != 1 {
        return Err(Error::Arity { expected: 1, got: p.arity });
    }
    let n = a.rows();
    let deg = p.degree_in(0);
    let coef = |k: u32| p.terms.get(&vec![k]).copied().unwrap_or_default();
    let mut acc = ComplexMatrix::identity(n).scale(coef(deg));
    for k in (0..deg).rev() {
        acc = &(&acc * a) + &ComplexMatrix::identity(n).scale(coef(k));
    }
    Ok(acc)
}

/// `Σ_e c_e A_d^{e_d} ⊗ ⋯ ⊗ A_1^{e_1}`.
pub fn oracle_polynomial(p: &Polynomial, mats: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    if p.arity != mats.len() {
        return Err(Error::Arity { expected: p.arity, got: mats.len() });
    }
    let total: usize = mats.iter().map(ComplexMatrix::rows).product();
    let mut out = ComplexMatrix::zeros(total, total);
    for (e, c) in &p.terms {
        let mut term = mats[0].powi(e[0]);
        for (a, &k) in mats.iter().zip(e).skip(1) {
            term = kron(&a.powi(k), &term)?;
        }
        out.axpy(*c, &term);
    }
    Ok(out)
}
