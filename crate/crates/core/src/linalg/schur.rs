//! Complex Schur decomposition and eigenpairs.
//!
//! Householder reduction to upper Hessenberg form followed by single-shift
//! implicit QR sweeps with Wilkinson shifts. Eigenvectors come from
//! back-substitution on the triangular factor.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{spectral_norm, ComplexMatrix};
use crate::config::DIAGONALIZABLE_KAPPA;
use crate::error::{Error, Result};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

/// `A = Q T Q*` with `T` upper triangular and `Q` unitary.
#[derive(Debug, Clone)]
pub struct Schur {
    pub t: ComplexMatrix,
    pub q: Option<ComplexMatrix>,
}

/// Eigenvalues, and eigenvectors when the eigenbasis is well conditioned.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<Complex64>,
    /// Columns are unit right eigenvectors.
    pub vectors: Option<ComplexMatrix>,
    /// Estimate of `κ₂(S)` for the unit-column eigenvector matrix; `∞` when
    /// vectors were not requested or are numerically dependent.
    pub condition_estimate: f64,
    /// Set when vectors were requested but the basis was rejected.
    pub vectors_unavailable: bool,
}

fn givens(x: C, y: C) -> (f64, C) {
    let ax = x.norm();
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, ZERO);
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    let c = ax / r;
    let s = (x / ax) * y.conj() / r;
    (c, s)
}

/// Applies `G = [[c, s], [-s̄, c]]` to rows `k, k+1` on columns `cols`.
fn rotate_rows(h: &mut DMatrix<C>, k: usize, c: f64, s: C, cols: std::ops::Range<usize>) {
    for j in cols {
        let a = h[(k, j)];
        let b = h[(k + 1, j)];
        h[(k, j)] = a * c + s * b;
        h[(k + 1, j)] = -s.conj() * a + b * c;
    }
}

/// Applies `G*` from the right to columns `k, k+1` on rows `rows`.
fn rotate_cols(h: &mut DMatrix<C>, k: usize, c: f64, s: C, rows: std::ops::Range<usize>) {
    for i in rows {
        let a = h[(i, k)];
        let b = h[(i, k + 1)];
        h[(i, k)] = a * c + b * s.conj();
        h[(i, k + 1)] = -a * s + b * c;
    }
}

fn hessenberg(h: &mut DMatrix<C>, q: &mut Option<DMatrix<C>>) {
    let n = h.nrows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let mut v: Vec<C> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = v[0];
        let phase = if x0.norm() == 0.0 { C::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H <- (I - 2vv*) H
        for j in 0..n {
            let dot: C = v.iter().enumerate().map(|(a, va)| va.conj() * h[(k + 1 + a, j)]).sum();
            for (a, va) in v.iter().enumerate() {
                h[(k + 1 + a, j)] -= 2.0 * va * dot;
            }
        }
        // H <- H (I - 2vv*)
        for i in 0..n {
            let dot: C = v.iter().enumerate().map(|(a, va)| h[(i, k + 1 + a)] * va).sum();
            for (a, va) in v.iter().enumerate() {
                h[(i, k + 1 + a)] -= 2.0 * dot * va.conj();
            }
        }
        if let Some(q) = q.as_mut() {
            for i in 0..n {
                let dot: C = v.iter().enumerate().map(|(a, va)| q[(i, k + 1 + a)] * va).sum();
                for (a, va) in v.iter().enumerate() {
                    q[(i, k + 1 + a)] -= 2.0 * dot * va.conj();
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
}

fn wilkinson_shift(a: C, b: C, c: C, d: C) -> C {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m1 = (a + d) * 0.5 + disc;
    let m2 = (a + d) * 0.5 - disc;
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// Complex Schur form of a square matrix.
pub fn schur(a: &ComplexMatrix, want_q: bool) -> Result<Schur> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("schur requires a square matrix".into()));
    }
    let n = a.rows();
    let mut h = a.as_dmatrix().clone();
    let mut q = want_q.then(|| DMatrix::<C>::identity(n, n));
    hessenberg(&mut h, &mut q);

    let eps = f64::EPSILON;
    let norm_est = h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let max_iter = 100 * n.max(1);
    let mut total = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n.saturating_sub(1);

    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let sub = h[(l, l - 1)].norm();
            let diag = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let scale = if diag == 0.0 { norm_est } else { diag };
            if sub <= eps * scale {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        total += 1;
        since_deflation += 1;
        if total > max_iter {
            return Err(Error::NoConvergence { iterations: total });
        }

        let mu = if since_deflation.is_multiple_of(11) {
            // exceptional shift
            h[(hi, hi)] + C::new(0.75 * h[(hi, hi - 1)].norm(), 0.3 * h[(hi, hi - 1)].norm())
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        let mut x = h[(l, l)] - mu;
        let mut y = h[(l + 1, l)];
        for k in l..hi {
            let (c, s) = givens(x, y);
            let col_start = if k > l { k - 1 } else { l };
            rotate_rows(&mut h, k, c, s, col_start..n);
            let row_end = (k + 3).min(hi + 1);
            rotate_cols(&mut h, k, c, s, 0..row_end);
            if let Some(q) = q.as_mut() {
                rotate_cols(q, k, c, s, 0..n);
            }
            if k > l {
                h[(k + 1, k - 1)] = ZERO;
            }
            if k + 1 < hi {
                x = h[(k + 1, k)];
                y = h[(k + 2, k)];
            }
        }
    }
    for j in 0..n {
        for i in j + 1..n {
            h[(i, j)] = ZERO;
        }
    }
    Ok(Schur {
        t: ComplexMatrix::from_dmatrix(h),
        q: q.map(ComplexMatrix::from_dmatrix),
    })
}

/// Unit eigenvectors of an upper-triangular matrix, one per diagonal entry.
fn triangular_eigenvectors(t: &DMatrix<C>) -> DMatrix<C> {
    let n = t.nrows();
    let tnorm = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let smin = f64::EPSILON * tnorm;
    let mut y = DMatrix::<C>::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = C::new(1.0, 0.0);
        for j in (0..k).rev() {
            let rhs: C = (j + 1..=k).map(|m| t[(j, m)] * y[(m, k)]).sum();
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < smin {
                denom = C::new(smin, 0.0);
            }
            y[(j, k)] = -rhs / denom;
        }
        let norm = y.column(k).norm();
        if norm.is_finite() && norm > 0.0 {
            y.column_mut(k).scale_mut(1.0 / norm);
        }
    }
    y
}

/// Eigenvalues with multiplicity; unit eigenvectors if requested and the
/// eigenbasis condition estimate stays below the diagonalizability threshold.
pub fn eig(a: &ComplexMatrix, want_vectors: bool) -> Result<EigenDecomposition> {
    let s = schur(a, want_vectors)?;
    let values: Vec<C> = (0..a.rows()).map(|i| s.t.get(i, i)).collect();
    if !want_vectors {
        return Ok(EigenDecomposition {
            values,
            vectors: None,
            condition_estimate: f64::INFINITY,
            vectors_unavailable: false,
        });
    }
    let y = triangular_eigenvectors(s.t.as_dmatrix());
    let q = s.q.expect("requested Schur vectors");
    let mut v = q.as_dmatrix() * y;
    for mut col in v.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col.scale_mut(1.0 / norm);
        }
    }
    let svals = v.singular_values();
    let smax = svals.max();
    let smin = svals.min();
    let kappa = if smin > 0.0 && smax.is_finite() { smax / smin } else { f64::INFINITY };
    if !kappa.is_finite() || kappa > DIAGONALIZABLE_KAPPA {
        return Ok(EigenDecomposition {
            values,
            vectors: None,
            condition_estimate: kappa,
            vectors_unavailable: true,
        });
    }
    Ok(EigenDecomposition {
        values,
        vectors: Some(ComplexMatrix::from_dmatrix(v)),
        condition_estimate: kappa,
        vectors_unavailable: false,
    })
}

/// Largest residual `‖A v_i − λ_i v_i‖₂ / ‖A‖₂` over the returned pairs.
pub fn eig_residual(a: &ComplexMatrix, d: &EigenDecomposition) -> Option<f64> {
    let v = d.vectors.as_ref()?;
    let anorm = spectral_norm(a).max(f64::MIN_POSITIVE);
    let av = a * v;
    let worst = (0..v.cols())
        .map(|k| {
            let r = &av.col(k) - &v.col(k).scale(d.values[k]);
            r.frobenius_norm()
        })
        .fold(0.0, f64::max);
    Some(worst / anorm)
}
