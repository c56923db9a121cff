//! Bivariate Arnoldi approximation of `f{A,B} vec(c_A c_Bᵀ)` and its
//! a-priori error bound.
//!
//! With orthonormal Krylov bases `U_k` of `K_k(A, c_A)` and `V_ℓ` of
//! `K_ℓ(B, c_B)` the approximation is `x = (V_ℓ ⊗ U_k) y` with
//! `y = f{U_k*AU_k, V_ℓ*BV_ℓ} (V_ℓ ⊗ U_k)* c`. The compressed ranges lie in
//! `W(A)` and `W(B)`, so the contours of the full matrices are reused.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::{Config, CP_CONSTANT};
use crate::error::{Error, Result};
use crate::fieldvals::{contour_for, numrange, Contour, NumericalRangeApprox};
use crate::funexpr::ScalarFunction;
use crate::linalg::{spectral_norm, vec, ComplexMatrix};
use crate::matfun::{eval_bivariate, QuadratureMeta};

type C = Complex64;

/// `A U_k = U_{k+1} H̃` with `H̃` upper Hessenberg.
///
/// After a breakdown at step `j` the basis has `j` columns and `hess` is the
/// square `j × j` compression, so that `A U_j = U_j H_j`.
#[derive(Debug, Clone)]
pub struct ArnoldiDecomposition {
    pub basis: ComplexMatrix,
    pub hess: ComplexMatrix,
    pub breakdown_step: Option<usize>,
}

impl ArnoldiDecomposition {
    /// Dimension of the Krylov space built.
    pub fn steps(&self) -> usize {
        self.hess.cols()
    }

    /// `U_k`
    pub fn leading_basis(&self) -> ComplexMatrix {
        self.basis.leading_columns(self.steps())
    }

    /// Square part `H_k = U_k* A U_k`.
    pub fn compression(&self) -> ComplexMatrix {
        let k = self.steps();
        self.hess.submatrix(0, 0, k, k)
    }
}

fn dot(u: &ComplexMatrix, w: &ComplexMatrix) -> C {
    (&u.adjoint() * w).get(0, 0)
}

/// `k` steps of Arnoldi with modified Gram–Schmidt and one
/// reorthogonalization pass.
pub fn arnoldi(a: &ComplexMatrix, c: &ComplexMatrix, k: usize) -> Result<ArnoldiDecomposition> {
    let n = a.rows();
    if !a.is_square() || c.shape() != (n, 1) {
        return Err(Error::DimensionMismatch(format!(
            "Arnoldi needs a square matrix and a matching column vector, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            c.rows(),
            c.cols()
        )));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("Krylov dimension must be in 1..={n}, got {k}")));
    }
    let beta = c.frobenius_norm();
    if beta == 0.0 {
        return Err(Error::InvalidParameter("zero starting vector".into()));
    }
    let tol = 1e-12 * spectral_norm(a);
    let mut cols = vec![c.scale_real(1.0 / beta)];
    let mut h = ComplexMatrix::zeros(k + 1, k);
    for j in 0..k {
        let mut w = a * &cols[j];
        for _ in 0..2 {
            for (i, u) in cols.iter().enumerate() {
                let hij = dot(u, &w);
                h.set(i, j, h.get(i, j) + hij);
                w.axpy(-hij, u);
            }
        }
        let norm = w.frobenius_norm();
        if norm <= tol || j + 1 == n {
            let basis = ComplexMatrix::from_fn(n, j + 1, |r, s| cols[s].get(r, 0));
            return Ok(ArnoldiDecomposition {
                basis,
                hess: h.submatrix(0, 0, j + 1, j + 1),
                breakdown_step: Some(j + 1),
            });
        }
        h.set(j + 1, j, C::new(norm, 0.0));
        cols.push(w.scale_real(1.0 / norm));
    }
    let basis = ComplexMatrix::from_fn(n, k + 1, |r, s| cols[s].get(r, 0));
    Ok(ArnoldiDecomposition { basis, hess: h, breakdown_step: None })
}

/// A priori bound `2(1+√2)² ‖c‖₂ Ê`, with `Ê` the sampled max of `|f − p|`
/// over `W(A) × W(B)` for the tensor Chebyshev interpolant `p`. `Ê` bounds
/// the best approximation error from above, so the result is an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AprioriBound {
    pub bound: f64,
    pub e_hat: f64,
    pub c_norm: f64,
    /// Interpolation degrees in `x` and `y`.
    pub degrees: (usize, usize),
    /// Always true: `Ê` is near-best, not the infimum.
    pub estimate: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct KrylovApproxResult {
    pub x_kl: ComplexMatrix,
    pub y_kl: ComplexMatrix,
    /// Dimensions actually used after clamping at breakdowns.
    pub k_used: usize,
    pub l_used: usize,
    pub breakdown_a: Option<usize>,
    pub breakdown_b: Option<usize>,
    pub error_vs_exact: Option<f64>,
    pub apriori_bound: Option<AprioriBound>,
    pub quadrature: QuadratureMeta,
}

impl KrylovApproxResult {
    /// Records `‖exact − x_kl‖₂`.
    pub fn attach_exact(&mut self, exact: &ComplexMatrix) -> Result<f64> {
        if exact.shape() != self.x_kl.shape() {
            return Err(Error::DimensionMismatch("exact vector has the wrong length".into()));
        }
        let err = (exact - &self.x_kl).frobenius_norm();
        self.error_vs_exact = Some(err);
        Ok(err)
    }
}

fn check_vectors(a: &ComplexMatrix, b: &ComplexMatrix, ca: &ComplexMatrix, cb: &ComplexMatrix) -> Result<()> {
    if ca.shape() != (a.rows(), 1) || cb.shape() != (b.rows(), 1) {
        return Err(Error::DimensionMismatch("c_A and c_B must be columns matching A and B".into()));
    }
    Ok(())
}

fn contours(a: &ComplexMatrix, b: &ComplexMatrix, cfg: &Config) -> Result<(Contour, Contour)> {
    let (_, ga) = contour_for(a, cfg.n_angles, cfg.margin)?;
    let (_, gb) = contour_for(b, cfg.n_angles, cfg.margin)?;
    Ok((ga, gb))
}

#[allow(clippy::too_many_arguments)]
pub fn bivariate_krylov(
    f: &dyn ScalarFunction,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    ca: &ComplexMatrix,
    cb: &ComplexMatrix,
    k: usize,
    l: usize,
    cfg: &Config,
) -> Result<KrylovApproxResult> {
    check_vectors(a, b, ca, cb)?;
    let da = arnoldi(a, ca, k.min(a.rows()).max(1))?;
    let db = arnoldi(b, cb, l.min(b.rows()).max(1))?;
    let u = da.leading_basis();
    let v = db.leading_basis();
    let ha = &(&u.adjoint() * a) * &u;
    let hb = &(&v.adjoint() * b) * &v;
    let (ga, gb) = contours(a, b, cfg)?;
    let op = eval_bivariate(f, &ha, &hb, &ga, &gb, &cfg.quadrature)?;
    // (V ⊗ U)* vec(c_A c_Bᵀ) = vec((U* c_A)(V* c_B)ᵀ)
    let y0 = &(&u.adjoint() * ca) * &(&v.adjoint() * cb).transpose();
    let y = op.apply(&y0)?;
    let x = &(&u * &y) * &v.transpose();
    Ok(KrylovApproxResult {
        x_kl: vec(&x),
        y_kl: vec(&y),
        k_used: da.steps(),
        l_used: db.steps(),
        breakdown_a: da.breakdown_step,
        breakdown_b: db.breakdown_step,
        error_vs_exact: None,
        apriori_bound: None,
        quadrature: op.meta,
    })
}

/// `f{A,B} vec(c_A c_Bᵀ)` on the full matrices, with its quadrature metadata.
pub fn exact_rank_one(
    f: &dyn ScalarFunction,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    ca: &ComplexMatrix,
    cb: &ComplexMatrix,
    cfg: &Config,
) -> Result<(ComplexMatrix, QuadratureMeta)> {
    check_vectors(a, b, ca, cb)?;
    let (ga, gb) = contours(a, b, cfg)?;
    let op = eval_bivariate(f, a, b, &ga, &gb, &cfg.quadrature)?;
    let x = op.apply(&(ca * &cb.transpose()))?;
    Ok((vec(&x), op.meta))
}

/// Chebyshev points of the first kind on the longer axis of the bounding
/// rectangle of `W`, with barycentric weights.
struct ChebyshevAxis {
    nodes: Vec<C>,
    weights: Vec<f64>,
}

impl ChebyshevAxis {
    fn new(nr: &NumericalRangeApprox, degree: usize) -> Self {
        let pts = nr.outer_polygon();
        let (mut re0, mut re1, mut im0, mut im1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in &pts {
            re0 = re0.min(p.re);
            re1 = re1.max(p.re);
            im0 = im0.min(p.im);
            im1 = im1.max(p.im);
        }
        let center = C::new(0.5 * (re0 + re1), 0.5 * (im0 + im1));
        let (hre, him) = (0.5 * (re1 - re0), 0.5 * (im1 - im0));
        let (dir, half) = if hre >= him { (C::new(1.0, 0.0), hre) } else { (C::new(0.0, 1.0), him) };
        let half = half.max(1e-8 * (1.0 + center.norm()));
        let m = degree + 1;
        let mut nodes = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        for j in 0..m {
            let t = (2 * j + 1) as f64 * PI / (2 * m) as f64;
            nodes.push(center + dir * (half * t.cos()));
            weights.push(if j % 2 == 0 { t.sin() } else { -t.sin() });
        }
        Self { nodes, weights }
    }

    /// Lagrange basis values at `z`.
    fn basis(&self, z: C) -> Vec<C> {
        if let Some(hit) = self.nodes.iter().position(|&x| x == z) {
            let mut out = vec![C::new(0.0, 0.0); self.nodes.len()];
            out[hit] = C::new(1.0, 0.0);
            return out;
        }
        let terms: Vec<C> = self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w / (z - x)).collect();
        let total: C = terms.iter().sum();
        terms.into_iter().map(|t| t / total).collect()
    }
}

fn subsample(points: Vec<C>, max: usize) -> Vec<C> {
    if points.len() <= max {
        return points;
    }
    let step = points.len() as f64 / max as f64;
    (0..max).map(|i| points[(i as f64 * step) as usize]).collect()
}

/// `2(1+√2)² ‖c‖₂ Ê` for Krylov dimensions `(k, ℓ)`; interpolation degrees
/// are `min(k−1, degree_cap)` and `min(ℓ−1, degree_cap)`.
#[allow(clippy::too_many_arguments)]
pub fn apriori_error_bound(
    f: &dyn ScalarFunction,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c_norm: f64,
    k: usize,
    l: usize,
    degree_cap: usize,
    cfg: &Config,
) -> Result<AprioriBound> {
    if f.arity() != 2 {
        return Err(Error::Arity { expected: 2, got: f.arity() });
    }
    if k == 0 || l == 0 {
        return Err(Error::InvalidParameter("Krylov dimensions must be positive".into()));
    }
    let (dx, dy) = ((k - 1).min(degree_cap), (l - 1).min(degree_cap));
    let na = numrange(a, cfg.n_angles)?;
    let nb = numrange(b, cfg.n_angles)?;
    let (ax, ay) = (ChebyshevAxis::new(&na, dx), ChebyshevAxis::new(&nb, dy));
    let mut values = ComplexMatrix::zeros(dx + 1, dy + 1);
    for (i, &x) in ax.nodes.iter().enumerate() {
        for (j, &y) in ay.nodes.iter().enumerate() {
            values.set(i, j, f.eval(&[x, y])?);
        }
    }
    // f − p is analytic, so its maximum over W(A) × W(B) sits on the
    // boundary; chord points cover ranges that degenerate to segments
    let xs = subsample(na.sample_points(160), 160);
    let ys = subsample(nb.sample_points(160), 160);
    let by: Vec<Vec<C>> = ys.iter().map(|&y| ay.basis(y)).collect();
    let mut e_hat: f64 = 0.0;
    for &x in &xs {
        let bx = ax.basis(x);
        // row vector bxᵀ F, then contract with each y basis
        let mut partial = vec![C::new(0.0, 0.0); dy + 1];
        for (i, &wx) in bx.iter().enumerate() {
            for (j, slot) in partial.iter_mut().enumerate() {
                *slot += wx * values.get(i, j);
            }
        }
        for (&y, bj) in ys.iter().zip(&by) {
            let p: C = partial.iter().zip(bj).map(|(&s, &w)| s * w).sum();
            e_hat = e_hat.max((f.eval(&[x, y])? - p).norm());
        }
    }
    Ok(AprioriBound {
        bound: 2.0 * CP_CONSTANT * CP_CONSTANT * c_norm * e_hat,
        e_hat,
        c_norm,
        degrees: (dx, dy),
        estimate: true,
    })
}

#[cfg(test)]
mod tests;
