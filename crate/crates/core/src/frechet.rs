//! Fréchet derivatives `Df{A}` of univariate matrix functions.
//!
//! `Df{A}` is the bivariate function `f^[1]{A, Aᵀ}`: with the operator form
//! `X ↦ Σ_j M_j X R_{Aᵀ}(y_j)ᵀ` and `R_{Aᵀ}(y)ᵀ = R_A(y)`, applying it to `E`
//! gives `(1/2πi)² ∮∮ f^[1](x, y) R_A(x) E R_A(y) dx dy`. Since
//! `W(Aᵀ) = W(A)`, one contour serves both variables.
//!
//! The norm reported is the operator 2-norm of the `n² × n²` matrix acting
//! on `vec(E)`, which is the norm induced by the Frobenius norm on `E`.

use num_complex::Complex64;
use serde::Serialize;

use crate::config::{Config, CP_CONSTANT};
use crate::error::{Error, Result};
use crate::fieldvals::{contour_for, numrange, Contour};
use crate::funexpr::{DividedDifferenceExpr, FunExpr};
use crate::linalg::{spectral_norm, ComplexMatrix};
use crate::matfun::{eval_bivariate, eval_univariate, BivariateOperator, NormMethod, QuadratureMeta, QuadratureSpec};

type C = Complex64;

fn require_univariate(f: &FunExpr) -> Result<()> {
    if f.arity() != 1 {
        return Err(Error::Arity { expected: 1, got: f.arity() });
    }
    Ok(())
}

/// `Df{A}` on the default contour around `W(A)`.
pub fn frechet_operator(f: &FunExpr, a: &ComplexMatrix, q: &QuadratureSpec) -> Result<BivariateOperator> {
    let cfg = Config::default();
    let (_, contour) = contour_for(a, cfg.n_angles, cfg.margin)?;
    frechet_operator_on(f, a, &contour, q, cfg.eps_dd)
}

/// `Df{A}` on a given contour enclosing `W(A)`.
pub fn frechet_operator_on(
    f: &FunExpr,
    a: &ComplexMatrix,
    contour: &Contour,
    q: &QuadratureSpec,
    eps_dd: f64,
) -> Result<BivariateOperator> {
    require_univariate(f)?;
    let dd = DividedDifferenceExpr::new(f.clone(), eps_dd)?;
    eval_bivariate(&dd, a, &a.transpose(), contour, contour, q)
}

/// Top-right block of `f([[A, εE], [0, A]])` divided by `ε = 1/‖E‖_F`.
pub fn frechet_block_oracle(f: &FunExpr, a: &ComplexMatrix, e: &ComplexMatrix, q: &QuadratureSpec) -> Result<ComplexMatrix> {
    require_univariate(f)?;
    if !a.is_square() || e.shape() != a.shape() {
        return Err(Error::DimensionMismatch("A and E must be square of the same size".into()));
    }
    let n = a.rows();
    let norm = e.frobenius_norm();
    if norm == 0.0 {
        return Ok(ComplexMatrix::zeros(n, n));
    }
    let eps = 1.0 / norm;
    let mut m = ComplexMatrix::zeros(2 * n, 2 * n);
    m.set_block(0, 0, a);
    m.set_block(n, n, a);
    m.set_block(0, n, &e.scale_real(eps));
    let cfg = Config::default();
    let (_, contour) = contour_for(&m, cfg.n_angles, cfg.margin)?;
    let r = eval_univariate(f, &m, &contour, q)?;
    Ok(r.value.submatrix(0, n, n, n).scale_real(norm))
}

/// `‖Df{A}‖` against `(1 + √2)² sup_{W(A)} |f′|`.
#[derive(Debug, Clone, Serialize)]
pub struct FrechetResult {
    #[serde(skip)]
    pub operator: BivariateOperator,
    pub norm: f64,
    pub norm_method: NormMethod,
    /// Sampled `sup |f′|` over `W(A)`.
    pub sup_derivative: f64,
    pub sup_location: C,
    pub bound: f64,
    pub ratio: f64,
    pub quadrature: QuadratureMeta,
}

pub fn frechet_norm_and_bound(f: &FunExpr, a: &ComplexMatrix, cfg: &Config) -> Result<FrechetResult> {
    require_univariate(f)?;
    let (_, contour) = contour_for(a, cfg.n_angles, cfg.margin)?;
    let operator =
        frechet_operator_on(f, a, &contour, &cfg.quadrature, cfg.eps_dd)?.with_max_kron_dim(cfg.max_kron_dim);
    let (norm, norm_method) = operator.spectral_norm()?;
    let fp = f.diff(1)?;
    let nr = numrange(a, cfg.cert_angles)?;
    let (sup_derivative, sup_location) = nr.sampled_sup(cfg.cert_angles, |z| Ok(fp.eval(&[z])?.norm()))?;
    let bound = CP_CONSTANT * CP_CONSTANT * sup_derivative;
    let ratio = if bound > 0.0 { norm / bound } else if norm == 0.0 { 0.0 } else { f64::INFINITY };
    let quadrature = operator.meta;
    Ok(FrechetResult { operator, norm, norm_method, sup_derivative, sup_location, bound, ratio, quadrature })
}

/// `‖(f(A+hE) − f(A))/h − Df{A}(E)‖₂ / ‖E‖₂`.
///
/// All three terms use one contour around `W(A)` widened by `h‖E‖₂` and the
/// same node count, so quadrature errors largely cancel in the difference
/// quotient.
pub fn frechet_finite_difference_check(
    f: &FunExpr,
    a: &ComplexMatrix,
    e: &ComplexMatrix,
    h: f64,
    q: &QuadratureSpec,
) -> Result<f64> {
    require_univariate(f)?;
    if h.is_nan() || h <= 0.0 {
        return Err(Error::InvalidParameter(format!("step h must be positive, got {h}")));
    }
    if e.shape() != a.shape() {
        return Err(Error::DimensionMismatch("A and E must have the same shape".into()));
    }
    let cfg = Config::default();
    let e_norm = spectral_norm(e);
    if e_norm == 0.0 {
        return Err(Error::InvalidParameter("direction E must be nonzero".into()));
    }
    let nr = numrange(a, cfg.n_angles)?;
    let margin = cfg.margin.unwrap_or_else(|| nr.default_margin()) + h * e_norm;
    let contour = crate::fieldvals::enclosing_contour(&nr, margin)?;
    let op = frechet_operator_on(f, a, &contour, q, cfg.eps_dd)?;
    let fixed = QuadratureSpec::fixed(op.meta.nodes_used);
    let perturbed = a + &e.scale_real(h);
    let fa = eval_univariate(f, a, &contour, &fixed)?.value;
    let fah = eval_univariate(f, &perturbed, &contour, &fixed)?.value;
    let quotient = (&fah - &fa).scale_real(1.0 / h);
    let derivative = op.apply(e)?;
    Ok(spectral_norm(&(&quotient - &derivative)) / e_norm)
}
