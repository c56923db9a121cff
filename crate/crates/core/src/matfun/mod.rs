//! Matrix functions by trapezoidal quadrature of Cauchy integrals: `f(A)`,
//! matrix-valued `F(A)`, bivariate `f{A,B}` and multivariate `f{A₁,…,A_d}`,
//! plus independent diagonalization and polynomial oracles.
//!
//! Kronecker ordering is last-variable-major: `f{A,B}` acts on `vec(X)` for
//! `X ∈ ℂ^{n_A×n_B}` as `Σ f(x_i, y_j) w_i w_j R_B(y_j) ⊗ R_A(x_i)`.

mod bivariate;
mod multivariate;
mod oracle;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fieldvals::Contour;
use crate::funexpr::{analyticity_probe, MatrixFunExpr, ScalarFunction};
use crate::linalg::{eig, ComplexMatrix, LuFactor};

pub use bivariate::{eval_bivariate, eval_bivariate_grid, eval_bivariate_matrix, BivariateOperator, NormMethod};
pub use multivariate::eval_multivariate;
pub use oracle::{oracle_diag, oracle_diag_univariate, oracle_polynomial, oracle_polynomial_univariate};

type C = Complex64;

/// Trapezoidal rule settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Nodes per contour, a power of two ≥ 16.
    pub nodes_per_contour: usize,
    /// Double the node count until successive results agree to `rel_tol`.
    pub adaptive: bool,
    pub rel_tol: f64,
    pub max_nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { nodes_per_contour: 256, adaptive: true, rel_tol: 1e-10, max_nodes: 4096 }
    }
}

impl QuadratureSpec {
    pub fn fixed(n: usize) -> Self {
        Self { nodes_per_contour: n, adaptive: false, rel_tol: 1e-10, max_nodes: n }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.nodes_per_contour;
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("nodes_per_contour must be a power of two >= 16, got {n}")));
        }
        if self.max_nodes < n {
            return Err(Error::InvalidParameter(format!("max_nodes {} below nodes_per_contour {n}", self.max_nodes)));
        }
        if self.rel_tol.is_nan() || self.rel_tol <= 0.0 {
            return Err(Error::InvalidParameter("rel_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Diagnostics attached to every quadrature result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureMeta {
    /// Nodes per contour of the returned value.
    pub nodes_used: usize,
    /// Change between the last two node counts (Frobenius), when adaptive.
    pub est_error: Option<f64>,
    /// `Σ |w| |f| Π ‖R‖_F` over the tensor grid; reference for tolerances.
    pub scale: f64,
    /// False when `max_nodes` was reached before `rel_tol`.
    pub converged: bool,
}

/// Matrix plus quadrature diagnostics.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub value: ComplexMatrix,
    pub meta: QuadratureMeta,
}

/// Nodes, weights and resolvents `(σ_k I − A)⁻¹` on one contour.
#[derive(Debug, Clone)]
pub struct ResolventSet {
    pub contour: Contour,
    pub nodes: Vec<C>,
    pub weights: Vec<C>,
    pub resolvents: Vec<ComplexMatrix>,
    /// `‖R_k‖_F`
    pub norms: Vec<f64>,
}

fn resolvent(a: &ComplexMatrix, sigma: C) -> Result<ComplexMatrix> {
    let shifted = a.shifted(sigma).scale_real(-1.0);
    LuFactor::new(&shifted)
        .and_then(|lu| lu.inverse())
        .map_err(|_| Error::ContourExcludesSpectrum { re: sigma.re, im: sigma.im })
}

impl ResolventSet {
    pub fn new(a: &ComplexMatrix, contour: Contour, n: usize) -> Result<Self> {
        let (nodes, weights) = contour.nodes(n);
        let resolvents = nodes.iter().map(|&s| resolvent(a, s)).collect::<Result<Vec<_>>>()?;
        let norms = resolvents.iter().map(ComplexMatrix::frobenius_norm).collect();
        Ok(Self { contour, nodes, weights, resolvents, norms })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Doubles the node count; only the interleaved new nodes need solves.
    pub fn refine(&mut self, a: &ComplexMatrix) -> Result<()> {
        let n = self.len();
        let (new_nodes, _) = self.contour.nodes_offset(n, 0.5);
        let new_res = new_nodes.iter().map(|&s| resolvent(a, s)).collect::<Result<Vec<_>>>()?;
        let (all_nodes, all_weights) = self.contour.nodes(2 * n);
        let mut resolvents = Vec::with_capacity(2 * n);
        for (old, new) in std::mem::take(&mut self.resolvents).into_iter().zip(new_res) {
            resolvents.push(old);
            resolvents.push(new);
        }
        self.nodes = all_nodes;
        self.weights = all_weights;
        self.norms = resolvents.iter().map(ComplexMatrix::frobenius_norm).collect();
        self.resolvents = resolvents;
        Ok(())
    }
}

/// Fails unless every eigenvalue of `a` lies strictly inside `contour`.
pub fn check_enclosed(a: &ComplexMatrix, contour: &Contour) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("matrix function of a non-square matrix".into()));
    }
    for z in eig(a, false)?.values {
        if !contour.encloses(z) {
            return Err(Error::ContourExcludesSpectrum { re: z.re, im: z.im });
        }
    }
    Ok(())
}

pub(crate) fn converged(diff: f64, value_norm: f64, scale: f64, rel_tol: f64) -> bool {
    diff <= rel_tol * value_norm + 1e3 * f64::EPSILON * scale
}

/// Runs `compute` on successively refined resolvent sets until successive
/// results agree.
pub(crate) fn adaptive<T>(
    sets: &mut [ResolventSet],
    mats: &[&ComplexMatrix],
    q: &QuadratureSpec,
    mut compute: impl FnMut(&[ResolventSet]) -> Result<(T, f64)>,
    distance: impl Fn(&T, &T) -> (f64, f64),
) -> Result<(T, QuadratureMeta)> {
    let (mut current, mut scale) = compute(sets)?;
    if !q.adaptive {
        return Ok((current, QuadratureMeta { nodes_used: sets[0].len(), est_error: None, scale, converged: true }));
    }
    loop {
        if sets[0].len() * 2 > q.max_nodes {
            return Ok((current, QuadratureMeta { nodes_used: sets[0].len(), est_error: None, scale, converged: false }));
        }
        for (set, a) in sets.iter_mut().zip(mats) {
            set.refine(a)?;
        }
        let (next, next_scale) = compute(sets)?;
        let (diff, norm) = distance(&current, &next);
        current = next;
        scale = next_scale;
        let done = converged(diff, norm, scale, q.rel_tol);
        if done || sets[0].len() * 2 > q.max_nodes {
            return Ok((
                current,
                QuadratureMeta { nodes_used: sets[0].len(), est_error: Some(diff), scale, converged: done },
            ));
        }
    }
}

pub(crate) fn frob_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> (f64, f64) {
    ((a - b).frobenius_norm(), b.frobenius_norm())
}

pub(crate) fn require_probe(f: &dyn ScalarFunction, contours: &[Contour]) -> Result<()> {
    if analyticity_probe(f, contours, 16) { Ok(()) } else { Err(Error::NotAnalytic) }
}

/// `f(A) = (1/2πi) ∮ f(σ)(σI − A)⁻¹ dσ`.
pub fn eval_univariate(
    f: &dyn ScalarFunction,
    a: &ComplexMatrix,
    contour: &Contour,
    q: &QuadratureSpec,
) -> Result<Evaluation> {
    eval_univariate_grid(&[f], 1, a, contour, q)
}

/// Block matrix with block `(i, j)` equal to `f_ij(A)`.
pub fn eval_matrix_valued(
    f: &MatrixFunExpr,
    a: &ComplexMatrix,
    contour: &Contour,
    q: &QuadratureSpec,
) -> Result<Evaluation> {
    if f.arity() != 1 {
        return Err(Error::Arity { expected: 1, got: f.arity() });
    }
    let entries: Vec<&dyn ScalarFunction> =
        (0..f.rows()).flat_map(|i| (0..f.cols()).map(move |j| f.entry(i, j) as &dyn ScalarFunction)).collect();
    eval_univariate_grid(&entries, f.cols(), a, contour, q)
}

/// Block matrix of `f_ij(A)` for a row-major grid of functions with `cols`
/// columns.
pub fn eval_univariate_grid(
    entries: &[&dyn ScalarFunction],
    cols: usize,
    a: &ComplexMatrix,
    contour: &Contour,
    q: &QuadratureSpec,
) -> Result<Evaluation> {
    q.validate()?;
    if entries.is_empty() || cols == 0 || !entries.len().is_multiple_of(cols) {
        return Err(Error::DimensionMismatch(format!("{} functions do not form rows of {cols}", entries.len())));
    }
    let rows = entries.len() / cols;
    for f in entries {
        if f.arity() != 1 {
            return Err(Error::Arity { expected: 1, got: f.arity() });
        }
    }
    check_enclosed(a, contour)?;
    for f in entries {
        require_probe(*f, &[*contour])?;
    }
    let n = a.rows();
    let mut sets = [ResolventSet::new(a, *contour, q.nodes_per_contour)?];
    let compute = |sets: &[ResolventSet]| -> Result<(ComplexMatrix, f64)> {
        let set = &sets[0];
        let mut out = ComplexMatrix::zeros(rows * n, cols * n);
        let mut scale = 0.0;
        for (bi, f) in entries.iter().enumerate() {
            let (r, c) = (bi / cols, bi % cols);
            let mut acc = ComplexMatrix::zeros(n, n);
            for k in 0..set.len() {
                let fv = f.eval(&[set.nodes[k]])?;
                let coef = set.weights[k] * fv;
                scale += coef.norm() * set.norms[k];
                acc.axpy(coef, &set.resolvents[k]);
            }
            out.set_block(r * n, c * n, &acc);
        }
        Ok((out, scale))
    };
    let (value, meta) = adaptive(&mut sets, &[a], q, compute, frob_distance)?;
    Ok(Evaluation { value, meta })
}

#[cfg(test)]
mod tests;
