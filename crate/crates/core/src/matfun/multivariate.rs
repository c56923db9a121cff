use num_complex::Complex64;

use super::{adaptive, check_enclosed, frob_distance, require_probe, Evaluation, QuadratureSpec, ResolventSet};
use crate::config::DEFAULT_MAX_KRON_DIM;
use crate::error::{Error, Result};
use crate::fieldvals::Contour;
use crate::funexpr::ScalarFunction;
use crate::linalg::{kron_axpy, ComplexMatrix};

type C = Complex64;

pub const MAX_VARIABLES: usize = 4;

/// Quadrature over variables `k..d` with `prefix` holding `x_1…x_k`.
/// Returns the Kronecker form over those variables and the scale sum.
fn level(
    f: &dyn ScalarFunction,
    sets: &[ResolventSet],
    k: usize,
    prefix: &mut Vec<C>,
) -> Result<(ComplexMatrix, f64)> {
    let set = &sets[k];
    let n = set.resolvents[0].rows();
    if k + 1 == sets.len() {
        let mut out = ComplexMatrix::zeros(n, n);
        let mut scale = 0.0;
        for i in 0..set.len() {
            prefix.push(set.nodes[i]);
            let v = f.eval(prefix);
            prefix.pop();
            let coef = set.weights[i] * v?;
            scale += coef.norm() * set.norms[i];
            out.axpy(coef, &set.resolvents[i]);
        }
        return Ok((out, scale));
    }
    let inner_dim: usize = sets[k + 1..].iter().map(|s| s.resolvents[0].rows()).product();
    let mut out = ComplexMatrix::zeros(inner_dim * n, inner_dim * n);
    let mut scale = 0.0;
    for i in 0..set.len() {
        prefix.push(set.nodes[i]);
        let inner = level(f, sets, k + 1, prefix);
        prefix.pop();
        let (inner, s) = inner?;
        scale += set.weights[i].norm() * set.norms[i] * s;
        kron_axpy(&mut out, set.weights[i], &inner, &set.resolvents[i]);
    }
    Ok((out, scale))
}

/// `f{A₁,…,A_d}` in Kronecker form `Σ f(x) w R_d ⊗ ⋯ ⊗ R_1`, by recursion
/// with `x₁` outermost down to univariate quadratures in `x_d`.
pub fn eval_multivariate(
    f: &dyn ScalarFunction,
    mats: &[ComplexMatrix],
    contours: &[Contour],
    q: &QuadratureSpec,
) -> Result<Evaluation> {
    q.validate()?;
    let d = mats.len();
    if d == 0 || d > MAX_VARIABLES {
        return Err(Error::InvalidParameter(format!("number of matrices must be in 1..={MAX_VARIABLES}, got {d}")));
    }
    if f.arity() != d {
        return Err(Error::Arity { expected: d, got: f.arity() });
    }
    if contours.len() != d {
        return Err(Error::DimensionMismatch(format!("{d} matrices but {} contours", contours.len())));
    }
    let total = mats.iter().map(ComplexMatrix::rows).try_fold(1usize, |acc, n| acc.checked_mul(n));
    match total {
        Some(t) if t <= DEFAULT_MAX_KRON_DIM => {}
        other => {
            return Err(Error::SizeLimit { requested: other.unwrap_or(usize::MAX), limit: DEFAULT_MAX_KRON_DIM })
        }
    }
    for (a, g) in mats.iter().zip(contours) {
        check_enclosed(a, g)?;
    }
    require_probe(f, contours)?;
    let mut sets = mats
        .iter()
        .zip(contours)
        .map(|(a, g)| ResolventSet::new(a, *g, q.nodes_per_contour))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&ComplexMatrix> = mats.iter().collect();
    let (value, meta) = adaptive(
        &mut sets,
        &refs,
        q,
        |s| level(f, s, 0, &mut Vec::with_capacity(d)),
        frob_distance,
    )?;
    Ok(Evaluation { value, meta })
}
