use num_complex::Complex64;

use super::{adaptive, check_enclosed, require_probe, QuadratureMeta, QuadratureSpec, ResolventSet};
use crate::config::DEFAULT_MAX_KRON_DIM;
use crate::error::{Error, Result};
use crate::fieldvals::Contour;
use crate::funexpr::{MatrixFunExpr, ScalarFunction};
use crate::linalg::{kron_axpy, spectral_norm, ComplexMatrix};
use crate::random;

type C = Complex64;

/// Quadrature form of `F{A,B}` for an `m × p` grid of functions.
///
/// For each block the operator is stored as `X ↦ Σ_j M_j X R_B(y_j)ᵀ` with
/// `M_j = Σ_i w_i w_j f(x_i, y_j) R_A(x_i)`, so applying it never forms the
/// Kronecker product.
#[derive(Debug, Clone)]
pub struct BivariateOperator {
    n_a: usize,
    n_b: usize,
    rows: usize,
    cols: usize,
    /// `blocks[r * cols + s][j] = M_j` for function entry `(r, s)`.
    blocks: Vec<Vec<ComplexMatrix>>,
    /// `R_B(y_j)ᵀ`
    rbt: Vec<ComplexMatrix>,
    max_kron_dim: usize,
    pub meta: QuadratureMeta,
}

impl BivariateOperator {
    /// `(n_A, n_B)`
    pub fn dims(&self) -> (usize, usize) {
        (self.n_a, self.n_b)
    }

    /// Shape `(m, p)` of the function grid.
    pub fn grid(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn with_max_kron_dim(mut self, limit: usize) -> Self {
        self.max_kron_dim = limit;
        self
    }

    fn check_input(&self, x: &ComplexMatrix) -> Result<()> {
        if x.shape() != (self.n_a, self.n_b) {
            return Err(Error::DimensionMismatch(format!(
                "operator acts on {}x{} matrices, got {}x{}",
                self.n_a,
                self.n_b,
                x.rows(),
                x.cols()
            )));
        }
        Ok(())
    }

    fn apply_block(&self, block: usize, x: &ComplexMatrix) -> ComplexMatrix {
        let mut y = ComplexMatrix::zeros(self.n_a, self.n_b);
        for (m, rt) in self.blocks[block].iter().zip(&self.rbt) {
            y += &(&(m * x) * rt);
        }
        y
    }

    /// `X ↦ f{A,B}(X)` for a scalar function.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if (self.rows, self.cols) != (1, 1) {
            return Err(Error::DimensionMismatch("apply needs a scalar function; use apply_blocks".into()));
        }
        self.check_input(x)?;
        Ok(self.apply_block(0, x))
    }

    /// Block action: input `p` matrices `X_s`, output `Y_r = Σ_s f_rs{A,B}(X_s)`.
    pub fn apply_blocks(&self, xs: &[ComplexMatrix]) -> Result<Vec<ComplexMatrix>> {
        if xs.len() != self.cols {
            return Err(Error::DimensionMismatch(format!("expected {} input blocks, got {}", self.cols, xs.len())));
        }
        for x in xs {
            self.check_input(x)?;
        }
        Ok((0..self.rows)
            .map(|r| {
                let mut y = ComplexMatrix::zeros(self.n_a, self.n_b);
                for (s, x) in xs.iter().enumerate() {
                    y += &self.apply_block(r * self.cols + s, x);
                }
                y
            })
            .collect())
    }

    /// Adjoint action `Y ↦ Σ_j M_j* Y conj(R_B(y_j))` for a scalar function.
    pub fn apply_adjoint(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        if (self.rows, self.cols) != (1, 1) {
            return Err(Error::DimensionMismatch("adjoint needs a scalar function".into()));
        }
        self.check_input(y)?;
        let mut x = ComplexMatrix::zeros(self.n_a, self.n_b);
        for (m, rt) in self.blocks[0].iter().zip(&self.rbt) {
            x += &(&(&m.adjoint() * y) * &rt.adjoint());
        }
        Ok(x)
    }

    /// Explicit `m n_A n_B × p n_A n_B` matrix.
    pub fn materialize(&self) -> Result<ComplexMatrix> {
        let nn = self.n_a * self.n_b;
        let requested = nn * self.rows.max(self.cols);
        if requested > self.max_kron_dim {
            return Err(Error::SizeLimit { requested, limit: self.max_kron_dim });
        }
        let mut out = ComplexMatrix::zeros(nn * self.rows, nn * self.cols);
        for r in 0..self.rows {
            for s in 0..self.cols {
                let mut block = ComplexMatrix::zeros(nn, nn);
                for (m, rt) in self.blocks[r * self.cols + s].iter().zip(&self.rbt) {
                    kron_axpy(&mut block, C::new(1.0, 0.0), &rt.transpose(), m);
                }
                out.set_block(r * nn, s * nn, &block);
            }
        }
        Ok(out)
    }

    /// Spectral norm: exact from the explicit matrix when it fits under the
    /// size cap, otherwise power iteration on `T*T` (scalar functions only).
    pub fn spectral_norm(&self) -> Result<(f64, NormMethod)> {
        match self.materialize() {
            Ok(m) => Ok((spectral_norm(&m), NormMethod::Explicit)),
            Err(Error::SizeLimit { .. }) => self.power_norm(500, 1e-12).map(|v| (v, NormMethod::PowerIteration)),
            Err(e) => Err(e),
        }
    }

    pub fn power_norm(&self, max_iter: usize, tol: f64) -> Result<f64> {
        let mut rng = random::rng(0x5eed);
        let mut x = random::gaussian(&mut rng, self.n_a, self.n_b);
        let mut est = 0.0;
        for _ in 0..max_iter {
            let nx = x.frobenius_norm();
            if nx == 0.0 {
                return Ok(0.0);
            }
            x = x.scale_real(1.0 / nx);
            let y = self.apply(&x)?;
            let next = y.frobenius_norm();
            x = self.apply_adjoint(&y)?;
            if (next - est).abs() <= tol * next {
                return Ok(next);
            }
            est = next;
        }
        Ok(est)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    Explicit,
    PowerIteration,
}

fn contract(
    entries: &[&dyn ScalarFunction],
    cols: usize,
    sets: &[ResolventSet],
) -> Result<(BivariateOperator, f64)> {
    let (sa, sb) = (&sets[0], &sets[1]);
    let n_a = sa.resolvents[0].rows();
    let n_b = sb.resolvents[0].rows();
    let mut scale = 0.0;
    let mut blocks = Vec::with_capacity(entries.len());
    for f in entries {
        let mut per_node = Vec::with_capacity(sb.len());
        for j in 0..sb.len() {
            let mut m = ComplexMatrix::zeros(n_a, n_a);
            for i in 0..sa.len() {
                let coef = sa.weights[i] * sb.weights[j] * f.eval(&[sa.nodes[i], sb.nodes[j]])?;
                scale += coef.norm() * sa.norms[i] * sb.norms[j];
                m.axpy(coef, &sa.resolvents[i]);
            }
            per_node.push(m);
        }
        blocks.push(per_node);
    }
    let op = BivariateOperator {
        n_a,
        n_b,
        rows: entries.len() / cols,
        cols,
        blocks,
        rbt: sb.resolvents.iter().map(ComplexMatrix::transpose).collect(),
        max_kron_dim: DEFAULT_MAX_KRON_DIM,
        meta: QuadratureMeta { nodes_used: sa.len(), est_error: None, scale, converged: true },
    };
    Ok((op, scale))
}

/// Frobenius distance between two quadrature levels: exact on small
/// operators, through fixed random probes otherwise.
fn operator_distance(a: &BivariateOperator, b: &BivariateOperator) -> (f64, f64) {
    if a.n_a * a.n_b <= 256 {
        if let (Ok(ma), Ok(mb)) = (a.materialize(), b.materialize()) {
            return ((&ma - &mb).frobenius_norm(), mb.frobenius_norm());
        }
    }
    let mut rng = random::rng(0xb1f);
    let (mut diff, mut norm) = (0.0f64, 0.0f64);
    for _ in 0..3 {
        let xs: Vec<ComplexMatrix> = (0..a.cols).map(|_| random::gaussian(&mut rng, a.n_a, a.n_b)).collect();
        let (ya, yb) = (a.apply_blocks(&xs).unwrap_or_default(), b.apply_blocks(&xs).unwrap_or_default());
        for (p, q) in ya.iter().zip(&yb) {
            diff = diff.max((p - q).frobenius_norm());
            norm = norm.max(q.frobenius_norm());
        }
    }
    (diff, norm)
}

/// `F{A,B}` for a row-major grid of functions with `cols` columns.
pub fn eval_bivariate_grid(
    entries: &[&dyn ScalarFunction],
    cols: usize,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    ga: &Contour,
    gb: &Contour,
    q: &QuadratureSpec,
) -> Result<BivariateOperator> {
    q.validate()?;
    if entries.is_empty() || cols == 0 || !entries.len().is_multiple_of(cols) {
        return Err(Error::DimensionMismatch(format!("{} functions do not form rows of {cols}", entries.len())));
    }
    for f in entries {
        if f.arity() != 2 {
            return Err(Error::Arity { expected: 2, got: f.arity() });
        }
    }
    check_enclosed(a, ga)?;
    check_enclosed(b, gb)?;
    for f in entries {
        require_probe(*f, &[*ga, *gb])?;
    }
    let n = q.nodes_per_contour;
    let mut sets = [ResolventSet::new(a, *ga, n)?, ResolventSet::new(b, *gb, n)?];
    let (mut op, meta) = adaptive(&mut sets, &[a, b], q, |s| contract(entries, cols, s), operator_distance)?;
    op.meta = meta;
    Ok(op)
}

/// `f{A,B}` by the tensor trapezoidal rule on `Γ_A × Γ_B`.
pub fn eval_bivariate(
    f: &dyn ScalarFunction,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    ga: &Contour,
    gb: &Contour,
    q: &QuadratureSpec,
) -> Result<BivariateOperator> {
    eval_bivariate_grid(&[f], 1, a, b, ga, gb, q)
}

/// `F{A,B}` for a matrix-valued `F`.
pub fn eval_bivariate_matrix(
    f: &MatrixFunExpr,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    ga: &Contour,
    gb: &Contour,
    q: &QuadratureSpec,
) -> Result<BivariateOperator> {
    let entries: Vec<&dyn ScalarFunction> =
        (0..f.rows()).flat_map(|i| (0..f.cols()).map(move |j| f.entry(i, j) as &dyn ScalarFunction)).collect();
    eval_bivariate_grid(&entries, f.cols(), a, b, ga, gb, q)
}
