//! Empirical certification of the numerical-range norm bounds.
//!
//! Each report compares a computed norm `lhs` against `constant · rhs`, where
//! `rhs` is a sampled supremum of `|f|` (or `‖F(·)‖₂`) over the relevant
//! region. Sampling can only underestimate a supremum, so `rhs` is a lower
//! bound and a failed check is a red flag to investigate, not a
//! counterexample. A failed check is recomputed once with doubled sampling
//! and quadrature before it is reported.

mod ensemble;
mod lemmas;
mod search;

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{Config, CP_CONSTANT};
use crate::error::{Error, Result};
use crate::fieldvals::{contour_for, golden_section, numrange, Contour, NumericalRangeApprox};
use crate::frechet::frechet_norm_and_bound;
use crate::funexpr::{DividedDifferenceExpr, FunExpr, MatrixFunExpr, ScalarFunction};
use crate::linalg::{spectral_norm, ComplexMatrix};
use crate::matfun::{
    eval_bivariate_grid, eval_multivariate, eval_univariate_grid, NormMethod, QuadratureMeta, QuadratureSpec,
};

pub use ensemble::{
    run_suite, safe_shift, standard_ensemble, suite_summary_tsv, summarize, EnsembleCase, FunctionSpec, MatrixKind,
    SuiteOutcome, SuiteSummary,
};
pub use lemmas::{cauchy_dual, lemma_harness, CauchyDual};
pub use search::{extremal_search, raw_ratio, LeaderboardEntry, SearchOptions, SearchOutcome};

type C = Complex64;

/// Which inequality a report checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InequalityId {
    /// `‖f(A)‖ ≤ (1+√2) max_{W(A)} |f|`
    Cp1,
    /// `‖F(A)‖ ≤ (1+√2) ‖F‖_{W(A)}` for matrix-valued `F`
    CpMatrix,
    Bivariate,
    Multivariate,
    Ando,
    Lemma1,
    Lemma2,
    Frechet,
}

impl InequalityId {
    pub const ALL: [InequalityId; 8] = [
        InequalityId::Cp1,
        InequalityId::CpMatrix,
        InequalityId::Bivariate,
        InequalityId::Multivariate,
        InequalityId::Ando,
        InequalityId::Lemma1,
        InequalityId::Lemma2,
        InequalityId::Frechet,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InequalityId::Cp1 => "cp1",
            InequalityId::CpMatrix => "cp-matrix",
            InequalityId::Bivariate => "bivariate",
            InequalityId::Multivariate => "multivariate",
            InequalityId::Ando => "ando",
            InequalityId::Lemma1 => "lemma1",
            InequalityId::Lemma2 => "lemma2",
            InequalityId::Frechet => "frechet",
        }
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for InequalityId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        InequalityId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown inequality `{s}`")))
    }
}

/// A sharper constant that holds in special cases, checked but never
/// asserted by the report's `pass` flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Informational {
    pub name: String,
    pub constant: f64,
    pub ratio: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertMetadata {
    pub function: String,
    pub sizes: Vec<usize>,
    /// Sample points per range (per variable) in the sup grid.
    pub samples_per_range: usize,
    /// Angles of each sampled numerical range.
    pub angles: usize,
    pub quadrature: Option<QuadratureMeta>,
    pub norm_method: Option<NormMethod>,
    pub contours: Vec<Contour>,
    /// Where the sampled sup was attained.
    pub sup_location: Vec<C>,
    /// True when the first attempt failed and the report was recomputed with
    /// doubled sampling and quadrature.
    pub refined: bool,
    /// Quadrature points of Cauchy transforms too close to the contour for
    /// the node cap.
    pub accuracy_warnings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub inequality: InequalityId,
    pub lhs: f64,
    pub rhs_sup_sample: f64,
    pub constant: f64,
    /// `lhs / rhs`
    pub raw_ratio: f64,
    /// `lhs / (constant · rhs)`
    pub ratio: f64,
    pub pass: bool,
    /// Always true: `rhs_sup_sample` underestimates the supremum, so a failed
    /// check calls for refinement rather than proving a violation.
    pub rhs_is_lower_bound: bool,
    pub informational: Vec<Informational>,
    pub metadata: CertMetadata,
}

fn quotient(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else if lhs <= f64::MIN_POSITIVE {
        0.0
    } else {
        f64::INFINITY
    }
}

impl CertificateReport {
    pub fn new(inequality: InequalityId, lhs: f64, rhs: f64, constant: f64, tol: f64, metadata: CertMetadata) -> Self {
        let raw_ratio = quotient(lhs, rhs);
        let ratio = raw_ratio / constant;
        Self {
            inequality,
            lhs,
            rhs_sup_sample: rhs,
            constant,
            raw_ratio,
            ratio,
            pass: ratio <= 1.0 + tol,
            rhs_is_lower_bound: true,
            informational: Vec::new(),
            metadata,
        }
    }

    /// Records `raw_ratio ≤ constant (+ tol)` as an informational check.
    pub fn note(&mut self, name: &str, constant: f64, tol: f64) {
        let ratio = self.raw_ratio / constant;
        self.informational.push(Informational { name: name.into(), constant, ratio, holds: ratio <= 1.0 + tol });
    }

    /// Merges a refined recomputation: the sup sample keeps the larger value
    /// and the norm comes from the refined run.
    fn merge_refined(self, refined: CertificateReport, tol: f64) -> Self {
        let rhs = self.rhs_sup_sample.max(refined.rhs_sup_sample);
        let mut metadata = refined.metadata;
        metadata.refined = true;
        if self.rhs_sup_sample > refined.rhs_sup_sample {
            metadata.sup_location = self.metadata.sup_location;
        }
        let mut out = CertificateReport::new(self.inequality, refined.lhs, rhs, self.constant, tol, metadata);
        for info in refined.informational {
            out.note(&info.name, info.constant, tol);
        }
        out
    }
}

/// A row-major grid of scalar functions, the common input of every check.
#[derive(Clone)]
pub struct FunctionGrid {
    rows: usize,
    cols: usize,
    entries: Vec<Arc<dyn ScalarFunction>>,
    label: String,
}

impl fmt::Debug for FunctionGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FunctionGrid({}x{}: {})", self.rows, self.cols, self.label)
    }
}

impl FunctionGrid {
    pub fn new(rows: usize, cols: usize, entries: Vec<Arc<dyn ScalarFunction>>, label: String) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!("{} functions for a {rows}x{cols} grid", entries.len())));
        }
        let arity = entries[0].arity();
        if let Some(bad) = entries.iter().find(|e| e.arity() != arity) {
            return Err(Error::Arity { expected: arity, got: bad.arity() });
        }
        Ok(Self { rows, cols, entries, label })
    }

    pub fn scalar(f: FunExpr) -> Self {
        let label = f.to_string();
        Self { rows: 1, cols: 1, entries: vec![Arc::new(f)], label }
    }

    pub fn from_matrix(f: &MatrixFunExpr) -> Self {
        let entries = (0..f.rows())
            .flat_map(|i| (0..f.cols()).map(move |j| Arc::new(f.entry(i, j).clone()) as Arc<dyn ScalarFunction>))
            .collect();
        Self { rows: f.rows(), cols: f.cols(), entries, label: f.to_string() }
    }

    /// `f^[1]` of a univariate `f`, as a bivariate function.
    pub fn divided_difference(f: &FunExpr, eps_dd: f64) -> Result<Self> {
        let label = format!("divdiff({f})");
        let dd = DividedDifferenceExpr::new(f.clone(), eps_dd)?;
        Ok(Self { rows: 1, cols: 1, entries: vec![Arc::new(dd)], label })
    }

    pub fn arity(&self) -> usize {
        self.entries[0].arity()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_scalar(&self) -> bool {
        self.rows == 1 && self.cols == 1
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn entries(&self) -> Vec<&dyn ScalarFunction> {
        self.entries.iter().map(|e| e.as_ref()).collect()
    }

    pub fn eval(&self, point: &[C]) -> Result<ComplexMatrix> {
        let mut out = ComplexMatrix::zeros(self.rows, self.cols);
        for (k, e) in self.entries.iter().enumerate() {
            out.set(k / self.cols, k % self.cols, e.eval(point)?);
        }
        Ok(out)
    }

    /// `|f(point)|`, or `‖F(point)‖₂` for a matrix-valued grid.
    pub fn norm_at(&self, point: &[C]) -> Result<f64> {
        if self.is_scalar() {
            return Ok(self.entries[0].eval(point)?.norm());
        }
        Ok(spectral_norm(&self.eval(point)?))
    }

    fn require_arity(&self, d: usize) -> Result<()> {
        if self.arity() != d {
            return Err(Error::Arity { expected: d, got: self.arity() });
        }
        Ok(())
    }
}

/// Sampled sup and where it was attained.
#[derive(Debug, Clone, PartialEq)]
pub struct SupSample {
    pub value: f64,
    pub location: Vec<C>,
}

/// Sample points per range used for a `d`-variable sup grid.
pub fn default_samples(d: usize) -> usize {
    match d {
        0 | 1 => 720,
        2 => 128,
        3 => 32,
        _ => 12,
    }
}

fn subsample(points: Vec<C>, max: usize) -> Vec<C> {
    if points.len() <= max {
        return points;
    }
    let step = points.len() as f64 / max as f64;
    (0..max).map(|i| points[(i as f64 * step) as usize]).collect()
}

/// One variable's search space: grid samples and a one-parameter boundary
/// curve for local refinement.
struct Axis<'a> {
    samples: Vec<C>,
    curve: Box<dyn Fn(f64) -> C + 'a>,
    /// Parameter values of `curve` and their points, scanned before refining.
    scan: Vec<(f64, C)>,
}

fn range_axis(nr: &NumericalRangeApprox, per_range: usize) -> Axis<'_> {
    Axis {
        samples: subsample(nr.sample_points(per_range), per_range),
        curve: Box::new(move |t| crate::fieldvals::boundary_point(nr.matrix(), t).1),
        scan: nr.angles.iter().copied().zip(nr.boundary.iter().copied()).collect(),
    }
}

fn circle_axis(contour: Contour, per_range: usize) -> Axis<'static> {
    let ts: Vec<f64> = (0..per_range).map(|k| TAU * k as f64 / per_range as f64).collect();
    Axis {
        samples: ts.iter().map(|&t| contour.point(t)).collect(),
        curve: Box::new(move |t| contour.point(t)),
        scan: (0..4 * per_range)
            .map(|k| {
                let t = TAU * k as f64 / (4 * per_range) as f64;
                (t, contour.point(t))
            })
            .collect(),
    }
}

/// Max of `‖F‖` over the tensor grid of axis samples, then two sweeps of
/// coordinate-wise boundary scans with golden-section refinement from the
/// best grid point.
fn sup_over_axes(f: &FunctionGrid, axes: &[Axis]) -> Result<SupSample> {
    let d = axes.len();
    f.require_arity(d)?;
    let total: usize = axes.iter().map(|a| a.samples.len()).product();
    if total == 0 {
        return Err(Error::InvalidParameter("empty sample set".into()));
    }
    let mut point = vec![C::new(0.0, 0.0); d];
    let mut best = SupSample { value: f64::NEG_INFINITY, location: point.clone() };
    for flat in 0..total {
        let mut rem = flat;
        for (v, axis) in axes.iter().enumerate() {
            point[v] = axis.samples[rem % axis.samples.len()];
            rem /= axis.samples.len();
        }
        let val = f.norm_at(&point)?;
        if !val.is_finite() {
            return Err(Error::EvalDomain { node: f.label().to_string() });
        }
        if val > best.value {
            best = SupSample { value: val, location: point.clone() };
        }
    }
    for _ in 0..2 {
        for (v, axis) in axes.iter().enumerate() {
            let at_point = |z: C| {
                let mut p = best.location.clone();
                p[v] = z;
                f.norm_at(&p).ok().filter(|x| x.is_finite()).unwrap_or(f64::NEG_INFINITY)
            };
            let ts: Vec<f64> = axis.scan.iter().map(|s| s.0).collect();
            let n = ts.len();
            if n < 2 {
                continue;
            }
            let (k, _) = axis
                .scan
                .iter()
                .enumerate()
                .map(|(k, &(_, z))| (k, at_point(z)))
                .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
            let lo = if k == 0 { ts[0] - (ts[1] - ts[0]) } else { ts[k - 1] };
            let hi = if k + 1 == n { ts[k] + (ts[k] - ts[k - 1]) } else { ts[k + 1] };
            let (t, val) = golden_section(lo, hi, |t| at_point((axis.curve)(t)));
            if val > best.value {
                best.location[v] = (axis.curve)(t);
                best.value = val;
            }
        }
    }
    Ok(best)
}

/// Sampled `sup ‖F‖` over `W(A₁) × ⋯ × W(A_d)`.
///
/// An analytic `F` attains its maximum norm on the product of the range
/// boundaries, so the grid uses boundary samples (plus chord points, which
/// matter when a range is a segment), refined along each boundary.
pub fn sup_on_range_product(f: &FunctionGrid, ranges: &[&NumericalRangeApprox], per_range: usize) -> Result<SupSample> {
    let axes: Vec<Axis> = ranges.iter().map(|nr| range_axis(nr, per_range)).collect();
    sup_over_axes(f, &axes)
}

/// Sampled `sup ‖F‖` over a product of closed curves (for analytic `F`, the
/// sup over the enclosed product domain).
pub fn sup_on_curves(f: &FunctionGrid, curves: &[Contour], per_curve: usize) -> Result<SupSample> {
    let axes: Vec<Axis> = curves.iter().map(|&c| circle_axis(c, per_curve)).collect();
    sup_over_axes(f, &axes)
}

/// Settings for one certification attempt; [`Level::refined`] doubles
/// sampling and quadrature.
#[derive(Debug, Clone, Copy)]
struct Level {
    angles: usize,
    samples: usize,
    quadrature: QuadratureSpec,
}

impl Level {
    fn base(cfg: &Config, d: usize, quadrature: QuadratureSpec) -> Self {
        Self { angles: cfg.cert_angles, samples: default_samples(d), quadrature }
    }

    fn refined(self) -> Self {
        let q = self.quadrature;
        Self {
            angles: 2 * self.angles,
            samples: 2 * self.samples,
            quadrature: QuadratureSpec { nodes_per_contour: 2 * q.nodes_per_contour, max_nodes: 2 * q.max_nodes, ..q },
        }
    }
}

fn with_refinement(cfg: &Config, base: Level, run: impl Fn(Level) -> Result<CertificateReport>) -> Result<CertificateReport> {
    let first = run(base)?;
    if first.pass {
        return Ok(first);
    }
    let second = run(base.refined())?;
    Ok(first.merge_refined(second, cfg.tol_cert))
}

fn metadata(f: &FunctionGrid, sizes: Vec<usize>, level: &Level, contours: Vec<Contour>) -> CertMetadata {
    CertMetadata {
        function: f.label().to_string(),
        sizes,
        samples_per_range: level.samples,
        angles: level.angles,
        quadrature: None,
        norm_method: None,
        contours,
        sup_location: Vec::new(),
        refined: false,
        accuracy_warnings: 0,
    }
}

/// `‖F(A)‖₂ ≤ (1+√2) ‖F‖_{W(A)}`; scalar `f` reports as `cp1`, matrix-valued
/// `F` as `cp-matrix`.
pub fn certify_univariate(f: &FunctionGrid, a: &ComplexMatrix, cfg: &Config) -> Result<CertificateReport> {
    f.require_arity(1)?;
    let id = if f.is_scalar() { InequalityId::Cp1 } else { InequalityId::CpMatrix };
    let (_, contour) = contour_for(a, cfg.n_angles, cfg.margin)?;
    with_refinement(cfg, Level::base(cfg, 1, cfg.quadrature), |level| {
        let value = eval_univariate_grid(&f.entries(), f.cols, a, &contour, &level.quadrature)?;
        let lhs = spectral_norm(&value.value);
        let nr = numrange(a, level.angles)?;
        let sup = sup_on_range_product(f, &[&nr], level.samples)?;
        let mut meta = metadata(f, vec![a.rows()], &level, vec![contour]);
        meta.quadrature = Some(value.meta);
        meta.sup_location = sup.location;
        let mut report = CertificateReport::new(id, lhs, sup.value, CP_CONSTANT, cfg.tol_cert, meta);
        if a.is_normal(1e-12) {
            report.note("normal matrix: constant 1", 1.0, cfg.tol_cert);
        }
        Ok(report)
    })
}

/// `‖F{A,B}‖₂ ≤ (1+√2)² ‖F‖_{W(A)×W(B)}`.
pub fn certify_bivariate(f: &FunctionGrid, a: &ComplexMatrix, b: &ComplexMatrix, cfg: &Config) -> Result<CertificateReport> {
    f.require_arity(2)?;
    let (_, ga) = contour_for(a, cfg.n_angles, cfg.margin)?;
    let (_, gb) = contour_for(b, cfg.n_angles, cfg.margin)?;
    with_refinement(cfg, Level::base(cfg, 2, cfg.quadrature), |level| {
        let op = eval_bivariate_grid(&f.entries(), f.cols, a, b, &ga, &gb, &level.quadrature)?
            .with_max_kron_dim(cfg.max_kron_dim);
        let (lhs, method) = op.spectral_norm()?;
        let (na, nb) = (numrange(a, level.angles)?, numrange(b, level.angles)?);
        let sup = sup_on_range_product(f, &[&na, &nb], level.samples)?;
        let mut meta = metadata(f, vec![a.rows(), b.rows()], &level, vec![ga, gb]);
        meta.quadrature = Some(op.meta);
        meta.norm_method = Some(method);
        meta.sup_location = sup.location;
        let mut report =
            CertificateReport::new(InequalityId::Bivariate, lhs, sup.value, CP_CONSTANT * CP_CONSTANT, cfg.tol_cert, meta);
        if a.is_normal(1e-12) && b.is_normal(1e-12) {
            report.note("both normal: constant 1", 1.0, cfg.tol_cert);
        }
        Ok(report)
    })
}

/// `‖f{A₁,…,A_d}‖₂ ≤ (1+√2)^d ‖f‖_{W(A₁)×⋯×W(A_d)}`. With `k` normal inputs
/// the reduced constant `(1+√2)^{d−k}` is recorded as informational.
pub fn certify_multivariate(f: &FunctionGrid, mats: &[ComplexMatrix], cfg: &Config) -> Result<CertificateReport> {
    let d = mats.len();
    f.require_arity(d)?;
    if !f.is_scalar() {
        return Err(Error::InvalidParameter("multivariate certification takes a scalar function".into()));
    }
    let contours: Vec<Contour> =
        mats.iter().map(|a| contour_for(a, cfg.n_angles, cfg.margin).map(|(_, g)| g)).collect::<Result<_>>()?;
    let q = if d >= 3 { cfg.quadrature_multi } else { cfg.quadrature };
    with_refinement(cfg, Level::base(cfg, d, q), |level| {
        let value = eval_multivariate(f.entries()[0], mats, &contours, &level.quadrature)?;
        let lhs = spectral_norm(&value.value);
        let ranges: Vec<NumericalRangeApprox> =
            mats.iter().map(|a| numrange(a, level.angles)).collect::<Result<_>>()?;
        let refs: Vec<&NumericalRangeApprox> = ranges.iter().collect();
        let sup = sup_on_range_product(f, &refs, level.samples)?;
        let mut meta = metadata(f, mats.iter().map(ComplexMatrix::rows).collect(), &level, contours.clone());
        meta.quadrature = Some(value.meta);
        meta.sup_location = sup.location;
        let constant = CP_CONSTANT.powi(d as i32);
        let mut report = CertificateReport::new(InequalityId::Multivariate, lhs, sup.value, constant, cfg.tol_cert, meta);
        let normal = mats.iter().filter(|a| a.is_normal(1e-12)).count();
        if normal > 0 {
            let reduced = CP_CONSTANT.powi((d - normal) as i32);
            report.note(&format!("{normal} normal inputs: constant (1+sqrt2)^{}", d - normal), reduced, cfg.tol_cert);
        }
        Ok(report)
    })
}

/// Radius of the quadrature circles for contractions.
pub const ANDO_RADIUS: f64 = 1.1;

/// `‖f{A,B}‖₂ ≤ sup_{𝔻×𝔻} |f|` for contractions, with the sup sampled on the
/// torus.
pub fn certify_ando(f: &FunctionGrid, a: &ComplexMatrix, b: &ComplexMatrix, cfg: &Config) -> Result<CertificateReport> {
    f.require_arity(2)?;
    for m in [a, b] {
        let norm = spectral_norm(m);
        if norm > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!("contraction required, got spectral norm {norm}")));
        }
    }
    let g = Contour::circle(C::new(0.0, 0.0), ANDO_RADIUS);
    let torus = Contour::circle(C::new(0.0, 0.0), 1.0);
    with_refinement(cfg, Level::base(cfg, 2, cfg.quadrature), |level| {
        let op = eval_bivariate_grid(&f.entries(), f.cols, a, b, &g, &g, &level.quadrature)?
            .with_max_kron_dim(cfg.max_kron_dim);
        let (lhs, method) = op.spectral_norm()?;
        let sup = sup_on_curves(f, &[torus, torus], level.samples)?;
        let mut meta = metadata(f, vec![a.rows(), b.rows()], &level, vec![g, g]);
        meta.quadrature = Some(op.meta);
        meta.norm_method = Some(method);
        meta.sup_location = sup.location;
        Ok(CertificateReport::new(InequalityId::Ando, lhs, sup.value, 1.0, cfg.tol_cert, meta))
    })
}

/// `‖Df{A}‖ ≤ (1+√2)² sup_{W(A)} |f′|`.
pub fn certify_frechet(f: &FunExpr, a: &ComplexMatrix, cfg: &Config) -> Result<CertificateReport> {
    let grid = FunctionGrid::scalar(f.clone());
    let base = Level::base(cfg, 1, cfg.quadrature);
    with_refinement(cfg, base, |level| {
        let local = Config { cert_angles: level.angles, quadrature: level.quadrature, ..*cfg };
        let r = frechet_norm_and_bound(f, a, &local)?;
        let (_, contour) = contour_for(a, cfg.n_angles, cfg.margin)?;
        let mut meta = metadata(&grid, vec![a.rows()], &level, vec![contour]);
        meta.function = format!("d/dx {}", f);
        meta.quadrature = Some(r.quadrature);
        meta.norm_method = Some(r.norm_method);
        meta.sup_location = vec![r.sup_location];
        meta.samples_per_range = level.angles;
        Ok(CertificateReport::new(
            InequalityId::Frechet,
            r.norm,
            r.sup_derivative,
            CP_CONSTANT * CP_CONSTANT,
            cfg.tol_cert,
            meta,
        ))
    })
}
