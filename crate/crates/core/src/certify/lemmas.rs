//! The Cauchy dual `G(z) = (1/2πi) ∮ F*(σ) dσ/(σ−z)` of a matrix-valued
//! function and numerical checks of `‖G‖_Ω ≤ ‖F‖_Ω` and
//! `‖F(A) + G(A)*‖₂ ≤ 2‖F‖_Ω`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use super::{sup_on_curves, CertMetadata, CertificateReport, FunctionGrid, InequalityId};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::fieldvals::{numrange, Contour};
use crate::linalg::{spectral_norm, ComplexMatrix};
use crate::matfun::{adaptive, eval_univariate_grid, frob_distance, QuadratureMeta, ResolventSet};

type C = Complex64;

const MIN_NODES: usize = 256;
const MAX_NODES: usize = 16384;

/// Interior sampling for the sup of `‖G‖`: scale factors about the contour
/// center and angles per scaled curve.
const INTERIOR_SCALES: [f64; 4] = [0.0, 0.3, 0.6, 0.85];
const INTERIOR_ANGLES: usize = 48;

#[derive(Debug, Clone, Serialize)]
pub struct CauchyDual {
    /// `G(z)`, of shape `cols × rows` of `F`.
    pub value: ComplexMatrix,
    pub nodes: usize,
    /// Distance from `z` to the contour.
    pub distance: f64,
    /// True when `z` is closer to the contour than ten node spacings at the
    /// node cap.
    pub accuracy_warning: bool,
}

fn perimeter(gamma: &Contour) -> f64 {
    let (_, weights) = gamma.nodes(1024);
    TAU * weights.iter().map(|w| w.norm()).sum::<f64>()
}

/// `G(z)` by the trapezoidal rule with at least ten nodes per distance from
/// `z` to the contour.
pub fn cauchy_dual(f: &FunctionGrid, gamma: &Contour, z: C) -> Result<CauchyDual> {
    f.require_arity(1)?;
    let distance = gamma.distance_to_curve(z);
    if !gamma.encloses(z) || distance == 0.0 {
        return Err(Error::InvalidParameter(format!("point {z} is not strictly inside the contour")));
    }
    let wanted = (10.0 * perimeter(gamma) / distance).ceil() as usize;
    let nodes = wanted.clamp(MIN_NODES, MAX_NODES).next_power_of_two().min(MAX_NODES);
    let (sigma, weights) = gamma.nodes(nodes);
    let (rows, cols) = f.shape();
    let mut value = ComplexMatrix::zeros(cols, rows);
    for (&s, &w) in sigma.iter().zip(&weights) {
        let fs = f.eval(&[s])?;
        value.axpy(w / (s - z), &fs.adjoint());
    }
    Ok(CauchyDual { value, nodes, distance, accuracy_warning: wanted > MAX_NODES })
}

/// `G(A) = (1/2πi) ∮ F(σ)* ⊗ (σI − A)⁻¹ dσ`: block `(i, j)` is
/// `Σ_k w_k conj(f_ji(σ_k)) R_k`.
fn dual_of_matrix(
    f: &FunctionGrid,
    a: &ComplexMatrix,
    gamma: &Contour,
    cfg: &Config,
) -> Result<(ComplexMatrix, QuadratureMeta)> {
    let q = &cfg.quadrature;
    q.validate()?;
    let (rows, cols) = f.shape();
    let n = a.rows();
    let mut sets = [ResolventSet::new(a, *gamma, q.nodes_per_contour)?];
    let entries = f.entries();
    let compute = |sets: &[ResolventSet]| -> Result<(ComplexMatrix, f64)> {
        let set = &sets[0];
        let mut out = ComplexMatrix::zeros(cols * n, rows * n);
        let mut scale = 0.0;
        for (k, e) in entries.iter().enumerate() {
            let (j, i) = (k / cols, k % cols);
            let mut acc = ComplexMatrix::zeros(n, n);
            for m in 0..set.len() {
                let coef = set.weights[m] * e.eval(&[set.nodes[m]])?.conj();
                scale += coef.norm() * set.norms[m];
                acc.axpy(coef, &set.resolvents[m]);
            }
            out.set_block(i * n, j * n, &acc);
        }
        Ok((out, scale))
    };
    adaptive(&mut sets, &[a], q, compute, frob_distance)
}

fn interior_points(gamma: &Contour) -> Vec<C> {
    let center = gamma.center();
    let mut points = Vec::new();
    for &s in &INTERIOR_SCALES {
        if s == 0.0 {
            points.push(center);
            continue;
        }
        for k in 0..INTERIOR_ANGLES {
            let t = TAU * k as f64 / INTERIOR_ANGLES as f64;
            points.push(center + (gamma.point(t) - center) * s);
        }
    }
    points
}

/// Checks `‖G‖_Ω ≤ ‖F‖_Ω` (constant 1) and `‖F(A) + G(A)*‖₂ ≤ 2‖F‖_Ω`
/// (constant 2) with `Ω` the interior of `gamma`. Both right-hand sides are
/// the sampled sup of `‖F‖₂` on `gamma`.
pub fn lemma_harness(
    f: &FunctionGrid,
    a: &ComplexMatrix,
    gamma: &Contour,
    cfg: &Config,
) -> Result<(CertificateReport, CertificateReport)> {
    f.require_arity(1)?;
    let nr = numrange(a, cfg.n_angles)?;
    if gamma.clearance(&nr.outer_polygon()) <= 0.0 {
        return Err(Error::InvalidParameter("numerical range is not strictly inside the contour".into()));
    }
    let samples = super::default_samples(1);
    let sup = sup_on_curves(f, &[*gamma], samples)?;
    let base_meta = CertMetadata {
        function: f.label().to_string(),
        sizes: vec![a.rows()],
        samples_per_range: samples,
        angles: INTERIOR_ANGLES,
        quadrature: None,
        norm_method: None,
        contours: vec![*gamma],
        sup_location: sup.location.clone(),
        refined: false,
        accuracy_warnings: 0,
    };

    let mut g_sup = 0.0f64;
    let mut warnings = 0;
    for z in interior_points(gamma) {
        let dual = cauchy_dual(f, gamma, z)?;
        warnings += dual.accuracy_warning as usize;
        g_sup = g_sup.max(spectral_norm(&dual.value));
    }
    let mut meta1 = base_meta.clone();
    meta1.accuracy_warnings = warnings;
    let lemma1 = CertificateReport::new(InequalityId::Lemma1, g_sup, sup.value, 1.0, cfg.tol_cert, meta1);

    let fa = eval_univariate_grid(&f.entries(), f.shape().1, a, gamma, &cfg.quadrature)?;
    let (ga, meta) = dual_of_matrix(f, a, gamma, cfg)?;
    let s = &fa.value + &ga.adjoint();
    let mut meta2 = base_meta;
    meta2.quadrature = Some(if meta.nodes_used >= fa.meta.nodes_used { meta } else { fa.meta });
    let lemma2 = CertificateReport::new(InequalityId::Lemma2, spectral_norm(&s), sup.value, 2.0, cfg.tol_cert, meta2);
    Ok((lemma1, lemma2))
}
