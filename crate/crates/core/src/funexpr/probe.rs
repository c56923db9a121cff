//! Heuristic analyticity guard: evaluates `f` on tensor grids over the
//! contours and on inward-scaled copies, rejecting blow-ups and arguments of
//! `log`/`sqrt` that touch or cross the principal branch cut, and checking
//! that the Cauchy formula along each variable reproduces `f` at the contour
//! center. A passing probe is evidence, not proof, that `f` is analytic on
//! the enclosed region.

use num_complex::Complex64;

use super::ScalarFunction;
use crate::fieldvals::Contour;

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeOptions {
    pub n_probe: usize,
    /// Largest admissible `|f|`.
    pub cap: f64,
    /// Minimum distance of a branch argument to `(−∞, 0]`.
    pub branch_tol: f64,
    /// Scale factors of the inward copies.
    pub shrink: [f64; 2],
    /// Nodes of the per-variable Cauchy consistency check.
    pub n_cauchy: usize,
    /// Relative tolerance of the Cauchy consistency check.
    pub cauchy_tol: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self { n_probe: 16, cap: 1e12, branch_tol: 1e-8, shrink: [2.0 / 3.0, 1.0 / 3.0], n_cauchy: 128, cauchy_tol: 1e-6 }
    }
}

pub fn analyticity_probe(f: &dyn ScalarFunction, contours: &[Contour], n_probe: usize) -> bool {
    analyticity_probe_with(f, contours, &ProbeOptions { n_probe, ..ProbeOptions::default() })
}

fn cut_distance(z: C) -> f64 {
    if z.re <= 0.0 { z.im.abs() } else { z.norm() }
}

fn crosses_cut(a: C, b: C) -> bool {
    if a.im * b.im >= 0.0 {
        return false;
    }
    let t = a.im / (a.im - b.im);
    a.re + t * (b.re - a.re) < 0.0
}

struct Sample {
    ok: bool,
    args: Vec<C>,
}

fn probe_point(f: &dyn ScalarFunction, point: &[C], opts: &ProbeOptions) -> Sample {
    let mut args = Vec::new();
    let ok = match f.eval_traced(point, &mut args) {
        Ok(v) => v.norm() <= opts.cap && args.iter().all(|&a| cut_distance(a) >= opts.branch_tol),
        Err(_) => false,
    };
    Sample { ok, args }
}

pub fn analyticity_probe_with(f: &dyn ScalarFunction, contours: &[Contour], opts: &ProbeOptions) -> bool {
    let d = f.arity();
    if contours.len() != d || opts.n_probe == 0 {
        return false;
    }
    let centers: Vec<C> = contours.iter().map(Contour::center).collect();
    if !probe_point(f, &centers, opts).ok {
        return false;
    }
    let n = opts.n_probe;
    let total = n.pow(d as u32);
    for scale in [1.0, opts.shrink[0], opts.shrink[1]] {
        let rings: Vec<Vec<C>> = contours
            .iter()
            .map(|c| {
                let c = c.scaled(scale);
                (0..n).map(|k| c.point(std::f64::consts::TAU * k as f64 / n as f64)).collect()
            })
            .collect();
        let mut samples = Vec::with_capacity(total);
        let mut point = vec![C::new(0.0, 0.0); d];
        for flat in 0..total {
            let mut rem = flat;
            for (v, ring) in rings.iter().enumerate() {
                point[v] = ring[rem % n];
                rem /= n;
            }
            let s = probe_point(f, &point, opts);
            if !s.ok {
                return false;
            }
            samples.push(s);
        }
        // neighbours along each variable, cyclically
        let mut stride = 1;
        for _ in 0..d {
            for flat in 0..total {
                let k = (flat / stride) % n;
                let next = flat - k * stride + ((k + 1) % n) * stride;
                let (a, b) = (&samples[flat].args, &samples[next].args);
                if a.len() == b.len() && a.iter().zip(b).any(|(&p, &q)| crosses_cut(p, q)) {
                    return false;
                }
            }
            stride *= n;
        }
    }
    cauchy_consistent(f, contours, opts)
}

/// With all other variables on probe rings, `(1/2πi)∮ f(σ)/(σ − c) dσ` over
/// contour `k` must equal `f` at its center `c`. A mismatch is retried with 4
/// and 16 times the nodes, since a singularity just outside the contour slows
/// the trapezoidal rule without making `f` non-analytic.
fn cauchy_consistent(f: &dyn ScalarFunction, contours: &[Contour], opts: &ProbeOptions) -> bool {
    let d = contours.len();
    let n = opts.n_probe;
    let others = n.pow(d as u32 - 1);
    for k in 0..d {
        let rules: Vec<(Vec<C>, Vec<C>)> = [1, 4, 16].iter().map(|m| contours[k].nodes(m * opts.n_cauchy)).collect();
        for scale in [1.0, opts.shrink[1]] {
            let rings: Vec<Vec<C>> = contours
                .iter()
                .map(|c| {
                    let c = c.scaled(scale);
                    (0..n).map(|t| c.point(std::f64::consts::TAU * (t as f64 + 0.5) / n as f64)).collect()
                })
                .collect();
            let mut point = vec![C::new(0.0, 0.0); d];
            for flat in 0..others {
                let mut rem = flat;
                for (v, ring) in rings.iter().enumerate() {
                    if v != k {
                        point[v] = ring[rem % n];
                        rem /= n;
                    }
                }
                let mut passed = false;
                for (nodes, weights) in &rules {
                    match cauchy_matches(f, &mut point, k, contours[k].center(), nodes, weights, opts.cauchy_tol) {
                        Some(true) => {
                            passed = true;
                            break;
                        }
                        Some(false) => {}
                        None => return false,
                    }
                }
                if !passed {
                    return false;
                }
            }
        }
    }
    true
}

/// `None` when `f` fails to evaluate.
fn cauchy_matches(
    f: &dyn ScalarFunction,
    point: &mut [C],
    k: usize,
    center: C,
    nodes: &[C],
    weights: &[C],
    tol: f64,
) -> Option<bool> {
    point[k] = center;
    let at_center = f.eval(point).ok()?;
    let mut integral = C::new(0.0, 0.0);
    let mut mass = 0.0;
    for (&s, &w) in nodes.iter().zip(weights) {
        point[k] = s;
        let term = w * f.eval(point).ok()? / (s - center);
        integral += term;
        mass += term.norm();
    }
    Some((integral - at_center).norm() <= tol * mass)
}
