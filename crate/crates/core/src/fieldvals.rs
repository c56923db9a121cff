//! Numerical range `W(A) = { v*Av : ‖v‖₂ = 1 }`: support-function sweep,
//! boundary points, membership tests, and enclosing quadrature contours.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, hermitian_top_eigenpair, rayleigh_quotient, ComplexMatrix};

/// Sampled support function and boundary of `W(A)`.
#[derive(Debug, Clone)]
pub struct NumericalRangeApprox {
    pub angles: Vec<f64>,
    /// `h(θ) = λ_max((e^{iθ}A + e^{−iθ}A*)/2)`
    pub support: Vec<f64>,
    /// `q(θ) = v*Av` for a unit top eigenvector `v` of the rotated Hermitian part.
    pub boundary: Vec<Complex64>,
    source: ComplexMatrix,
}

/// Support value and boundary point in direction `θ`.
pub fn boundary_point(a: &ComplexMatrix, theta: f64) -> (f64, Complex64) {
    let rotated = a.scale(Complex64::from_polar(1.0, theta));
    let (h, v) = hermitian_top_eigenpair(&hermitian_part(&rotated));
    (h, rayleigh_quotient(a, &v))
}

/// Support-function sweep over `n_angles` uniformly spaced directions.
pub fn numrange(a: &ComplexMatrix, n_angles: usize) -> Result<NumericalRangeApprox> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("numerical range needs a square matrix".into()));
    }
    if n_angles < 8 {
        return Err(Error::InvalidParameter(format!("n_angles must be at least 8, got {n_angles}")));
    }
    let angles: Vec<f64> = (0..n_angles).map(|k| TAU * k as f64 / n_angles as f64).collect();
    let (support, boundary) = angles.iter().map(|&t| boundary_point(a, t)).unzip();
    Ok(NumericalRangeApprox { angles, support, boundary, source: a.clone() })
}

/// True iff `Re(e^{iθ_k} z) ≤ h(θ_k) + slack` for every sampled direction.
pub fn contains(nr: &NumericalRangeApprox, z: Complex64, slack: f64) -> bool {
    nr.angles
        .iter()
        .zip(&nr.support)
        .all(|(&t, &h)| (Complex64::from_polar(1.0, t) * z).re <= h + slack)
}

impl NumericalRangeApprox {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn max_modulus(&self) -> f64 {
        self.boundary.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest distance between two sampled boundary points.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, p) in self.boundary.iter().enumerate() {
            for q in &self.boundary[i + 1..] {
                d = d.max((p - q).norm());
            }
        }
        d
    }

    /// Default contour margin `0.1 · (1 + diameter)`.
    pub fn default_margin(&self) -> f64 {
        0.1 * (1.0 + self.diameter())
    }

    /// Vertices of the outer polygon (intersection of the support halfplanes).
    pub fn outer_polygon(&self) -> Vec<Complex64> {
        let n = self.angles.len();
        (0..n)
            .map(|k| {
                let k1 = (k + 1) % n;
                let (s0, c0) = self.angles[k].sin_cos();
                let (s1, c1) = self.angles[k1].sin_cos();
                let (h0, h1) = (self.support[k], self.support[k1]);
                // x cosθ − y sinθ = h
                let det = -c0 * s1 + s0 * c1;
                let x = (-h0 * s1 + s0 * h1) / det;
                let y = (c0 * h1 - c1 * h0) / det;
                Complex64::new(x, y)
            })
            .collect()
    }

    /// Area of the outer polygon.
    pub fn outer_area(&self) -> f64 {
        polygon_area(&self.outer_polygon())
    }

    /// Area of the inner polygon spanned by the boundary points.
    pub fn inner_area(&self) -> f64 {
        polygon_area(&self.boundary)
    }

    /// Boundary points with near-duplicates removed, in sweep order.
    pub fn distinct_boundary(&self) -> Vec<Complex64> {
        let scale = 1.0 + self.max_modulus();
        let tol = 1e-12 * scale;
        let mut out: Vec<Complex64> = Vec::new();
        for &p in &self.boundary {
            if out.last().is_none_or(|q| (p - q).norm() > tol) {
                out.push(p);
            }
        }
        while out.len() > 1 && (out[0] - out[out.len() - 1]).norm() <= tol {
            out.pop();
        }
        out
    }

    /// Points of `W(A)`: the distinct boundary points plus points on the
    /// chords between consecutive ones (inside by convexity), about `target`
    /// in total. Chords matter when `W(A)` is a segment.
    pub fn sample_points(&self, target: usize) -> Vec<Complex64> {
        let pts = self.distinct_boundary();
        if pts.len() <= 1 {
            return pts;
        }
        let m = pts.len();
        let edges: Vec<(Complex64, Complex64)> = if m == 2 {
            vec![(pts[0], pts[1])]
        } else {
            (0..m).map(|k| (pts[k], pts[(k + 1) % m])).collect()
        };
        let perimeter: f64 = edges.iter().map(|(p, q)| (q - p).norm()).sum();
        let extra = target.saturating_sub(m) as f64;
        let mut out = Vec::with_capacity(target.max(m));
        for &(p, q) in &edges {
            out.push(p);
            let sub = if perimeter > 0.0 { (extra * (q - p).norm() / perimeter).round() as usize } else { 0 };
            for j in 1..=sub {
                out.push(p + (q - p) * (j as f64 / (sub + 1) as f64));
            }
        }
        if m == 2 {
            out.push(pts[1]);
        }
        out
    }

    /// Index of the boundary sample maximizing `objective`.
    pub fn argmax_boundary(&self, objective: impl Fn(Complex64) -> f64) -> (usize, f64) {
        self.boundary
            .iter()
            .enumerate()
            .map(|(k, &z)| (k, objective(z)))
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
    }

    /// Golden-section refinement of `objective(q(θ))` on the bracket around
    /// sample `k` (one angular step on either side).
    pub fn refine_around(&self, k: usize, objective: impl Fn(Complex64) -> f64) -> (f64, Complex64, f64) {
        let step = TAU / self.angles.len() as f64;
        let theta = self.angles[k];
        golden_max(&self.source, theta - step, theta + step, objective)
    }

    /// Sample points of `W(A)`: [`sample_points`](Self::sample_points) plus
    /// copies contracted halfway and fully toward the mean boundary point.
    pub fn region_samples(&self, target: usize) -> Vec<Complex64> {
        let outer = self.sample_points(target);
        let mean = self.boundary.iter().sum::<Complex64>() / self.boundary.len() as f64;
        let mut pts = outer.clone();
        pts.extend(outer.iter().step_by(2).map(|&p| mean + (p - mean) * 0.5));
        pts.push(mean);
        pts
    }

    /// Sampled `sup |g|` over `W(A)`: the maximum over
    /// [`region_samples`](Self::region_samples), then a golden-section
    /// refinement along the boundary around the best boundary sample.
    /// Returns the value and where it was attained.
    pub fn sampled_sup(&self, target: usize, g: impl Fn(Complex64) -> Result<f64>) -> Result<(f64, Complex64)> {
        let mut best = (f64::NEG_INFINITY, self.boundary[0]);
        for z in self.region_samples(target) {
            let v = g(z)?;
            if v > best.0 {
                best = (v, z);
            }
        }
        let safe = |z: Complex64| g(z).ok().filter(|v| v.is_finite()).unwrap_or(f64::NEG_INFINITY);
        let (k, _) = self.argmax_boundary(safe);
        let (_, q, v) = self.refine_around(k, safe);
        if v > best.0 {
            best = (v, q);
        }
        Ok(best)
    }

    /// CSV rows `theta,support,re,im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta,support,re,im\n");
        for k in 0..self.angles.len() {
            let q = self.boundary[k];
            let _ = writeln!(s, "{:?},{:?},{:?},{:?}", self.angles[k], self.support[k], q.re, q.im);
        }
        s
    }
}

fn polygon_area(pts: &[Complex64]) -> f64 {
    let n = pts.len();
    if n < 3 {
        return 0.0;
    }
    let twice: f64 = (0..n)
        .map(|k| {
            let (p, q) = (pts[k], pts[(k + 1) % n]);
            p.re * q.im - q.re * p.im
        })
        .sum();
    0.5 * twice.abs()
}

/// Maximizes `objective(q(θ))` over `[lo, hi]` by golden-section search.
/// Returns `(θ, q(θ), value)`; the bracket endpoints are always candidates.
pub fn golden_max(
    a: &ComplexMatrix,
    lo: f64,
    hi: f64,
    objective: impl Fn(Complex64) -> f64,
) -> (f64, Complex64, f64) {
    let (t, v) = golden_section(lo, hi, |t| objective(boundary_point(a, t).1));
    (t, boundary_point(a, t).1, v)
}

/// Golden-section maximization of `g` on `[lo, hi]`, endpoints included.
/// Returns `(t, g(t))`.
pub fn golden_section(lo: f64, hi: f64, g: impl Fn(f64) -> f64) -> (f64, f64) {
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let eval = |t: f64| (t, g(t));
    let mut best = eval(lo);
    let end = eval(hi);
    if end.1 > best.1 {
        best = end;
    }
    let (mut a0, mut b0) = (lo, hi);
    let mut c = eval(b0 - invphi * (b0 - a0));
    let mut d = eval(a0 + invphi * (b0 - a0));
    for _ in 0..48 {
        if c.1 >= d.1 {
            b0 = d.0;
            d = c;
            c = eval(b0 - invphi * (b0 - a0));
        } else {
            a0 = c.0;
            c = d;
            d = eval(a0 + invphi * (b0 - a0));
        }
        if (b0 - a0).abs() < 1e-13 {
            break;
        }
    }
    for cand in [c, d] {
        if cand.1 > best.1 {
            best = cand;
        }
    }
    best
}

/// Positively oriented closed quadrature curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Contour {
    Circle { center: Complex64, radius: f64 },
    Ellipse { center: Complex64, semi_major: f64, semi_minor: f64, rotation: f64 },
}

impl Contour {
    pub fn circle(center: Complex64, radius: f64) -> Self {
        Contour::Circle { center, radius }
    }

    pub fn center(&self) -> Complex64 {
        match *self {
            Contour::Circle { center, .. } | Contour::Ellipse { center, .. } => center,
        }
    }

    /// `γ(t)`, `t ∈ [0, 2π)`.
    pub fn point(&self, t: f64) -> Complex64 {
        match *self {
            Contour::Circle { center, radius } => center + Complex64::from_polar(radius, t),
            Contour::Ellipse { center, semi_major, semi_minor, rotation } => {
                center
                    + Complex64::from_polar(1.0, rotation)
                        * Complex64::new(semi_major * t.cos(), semi_minor * t.sin())
            }
        }
    }

    /// `γ′(t)`
    pub fn derivative(&self, t: f64) -> Complex64 {
        match *self {
            Contour::Circle { radius, .. } => Complex64::new(0.0, 1.0) * Complex64::from_polar(radius, t),
            Contour::Ellipse { semi_major, semi_minor, rotation, .. } => {
                Complex64::from_polar(1.0, rotation)
                    * Complex64::new(-semi_major * t.sin(), semi_minor * t.cos())
            }
        }
    }

    /// Trapezoidal nodes `σ_k` and weights `w_k` with
    /// `Σ w_k g(σ_k) ≈ (1/2πi) ∮ g(σ) dσ`.
    pub fn nodes(&self, n: usize) -> (Vec<Complex64>, Vec<Complex64>) {
        self.nodes_offset(n, 0.0)
    }

    /// Nodes at `t_k = 2π(k + offset)/n`.
    pub fn nodes_offset(&self, n: usize, offset: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        let i_n = Complex64::new(0.0, n as f64);
        (0..n)
            .map(|k| {
                let t = TAU * (k as f64 + offset) / n as f64;
                (self.point(t), self.derivative(t) / i_n)
            })
            .unzip()
    }

    /// The same curve scaled by `s` about its center.
    pub fn scaled(&self, s: f64) -> Self {
        match *self {
            Contour::Circle { center, radius } => Contour::Circle { center, radius: radius * s },
            Contour::Ellipse { center, semi_major, semi_minor, rotation } => Contour::Ellipse {
                center,
                semi_major: semi_major * s,
                semi_minor: semi_minor * s,
                rotation,
            },
        }
    }

    /// The same curve grown by `delta` in every semi-axis.
    pub fn inflated(&self, delta: f64) -> Self {
        match *self {
            Contour::Circle { center, radius } => Contour::Circle { center, radius: radius + delta },
            Contour::Ellipse { center, semi_major, semi_minor, rotation } => Contour::Ellipse {
                center,
                semi_major: semi_major + delta,
                semi_minor: semi_minor + delta,
                rotation,
            },
        }
    }

    fn local(&self, z: Complex64) -> (f64, f64, f64, f64) {
        match *self {
            Contour::Circle { center, radius } => {
                let w = z - center;
                (w.re, w.im, radius, radius)
            }
            Contour::Ellipse { center, semi_major, semi_minor, rotation } => {
                let w = Complex64::from_polar(1.0, -rotation) * (z - center);
                (w.re, w.im, semi_major, semi_minor)
            }
        }
    }

    /// Strictly inside the curve.
    pub fn encloses(&self, z: Complex64) -> bool {
        let (u, w, a, b) = self.local(z);
        (u / a).powi(2) + (w / b).powi(2) < 1.0
    }

    /// Euclidean distance from `z` to the curve.
    pub fn distance_to_curve(&self, z: Complex64) -> f64 {
        match *self {
            Contour::Circle { center, radius } => ((z - center).norm() - radius).abs(),
            Contour::Ellipse { .. } => {
                let (u, w, a, b) = self.local(z);
                if a >= b {
                    ellipse_distance(a, b, u.abs(), w.abs())
                } else {
                    ellipse_distance(b, a, w.abs(), u.abs())
                }
            }
        }
    }

    /// Smallest distance of the points to the curve, negative if any point
    /// lies outside or on it.
    pub fn clearance(&self, points: &[Complex64]) -> f64 {
        points
            .iter()
            .map(|&p| {
                let d = self.distance_to_curve(p);
                if self.encloses(p) { d } else { -d }
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Minimum of `Re σ` over the curve.
    pub fn min_re(&self) -> f64 {
        match *self {
            Contour::Circle { center, radius } => center.re - radius,
            Contour::Ellipse { center, semi_major, semi_minor, rotation } => {
                let (s, c) = rotation.sin_cos();
                center.re - (semi_major * c).hypot(semi_minor * s)
            }
        }
    }

    /// Largest `|σ − center|` over the curve.
    pub fn outer_radius(&self) -> f64 {
        match *self {
            Contour::Circle { radius, .. } => radius,
            Contour::Ellipse { semi_major, semi_minor, .. } => semi_major.max(semi_minor),
        }
    }
}

/// Distance from `(y0, y1)`, both nonnegative, to the ellipse with semi-axes
/// `e0 ≥ e1 > 0`, by bisection on the Lagrange multiplier.
fn ellipse_distance(e0: f64, e1: f64, y0: f64, y1: f64) -> f64 {
    if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g == 0.0 {
                return 0.0;
            }
            let r0 = (e0 / e1).powi(2);
            let s = ellipse_root(r0, z0, z1, g);
            let x0 = r0 * y0 / (s + r0);
            let x1 = y1 / (s + 1.0);
            (x0 - y0).hypot(x1 - y1)
        } else {
            (y1 - e1).abs()
        }
    } else {
        let numer = e0 * y0;
        let denom = e0 * e0 - e1 * e1;
        if numer < denom {
            let xde = numer / denom;
            let x0 = e0 * xde;
            let x1 = e1 * (1.0 - xde * xde).max(0.0).sqrt();
            (x0 - y0).hypot(x1)
        } else {
            (y0 - e0).abs()
        }
    }
}

fn ellipse_root(r0: f64, z0: f64, z1: f64, g: f64) -> f64 {
    let n0 = r0 * z0;
    let mut s0 = z1 - 1.0;
    let mut s1 = if g < 0.0 { 0.0 } else { n0.hypot(z1) - 1.0 };
    let mut s = 0.0;
    for _ in 0..1100 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let ratio0 = n0 / (s + r0);
        let ratio1 = z1 / (s + 1.0);
        let gs = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
        if gs > 0.0 {
            s0 = s;
        } else if gs < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}

/// Ellipse (or circle) around the sampled range with clearance at least
/// `margin` from every boundary sample.
///
/// Center at the mean of the boundary points, axes along the principal axes of
/// the point cloud. The first pass scales the max-projection semi-axes until
/// every point is enclosed, the second inflates by `margin` and keeps growing
/// until the clearance check passes. A point range gives a circle of radius
/// `margin`; a segment gets its semi-minor axis floored at `margin`.
pub fn enclosing_contour(nr: &NumericalRangeApprox, margin: f64) -> Result<Contour> {
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(Error::InvalidParameter(format!("margin must be positive, got {margin}")));
    }
    let pts = &nr.boundary;
    let n = pts.len() as f64;
    let center = pts.iter().sum::<Complex64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in pts {
        let d = p - center;
        sxx += d.re * d.re;
        syy += d.im * d.im;
        sxy += d.re * d.im;
    }
    let rotation = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let rot = Complex64::from_polar(1.0, -rotation);
    let local: Vec<(f64, f64)> = pts
        .iter()
        .map(|p| {
            let w = rot * (p - center);
            (w.re, w.im)
        })
        .collect();
    let a0 = local.iter().map(|(u, _)| u.abs()).fold(0.0, f64::max);
    let b0 = local.iter().map(|(_, w)| w.abs()).fold(0.0, f64::max);
    let tiny = 1e-12 * (1.0 + nr.max_modulus());

    if a0 <= tiny && b0 <= tiny {
        return Ok(Contour::circle(center, margin));
    }
    let (a1, b1) = if b0 <= tiny {
        (a0, 0.0)
    } else {
        let s = local
            .iter()
            .map(|(u, w)| ((u / a0).powi(2) + (w / b0).powi(2)).sqrt())
            .fold(1.0, f64::max);
        (s * a0, s * b0)
    };
    let mut semi_major = a1 + margin;
    let mut semi_minor = (b1 + margin).max(margin);
    let target = margin * (1.0 - 1e-12);
    let mut contour = make_contour(center, semi_major, semi_minor, rotation);
    for _ in 0..200 {
        let clr = contour.clearance(pts);
        if clr >= target {
            return Ok(contour);
        }
        let grow = (margin - clr).max(1e-3 * margin);
        semi_major += grow;
        semi_minor += grow;
        contour = make_contour(center, semi_major, semi_minor, rotation);
    }
    Ok(contour)
}

fn make_contour(center: Complex64, a: f64, b: f64, rotation: f64) -> Contour {
    if (a - b).abs() <= 1e-9 * a.max(b) {
        Contour::circle(center, a.max(b))
    } else if a >= b {
        Contour::Ellipse { center, semi_major: a, semi_minor: b, rotation }
    } else {
        Contour::Ellipse { center, semi_major: b, semi_minor: a, rotation: rotation + PI / 2.0 }
    }
}

/// Contour around `W(A)` with the given margin, or the default
/// `0.1 · (1 + diameter)` when `margin` is `None`.
pub fn contour_for(a: &ComplexMatrix, n_angles: usize, margin: Option<f64>) -> Result<(NumericalRangeApprox, Contour)> {
    let nr = numrange(a, n_angles)?;
    let m = margin.unwrap_or_else(|| nr.default_margin());
    let c = enclosing_contour(&nr, m)?;
    Ok((nr, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eig, spectral_norm};
    use crate::random;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn jordan2() -> ComplexMatrix {
        random::jordan_block(2, c(0.0, 0.0))
    }

    #[test]
    fn jordan_block_range_is_half_disc() {
        let nr = numrange(&jordan2(), 360).unwrap();
        assert!((nr.max_modulus() - 0.5).abs() < 1e-8);
        assert!(nr.support.iter().all(|h| (h - 0.5).abs() < 1e-8));
    }

    #[test]
    fn diagonal_range_is_segment() {
        let a = ComplexMatrix::from_diagonal(&[c(0.0, 0.0), c(1.0, 0.0)]);
        let nr = numrange(&a, 64).unwrap();
        assert!(nr.boundary.iter().all(|z| z.im.abs() < 1e-14 && z.re > -1e-14 && z.re < 1.0 + 1e-14));
        let re_min = nr.boundary.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        let re_max = nr.boundary.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        assert!(re_min.abs() < 1e-14 && (re_max - 1.0).abs() < 1e-14);
        let pts = nr.sample_points(100);
        assert!(pts.len() >= 90);
        assert!(pts.iter().any(|z| (z.re - 0.5).abs() < 0.02));
    }

    #[test]
    fn hermitian_support_is_extreme_eigenvalue() {
        let mut rng = random::rng(8);
        let a = random::hermitian(&mut rng, 5);
        let nr = numrange(&a, 8).unwrap();
        let mut ev: Vec<f64> = eig(&a, false).unwrap().values.iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        assert!((nr.support[0] - ev[4]).abs() < 1e-12);
        assert!((nr.support[4] + ev[0]).abs() < 1e-12);
        assert!(nr.boundary.iter().all(|z| z.im.abs() < 1e-12));
    }

    #[test]
    fn rejects_too_few_angles() {
        assert!(numrange(&jordan2(), 7).is_err());
    }

    #[test]
    fn contains_examples() {
        let mut rng = random::rng(4);
        let a = random::ginibre(&mut rng, 6);
        let nr = numrange(&a, 360).unwrap();
        let mean = a.trace() / 6.0;
        assert!(contains(&nr, mean, 1e-14));
        for _ in 0..20 {
            let v = random::gaussian(&mut rng, 6, 1);
            let v = v.scale_real(1.0 / v.frobenius_norm());
            assert!(contains(&nr, rayleigh_quotient(&a, &v), 1e-12));
        }
        let j = numrange(&jordan2(), 360).unwrap();
        assert!(!contains(&j, c(0.6, 0.0), 0.0));
        assert!(contains(&j, c(0.49, 0.0), 0.0));
    }

    #[test]
    fn jordan_contour_is_circle() {
        let nr = numrange(&jordan2(), 360).unwrap();
        let contour = enclosing_contour(&nr, 0.1).unwrap();
        match contour {
            Contour::Circle { center, radius } => {
                assert!(center.norm() < 1e-12);
                assert!((0.6..=0.65).contains(&radius), "radius {radius}");
            }
            other => panic!("expected circle, got {other:?}"),
        }
        assert!(contour.clearance(&nr.boundary) >= 0.1 - 1e-12);
    }

    #[test]
    fn segment_contour_has_clearance() {
        let a = ComplexMatrix::from_diagonal(&[c(0.0, 0.0), c(1.0, 0.0)]);
        let nr = numrange(&a, 360).unwrap();
        let contour = enclosing_contour(&nr, 0.1).unwrap();
        assert!(matches!(contour, Contour::Ellipse { .. }));
        // pointwise distance oracle: brute-force distance to a dense polyline
        let poly: Vec<Complex64> = (0..20000).map(|k| contour.point(TAU * k as f64 / 20000.0)).collect();
        for x in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let z = c(x, 0.0);
            assert!(contour.encloses(z));
            let d = poly.iter().map(|p| (p - z).norm()).fold(f64::INFINITY, f64::min);
            assert!(d >= 0.1 - 1e-6, "clearance {d} at {x}");
        }
    }

    #[test]
    fn scalar_matrix_gives_margin_circle() {
        let lambda = c(1.0, -2.0);
        let a = ComplexMatrix::identity(3).scale(lambda);
        let nr = numrange(&a, 64).unwrap();
        let contour = enclosing_contour(&nr, 0.25).unwrap();
        assert_eq!(contour, Contour::circle(contour.center(), 0.25));
        assert!((contour.center() - lambda).norm() < 1e-14);
    }

    #[test]
    fn trapezoid_weights_integrate_reciprocal() {
        // (1/2πi) ∮ dσ/(σ − z) = 1 inside, 0 outside
        let contour = Contour::Ellipse { center: c(0.3, -0.1), semi_major: 2.0, semi_minor: 0.7, rotation: 0.4 };
        let (nodes, weights) = contour.nodes(256);
        let inside: Complex64 = nodes.iter().zip(&weights).map(|(s, w)| w / (s - c(0.5, 0.0))).sum();
        let outside: Complex64 = nodes.iter().zip(&weights).map(|(s, w)| w / (s - c(5.0, 0.0))).sum();
        assert!((inside - 1.0).norm() < 1e-12);
        assert!(outside.norm() < 1e-12);
    }

    #[test]
    fn ellipse_distance_matches_brute_force() {
        let contour = Contour::Ellipse { center: c(0.0, 0.0), semi_major: 2.0, semi_minor: 0.5, rotation: 0.3 };
        let poly: Vec<Complex64> = (0..200000).map(|k| contour.point(TAU * k as f64 / 200000.0)).collect();
        for z in [c(0.1, 0.1), c(1.5, 0.2), c(-3.0, 1.0), c(0.0, 0.0), c(1.9, 0.0)] {
            let brute = poly.iter().map(|p| (p - z).norm()).fold(f64::INFINITY, f64::min);
            assert!((contour.distance_to_curve(z) - brute).abs() < 1e-4, "{z}");
        }
    }

    #[test]
    fn csv_export_has_header_and_rows() {
        let nr = numrange(&jordan2(), 8).unwrap();
        let csv = nr.to_csv();
        assert!(csv.starts_with("theta,support,re,im\n"));
        assert_eq!(csv.lines().count(), 9);
    }

    #[test]
    fn contour_json_shape() {
        let j = serde_json::to_string(&Contour::circle(c(1.0, 0.0), 0.5)).unwrap();
        assert_eq!(j, r#"{"kind":"circle","center":[1.0,0.0],"radius":0.5}"#);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn boundary_consistent_with_support(seed in any::<u64>(), n in 2usize..7) {
            let mut rng = random::rng(seed);
            let a = random::ginibre(&mut rng, n);
            let nr = numrange(&a, 64).unwrap();
            let tol = 1e-10 * (1.0 + spectral_norm(&a));
            for &q in &nr.boundary {
                prop_assert!(contains(&nr, q, tol));
            }
        }

        #[test]
        fn spectrum_is_contained(seed in any::<u64>(), n in 2usize..7) {
            let mut rng = random::rng(seed);
            let a = random::nonnormal_triangular(&mut rng, n, 2.0);
            let nr = numrange(&a, 90).unwrap();
            let slack = 1e-8 * spectral_norm(&a);
            for z in eig(&a, false).unwrap().values {
                prop_assert!(contains(&nr, z, slack));
            }
        }

        #[test]
        fn normal_eigenvalues_are_contained(seed in any::<u64>(), n in 2usize..7) {
            let mut rng = random::rng(seed);
            let a = random::normal(&mut rng, n);
            let nr = numrange(&a, 90).unwrap();
            for z in eig(&a, false).unwrap().values {
                prop_assert!(contains(&nr, z, 1e-10));
            }
        }

        #[test]
        fn refinement_is_monotone(seed in any::<u64>(), n in 2usize..6) {
            let mut rng = random::rng(seed);
            let a = random::ginibre(&mut rng, n);
            let coarse = numrange(&a, 45).unwrap();
            let fine = numrange(&a, 90).unwrap();
            let hmax = |nr: &NumericalRangeApprox| nr.support.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(hmax(&fine) >= hmax(&coarse) - 1e-12);
            prop_assert!(fine.outer_area() <= coarse.outer_area() * (1.0 + 1e-12) + 1e-14);
        }

        #[test]
        fn affine_map_moves_boundary(seed in any::<u64>(), alpha in 0.1f64..3.0, bre in -2.0f64..2.0, bim in -2.0f64..2.0) {
            let mut rng = random::rng(seed);
            let a = random::ginibre(&mut rng, 4);
            let beta = c(bre, bim);
            let b = &a.scale_real(alpha) + &ComplexMatrix::identity(4).scale(beta);
            let na = numrange(&a, 36).unwrap();
            let nb = numrange(&b, 36).unwrap();
            for (p, q) in na.boundary.iter().zip(&nb.boundary) {
                prop_assert!((p * alpha + beta - q).norm() < 1e-10 * (1.0 + q.norm()));
            }
        }

        #[test]
        fn enclosing_contour_clears_boundary(seed in any::<u64>(), n in 1usize..7, margin in 0.01f64..1.0) {
            let mut rng = random::rng(seed);
            let a = random::ginibre(&mut rng, n);
            let nr = numrange(&a, 120).unwrap();
            let contour = enclosing_contour(&nr, margin).unwrap();
            prop_assert!(contour.clearance(&nr.boundary) >= margin * (1.0 - 1e-9));
        }
    }
}
