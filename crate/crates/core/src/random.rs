//! Seeded random matrix generators shared by the ensembles, the search
//! harness and the tests.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{orthonormalize, ComplexMatrix};

pub type MatrixRng = ChaCha8Rng;

pub fn rng(seed: u64) -> MatrixRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian with `E|z|² = 1`.
pub fn complex_normal(rng: &mut MatrixRng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian(rng: &mut MatrixRng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Gaussian matrix scaled by `1/√n`, so `‖A‖₂` is of order 2.
pub fn ginibre(rng: &mut MatrixRng, n: usize) -> ComplexMatrix {
    gaussian(rng, n, n).scale_real(1.0 / (n as f64).sqrt())
}

pub fn unitary(rng: &mut MatrixRng, n: usize) -> ComplexMatrix {
    orthonormalize(&gaussian(rng, n, n))
}

/// `U diag(λ) U*` for a random unitary `U`.
pub fn normal_with_spectrum(rng: &mut MatrixRng, spectrum: &[Complex64]) -> ComplexMatrix {
    let u = unitary(rng, spectrum.len());
    &(&u * &ComplexMatrix::from_diagonal(spectrum)) * &u.adjoint()
}

pub fn normal(rng: &mut MatrixRng, n: usize) -> ComplexMatrix {
    let spectrum: Vec<Complex64> = (0..n).map(|_| complex_normal(rng)).collect();
    normal_with_spectrum(rng, &spectrum)
}

pub fn hermitian(rng: &mut MatrixRng, n: usize) -> ComplexMatrix {
    let g = ginibre(rng, n);
    (&g + &g.adjoint()).scale_real(0.5)
}

/// Hermitian positive definite with eigenvalues uniform in `[lo, hi]`.
pub fn hpd(rng: &mut MatrixRng, n: usize, lo: f64, hi: f64) -> ComplexMatrix {
    let spectrum: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.random_range(lo..hi), 0.0)).collect();
    normal_with_spectrum(rng, &spectrum)
}

/// Random upper-triangular matrix with unit-scale diagonal and strictly
/// upper part scaled by `strength` (strongly non-normal for large strength).
pub fn nonnormal_triangular(rng: &mut MatrixRng, n: usize, strength: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |i, j| {
        if i > j {
            Complex64::new(0.0, 0.0)
        } else if i == j {
            complex_normal(rng)
        } else {
            complex_normal(rng) * strength
        }
    })
}

/// `n×n` nilpotent Jordan block (ones on the superdiagonal).
pub fn jordan_block(n: usize, lambda: Complex64) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            lambda
        } else if j == i + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `S diag(λ) S⁻¹` with a random `S` whose condition number is roughly
/// bounded by `kappa`.
pub fn diagonalizable(rng: &mut MatrixRng, n: usize, kappa: f64) -> ComplexMatrix {
    let u = unitary(rng, n);
    let v = unitary(rng, n);
    let sv: Vec<Complex64> = (0..n)
        .map(|i| {
            let t = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
            Complex64::new(kappa.powf(-t), 0.0)
        })
        .collect();
    let s = &(&u * &ComplexMatrix::from_diagonal(&sv)) * &v;
    let spectrum: Vec<Complex64> = (0..n).map(|_| complex_normal(rng)).collect();
    let sinv = crate::linalg::inverse(&s).expect("well-conditioned by construction");
    &(&s * &ComplexMatrix::from_diagonal(&spectrum)) * &sinv
}
