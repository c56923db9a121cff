use proptest::prelude::*;

use super::*;
use crate::funexpr::FunExpr;
use crate::linalg::{kron, solve};
use crate::random;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn f2(text: &str) -> FunExpr {
    FunExpr::parse(text, 2).unwrap()
}

fn ones(n: usize) -> ComplexMatrix {
    ComplexMatrix::column(&vec![c(1.0, 0.0); n])
}

fn unit(n: usize, k: usize) -> ComplexMatrix {
    let mut e = ComplexMatrix::zeros(n, 1);
    e.set(k, 0, c(1.0, 0.0));
    e
}

fn check_arnoldi(a: &ComplexMatrix, d: &ArnoldiDecomposition) {
    let k = d.steps();
    let uk = d.leading_basis();
    let lhs = a * &uk;
    let rhs = if d.breakdown_step.is_some() { &uk * &d.hess } else { &d.basis * &d.hess };
    assert!((&lhs - &rhs).max_abs() <= 1e-10 * spectral_norm(a));
    let gram = &d.basis.adjoint() * &d.basis;
    assert!((&gram - &ComplexMatrix::identity(d.basis.cols())).max_abs() <= 1e-10);
    for j in 0..k {
        for i in j + 2..d.hess.rows() {
            assert_eq!(d.hess.get(i, j), c(0.0, 0.0));
        }
    }
}

#[test]
fn identity_breaks_down_immediately() {
    let x = ComplexMatrix::column(&[c(3.0, 0.0), c(0.0, 4.0), c(0.0, 0.0)]);
    let d = arnoldi(&ComplexMatrix::identity(3), &x, 3).unwrap();
    assert_eq!(d.breakdown_step, Some(1));
    assert_eq!(d.steps(), 1);
    assert!((&d.basis - &x.scale_real(0.2)).max_abs() < 1e-15);
}

#[test]
fn shift_matrix_gives_canonical_chain() {
    let s = ComplexMatrix::from_fn(4, 4, |i, j| if i == j + 1 { c(1.0, 0.0) } else { c(0.0, 0.0) });
    let d = arnoldi(&s, &unit(4, 0), 4).unwrap();
    assert!((&d.basis - &ComplexMatrix::identity(4)).max_abs() < 1e-15);
    assert!((&d.hess - &s).max_abs() < 1e-15);
    check_arnoldi(&s, &d);
}

#[test]
fn random_arnoldi_relation() {
    let mut rng = random::rng(51);
    let a = random::ginibre(&mut rng, 8);
    let x = random::gaussian(&mut rng, 8, 1);
    for k in [1, 3, 7, 8] {
        let d = arnoldi(&a, &x, k).unwrap();
        assert_eq!(d.steps(), k);
        check_arnoldi(&a, &d);
    }
}

#[test]
fn arnoldi_rejects_bad_input() {
    let a = ComplexMatrix::identity(3);
    assert!(arnoldi(&a, &ComplexMatrix::zeros(3, 1), 2).is_err());
    assert!(arnoldi(&a, &ones(3), 0).is_err());
    assert!(arnoldi(&a, &ones(3), 4).is_err());
    assert!(arnoldi(&a, &ones(2), 1).is_err());
}

#[test]
fn starting_vector_is_reproduced() {
    let mut rng = random::rng(52);
    let a = random::ginibre(&mut rng, 5);
    let x = random::gaussian(&mut rng, 5, 1);
    let d = arnoldi(&a, &x, 3).unwrap();
    let u = d.leading_basis();
    let proj = &u * &(&u.adjoint() * &x);
    assert!((&proj - &x).max_abs() < 1e-12);
    // one-dimensional spaces keep the norm of the rank-one right-hand side
    let cb = random::gaussian(&mut rng, 4, 1);
    let b = random::ginibre(&mut rng, 4);
    let db = arnoldi(&b, &cb, 1).unwrap();
    let v = db.leading_basis();
    let y0 = &(&u.leading_columns(1).adjoint() * &x) * &(&v.adjoint() * &cb).transpose();
    assert!((y0.frobenius_norm() - x.frobenius_norm() * cb.frobenius_norm()).abs() < 1e-12);
}

fn hpd_pair(seed: u64) -> (ComplexMatrix, ComplexMatrix) {
    let mut rng = random::rng(seed);
    (random::hpd(&mut rng, 8, 1.0, 4.0), random::hpd(&mut rng, 8, 1.0, 4.0))
}

/// `f{A,B}c` for `f = 1/(x+y)` solves `AX + XBᵀ = c_A c_Bᵀ`.
fn sylvester_oracle(a: &ComplexMatrix, b: &ComplexMatrix, ca: &ComplexMatrix, cb: &ComplexMatrix) -> ComplexMatrix {
    let (m, n) = (a.rows(), b.rows());
    let op = &kron(&ComplexMatrix::identity(n), a).unwrap() + &kron(b, &ComplexMatrix::identity(m)).unwrap();
    solve(&op, &vec(&(ca * &cb.transpose()))).unwrap()
}

#[test]
fn polynomial_is_reproduced() {
    let mut rng = random::rng(53);
    let a = random::ginibre(&mut rng, 6);
    let b = random::nonnormal_triangular(&mut rng, 5, 1.0);
    let (ca, cb) = (random::gaussian(&mut rng, 6, 1), random::gaussian(&mut rng, 5, 1));
    let cfg = Config::default();
    for (f, k, l) in [("x*y", 2, 2), ("1 + x^2*y - 3*y^3", 3, 4)] {
        let f = f2(f);
        let mut r = bivariate_krylov(&f, &a, &b, &ca, &cb, k, l, &cfg).unwrap();
        let (exact, meta) = exact_rank_one(&f, &a, &b, &ca, &cb, &cfg).unwrap();
        let err = r.attach_exact(&exact).unwrap();
        assert!(err <= 1e-9 * meta.scale.max(1.0), "err {err:e}");
        assert!((r.x_kl.frobenius_norm() - r.y_kl.frobenius_norm()).abs() < 1e-12 * r.y_kl.frobenius_norm());
    }
}

#[test]
fn full_dimension_is_exact() {
    let mut rng = random::rng(54);
    let a = random::ginibre(&mut rng, 4);
    let b = random::ginibre(&mut rng, 3);
    let (ca, cb) = (random::gaussian(&mut rng, 4, 1), random::gaussian(&mut rng, 3, 1));
    let cfg = Config::default();
    let f = f2("exp(x*y) + sin(x - y)");
    let mut r = bivariate_krylov(&f, &a, &b, &ca, &cb, 4, 3, &cfg).unwrap();
    let (exact, meta) = exact_rank_one(&f, &a, &b, &ca, &cb, &cfg).unwrap();
    assert!(r.attach_exact(&exact).unwrap() <= 1e-8 * meta.scale.max(1.0));
    // requests beyond the dimension are clamped
    let r = bivariate_krylov(&f, &a, &b, &ca, &cb, 9, 9, &cfg).unwrap();
    assert_eq!((r.k_used, r.l_used), (4, 3));
}

#[test]
fn breakdown_clamps_dimensions() {
    let mut rng = random::rng(55);
    let a = ComplexMatrix::identity(4).scale_real(2.0);
    let b = random::ginibre(&mut rng, 3);
    let (ca, cb) = (ones(4), random::gaussian(&mut rng, 3, 1));
    let cfg = Config::default();
    let f = f2("exp(x + y)");
    let mut r = bivariate_krylov(&f, &a, &b, &ca, &cb, 3, 3, &cfg).unwrap();
    assert_eq!(r.k_used, 1);
    assert_eq!(r.breakdown_a, Some(1));
    let (exact, meta) = exact_rank_one(&f, &a, &b, &ca, &cb, &cfg).unwrap();
    assert!(r.attach_exact(&exact).unwrap() <= 1e-8 * meta.scale);
}

#[test]
fn resolvent_error_decreases_with_dimension() {
    let (a, b) = hpd_pair(56);
    let (ca, cb) = (ones(8), ones(8));
    let exact = sylvester_oracle(&a, &b, &ca, &cb);
    let f = f2("1/(x + y)");
    let cfg = Config::default();
    let errs: Vec<f64> = [2, 4, 6]
        .iter()
        .map(|&k| {
            let mut r = bivariate_krylov(&f, &a, &b, &ca, &cb, k, k, &cfg).unwrap();
            r.attach_exact(&exact).unwrap()
        })
        .collect();
    for w in errs.windows(2) {
        assert!(w[1] <= w[0] || w[1] <= 1e-12, "errors {errs:?}");
    }
    assert!(errs[2] < 1e-2 * errs[0]);
}

#[test]
fn bound_vanishes_for_polynomials() {
    let mut rng = random::rng(57);
    let a = random::ginibre(&mut rng, 4);
    let b = random::ginibre(&mut rng, 3);
    let cfg = Config::default();
    let r = apriori_error_bound(&f2("2 + x^2*y - x*y^2"), &a, &b, 1.0, 3, 3, 20, &cfg).unwrap();
    assert!(r.e_hat <= 1e-10 * 10.0, "e_hat {:e}", r.e_hat);
    assert!(r.estimate);
    assert_eq!(r.degrees, (2, 2));
}

#[test]
fn bound_decays_for_entire_function() {
    let mut rng = random::rng(58);
    // W inside the unit disk
    let a = random::ginibre(&mut rng, 4);
    let a = a.scale_real(0.9 / crate::fieldvals::numrange(&a, 360).unwrap().max_modulus());
    let b = random::ginibre(&mut rng, 4);
    let b = b.scale_real(0.9 / crate::fieldvals::numrange(&b, 360).unwrap().max_modulus());
    let cfg = Config::default();
    let f = f2("exp(x + y)");
    let b3 = apriori_error_bound(&f, &a, &b, 1.0, 3, 3, 20, &cfg).unwrap();
    let b6 = apriori_error_bound(&f, &a, &b, 1.0, 6, 6, 20, &cfg).unwrap();
    assert!(b6.bound * 10.0 <= b3.bound, "{} vs {}", b6.bound, b3.bound);
    let capped = apriori_error_bound(&f, &a, &b, 1.0, 6, 6, 2, &cfg).unwrap();
    assert_eq!(capped.degrees, (2, 2));
    assert_eq!(capped.e_hat, b3.e_hat);
}

#[test]
fn bound_covers_observed_error_on_hpd_pairs() {
    let f = f2("1/(x + y)");
    let cfg = Config::default();
    let mut held = 0;
    let total = 20;
    for seed in 0..total {
        let (a, b) = hpd_pair(600 + seed);
        let (ca, cb) = (ones(8), ones(8));
        let exact = sylvester_oracle(&a, &b, &ca, &cb);
        let k = 2 + (seed as usize % 4);
        let mut r = bivariate_krylov(&f, &a, &b, &ca, &cb, k, k, &cfg).unwrap();
        let err = r.attach_exact(&exact).unwrap();
        let bound = apriori_error_bound(&f, &a, &b, 8.0, k, k, 20, &cfg).unwrap();
        if err <= bound.bound + 1e-8 * r.quadrature.scale {
            held += 1;
        }
    }
    assert!(held as f64 >= 0.95 * total as f64, "bound held in {held}/{total}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn arnoldi_invariants(seed in any::<u64>(), n in 2usize..9, k in 1usize..9) {
        let mut rng = random::rng(seed);
        let a = random::nonnormal_triangular(&mut rng, n, 1.0);
        let x = random::gaussian(&mut rng, n, 1);
        let d = arnoldi(&a, &x, k.min(n)).unwrap();
        check_arnoldi(&a, &d);
    }

    #[test]
    fn polynomial_exactness(seed in any::<u64>(), k in 1usize..4, l in 1usize..4) {
        let mut rng = random::rng(seed);
        let a = random::ginibre(&mut rng, 5);
        let b = random::ginibre(&mut rng, 4);
        let (ca, cb) = (random::gaussian(&mut rng, 5, 1), random::gaussian(&mut rng, 4, 1));
        let f = f2(&format!("(1+x)^{}*(2-y)^{} + x*y^{}", k - 1, l - 1, l - 1));
        let cfg = Config::default();
        let mut r = bivariate_krylov(&f, &a, &b, &ca, &cb, k.max(2), l, &cfg).unwrap();
        let (exact, meta) = exact_rank_one(&f, &a, &b, &ca, &cb, &cfg).unwrap();
        let err = r.attach_exact(&exact).unwrap();
        prop_assert!(err <= 1e-9 * meta.scale.max(1.0), "err {err:e}");
    }
}
