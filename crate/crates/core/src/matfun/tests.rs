use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::fieldvals::contour_for;
use crate::funexpr::{FunExpr, Permuted};
use crate::linalg::{kron, perfect_shuffle, spectral_norm, vec};
use crate::random;

fn c(re: f64, im: f64) -> C {
    Complex64::new(re, im)
}

fn contour(a: &ComplexMatrix) -> Contour {
    contour_for(a, 360, None).unwrap().1
}

fn rel_err(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).frobenius_norm() / b.frobenius_norm().max(f64::MIN_POSITIVE)
}

fn f1(text: &str) -> FunExpr {
    FunExpr::parse(text, 1).unwrap()
}

fn f2(text: &str) -> FunExpr {
    FunExpr::parse(text, 2).unwrap()
}

fn jordan() -> ComplexMatrix {
    random::jordan_block(2, c(0.0, 0.0))
}

#[test]
fn identity_function_reproduces_matrix() {
    let mut rng = random::rng(11);
    let a = random::ginibre(&mut rng, 5);
    let r = eval_univariate(&f1("x"), &a, &contour(&a), &QuadratureSpec::default()).unwrap();
    assert!((&r.value - &a).frobenius_norm() <= 1e-10 * spectral_norm(&a));
    assert!(r.meta.converged);
}

#[test]
fn exp_of_diagonal() {
    let a = ComplexMatrix::from_diagonal(&[c(0.0, 0.0), c(1.0, 0.0)]);
    let r = eval_univariate(&f1("exp(x)"), &a, &contour(&a), &QuadratureSpec::default()).unwrap();
    let expected = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(std::f64::consts::E, 0.0)]);
    assert!((&r.value - &expected).max_abs() <= 1e-10);
}

#[test]
fn exp_matches_diagonalization_oracle() {
    let mut rng = random::rng(12);
    let a = random::diagonalizable(&mut rng, 6, 10.0);
    let f = f1("exp(x)");
    let r = eval_univariate(&f, &a, &contour(&a), &QuadratureSpec::default()).unwrap();
    let oracle = oracle_diag_univariate(&f, &a).unwrap();
    assert!(rel_err(&r.value, &oracle) <= 1e-8);
}

#[test]
fn contour_must_enclose_spectrum() {
    let a = ComplexMatrix::from_diagonal(&[c(0.0, 0.0), c(3.0, 0.0)]);
    let g = Contour::circle(c(0.0, 0.0), 1.0);
    assert!(matches!(
        eval_univariate(&f1("x"), &a, &g, &QuadratureSpec::default()),
        Err(Error::ContourExcludesSpectrum { .. })
    ));
}

#[test]
fn pole_inside_contour_is_rejected() {
    let a = ComplexMatrix::from_diagonal(&[c(0.5, 0.0), c(-0.5, 0.0)]);
    let g = Contour::circle(c(0.0, 0.0), 1.0);
    assert_eq!(eval_univariate(&f1("1/x"), &a, &g, &QuadratureSpec::default()).unwrap_err(), Error::NotAnalytic);
}

#[test]
fn quadrature_spec_validation() {
    assert!(QuadratureSpec::fixed(8).validate().is_err());
    assert!(QuadratureSpec::fixed(48).validate().is_err());
    assert!(QuadratureSpec { max_nodes: 32, ..QuadratureSpec::default() }.validate().is_err());
    assert!(QuadratureSpec::default().validate().is_ok());
}

#[test]
fn resolvent_refinement_matches_direct_construction() {
    let mut rng = random::rng(13);
    let a = random::ginibre(&mut rng, 4);
    let g = contour(&a);
    let mut refined = ResolventSet::new(&a, g, 16).unwrap();
    refined.refine(&a).unwrap();
    let direct = ResolventSet::new(&a, g, 32).unwrap();
    for k in 0..32 {
        assert!((refined.nodes[k] - direct.nodes[k]).norm() < 1e-14);
        assert!((refined.weights[k] - direct.weights[k]).norm() < 1e-15);
        assert!((&refined.resolvents[k] - &direct.resolvents[k]).max_abs() < 1e-12);
    }
}

#[test]
fn matrix_valued_blocks() {
    let mut rng = random::rng(14);
    let a = random::ginibre(&mut rng, 3);
    let g = contour(&a);
    let q = QuadratureSpec::default();
    let f = MatrixFunExpr::parse("[x; 1]", 1).unwrap();
    let r = eval_matrix_valued(&f, &a, &g, &q).unwrap().value;
    assert_eq!(r.shape(), (6, 3));
    assert!((&r.submatrix(0, 0, 3, 3) - &a).max_abs() < 1e-10);
    assert!((&r.submatrix(3, 0, 3, 3) - &ComplexMatrix::identity(3)).max_abs() < 1e-10);

    let e = MatrixFunExpr::parse("[exp(x), 0; 0, exp(x)]", 1).unwrap();
    let r = eval_matrix_valued(&e, &a, &g, &q).unwrap().value;
    let expa = eval_univariate(&f1("exp(x)"), &a, &g, &q).unwrap().value;
    let expected = kron(&ComplexMatrix::identity(2), &expa).unwrap();
    assert!((&r - &expected).max_abs() < 1e-10);
}

#[test]
fn matrix_valued_polynomials_match_horner() {
    let mut rng = random::rng(15);
    let a = random::ginibre(&mut rng, 4);
    let f = MatrixFunExpr::parse("[1 + 2*x - x^3, (3+i)*x^2; x^4/5, 7 - x]", 1).unwrap();
    let r = eval_matrix_valued(&f, &a, &contour(&a), &QuadratureSpec::default()).unwrap().value;
    for i in 0..2 {
        for j in 0..2 {
            let p = f.entry(i, j).to_polynomial().unwrap();
            let oracle = oracle_polynomial_univariate(&p, &a).unwrap();
            assert!(rel_err(&r.submatrix(4 * i, 4 * j, 4, 4), &oracle) <= 1e-9);
        }
    }
}

#[test]
fn constant_one_is_identity_operator() {
    let mut rng = random::rng(16);
    let a = random::ginibre(&mut rng, 3);
    let b = random::ginibre(&mut rng, 2);
    let op = eval_bivariate(&f2("1"), &a, &b, &contour(&a), &contour(&b), &QuadratureSpec::default()).unwrap();
    let m = op.materialize().unwrap();
    assert!((&m - &ComplexMatrix::identity(6)).max_abs() < 1e-10);
    let x = random::gaussian(&mut rng, 3, 2);
    assert!((&op.apply(&x).unwrap() - &x).max_abs() < 1e-10);
}

#[test]
fn polynomial_example_matches_kronecker_sum() {
    let mut rng = random::rng(17);
    let a = random::ginibre(&mut rng, 3);
    let b = random::ginibre(&mut rng, 4);
    let op = eval_bivariate(&f2("1 + x*y + x^3*y^2"), &a, &b, &contour(&a), &contour(&b), &QuadratureSpec::default())
        .unwrap();
    let m = op.materialize().unwrap();
    let expected = &(&ComplexMatrix::identity(12) + &kron(&b, &a).unwrap())
        + &kron(&b.powi(2), &a.powi(3)).unwrap();
    assert!((&m - &expected).frobenius_norm() <= 1e-9 * op.meta.scale.max(1.0));

    let x = random::gaussian(&mut rng, 3, 4);
    let bt = b.transpose();
    let direct = &(&x + &(&(&a * &x) * &bt)) + &(&(&a.powi(3) * &x) * &bt.powi(2));
    assert!((&op.apply(&x).unwrap() - &direct).frobenius_norm() <= 1e-9 * op.meta.scale.max(1.0));
}

#[test]
fn jordan_pair_product_has_unit_norm() {
    let a = jordan();
    let g = contour(&a);
    let op = eval_bivariate(&f2("x*y"), &a, &a, &g, &g, &QuadratureSpec::default()).unwrap();
    let (norm, method) = op.spectral_norm().unwrap();
    assert_eq!(method, bivariate::NormMethod::Explicit);
    assert!((norm - 1.0).abs() < 1e-8);
    assert!((op.power_norm(500, 1e-14).unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn apply_agrees_with_materialized() {
    let mut rng = random::rng(18);
    let a = random::ginibre(&mut rng, 3);
    let b = random::nonnormal_triangular(&mut rng, 2, 1.0);
    let op = eval_bivariate(&f2("exp(x*y) + sin(x - y)"), &a, &b, &contour(&a), &contour(&b), &QuadratureSpec::default())
        .unwrap();
    let m = op.materialize().unwrap();
    let x = random::gaussian(&mut rng, 3, 2);
    let lhs = &m * &vec(&x);
    let rhs = vec(&op.apply(&x).unwrap());
    assert!((&lhs - &rhs).frobenius_norm() <= 1e-10 * op.meta.scale);
    // adjoint action is the conjugate transpose of the explicit matrix
    let y = random::gaussian(&mut rng, 3, 2);
    let adj = vec(&op.apply_adjoint(&y).unwrap());
    assert!((&(&m.adjoint() * &vec(&y)) - &adj).frobenius_norm() <= 1e-10 * op.meta.scale);
}

#[test]
fn matrix_valued_bivariate_blocks() {
    let mut rng = random::rng(19);
    let a = random::ginibre(&mut rng, 2);
    let b = random::ginibre(&mut rng, 3);
    let (ga, gb) = (contour(&a), contour(&b));
    let q = QuadratureSpec::default();
    let grid = MatrixFunExpr::parse("[x*y, 1; exp(x+y), x - y]", 2).unwrap();
    let op = eval_bivariate_matrix(&grid, &a, &b, &ga, &gb, &q).unwrap();
    let m = op.materialize().unwrap();
    assert_eq!(m.shape(), (12, 12));
    for r in 0..2 {
        for s in 0..2 {
            let single = eval_bivariate(grid.entry(r, s), &a, &b, &ga, &gb, &q).unwrap().materialize().unwrap();
            assert!((&m.submatrix(6 * r, 6 * s, 6, 6) - &single).max_abs() < 1e-10);
        }
    }
    let xs = vec![random::gaussian(&mut rng, 2, 3), random::gaussian(&mut rng, 2, 3)];
    let ys = op.apply_blocks(&xs).unwrap();
    let stacked_in = ComplexMatrix::column(&[vec(&xs[0]).column_major_entries(), vec(&xs[1]).column_major_entries()].concat());
    let out = &m * &stacked_in;
    assert!((&out.submatrix(0, 0, 6, 1) - &vec(&ys[0])).max_abs() < 1e-10);
    assert!((&out.submatrix(6, 0, 6, 1) - &vec(&ys[1])).max_abs() < 1e-10);
}

#[test]
fn materialize_respects_size_cap() {
    let mut rng = random::rng(20);
    let a = random::ginibre(&mut rng, 3);
    let op = eval_bivariate(&f2("x+y"), &a, &a, &contour(&a), &contour(&a), &QuadratureSpec::fixed(64))
        .unwrap()
        .with_max_kron_dim(8);
    assert!(matches!(op.materialize(), Err(Error::SizeLimit { requested: 9, limit: 8 })));
    let (norm, method) = op.spectral_norm().unwrap();
    assert_eq!(method, bivariate::NormMethod::PowerIteration);
    let exact = spectral_norm(&op.clone().with_max_kron_dim(4096).materialize().unwrap());
    assert!((norm - exact).abs() <= 1e-8 * exact);
}

#[test]
fn multivariate_jordan_triple() {
    let a = jordan();
    let g = contour(&a);
    let f = FunExpr::parse("x1*x2*x3", 3).unwrap();
    let r = eval_multivariate(&f, &[a.clone(), a.clone(), a.clone()], &[g, g, g], &QuadratureSpec::fixed(64)).unwrap();
    let expected = kron(&a, &kron(&a, &a).unwrap()).unwrap();
    assert!((&r.value - &expected).max_abs() < 1e-10);
    assert!((spectral_norm(&r.value) - 1.0).abs() < 1e-7);
}

#[test]
fn multivariate_two_variables_agrees_with_bivariate() {
    let mut rng = random::rng(21);
    let a = random::ginibre(&mut rng, 3);
    let b = random::nonnormal_triangular(&mut rng, 3, 1.0);
    let (ga, gb) = (contour(&a), contour(&b));
    let f = f2("exp(x)*cos(y) + x^2*y");
    let q = QuadratureSpec::default();
    let multi = eval_multivariate(&f, &[a.clone(), b.clone()], &[ga, gb], &q).unwrap().value;
    let bi = eval_bivariate(&f, &a, &b, &ga, &gb, &q).unwrap().materialize().unwrap();
    assert!(rel_err(&multi, &bi) <= 1e-8);
}

#[test]
fn multivariate_sum_on_diagonals_is_kronecker_sum() {
    let ds = [
        vec![c(0.1, 0.0), c(-0.4, 0.2)],
        vec![c(0.3, -0.1), c(0.0, 0.5), c(-0.2, 0.0)],
        vec![c(0.7, 0.0), c(0.2, 0.2)],
    ];
    let mats: Vec<ComplexMatrix> = ds.iter().map(|d| ComplexMatrix::from_diagonal(d)).collect();
    let contours: Vec<Contour> = mats.iter().map(contour).collect();
    let f = FunExpr::parse("x1 + x2 + x3", 3).unwrap();
    let r = eval_multivariate(&f, &mats, &contours, &QuadratureSpec::fixed(64)).unwrap().value;
    assert_eq!(r.shape(), (12, 12));
    let mut idx = 0;
    for l3 in &ds[2] {
        for l2 in &ds[1] {
            for l1 in &ds[0] {
                assert!((r.get(idx, idx) - (l1 + l2 + l3)).norm() < 1e-10);
                idx += 1;
            }
        }
    }
    assert!((&r - &ComplexMatrix::from_diagonal(&(0..12).map(|k| r.get(k, k)).collect::<Vec<_>>())).max_abs() < 1e-10);
}

#[test]
fn multivariate_input_validation() {
    let a = jordan();
    let g = contour(&a);
    let f = FunExpr::parse("x1*x2*x3", 3).unwrap();
    let q = QuadratureSpec::fixed(16);
    assert!(matches!(eval_multivariate(&f, &[a.clone(), a.clone()], &[g, g], &q), Err(Error::Arity { .. })));
    let big = ComplexMatrix::identity(17);
    let gb = contour(&big);
    assert!(matches!(
        eval_multivariate(&f, &[big.clone(), big.clone(), big.clone()], &[gb, gb, gb], &q),
        Err(Error::SizeLimit { .. })
    ));
}

#[test]
fn oracle_diag_on_diagonal_inputs() {
    let a = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(2.0, 1.0)]);
    let b = ComplexMatrix::from_diagonal(&[c(-1.0, 0.0), c(0.5, 0.0), c(0.0, 3.0)]);
    let f = f2("exp(x)*y + x^2");
    let (m, _) = oracle_diag(&f, &a, &b).unwrap();
    let mut idx = 0;
    for j in 0..3 {
        for i in 0..2 {
            let expected = f.eval(&[a.get(i, i), b.get(j, j)]).unwrap();
            assert!((m.get(idx, idx) - expected).norm() < 1e-12 * expected.norm().max(1.0));
            idx += 1;
        }
    }
    assert!(oracle_diag(&f, &jordan(), &b).is_err());
}

#[test]
fn oracle_diag_polynomial_and_separable() {
    let mut rng = random::rng(22);
    let a = random::diagonalizable(&mut rng, 3, 5.0);
    let b = random::diagonalizable(&mut rng, 3, 5.0);
    let (m, kappa) = oracle_diag(&f2("1 + x*y + x^3*y^2"), &a, &b).unwrap();
    let expected = &(&ComplexMatrix::identity(9) + &kron(&b, &a).unwrap()) + &kron(&b.powi(2), &a.powi(3)).unwrap();
    assert!(rel_err(&m, &expected) <= 1e-9 * kappa);

    let (m, _) = oracle_diag(&f2("exp(x+y)"), &a, &b).unwrap();
    let ea = oracle_diag_univariate(&f1("exp(x)"), &a).unwrap();
    let eb = oracle_diag_univariate(&f1("exp(x)"), &b).unwrap();
    assert!(rel_err(&m, &kron(&eb, &ea).unwrap()) <= 1e-8);
}

#[test]
fn quadrature_matches_oracle_diag() {
    let mut rng = random::rng(23);
    let a = random::diagonalizable(&mut rng, 4, 10.0);
    let b = random::diagonalizable(&mut rng, 3, 10.0);
    let (ga, gb) = (contour(&a), contour(&b));
    let reach = |g: &Contour| g.center().norm() + g.outer_radius();
    let f = f2(&format!("exp(x*y) + 1/(x + y + {})", reach(&ga) + reach(&gb) + 1.0));
    let op = eval_bivariate(&f, &a, &b, &ga, &gb, &QuadratureSpec::default()).unwrap();
    let (oracle, kappa) = oracle_diag(&f, &a, &b).unwrap();
    let e = rel_err(&op.materialize().unwrap(), &oracle);
    assert!(e <= 1e-8, "rel err {e:e} kappa {kappa:e} meta {:?}", op.meta);
}

#[test]
fn adaptive_reports_nonconvergence_at_cap() {
    let a = ComplexMatrix::from_diagonal(&[c(0.0, 0.0), c(1.0, 0.0)]);
    let g = Contour::circle(c(0.5, 0.0), 0.5 + 1e-3);
    let q = QuadratureSpec { nodes_per_contour: 16, adaptive: true, rel_tol: 1e-14, max_nodes: 64 };
    let r = eval_univariate(&f1("exp(x)"), &a, &g, &q).unwrap();
    assert!(!r.meta.converged);
    assert_eq!(r.meta.nodes_used, 64);
}

fn random_pair(seed: u64, na: usize, nb: usize) -> (ComplexMatrix, ComplexMatrix) {
    let mut rng = random::rng(seed);
    (random::ginibre(&mut rng, na), random::nonnormal_triangular(&mut rng, nb, 0.7))
}

const SUITE_2D: [&str; 4] = ["exp(x+y)", "x*y - 2*x^2", "sin(x)*cos(y)", "1/(x + y + 8)"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn linear_in_the_function(seed in any::<u64>(), i in 0usize..4, j in 0usize..4, ar in -2.0f64..2.0, bi in -2.0f64..2.0) {
        let (a, b) = random_pair(seed, 3, 2);
        let (ga, gb) = (contour(&a), contour(&b));
        let q = QuadratureSpec::fixed(128);
        let (f, g) = (f2(SUITE_2D[i]), f2(SUITE_2D[j]));
        let (alpha, beta) = (c(ar, 0.3), c(0.0, bi));
        let combo = FunExpr::linear_combination(alpha, &f, beta, &g).unwrap();
        let lhs = eval_bivariate(&combo, &a, &b, &ga, &gb, &q).unwrap();
        let of = eval_bivariate(&f, &a, &b, &ga, &gb, &q).unwrap();
        let og = eval_bivariate(&g, &a, &b, &ga, &gb, &q).unwrap();
        let rhs = &of.materialize().unwrap().scale(alpha) + &og.materialize().unwrap().scale(beta);
        let scale = lhs.meta.scale.max(1.0);
        prop_assert!((&lhs.materialize().unwrap() - &rhs).frobenius_norm() <= 1e-10 * scale);
    }

    #[test]
    fn independent_of_contour(seed in any::<u64>(), i in 0usize..4) {
        let (a, b) = random_pair(seed, 3, 3);
        let f = f2(SUITE_2D[i]);
        let q = QuadratureSpec::default();
        let (_, ga1) = contour_for(&a, 360, Some(0.3)).unwrap();
        let (_, gb1) = contour_for(&b, 360, Some(0.3)).unwrap();
        let (_, ga2) = contour_for(&a, 360, Some(0.8)).unwrap();
        let (_, gb2) = contour_for(&b, 360, Some(0.8)).unwrap();
        let o1 = eval_bivariate(&f, &a, &b, &ga1, &gb1, &q).unwrap();
        let o2 = eval_bivariate(&f, &a, &b, &ga2, &gb2, &q).unwrap();
        let scale = o1.meta.scale.max(o2.meta.scale);
        prop_assert!((&o1.materialize().unwrap() - &o2.materialize().unwrap()).frobenius_norm() <= 1e-8 * scale);
    }

    #[test]
    fn transposition_is_a_perfect_shuffle(seed in any::<u64>(), i in 0usize..4) {
        let (a, b) = random_pair(seed, 2, 3);
        let (ga, gb) = (contour(&a), contour(&b));
        let q = QuadratureSpec::fixed(128);
        let f = f2(SUITE_2D[i]);
        let swapped = Permuted::new(&f, vec![1, 0]);
        let fab = eval_bivariate(&f, &a, &b, &ga, &gb, &q).unwrap();
        let gba = eval_bivariate(&swapped, &b, &a, &gb, &ga, &q).unwrap();
        let (m1, m2) = (fab.materialize().unwrap(), gba.materialize().unwrap());
        let perm = perfect_shuffle(2, 3);
        let mut worst: f64 = 0.0;
        for r in 0..6 {
            for s in 0..6 {
                worst = worst.max((m2.get(perm[r], perm[s]) - m1.get(r, s)).norm());
            }
        }
        prop_assert!(worst <= 1e-10 * fab.meta.scale.max(1.0));
    }

    #[test]
    fn polynomials_are_exact(seed in any::<u64>(), coeffs in proptest::collection::vec(-1.0f64..1.0, 16)) {
        let (a, b) = random_pair(seed, 3, 2);
        let mut terms = Vec::new();
        for (k, cf) in coeffs.iter().enumerate() {
            terms.push(format!("({cf})*x^{}*y^{}", k % 4, k / 4));
        }
        let f = f2(&terms.join(" + "));
        let oracle = oracle_polynomial(&f.to_polynomial().unwrap(), &[a.clone(), b.clone()]).unwrap();
        // aliasing error decays like ρ^N with ρ the eigenvalue-to-contour ratio:
        // N = 64 needs the wider contour, N = 128 suffices with the default one
        let wide = |m: &ComplexMatrix| {
            let nr = crate::fieldvals::numrange(m, 360).unwrap();
            crate::fieldvals::enclosing_contour(&nr, 0.5 * (1.0 + nr.diameter())).unwrap()
        };
        for (ga, gb, n) in [(wide(&a), wide(&b), 64), (contour(&a), contour(&b), 128)] {
            let op = eval_bivariate(&f, &a, &b, &ga, &gb, &QuadratureSpec::fixed(n)).unwrap();
            let err = (&op.materialize().unwrap() - &oracle).frobenius_norm();
            prop_assert!(err <= 1e-9 * op.meta.scale.max(1.0), "N {n}: err {err:e} scale {:e}", op.meta.scale);
        }
    }

    #[test]
    fn doubling_nodes_halves_oracle_deviation(seed in any::<u64>(), i in 0usize..4) {
        let mut rng = random::rng(seed);
        let a = random::diagonalizable(&mut rng, 3, 5.0);
        let b = random::diagonalizable(&mut rng, 3, 5.0);
        let (_, ga) = contour_for(&a, 360, Some(0.15)).unwrap();
        let (_, gb) = contour_for(&b, 360, Some(0.15)).unwrap();
        let f = f2(SUITE_2D[i]);
        let (oracle, _) = oracle_diag(&f, &a, &b).unwrap();
        let err = |n: usize| {
            let op = eval_bivariate(&f, &a, &b, &ga, &gb, &QuadratureSpec::fixed(n)).unwrap();
            ((&op.materialize().unwrap() - &oracle).frobenius_norm(), op.meta.scale)
        };
        let (e16, _) = err(16);
        let (e32, scale) = err(32);
        prop_assert!(e32 <= 0.5 * e16 + 1e-12 * scale, "e16 {e16:e} e32 {e32:e}");
    }
}

