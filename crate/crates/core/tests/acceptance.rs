//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fail.

use std::process::ExitCode;
use std::time::Instant;

use bivarfun::certify::{
    certify_ando, certify_bivariate, certify_multivariate, run_suite, safe_shift, standard_ensemble, summarize,
    FunctionGrid, InequalityId,
};
use bivarfun::config::Config;
use bivarfun::fieldvals::{contour_for, numrange};
use bivarfun::frechet::{frechet_block_oracle, frechet_finite_difference_check, frechet_operator};
use bivarfun::funexpr::FunExpr;
use bivarfun::krylov::{apriori_error_bound, bivariate_krylov, exact_rank_one};
use bivarfun::linalg::{kron, solve, vec, ComplexMatrix};
use bivarfun::matfun::{eval_bivariate, oracle_diag, QuadratureSpec};
use bivarfun::random;
use num_complex::Complex64;

type C = Complex64;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn f(text: &str, arity: usize) -> FunExpr {
    FunExpr::parse(text, arity).unwrap()
}

fn jordan() -> ComplexMatrix {
    random::jordan_block(2, C::new(0.0, 0.0))
}

fn extremal_example() -> Outcome {
    let start = Instant::now();
    let r = certify_bivariate(&FunctionGrid::scalar(f("x*y", 2)), &jordan(), &jordan(), &Config::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let pass = (r.lhs - 1.0).abs() <= 1e-8
        && (r.rhs_sup_sample - 0.25).abs() <= 1e-6
        && (r.raw_ratio - 4.0).abs() <= 1e-5
        && secs < 1.0;
    outcome(pass, format!("norm {:.12}, sup {:.12}, raw ratio {:.10}, {secs:.3}s", r.lhs, r.rhs_sup_sample, r.raw_ratio))
}

fn jordan_numerical_range() -> Outcome {
    let nr = numrange(&jordan(), 360).unwrap();
    let modulus = nr.max_modulus();
    let deviation = nr.support.iter().map(|h| (h - 0.5).abs()).fold(0.0, f64::max);
    outcome(
        (modulus - 0.5).abs() <= 1e-8 && deviation <= 1e-8,
        format!("max modulus {modulus:.12}, support deviation {deviation:.2e}"),
    )
}

fn bound_suites() -> Outcome {
    let start = Instant::now();
    let cases = standard_ensemble(20261016, 210).unwrap();
    let outcomes = run_suite(&cases, &Config::default());
    let secs = start.elapsed().as_secs_f64();
    let summary = summarize(&outcomes);
    let required = [
        InequalityId::Cp1,
        InequalityId::CpMatrix,
        InequalityId::Bivariate,
        InequalityId::Multivariate,
        InequalityId::Lemma1,
        InequalityId::Lemma2,
        InequalityId::Frechet,
    ];
    let covered = required.iter().all(|id| summary.iter().any(|s| s.inequality == *id && s.cases > 0));
    let all_pass = outcomes.iter().all(|o| o.passed());
    let parts: Vec<String> = summary
        .iter()
        .map(|s| format!("{} {}/{} (max ratio {:.4})", s.inequality, s.passed, s.cases, s.max_ratio))
        .collect();
    outcome(
        covered && all_pass && cases.len() >= 200 && secs < 600.0,
        format!("{} cases in {secs:.1}s: {}", cases.len(), parts.join(", ")),
    )
}

fn oracle_equivalence() -> Outcome {
    let cfg = Config::default();
    let q = QuadratureSpec::default();
    let mut rng = random::rng(404);
    let mut worst_diag: f64 = 0.0;
    let mut checked = 0;
    for k in 0..24 {
        let (na, nb) = (2 + k % 5, 2 + (k / 5) % 5);
        let a = random::diagonalizable(&mut rng, na, 10.0);
        let b = random::diagonalizable(&mut rng, nb, 10.0);
        let shift = safe_shift(&[a.clone(), b.clone()], &cfg).unwrap();
        let text = match k % 4 {
            0 => "exp(x+y)".to_string(),
            1 => "x*y - 2*x^2".to_string(),
            2 => "sin(x)*cos(y)".to_string(),
            _ => format!("1/(x + y + {shift})"),
        };
        let g = f(&text, 2);
        let (oracle, kappa) = oracle_diag(&g, &a, &b).unwrap();
        if kappa > 1e4 {
            continue;
        }
        let (_, ga) = contour_for(&a, cfg.n_angles, None).unwrap();
        let (_, gb) = contour_for(&b, cfg.n_angles, None).unwrap();
        let op = eval_bivariate(&g, &a, &b, &ga, &gb, &q).unwrap().materialize().unwrap();
        worst_diag = worst_diag.max((&op - &oracle).frobenius_norm() / oracle.frobenius_norm());
        checked += 1;
    }
    let mut worst_frechet: f64 = 0.0;
    for seed in 0..8 {
        let mut rng = random::rng(500 + seed);
        let a = random::ginibre(&mut rng, 4);
        let e = random::gaussian(&mut rng, 4, 4);
        let g = f(["exp(x)", "sin(x)", "x^3 - x", "1/(x + 5)"][seed as usize % 4], 1);
        let quad = frechet_operator(&g, &a, &q).unwrap().apply(&e).unwrap();
        let oracle = frechet_block_oracle(&g, &a, &e, &q).unwrap();
        worst_frechet = worst_frechet.max((&quad - &oracle).frobenius_norm() / oracle.frobenius_norm());
    }
    outcome(
        checked >= 12 && worst_diag <= 1e-8 && worst_frechet <= 1e-8,
        format!("{checked} diagonalization cases, max rel err {worst_diag:.2e}; Frechet max rel err {worst_frechet:.2e}"),
    )
}

fn frechet_order() -> Outcome {
    let g = f("exp(x)", 1);
    let q = QuadratureSpec::default();
    let mut ratios = Vec::new();
    for seed in 0..4 {
        let mut rng = random::rng(700 + seed);
        let a = random::ginibre(&mut rng, 4);
        let e = random::gaussian(&mut rng, 4, 4);
        let errs: Vec<f64> =
            [1e-3, 5e-4, 2.5e-4].iter().map(|&h| frechet_finite_difference_check(&g, &a, &e, h, &q).unwrap()).collect();
        ratios.push(errs[0] / errs[1]);
        ratios.push(errs[1] / errs[2]);
    }
    let pass = ratios.iter().all(|r| (r - 2.0).abs() <= 0.2);
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.4}")).collect();
    outcome(pass, format!("error ratios {}", shown.join(" ")))
}

fn ones(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, 1, |_, _| C::new(1.0, 0.0))
}

fn krylov_exactness_and_bound() -> Outcome {
    let cfg = Config::default();
    let mut rng = random::rng(808);
    let mut worst_poly: f64 = 0.0;
    for (text, k, l) in [("x*y", 2, 2), ("1 + x^2*y - 3*y^3", 3, 4), ("x^3*y^2 - 2*x + y", 4, 3)] {
        let a = random::ginibre(&mut rng, 6);
        let b = random::nonnormal_triangular(&mut rng, 5, 1.0);
        let (ca, cb) = (random::gaussian(&mut rng, 6, 1), random::gaussian(&mut rng, 5, 1));
        let g = f(text, 2);
        let mut r = bivariate_krylov(&g, &a, &b, &ca, &cb, k, l, &cfg).unwrap();
        let (exact, meta) = exact_rank_one(&g, &a, &b, &ca, &cb, &cfg).unwrap();
        worst_poly = worst_poly.max(r.attach_exact(&exact).unwrap() / meta.scale.max(1.0));
    }

    let g = f("1/(x + y)", 2);
    let total = 20;
    let mut held = 0;
    let mut shortfalls = Vec::new();
    for seed in 0..total {
        let mut rng = random::rng(600 + seed);
        let a = random::hpd(&mut rng, 8, 1.0, 4.0);
        let b = random::hpd(&mut rng, 8, 1.0, 4.0);
        let (ca, cb) = (ones(8), ones(8));
        let op = &kron(&ComplexMatrix::identity(8), &a).unwrap() + &kron(&b, &ComplexMatrix::identity(8)).unwrap();
        let exact = solve(&op, &vec(&(&ca * &cb.transpose()))).unwrap();
        let k = 2 + (seed as usize % 4);
        let mut r = bivariate_krylov(&g, &a, &b, &ca, &cb, k, k, &cfg).unwrap();
        let err = r.attach_exact(&exact).unwrap();
        let bound = apriori_error_bound(&g, &a, &b, 8.0, k, k, 20, &cfg).unwrap();
        if err <= bound.bound + 1e-8 * r.quadrature.scale {
            held += 1;
        } else {
            shortfalls.push(format!("seed {} k {k}: err {err:.3e} > bound {:.3e} (E-hat {:.3e})", 600 + seed, bound.bound, bound.e_hat));
        }
    }
    let pass = worst_poly <= 1e-9 && held as f64 >= 0.95 * total as f64;
    let mut detail = format!("polynomial err/scale {worst_poly:.2e}; bound held {held}/{total}");
    if !shortfalls.is_empty() {
        detail.push_str(&format!("; shortfalls: {}", shortfalls.join("; ")));
    }
    outcome(pass, detail)
}

fn multivariate_lower_bound() -> Outcome {
    let cfg = Config::default();
    let r = certify_multivariate(&FunctionGrid::scalar(f("x1*x2*x3", 3)), &[jordan(), jordan(), jordan()], &cfg).unwrap();
    let mut worst_normal: f64 = 0.0;
    for seed in 0..6 {
        let mut rng = random::rng(900 + seed);
        let mats: Vec<ComplexMatrix> = (0..3).map(|k| random::normal(&mut rng, 2 + (k + seed as usize) % 3)).collect();
        let text = ["x1*x2*x3", "exp(x1*x2) + x3^2", "sin(x1)*cos(x2)*exp(x3)"][seed as usize % 3];
        let n = certify_multivariate(&FunctionGrid::scalar(f(text, 3)), &mats, &cfg).unwrap();
        worst_normal = worst_normal.max(n.raw_ratio);
    }
    outcome(
        (r.raw_ratio - 8.0).abs() <= 1e-4 && r.pass && worst_normal <= 1.0 + 1e-6,
        format!("Jordan triple raw ratio {:.8}; all-normal max raw ratio {worst_normal:.8}", r.raw_ratio),
    )
}

fn ando_check() -> Outcome {
    let r = certify_ando(&FunctionGrid::scalar(f("x*y", 2)), &jordan(), &jordan(), &Config::default()).unwrap();
    outcome((r.ratio - 1.0).abs() <= 1e-6, format!("norm {:.12}, torus sup {:.12}, ratio {:.10}", r.lhs, r.rhs_sup_sample, r.ratio))
}

fn quadrature_convergence() -> Outcome {
    let cfg = Config::default();
    let mut rng = random::rng(1001);
    let mut ratios = Vec::new();
    let mut failures = 0;
    for k in 0..16 {
        let a = random::diagonalizable(&mut rng, 2 + k % 4, 5.0);
        let b = random::diagonalizable(&mut rng, 2 + (k / 4) % 4, 5.0);
        let shift = safe_shift(&[a.clone(), b.clone()], &cfg).unwrap();
        let text = match k % 4 {
            0 => "exp(x+y)".to_string(),
            1 => "exp(x*y)".to_string(),
            2 => "sin(x)*cos(y)".to_string(),
            _ => format!("1/(x + y + {shift})"),
        };
        let g = f(&text, 2);
        let (oracle, _) = oracle_diag(&g, &a, &b).unwrap();
        let (_, ga) = contour_for(&a, cfg.n_angles, Some(0.02)).unwrap();
        let (_, gb) = contour_for(&b, cfg.n_angles, Some(0.02)).unwrap();
        let err = |n: usize| {
            let op = eval_bivariate(&g, &a, &b, &ga, &gb, &QuadratureSpec::fixed(n)).unwrap();
            ((&op.materialize().unwrap() - &oracle).frobenius_norm(), op.meta.scale)
        };
        let (e128, _) = err(128);
        let (e256, scale) = err(256);
        // both errors at rounding level leave nothing to halve
        let floor = 1e3 * f64::EPSILON * scale;
        if e256 > 0.5 * e128 + floor {
            failures += 1;
        }
        if e128 > floor {
            ratios.push(e128 / e256.max(f64::MIN_POSITIVE));
        }
    }
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(
        failures == 0,
        format!("16 cases, {} above the rounding floor at N = 128, min reduction {min_ratio:.3e}", ratios.len()),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("extremal example", extremal_example),
        ("numerical range of the Jordan block", jordan_numerical_range),
        ("bound suites on the standard ensemble", bound_suites),
        ("oracle equivalence", oracle_equivalence),
        ("Frechet finite-difference order", frechet_order),
        ("Krylov exactness and a priori bound", krylov_exactness_and_bound),
        ("multivariate lower bound", multivariate_lower_bound),
        ("Ando check", ando_check),
        ("quadrature convergence", quadrature_convergence),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{}] {}: {} ({:.1}s)", k + 1, status, name, o.detail, start.elapsed().as_secs_f64());
        failed += !o.pass as usize;
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
