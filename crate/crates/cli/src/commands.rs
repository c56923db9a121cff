use std::path::{Path, PathBuf};

use bivarfun::certify::{
    extremal_search, lemma_harness, run_suite, standard_ensemble, suite_summary_tsv, summarize, EnsembleCase,
    FunctionGrid, FunctionSpec, InequalityId, SearchOptions,
};
use bivarfun::config::Config;
use bivarfun::fieldvals::{contour_for, numrange, Contour};
use bivarfun::frechet::{frechet_block_oracle, frechet_norm_and_bound};
use bivarfun::funexpr::{FunExpr, MatrixFunExpr};
use bivarfun::krylov::{apriori_error_bound, bivariate_krylov, exact_rank_one};
use bivarfun::linalg::{read_matrix, spectral_norm, write_matrix, ComplexMatrix};
use bivarfun::matfun::{eval_bivariate_matrix, eval_matrix_valued, eval_multivariate};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::args::*;
use crate::error::{CliError, CliResult};

/// What a command hands back to the report writer.
pub struct Outcome {
    pub result: Value,
    /// Some certification did not pass.
    pub red_flag: bool,
    /// Some case could not be evaluated.
    pub failed_cases: usize,
    /// Replaces the JSON report on the output stream.
    pub raw: Option<String>,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Self { result, red_flag: false, failed_cases: 0, raw: None }
    }
}

fn load(path: &Path) -> CliResult<ComplexMatrix> {
    Ok(read_matrix(path)?)
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn store(path: &Option<PathBuf>, m: &ComplexMatrix) -> CliResult<Value> {
    match path {
        Some(p) => {
            write_matrix(p, m)?;
            Ok(json!(p.display().to_string()))
        }
        None => Ok(Value::Null),
    }
}

pub fn numrange_cmd(args: &NumrangeArgs, cfg: &Config) -> CliResult<Outcome> {
    let a = load(&args.a)?;
    let nr = numrange(&a, cfg.n_angles)?;
    let mut out = Outcome::ok(json!({
        "max_modulus": nr.max_modulus(),
        "diameter": nr.diameter(),
        "angles": nr.angles,
        "support": nr.support,
        "boundary": nr.boundary,
    }));
    if args.format == Format::Csv {
        out.raw = Some(nr.to_csv());
    }
    Ok(out)
}

pub fn eval_cmd(args: &EvalArgs, cfg: &Config) -> CliResult<Outcome> {
    let a = load(&args.a)?;
    let (_, ga) = contour_for(&a, cfg.n_angles, cfg.margin)?;
    match &args.b {
        None => {
            let f = MatrixFunExpr::parse(&args.function, 1)?;
            let r = eval_matrix_valued(&f, &a, &ga, &cfg.quadrature)?;
            Ok(Outcome::ok(json!({
                "kind": if f.rows() * f.cols() == 1 { "univariate" } else { "matrix-valued" },
                "shape": r.value.shape(),
                "spectral_norm": spectral_norm(&r.value),
                "quadrature": r.meta,
                "contours": [ga],
                "matrix_file": store(&args.matrix_out, &r.value)?,
            })))
        }
        Some(path) => {
            let b = load(path)?;
            let (_, gb) = contour_for(&b, cfg.n_angles, cfg.margin)?;
            let f = MatrixFunExpr::parse(&args.function, 2)?;
            let op = eval_bivariate_matrix(&f, &a, &b, &ga, &gb, &cfg.quadrature)?.with_max_kron_dim(cfg.max_kron_dim);
            let (norm, method) = op.spectral_norm()?;
            let file = match &args.matrix_out {
                Some(_) => store(&args.matrix_out, &op.materialize()?)?,
                None => Value::Null,
            };
            let (n_a, n_b) = op.dims();
            Ok(Outcome::ok(json!({
                "kind": "bivariate",
                "dims": [n_a, n_b],
                "grid": op.grid(),
                "spectral_norm": norm,
                "norm_method": method,
                "quadrature": op.meta,
                "contours": [ga, gb],
                "matrix_file": file,
            })))
        }
    }
}

pub fn eval_multi_cmd(args: &EvalMultiArgs, cfg: &Config) -> CliResult<Outcome> {
    let mats = args.mats.iter().map(|p| load(p)).collect::<CliResult<Vec<_>>>()?;
    let f = FunExpr::parse(&args.function, mats.len())?;
    let contours =
        mats.iter().map(|m| Ok(contour_for(m, cfg.n_angles, cfg.margin)?.1)).collect::<CliResult<Vec<Contour>>>()?;
    let q = if mats.len() >= 3 { &cfg.quadrature_multi } else { &cfg.quadrature };
    let r = eval_multivariate(&f, &mats, &contours, q)?;
    Ok(Outcome::ok(json!({
        "sizes": mats.iter().map(ComplexMatrix::rows).collect::<Vec<_>>(),
        "shape": r.value.shape(),
        "spectral_norm": spectral_norm(&r.value),
        "quadrature": r.meta,
        "contours": contours,
        "matrix_file": store(&args.matrix_out, &r.value)?,
    })))
}

pub fn frechet_cmd(args: &FrechetArgs, cfg: &Config) -> CliResult<Outcome> {
    let a = load(&args.a)?;
    let f = FunExpr::parse(&args.function, 1)?;
    let r = frechet_norm_and_bound(&f, &a, cfg)?;
    let mut result = to_value(&r);
    match &args.e {
        Some(path) => {
            let e = load(path)?;
            let applied = r.operator.apply(&e)?;
            let oracle = frechet_block_oracle(&f, &a, &e, &cfg.quadrature)?;
            let scale = oracle.frobenius_norm().max(f64::MIN_POSITIVE);
            result["direction"] = json!({
                "norm": spectral_norm(&applied),
                "block_oracle_rel_err": (&applied - &oracle).frobenius_norm() / scale,
            });
            result["matrix_file"] = store(&args.matrix_out, &applied)?;
        }
        None if args.matrix_out.is_some() => {
            result["matrix_file"] = store(&args.matrix_out, &r.operator.materialize()?)?;
        }
        None => {}
    }
    Ok(Outcome::ok(result))
}

fn column_or_ones(path: &Option<PathBuf>, n: usize) -> CliResult<ComplexMatrix> {
    match path {
        Some(p) => load(p),
        None => Ok(ComplexMatrix::column(&vec![Complex64::new(1.0, 0.0); n])),
    }
}

pub fn krylov_cmd(args: &KrylovArgs, cfg: &Config) -> CliResult<Outcome> {
    let (a, b) = (load(&args.a)?, load(&args.b)?);
    let ca = column_or_ones(&args.ca, a.rows())?;
    let cb = column_or_ones(&args.cb, b.rows())?;
    let f = FunExpr::parse(&args.function, 2)?;
    let mut r = bivariate_krylov(&f, &a, &b, &ca, &cb, args.k, args.l, cfg)?;
    if a.rows() * b.rows() <= args.exact_cap {
        let (exact, _) = exact_rank_one(&f, &a, &b, &ca, &cb, cfg)?;
        r.attach_exact(&exact)?;
    }
    let c_norm = ca.frobenius_norm() * cb.frobenius_norm();
    r.apriori_bound = Some(apriori_error_bound(&f, &a, &b, c_norm, r.k_used, r.l_used, args.degree_cap, cfg)?);
    let mut result = to_value(&r);
    result["matrix_file"] = store(&args.matrix_out, &r.x_kl)?;
    Ok(Outcome::ok(result))
}

fn same_check(filter: InequalityId, id: InequalityId) -> bool {
    use InequalityId::{Lemma1, Lemma2};
    filter == id || matches!((filter, id), (Lemma1 | Lemma2, Lemma1 | Lemma2))
}

fn single_case(args: &CertifyArgs) -> CliResult<EnsembleCase> {
    let inequality =
        args.inequality.ok_or_else(|| CliError::Parse("--inequality is required without an ensemble".into()))?;
    let text = args.function.clone().ok_or_else(|| CliError::Parse("--fn is required".into()))?;
    let function = if args.divdiff { FunctionSpec::DividedDifference(text) } else { FunctionSpec::Expr(text) };
    let paths: Vec<&PathBuf> = args.a.iter().chain(&args.b).chain(&args.mats).collect();
    if paths.is_empty() {
        return Err(CliError::Parse("no matrices given".into()));
    }
    let matrices = paths.into_iter().map(|p| load(p)).collect::<CliResult<Vec<_>>>()?;
    let contour = args.contour.as_deref().map(load_json::<Contour>).transpose()?;
    Ok(EnsembleCase { id: 0, inequality, function, kinds: Vec::new(), matrices, contour })
}

pub fn certify_cmd(args: &CertifyArgs, cfg: &Config) -> CliResult<Outcome> {
    let (cases, single) = if let Some(path) = &args.ensemble {
        (load_json::<Vec<EnsembleCase>>(path)?, false)
    } else if let Some(seed) = args.seed {
        (standard_ensemble(seed, args.count)?, false)
    } else {
        (vec![single_case(args)?], true)
    };
    if single {
        let reports = cases[0].run(cfg)?;
        let red_flag = reports.iter().any(|r| !r.pass);
        return Ok(Outcome { result: json!({ "reports": reports }), red_flag, failed_cases: 0, raw: None });
    }
    let cases: Vec<EnsembleCase> = match args.inequality {
        Some(id) => cases.into_iter().filter(|c| same_check(id, c.inequality)).collect(),
        None => cases,
    };
    let outcomes = run_suite(&cases, cfg);
    if let Some(path) = &args.tsv {
        std::fs::write(path, suite_summary_tsv(&outcomes))
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    let failed_cases = outcomes.iter().filter(|o| o.error.is_some()).count();
    let red_flag = outcomes.iter().flat_map(|o| &o.reports).any(|r| !r.pass);
    let result = json!({
        "cases": outcomes.len(),
        "passed": outcomes.iter().filter(|o| o.passed()).count(),
        "summary": summarize(&outcomes),
        "outcomes": outcomes,
    });
    Ok(Outcome { result, red_flag, failed_cases, raw: None })
}

pub fn lemma_cmd(args: &LemmaArgs, cfg: &Config) -> CliResult<Outcome> {
    let a = load(&args.a)?;
    let f = FunctionSpec::Expr(args.function.clone()).grid(1, cfg.eps_dd)?;
    let gamma = match &args.contour {
        Some(p) => load_json::<Contour>(p)?,
        None => contour_for(&a, cfg.n_angles, cfg.margin)?.1,
    };
    let (l1, l2) = lemma_harness(&f, &a, &gamma, cfg)?;
    let red_flag = !(l1.pass && l2.pass);
    Ok(Outcome { result: json!({ "contour": gamma, "reports": [l1, l2] }), red_flag, failed_cases: 0, raw: None })
}

pub fn search_cmd(args: &SearchArgs, cfg: &Config) -> CliResult<Outcome> {
    let f: FunctionGrid = if args.divdiff {
        FunctionGrid::divided_difference(&FunExpr::parse(&args.function, 1)?, cfg.eps_dd)?
    } else {
        FunctionSpec::Expr(args.function.clone()).grid(2, cfg.eps_dd)?
    };
    let opts = SearchOptions {
        sizes: args.sizes,
        iterations: args.iterations,
        seed: args.seed,
        normal_only: args.normal_only,
        ..SearchOptions::default()
    };
    let r = extremal_search(&f, &opts)?;
    let mut result = to_value(&r);
    result["incumbent"] = json!(r.incumbent());
    Ok(Outcome::ok(result))
}
