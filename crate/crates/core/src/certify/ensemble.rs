//! Seeded case ensembles covering every inequality, and a runner that
//! certifies each case.

use std::fmt::Write as _;
use std::thread;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    certify_ando, certify_bivariate, certify_frechet, certify_multivariate, certify_univariate, lemma_harness,
    CertificateReport, FunctionGrid, InequalityId,
};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::fieldvals::{contour_for, Contour};
use crate::funexpr::{FunExpr, MatrixFunExpr};
use crate::linalg::{spectral_norm, ComplexMatrix};
use crate::random::{self, MatrixRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixKind {
    Ginibre,
    Normal,
    NonnormalTriangular,
    PerturbedJordan,
    Hpd,
    Diagonalizable,
}

impl MatrixKind {
    pub const ALL: [MatrixKind; 6] = [
        MatrixKind::Ginibre,
        MatrixKind::Normal,
        MatrixKind::NonnormalTriangular,
        MatrixKind::PerturbedJordan,
        MatrixKind::Hpd,
        MatrixKind::Diagonalizable,
    ];

    /// A random matrix of this kind scaled to spectral norm `target`.
    pub fn sample(self, rng: &mut MatrixRng, n: usize, target: f64) -> ComplexMatrix {
        let m = match self {
            MatrixKind::Ginibre => random::ginibre(rng, n),
            MatrixKind::Normal => random::normal(rng, n),
            MatrixKind::NonnormalTriangular => random::nonnormal_triangular(rng, n, 2.0),
            MatrixKind::PerturbedJordan => {
                let lambda = random::complex_normal(rng) * 0.3;
                &random::jordan_block(n, lambda) + &random::gaussian(rng, n, n).scale_real(1e-3)
            }
            MatrixKind::Hpd => random::hpd(rng, n, 0.1, 1.0),
            MatrixKind::Diagonalizable => random::diagonalizable(rng, n, 10.0),
        };
        let norm = spectral_norm(&m);
        if norm > 0.0 {
            m.scale_real(target / norm)
        } else {
            m
        }
    }
}

/// How a case's function text is interpreted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "text", rename_all = "kebab-case")]
pub enum FunctionSpec {
    /// Scalar or bracketed matrix-valued expression.
    Expr(String),
    /// `f^[1]` of the univariate expression.
    DividedDifference(String),
}

impl FunctionSpec {
    pub fn grid(&self, arity: usize, eps_dd: f64) -> Result<FunctionGrid> {
        match self {
            FunctionSpec::Expr(text) => {
                let m = MatrixFunExpr::parse(text, arity)?;
                if m.rows() == 1 && m.cols() == 1 {
                    Ok(FunctionGrid::scalar(m.entry(0, 0).clone()))
                } else {
                    Ok(FunctionGrid::from_matrix(&m))
                }
            }
            FunctionSpec::DividedDifference(text) => {
                if arity != 2 {
                    return Err(Error::Arity { expected: 2, got: arity });
                }
                FunctionGrid::divided_difference(&FunExpr::parse(text, 1)?, eps_dd)
            }
        }
    }

    pub fn text(&self) -> String {
        match self {
            FunctionSpec::Expr(t) => t.clone(),
            FunctionSpec::DividedDifference(t) => format!("divdiff({t})"),
        }
    }
}

/// One certification case: an inequality, a function and its matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleCase {
    pub id: usize,
    pub inequality: InequalityId,
    pub function: FunctionSpec,
    pub kinds: Vec<MatrixKind>,
    pub matrices: Vec<ComplexMatrix>,
    /// Contour for the lemma checks; `None` uses the default around `W(A)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contour: Option<Contour>,
}

impl EnsembleCase {
    pub fn sizes(&self) -> Vec<usize> {
        self.matrices.iter().map(ComplexMatrix::rows).collect()
    }

    /// Certifies this case. Lemma cases return both lemma reports.
    pub fn run(&self, cfg: &Config) -> Result<Vec<CertificateReport>> {
        let mats = &self.matrices;
        let need = |k: usize| -> Result<()> {
            if mats.len() != k {
                return Err(Error::DimensionMismatch(format!("{} needs {k} matrices, got {}", self.inequality, mats.len())));
            }
            Ok(())
        };
        let grid = |arity: usize| self.function.grid(arity, cfg.eps_dd);
        Ok(match self.inequality {
            InequalityId::Cp1 | InequalityId::CpMatrix => {
                need(1)?;
                vec![certify_univariate(&grid(1)?, &mats[0], cfg)?]
            }
            InequalityId::Bivariate => {
                need(2)?;
                vec![certify_bivariate(&grid(2)?, &mats[0], &mats[1], cfg)?]
            }
            InequalityId::Multivariate => vec![certify_multivariate(&grid(mats.len())?, mats, cfg)?],
            InequalityId::Ando => {
                need(2)?;
                vec![certify_ando(&grid(2)?, &mats[0], &mats[1], cfg)?]
            }
            InequalityId::Lemma1 | InequalityId::Lemma2 => {
                need(1)?;
                let gamma = match self.contour {
                    Some(g) => g,
                    None => contour_for(&mats[0], cfg.n_angles, cfg.margin)?.1,
                };
                let (l1, l2) = lemma_harness(&grid(1)?, &mats[0], &gamma, cfg)?;
                vec![l1, l2]
            }
            InequalityId::Frechet => {
                need(1)?;
                let FunctionSpec::Expr(text) = &self.function else {
                    return Err(Error::InvalidParameter("frechet cases take a scalar expression".into()));
                };
                vec![certify_frechet(&FunExpr::parse(text, 1)?, &mats[0], cfg)?]
            }
        })
    }
}

/// `|center| + outer radius` of the default contour: every quadrature node
/// for `a` lies within this distance of the origin.
fn reach(a: &ComplexMatrix, cfg: &Config) -> Result<f64> {
    let (_, g) = contour_for(a, cfg.n_angles, cfg.margin)?;
    Ok(g.center().norm() + g.outer_radius())
}

/// Shift `s` with `x₁ + ⋯ + x_d + s` bounded away from zero on every
/// quadrature contour.
pub fn safe_shift(mats: &[ComplexMatrix], cfg: &Config) -> Result<f64> {
    let mut s = 1.0;
    for a in mats {
        s += reach(a, cfg)?;
    }
    Ok(s)
}

fn fmt_shift(s: f64) -> String {
    format!("{:.4}", (s * 1e4).ceil() / 1e4)
}

const UNIVARIATE: [&str; 5] = ["x", "exp(x)", "sin(x)", "x^3 - 2*x + 1", "cos(x)*exp(x)"];
const MATRIX_VALUED: [&str; 3] =
    ["[exp(x), x; 1, x^2]", "[x, 2*x^2 - 1, 3; 1, x^3, x - 1]", "[sin(x); cos(x)]"];
const BIVARIATE: [&str; 4] = ["x*y", "exp(x+y)", "exp(x*y)", "sin(x)*cos(y)"];
const DIVDIFF: [&str; 2] = ["exp(x)", "x^4 - 3*x^2 + x"];
const TRIVARIATE: [&str; 4] = ["x1*x2*x3", "exp(x1+x2+x3)", "sin(x1)*cos(x2)*exp(x3)", "exp(x1*x2*x3)"];
const ANDO: [&str; 4] = ["x*y", "exp(x*y)", "exp(x+y)", "sin(x)*cos(y)"];

const CATEGORIES: [InequalityId; 7] = [
    InequalityId::Cp1,
    InequalityId::CpMatrix,
    InequalityId::Bivariate,
    InequalityId::Multivariate,
    InequalityId::Ando,
    InequalityId::Lemma1,
    InequalityId::Frechet,
];

fn pick<'a>(list: &[&'a str], k: usize) -> &'a str {
    list[k % list.len()]
}

/// Deterministic ensemble of `count` cases cycling through all inequalities
/// and matrix kinds. Sizes are 2–8 (2–4 for three variables) and matrices
/// are scaled to spectral norms in `[0.5, 1.5]` (`0.9` for contractions).
/// Rational functions get the shift from [`safe_shift`].
pub fn standard_ensemble(seed: u64, count: usize) -> Result<Vec<EnsembleCase>> {
    let cfg = Config::default();
    let mut rng = random::rng(seed);
    let mut cases = Vec::with_capacity(count);
    for id in 0..count {
        let inequality = CATEGORIES[id % CATEGORIES.len()];
        let round = id / CATEGORIES.len();
        let arity = match inequality {
            InequalityId::Bivariate | InequalityId::Ando => 2,
            InequalityId::Multivariate => 3,
            _ => 1,
        };
        let max_n = if arity == 3 { 4 } else { 8 };
        let kinds: Vec<MatrixKind> =
            (0..arity).map(|v| MatrixKind::ALL[(round + 2 * v + id) % MatrixKind::ALL.len()]).collect();
        let matrices: Vec<ComplexMatrix> = kinds
            .iter()
            .map(|&kind| {
                let n = rng.random_range(2..=max_n);
                let target = if inequality == InequalityId::Ando { 0.9 } else { rng.random_range(0.5..1.5) };
                kind.sample(&mut rng, n, target)
            })
            .collect();
        let function = match inequality {
            InequalityId::Cp1 | InequalityId::Frechet => match round % (UNIVARIATE.len() + 1) {
                k if k < UNIVARIATE.len() => FunctionSpec::Expr(UNIVARIATE[k].into()),
                _ => FunctionSpec::Expr(format!("1/(x + {})", fmt_shift(safe_shift(&matrices, &cfg)?))),
            },
            InequalityId::CpMatrix => FunctionSpec::Expr(pick(&MATRIX_VALUED, round).into()),
            InequalityId::Lemma1 | InequalityId::Lemma2 => {
                if round.is_multiple_of(2) {
                    FunctionSpec::Expr(pick(&UNIVARIATE, round / 2).into())
                } else {
                    FunctionSpec::Expr(pick(&MATRIX_VALUED, round / 2).into())
                }
            }
            InequalityId::Bivariate => match round % 7 {
                k if k < 4 => FunctionSpec::Expr(BIVARIATE[k].into()),
                4 => FunctionSpec::Expr(format!("1/(x + y + {})", fmt_shift(safe_shift(&matrices, &cfg)?))),
                k => FunctionSpec::DividedDifference(DIVDIFF[k - 5].into()),
            },
            InequalityId::Multivariate => match round % 5 {
                k if k < 4 => FunctionSpec::Expr(TRIVARIATE[k].into()),
                _ => FunctionSpec::Expr(format!("1/(x1 + x2 + x3 + {})", fmt_shift(safe_shift(&matrices, &cfg)?))),
            },
            InequalityId::Ando => match round % 5 {
                k if k < 4 => FunctionSpec::Expr(ANDO[k].into()),
                _ => FunctionSpec::Expr("1/(x + y + 3.5)".into()),
            },
        };
        cases.push(EnsembleCase { id, inequality, function, kinds, matrices, contour: None });
    }
    Ok(cases)
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub id: usize,
    pub inequality: InequalityId,
    pub function: String,
    pub sizes: Vec<usize>,
    pub reports: Vec<CertificateReport>,
    /// Set when the case could not be evaluated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.reports.iter().all(|r| r.pass)
    }
}

/// Runs every case, spread over the available cores. Outcomes are returned
/// in case order.
pub fn run_suite(cases: &[EnsembleCase], cfg: &Config) -> Vec<SuiteOutcome> {
    let run_one = |case: &EnsembleCase| {
        let (reports, error) = match case.run(cfg) {
            Ok(r) => (r, None),
            Err(e) => (Vec::new(), Some(e.to_string())),
        };
        SuiteOutcome {
            id: case.id,
            inequality: case.inequality,
            function: case.function.text(),
            sizes: case.sizes(),
            reports,
            error,
        }
    };
    let workers = thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(cases.len().max(1));
    if workers <= 1 {
        return cases.iter().map(run_one).collect();
    }
    let mut outcomes: Vec<SuiteOutcome> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let run_one = &run_one;
                s.spawn(move || cases.iter().skip(w).step_by(workers).map(run_one).collect::<Vec<_>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("suite worker panicked")).collect()
    });
    outcomes.sort_by_key(|o| o.id);
    outcomes
}

/// Pass counts and worst ratio per inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub inequality: InequalityId,
    pub cases: usize,
    pub passed: usize,
    pub errors: usize,
    pub max_ratio: f64,
    pub max_raw_ratio: f64,
}

pub fn summarize(outcomes: &[SuiteOutcome]) -> Vec<SuiteSummary> {
    let mut out: Vec<SuiteSummary> = Vec::new();
    for o in outcomes {
        if o.error.is_some() {
            let s = entry(&mut out, o.inequality);
            s.cases += 1;
            s.errors += 1;
        }
        for r in &o.reports {
            let s = entry(&mut out, r.inequality);
            s.cases += 1;
            s.passed += r.pass as usize;
            s.max_ratio = s.max_ratio.max(r.ratio);
            s.max_raw_ratio = s.max_raw_ratio.max(r.raw_ratio);
        }
    }
    out.sort_by_key(|s| InequalityId::ALL.iter().position(|&i| i == s.inequality));
    out
}

fn entry(out: &mut Vec<SuiteSummary>, id: InequalityId) -> &mut SuiteSummary {
    if let Some(k) = out.iter().position(|s| s.inequality == id) {
        return &mut out[k];
    }
    out.push(SuiteSummary { inequality: id, cases: 0, passed: 0, errors: 0, max_ratio: 0.0, max_raw_ratio: 0.0 });
    out.last_mut().expect("just pushed")
}

/// One line per report, tab separated, with a header.
pub fn suite_summary_tsv(outcomes: &[SuiteOutcome]) -> String {
    let mut s = String::from("id\tinequality\tfunction\tsizes\tlhs\trhs_sup_sample\tconstant\traw_ratio\tratio\tpass\n");
    for o in outcomes {
        let sizes = o.sizes.iter().map(usize::to_string).collect::<Vec<_>>().join("x");
        if let Some(e) = &o.error {
            let _ = writeln!(s, "{}\t{}\t{}\t{}\t\t\t\t\t\terror: {}", o.id, o.inequality, o.function, sizes, e);
        }
        for r in &o.reports {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{:.10e}\t{:.10e}\t{:.6}\t{:.8}\t{:.8}\t{}",
                o.id, r.inequality, o.function, sizes, r.lhs, r.rhs_sup_sample, r.constant, r.raw_ratio, r.ratio, r.pass
            );
        }
    }
    s
}
