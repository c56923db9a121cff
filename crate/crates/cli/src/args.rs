use std::path::PathBuf;

use bivarfun::certify::InequalityId;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::settings::ConfigFlags;

#[derive(Debug, Parser)]
#[command(name = "bivarfun", version, about = "Bivariate matrix functions and their numerical-range bounds")]
pub struct Cli {
    #[command(flatten)]
    pub config: ConfigFlags,
    /// Write the report here instead of stdout
    #[arg(long, short, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Approximate the numerical range boundary of a matrix
    Numrange(NumrangeArgs),
    /// Evaluate f(A), F(A), f{A,B} or F{A,B}
    Eval(EvalArgs),
    /// Evaluate f{A1,...,Ad} in Kronecker form
    EvalMulti(EvalMultiArgs),
    /// Frechet derivative norm against its numerical-range bound
    Frechet(FrechetArgs),
    /// Rank-one Krylov approximation of f{A,B} vec(c_A c_B^T)
    Krylov(KrylovArgs),
    /// Certify an inequality on given matrices or an ensemble
    Certify(CertifyArgs),
    /// Check the Cauchy-dual lemmas on a contour
    LemmaHarness(LemmaArgs),
    /// Hill-climbing search for large bivariate ratios
    Search(SearchArgs),
    /// Run a JSON or TOML job file
    Job(JobArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Numrange(_) => "numrange",
            Command::Eval(_) => "eval",
            Command::EvalMulti(_) => "eval-multi",
            Command::Frechet(_) => "frechet",
            Command::Krylov(_) => "krylov",
            Command::Certify(_) => "certify",
            Command::LemmaHarness(_) => "lemma-harness",
            Command::Search(_) => "search",
            Command::Job(_) => "job",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args, Serialize)]
pub struct NumrangeArgs {
    #[arg(long = "A", value_name = "PATH")]
    pub a: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    /// Scalar or bracketed matrix-valued expression
    #[arg(long = "fn", value_name = "EXPR")]
    pub function: String,
    #[arg(long = "A", value_name = "PATH")]
    pub a: PathBuf,
    /// Second matrix; makes the evaluation bivariate
    #[arg(long = "B", value_name = "PATH")]
    pub b: Option<PathBuf>,
    /// Write the evaluated matrix (JSON, or Matrix Market for .mtx)
    #[arg(long, value_name = "PATH")]
    pub matrix_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalMultiArgs {
    #[arg(long = "fn", value_name = "EXPR")]
    pub function: String,
    /// One matrix per variable, in order
    #[arg(long = "mat", value_name = "PATH", required = true)]
    pub mats: Vec<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub matrix_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FrechetArgs {
    #[arg(long = "fn", value_name = "EXPR")]
    pub function: String,
    #[arg(long = "A", value_name = "PATH")]
    pub a: PathBuf,
    /// Direction; reports Df{A}(E) checked against the block-matrix formula
    #[arg(long = "E", value_name = "PATH")]
    pub e: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub matrix_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct KrylovArgs {
    #[arg(long = "fn", value_name = "EXPR")]
    pub function: String,
    #[arg(long = "A", value_name = "PATH")]
    pub a: PathBuf,
    #[arg(long = "B", value_name = "PATH")]
    pub b: PathBuf,
    /// Column vector for A (default all ones)
    #[arg(long = "ca", value_name = "PATH")]
    pub ca: Option<PathBuf>,
    /// Column vector for B (default all ones)
    #[arg(long = "cb", value_name = "PATH")]
    pub cb: Option<PathBuf>,
    #[arg(long, short)]
    pub k: usize,
    #[arg(long, short)]
    pub l: usize,
    /// Compare against the full evaluation when dim(A)·dim(B) is at most this
    #[arg(long, default_value_t = 4096)]
    pub exact_cap: usize,
    /// Largest interpolation degree in the a priori bound
    #[arg(long, default_value_t = 20)]
    pub degree_cap: usize,
    #[arg(long, value_name = "PATH")]
    pub matrix_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CertifyArgs {
    /// Inequality to certify; filters the cases of an ensemble
    #[arg(long, value_parser = parse_inequality)]
    pub inequality: Option<InequalityId>,
    #[arg(long = "fn", value_name = "EXPR")]
    pub function: Option<String>,
    /// Use the divided difference of the univariate --fn
    #[arg(long)]
    pub divdiff: bool,
    #[arg(long = "A", value_name = "PATH")]
    pub a: Option<PathBuf>,
    #[arg(long = "B", value_name = "PATH")]
    pub b: Option<PathBuf>,
    /// Further matrices, appended after A and B
    #[arg(long = "mat", value_name = "PATH")]
    pub mats: Vec<PathBuf>,
    /// Contour JSON for the lemma checks
    #[arg(long, value_name = "PATH")]
    pub contour: Option<PathBuf>,
    /// JSON array of ensemble cases
    #[arg(long, value_name = "PATH", conflicts_with_all = ["function", "a"])]
    pub ensemble: Option<PathBuf>,
    /// Seed of the generated standard ensemble
    #[arg(long, conflicts_with_all = ["function", "a", "ensemble"])]
    pub seed: Option<u64>,
    /// Size of the generated standard ensemble
    #[arg(long, default_value_t = 210)]
    pub count: usize,
    /// Also write a per-case summary table
    #[arg(long, value_name = "PATH")]
    pub tsv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct LemmaArgs {
    /// Univariate scalar or matrix-valued expression
    #[arg(long = "fn", value_name = "EXPR")]
    pub function: String,
    #[arg(long = "A", value_name = "PATH")]
    pub a: PathBuf,
    /// Contour JSON; default encloses W(A)
    #[arg(long, value_name = "PATH")]
    pub contour: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SearchArgs {
    #[arg(long = "fn", value_name = "EXPR")]
    pub function: String,
    #[arg(long)]
    pub divdiff: bool,
    /// Sizes of A and B, as "nA,nB"
    #[arg(long, default_value = "2,2", value_parser = parse_sizes)]
    pub sizes: (usize, usize),
    #[arg(long, default_value_t = 1000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Restrict to normal pairs
    #[arg(long)]
    pub normal_only: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct JobArgs {
    pub path: PathBuf,
}

fn parse_inequality(s: &str) -> Result<InequalityId, String> {
    s.parse().map_err(|e: bivarfun::error::Error| e.to_string())
}

fn parse_sizes(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected nA,nB, got {s:?}"))?;
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok((num(a)?, num(b)?))
}
