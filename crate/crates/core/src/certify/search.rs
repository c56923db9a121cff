//! Hill-climbing search for pairs `(A, B)` with a large raw ratio
//! `‖f{A,B}‖₂ / ‖f‖_{W(A)×W(B)}`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{sup_on_range_product, FunctionGrid};
use crate::error::{Error, Result};
use crate::fieldvals::{contour_for, numrange};
use crate::linalg::{spectral_norm, ComplexMatrix};
use crate::matfun::{eval_bivariate_grid, QuadratureSpec};
use crate::random::{self, MatrixRng};

type C = Complex64;

const LEADERBOARD: usize = 10;
const STAGNATION: usize = 50;
const STEP: f64 = 0.05;
/// Relative gain below which a move counts as no improvement.
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub sizes: (usize, usize),
    pub iterations: usize,
    pub seed: u64,
    /// Restrict to normal pairs by moving eigenvalues only.
    pub normal_only: bool,
    pub quadrature: QuadratureSpec,
    pub angles: usize,
    pub samples: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            sizes: (2, 2),
            iterations: 1000,
            seed: 0,
            normal_only: false,
            quadrature: QuadratureSpec { nodes_per_contour: 64, adaptive: true, rel_tol: 1e-8, max_nodes: 512 },
            angles: 180,
            samples: 48,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    /// Evaluation counter when this pair was found.
    pub id: usize,
    pub raw_ratio: f64,
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub function: String,
    pub options: SearchOptions,
    /// Best pairs by `(raw_ratio desc, id asc)`.
    pub leaderboard: Vec<LeaderboardEntry>,
    pub evaluations: usize,
    pub restarts: usize,
}

impl SearchOutcome {
    pub fn incumbent(&self) -> f64 {
        self.leaderboard.first().map_or(f64::NEG_INFINITY, |e| e.raw_ratio)
    }
}

/// A point of the search space: for normal pairs the eigenvalues and fixed
/// unitary eigenbases, otherwise the matrices themselves.
#[derive(Clone)]
enum State {
    General(ComplexMatrix, ComplexMatrix),
    Normal { ua: ComplexMatrix, la: Vec<C>, ub: ComplexMatrix, lb: Vec<C> },
}

fn unitary_similarity(u: &ComplexMatrix, l: &[C]) -> ComplexMatrix {
    &(u * &ComplexMatrix::from_diagonal(l)) * &u.adjoint()
}

impl State {
    fn matrices(&self) -> (ComplexMatrix, ComplexMatrix) {
        match self {
            State::General(a, b) => (a.clone(), b.clone()),
            State::Normal { ua, la, ub, lb } => (unitary_similarity(ua, la), unitary_similarity(ub, lb)),
        }
    }

    fn random(rng: &mut MatrixRng, (na, nb): (usize, usize), normal: bool) -> Self {
        if normal {
            let mut spectrum = |n| (0..n).map(|_| random::complex_normal(rng)).collect::<Vec<C>>();
            let (la, lb) = (spectrum(na), spectrum(nb));
            State::Normal { ua: random::unitary(rng, na), la, ub: random::unitary(rng, nb), lb }
        } else {
            State::General(random::ginibre(rng, na), random::ginibre(rng, nb))
        }
    }

    /// Adds `0.05‖M‖ z` with `z` complex Gaussian to one entry of one of the
    /// two matrices (one eigenvalue for normal pairs).
    fn perturbed(&self, rng: &mut MatrixRng) -> Self {
        let second = rng.random_bool(0.5);
        let mut next = self.clone();
        match &mut next {
            State::General(a, b) => {
                let m = if second { b } else { a };
                let size = STEP * spectral_norm(m).max(f64::MIN_POSITIVE);
                let (i, j) = (rng.random_range(0..m.rows()), rng.random_range(0..m.cols()));
                let z = m.get(i, j) + random::complex_normal(rng) * size;
                m.set(i, j, z);
            }
            State::Normal { la, lb, .. } => {
                let l = if second { lb } else { la };
                let size = STEP * l.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
                let k = rng.random_range(0..l.len());
                l[k] += random::complex_normal(rng) * size;
            }
        }
        next
    }
}

/// Raw ratio `‖f{A,B}‖₂ / sampled sup |f|` with the search's cheap settings.
pub fn raw_ratio(f: &FunctionGrid, a: &ComplexMatrix, b: &ComplexMatrix, opts: &SearchOptions) -> Result<f64> {
    let (_, ga) = contour_for(a, opts.angles, None)?;
    let (_, gb) = contour_for(b, opts.angles, None)?;
    let (lhs, _) = eval_bivariate_grid(&f.entries(), f.shape().1, a, b, &ga, &gb, &opts.quadrature)?.spectral_norm()?;
    let (na, nb) = (numrange(a, opts.angles)?, numrange(b, opts.angles)?);
    let sup = sup_on_range_product(f, &[&na, &nb], opts.samples)?;
    Ok(super::quotient(lhs, sup.value))
}

fn score(f: &FunctionGrid, state: &State, opts: &SearchOptions) -> f64 {
    let (a, b) = state.matrices();
    raw_ratio(f, &a, &b, opts).ok().filter(|r| r.is_finite()).unwrap_or(f64::NEG_INFINITY)
}

fn record(board: &mut Vec<LeaderboardEntry>, id: usize, ratio: f64, state: &State) {
    if !ratio.is_finite() {
        return;
    }
    let (a, b) = state.matrices();
    board.push(LeaderboardEntry { id, raw_ratio: ratio, a, b });
    board.sort_by(|x, y| y.raw_ratio.total_cmp(&x.raw_ratio).then(x.id.cmp(&y.id)));
    board.truncate(LEADERBOARD);
}

/// Hill climbing on the raw ratio of a bivariate `f`, accepting improvements
/// by more than a relative `1e-12` and restarting from a random pair after 50 rejected moves.
/// The first start is the nilpotent Jordan pair (a random normal pair when
/// `normal_only`). Deterministic for a fixed seed.
pub fn extremal_search(f: &FunctionGrid, opts: &SearchOptions) -> Result<SearchOutcome> {
    f.require_arity(2)?;
    let (na, nb) = opts.sizes;
    if na == 0 || nb == 0 {
        return Err(Error::InvalidParameter("search sizes must be positive".into()));
    }
    opts.quadrature.validate()?;
    let mut rng = random::rng(opts.seed);
    let mut state = if opts.normal_only {
        State::random(&mut rng, opts.sizes, true)
    } else {
        let zero = C::new(0.0, 0.0);
        State::General(random::jordan_block(na, zero), random::jordan_block(nb, zero))
    };
    let mut current = score(f, &state, opts);
    let mut board = Vec::new();
    let mut evaluations = 1;
    let mut restarts = 0;
    let mut stagnant = 0;
    record(&mut board, 0, current, &state);
    for _ in 0..opts.iterations {
        if stagnant >= STAGNATION {
            state = State::random(&mut rng, opts.sizes, opts.normal_only);
            current = score(f, &state, opts);
            evaluations += 1;
            restarts += 1;
            stagnant = 0;
            record(&mut board, evaluations, current, &state);
            continue;
        }
        let candidate = state.perturbed(&mut rng);
        let value = score(f, &candidate, opts);
        evaluations += 1;
        let threshold = if current.is_finite() { current + MIN_GAIN * current.abs() } else { current };
        if value > threshold {
            state = candidate;
            current = value;
            stagnant = 0;
            record(&mut board, evaluations, current, &state);
        } else {
            stagnant += 1;
        }
    }
    Ok(SearchOutcome { function: f.label().to_string(), options: *opts, leaderboard: board, evaluations, restarts })
}
