//! Analytic scalar expressions in `x₁…x_d`: parsing, evaluation, symbolic
//! differentiation, divided differences, and matrix-valued grids.

mod diff;
mod parser;
mod probe;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use diff::Polynomial;
pub use parser::MAX_ARITY;
pub use probe::{analyticity_probe, analyticity_probe_with, ProbeOptions};

type C = Complex64;

/// Expression tree node. Variables are 0-based (`Var(0)` is `x1`).
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(C),
    Var(usize),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    Pow(Box<Node>, u32),
    Exp(Box<Node>),
    Log(Box<Node>),
    Sin(Box<Node>),
    Cos(Box<Node>),
    Sqrt(Box<Node>),
}

/// Parsed expression with a declared arity.
#[derive(Debug, Clone, PartialEq)]
pub struct FunExpr {
    root: Node,
    arity: usize,
}

/// Anything that can be evaluated at a point of `ℂ^d`.
pub trait ScalarFunction: Send + Sync {
    fn arity(&self) -> usize;

    fn eval(&self, point: &[C]) -> Result<C>;

    /// Like [`eval`](Self::eval), also recording the arguments of every
    /// principal-branch node (`log`, `sqrt`) in evaluation order.
    fn eval_traced(&self, point: &[C], _branch_args: &mut Vec<C>) -> Result<C> {
        self.eval(point)
    }
}

impl FunExpr {
    pub fn parse(text: &str, arity: usize) -> Result<Self> {
        parser::parse(text, arity)
    }

    pub fn from_node(root: Node, arity: usize) -> Result<Self> {
        if arity == 0 || arity > MAX_ARITY {
            return Err(Error::InvalidParameter(format!("arity must be in 1..={MAX_ARITY}, got {arity}")));
        }
        if let Some(v) = max_var(&root) {
            if v >= arity {
                return Err(Error::Arity { expected: arity, got: v + 1 });
            }
        }
        Ok(Self { root, arity })
    }

    pub fn constant(value: C, arity: usize) -> Self {
        Self { root: Node::Const(value), arity }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Same tree with a larger declared arity.
    pub fn with_arity(&self, arity: usize) -> Result<Self> {
        Self::from_node(self.root.clone(), arity)
    }

    pub fn eval(&self, point: &[C]) -> Result<C> {
        self.check_point(point)?;
        eval_node(&self.root, point, &mut None)
    }

    fn check_point(&self, point: &[C]) -> Result<()> {
        if point.len() != self.arity {
            return Err(Error::Arity { expected: self.arity, got: point.len() });
        }
        Ok(())
    }

    /// Partial derivative with respect to variable `var` (1-based).
    pub fn diff(&self, var: usize) -> Result<FunExpr> {
        if var == 0 || var > self.arity {
            return Err(Error::InvalidParameter(format!("variable index {var} outside 1..={}", self.arity)));
        }
        Ok(Self { root: diff::diff(&self.root, var - 1), arity: self.arity })
    }

    /// Expanded polynomial form, when the tree is a polynomial.
    pub fn to_polynomial(&self) -> Option<Polynomial> {
        diff::polynomial(&self.root, self.arity)
    }

    /// `αf + βg` as a tree.
    pub fn linear_combination(alpha: C, f: &FunExpr, beta: C, g: &FunExpr) -> Result<FunExpr> {
        let arity = f.arity.max(g.arity);
        let root = Node::Add(
            Box::new(Node::Mul(Box::new(Node::Const(alpha)), Box::new(f.root.clone()))),
            Box::new(Node::Mul(Box::new(Node::Const(beta)), Box::new(g.root.clone()))),
        );
        Self::from_node(root, arity)
    }

    /// `f(x_{σ(1)}, …)`: variable `k` is replaced by variable `perm[k]`.
    pub fn permute_vars(&self, perm: &[usize]) -> Result<FunExpr> {
        if perm.len() != self.arity || perm.iter().any(|&p| p >= self.arity) {
            return Err(Error::InvalidParameter("permutation does not match arity".into()));
        }
        Ok(Self { root: map_vars(&self.root, perm), arity: self.arity })
    }

    pub fn divided_difference(&self) -> Result<DividedDifferenceExpr> {
        DividedDifferenceExpr::new(self.clone(), DEFAULT_EPS_DD)
    }
}

impl ScalarFunction for FunExpr {
    fn arity(&self) -> usize {
        self.arity
    }

    fn eval(&self, point: &[C]) -> Result<C> {
        FunExpr::eval(self, point)
    }

    fn eval_traced(&self, point: &[C], branch_args: &mut Vec<C>) -> Result<C> {
        self.check_point(point)?;
        eval_node(&self.root, point, &mut Some(branch_args))
    }
}

fn max_var(n: &Node) -> Option<usize> {
    match n {
        Node::Const(_) => None,
        Node::Var(k) => Some(*k),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => max_var(a).max(max_var(b)),
        Node::Neg(a) | Node::Pow(a, _) | Node::Exp(a) | Node::Log(a) | Node::Sin(a) | Node::Cos(a) | Node::Sqrt(a) => {
            max_var(a)
        }
    }
}

fn map_vars(n: &Node, perm: &[usize]) -> Node {
    let m = |a: &Node| Box::new(map_vars(a, perm));
    match n {
        Node::Const(c) => Node::Const(*c),
        Node::Var(k) => Node::Var(perm[*k]),
        Node::Add(a, b) => Node::Add(m(a), m(b)),
        Node::Sub(a, b) => Node::Sub(m(a), m(b)),
        Node::Mul(a, b) => Node::Mul(m(a), m(b)),
        Node::Div(a, b) => Node::Div(m(a), m(b)),
        Node::Neg(a) => Node::Neg(m(a)),
        Node::Pow(a, k) => Node::Pow(m(a), *k),
        Node::Exp(a) => Node::Exp(m(a)),
        Node::Log(a) => Node::Log(m(a)),
        Node::Sin(a) => Node::Sin(m(a)),
        Node::Cos(a) => Node::Cos(m(a)),
        Node::Sqrt(a) => Node::Sqrt(m(a)),
    }
}

fn domain(n: &Node) -> Error {
    Error::EvalDomain { node: n.to_string() }
}

fn finite(v: C, n: &Node) -> Result<C> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(domain(n))
    }
}

fn eval_node(n: &Node, x: &[C], trace: &mut Option<&mut Vec<C>>) -> Result<C> {
    let v = match n {
        Node::Const(c) => *c,
        Node::Var(k) => x[*k],
        Node::Add(a, b) => eval_node(a, x, trace)? + eval_node(b, x, trace)?,
        Node::Sub(a, b) => eval_node(a, x, trace)? - eval_node(b, x, trace)?,
        Node::Mul(a, b) => eval_node(a, x, trace)? * eval_node(b, x, trace)?,
        Node::Div(a, b) => {
            let num = eval_node(a, x, trace)?;
            let den = eval_node(b, x, trace)?;
            if den.re == 0.0 && den.im == 0.0 {
                return Err(domain(n));
            }
            num / den
        }
        Node::Neg(a) => -eval_node(a, x, trace)?,
        Node::Pow(a, k) => eval_node(a, x, trace)?.powu(*k),
        Node::Exp(a) => eval_node(a, x, trace)?.exp(),
        Node::Sin(a) => eval_node(a, x, trace)?.sin(),
        Node::Cos(a) => eval_node(a, x, trace)?.cos(),
        Node::Log(a) | Node::Sqrt(a) => {
            let arg = eval_node(a, x, trace)?;
            if let Some(t) = trace.as_mut() {
                t.push(arg);
            }
            if arg.re == 0.0 && arg.im == 0.0 {
                return Err(domain(n));
            }
            if matches!(n, Node::Log(_)) { arg.ln() } else { arg.sqrt() }
        }
    };
    finite(v, n)
}

fn fmt_const(c: C, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let real = |v: f64, f: &mut fmt::Formatter<'_>| {
        if v.is_sign_negative() { write!(f, "(-{:?})", -v) } else { write!(f, "{v:?}") }
    };
    if c.im == 0.0 && !c.im.is_sign_negative() {
        real(c.re, f)
    } else {
        write!(f, "(")?;
        real(c.re, f)?;
        write!(f, "+")?;
        real(c.im, f)?;
        write!(f, "*i)")
    }
}

/// Fully parenthesized infix form that reparses to an identical tree value.
impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) => fmt_const(*c, f),
            Node::Var(k) => write!(f, "x{}", k + 1),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Pow(a, k) => write!(f, "({a}^{k})"),
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Log(a) => write!(f, "log({a})"),
            Node::Sin(a) => write!(f, "sin({a})"),
            Node::Cos(a) => write!(f, "cos({a})"),
            Node::Sqrt(a) => write!(f, "sqrt({a})"),
        }
    }
}

impl fmt::Display for FunExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

/// Default switch threshold between the difference quotient and the
/// midpoint derivative.
pub const DEFAULT_EPS_DD: f64 = 1e-6;

/// `f^[1](x, y)`: `(f(x) − f(y))/(x − y)` away from the diagonal, `f′` of
/// the midpoint near it.
#[derive(Debug, Clone, PartialEq)]
pub struct DividedDifferenceExpr {
    pub base: FunExpr,
    pub derived: FunExpr,
    pub switch_threshold: f64,
}

impl DividedDifferenceExpr {
    pub fn new(base: FunExpr, switch_threshold: f64) -> Result<Self> {
        if base.arity() != 1 {
            return Err(Error::Arity { expected: 1, got: base.arity() });
        }
        let derived = base.diff(1)?;
        Ok(Self { base, derived, switch_threshold })
    }

    pub fn eval2(&self, x: C, y: C) -> Result<C> {
        self.eval_impl(x, y, &mut None)
    }

    fn eval_impl(&self, x: C, y: C, trace: &mut Option<&mut Vec<C>>) -> Result<C> {
        let d = x - y;
        if d.norm() > self.switch_threshold * (1.0 + x.norm() + y.norm()) {
            let fx = eval_node(self.base.root(), &[x], trace)?;
            let fy = eval_node(self.base.root(), &[y], trace)?;
            Ok((fx - fy) / d)
        } else {
            eval_node(self.derived.root(), &[(x + y) * 0.5], trace)
        }
    }
}

impl ScalarFunction for DividedDifferenceExpr {
    fn arity(&self) -> usize {
        2
    }

    fn eval(&self, point: &[C]) -> Result<C> {
        if point.len() != 2 {
            return Err(Error::Arity { expected: 2, got: point.len() });
        }
        self.eval2(point[0], point[1])
    }

    fn eval_traced(&self, point: &[C], branch_args: &mut Vec<C>) -> Result<C> {
        if point.len() != 2 {
            return Err(Error::Arity { expected: 2, got: point.len() });
        }
        self.eval_impl(point[0], point[1], &mut Some(branch_args))
    }
}

/// `(x₁,…,x_d) ↦ g(x_{p(1)},…)` for a variable permutation `p`.
pub struct Permuted<'a> {
    inner: &'a dyn ScalarFunction,
    perm: Vec<usize>,
}

impl<'a> Permuted<'a> {
    pub fn new(inner: &'a dyn ScalarFunction, perm: Vec<usize>) -> Self {
        Self { inner, perm }
    }
}

impl ScalarFunction for Permuted<'_> {
    fn arity(&self) -> usize {
        self.inner.arity()
    }

    fn eval(&self, point: &[C]) -> Result<C> {
        let p: Vec<C> = self.perm.iter().map(|&k| point[k]).collect();
        self.inner.eval(&p)
    }
}

/// Grid of expressions sharing one arity, the matrix-valued `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFunExpr {
    rows: usize,
    cols: usize,
    entries: Vec<Arc<FunExpr>>,
    arity: usize,
}

impl MatrixFunExpr {
    /// Row-major entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<FunExpr>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} function grid",
                entries.len()
            )));
        }
        let arity = entries[0].arity();
        if let Some(bad) = entries.iter().find(|e| e.arity() != arity) {
            return Err(Error::Arity { expected: arity, got: bad.arity() });
        }
        Ok(Self { rows, cols, entries: entries.into_iter().map(Arc::new).collect(), arity })
    }

    pub fn scalar(f: FunExpr) -> Self {
        let arity = f.arity();
        Self { rows: 1, cols: 1, entries: vec![Arc::new(f)], arity }
    }

    /// Parses `[a, b; c, d]` (rows separated by `;`) or a bare expression.
    pub fn parse(text: &str, arity: usize) -> Result<Self> {
        parser::parse_matrix(text, arity)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn entry(&self, i: usize, j: usize) -> &FunExpr {
        &self.entries[i * self.cols + j]
    }

    /// `F(point)` as a `rows × cols` matrix.
    pub fn eval(&self, point: &[C]) -> Result<crate::linalg::ComplexMatrix> {
        let vals = self.entries.iter().map(|e| e.eval(point)).collect::<Result<Vec<_>>>()?;
        crate::linalg::ComplexMatrix::new(self.rows, self.cols, vals)
    }

    pub fn eval_traced(&self, point: &[C], branch_args: &mut Vec<C>) -> Result<crate::linalg::ComplexMatrix> {
        let vals = self
            .entries
            .iter()
            .map(|e| e.eval_traced(point, branch_args))
            .collect::<Result<Vec<_>>>()?;
        crate::linalg::ComplexMatrix::new(self.rows, self.cols, vals)
    }
}

impl fmt::Display for MatrixFunExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.entry(i, j))?;
            }
        }
        write!(f, "]")
    }
}
