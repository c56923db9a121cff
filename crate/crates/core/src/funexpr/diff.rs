use std::collections::BTreeMap;

use num_complex::Complex64;

use super::Node;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

fn is_const(n: &Node, v: C) -> bool {
    matches!(n, Node::Const(c) if *c == v)
}

fn add(a: Node, b: Node) -> Node {
    if is_const(&a, ZERO) {
        b
    } else if is_const(&b, ZERO) {
        a
    } else {
        Node::Add(Box::new(a), Box::new(b))
    }
}

fn sub(a: Node, b: Node) -> Node {
    if is_const(&b, ZERO) {
        a
    } else if is_const(&a, ZERO) {
        neg(b)
    } else {
        Node::Sub(Box::new(a), Box::new(b))
    }
}

fn neg(a: Node) -> Node {
    match a {
        Node::Const(c) => Node::Const(-c),
        other => Node::Neg(Box::new(other)),
    }
}

fn mul(a: Node, b: Node) -> Node {
    if is_const(&a, ZERO) || is_const(&b, ZERO) {
        Node::Const(ZERO)
    } else if is_const(&a, ONE) {
        b
    } else if is_const(&b, ONE) {
        a
    } else {
        Node::Mul(Box::new(a), Box::new(b))
    }
}

fn div(a: Node, b: Node) -> Node {
    if is_const(&a, ZERO) {
        Node::Const(ZERO)
    } else if is_const(&b, ONE) {
        a
    } else {
        Node::Div(Box::new(a), Box::new(b))
    }
}

fn pow(a: Node, k: u32) -> Node {
    match k {
        0 => Node::Const(ONE),
        1 => a,
        _ => Node::Pow(Box::new(a), k),
    }
}

/// `∂n/∂x_var` with 0/1 folding.
pub fn diff(n: &Node, var: usize) -> Node {
    let d = |a: &Node| diff(a, var);
    match n {
        Node::Const(_) => Node::Const(ZERO),
        Node::Var(k) => Node::Const(if *k == var { ONE } else { ZERO }),
        Node::Add(a, b) => add(d(a), d(b)),
        Node::Sub(a, b) => sub(d(a), d(b)),
        Node::Neg(a) => neg(d(a)),
        Node::Mul(a, b) => add(mul(d(a), (**b).clone()), mul((**a).clone(), d(b))),
        Node::Div(a, b) => {
            let num = sub(mul(d(a), (**b).clone()), mul((**a).clone(), d(b)));
            div(num, pow((**b).clone(), 2))
        }
        Node::Pow(a, k) => {
            if *k == 0 {
                return Node::Const(ZERO);
            }
            let outer = mul(Node::Const(C::new(*k as f64, 0.0)), pow((**a).clone(), k - 1));
            mul(outer, d(a))
        }
        Node::Exp(a) => mul(Node::Exp(a.clone()), d(a)),
        Node::Log(a) => div(d(a), (**a).clone()),
        Node::Sin(a) => mul(Node::Cos(a.clone()), d(a)),
        Node::Cos(a) => mul(neg(Node::Sin(a.clone())), d(a)),
        Node::Sqrt(a) => div(d(a), mul(Node::Const(C::new(2.0, 0.0)), Node::Sqrt(a.clone()))),
    }
}

/// Expanded multivariate polynomial: exponent vector → coefficient.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    pub arity: usize,
    pub terms: BTreeMap<Vec<u32>, C>,
}

impl Polynomial {
    fn constant(arity: usize, c: C) -> Self {
        let mut terms = BTreeMap::new();
        if c != ZERO {
            terms.insert(vec![0; arity], c);
        }
        Self { arity, terms }
    }

    fn var(arity: usize, k: usize) -> Self {
        let mut e = vec![0; arity];
        e[k] = 1;
        Self { arity, terms: BTreeMap::from([(e, ONE)]) }
    }

    fn add_scaled(&self, other: &Self, s: C) -> Self {
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            *terms.entry(e.clone()).or_insert(ZERO) += s * c;
        }
        Self { arity: self.arity, terms }
    }

    fn mul(&self, other: &Self) -> Self {
        let mut terms: BTreeMap<Vec<u32>, C> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *terms.entry(e).or_insert(ZERO) += ca * cb;
            }
        }
        Self { arity: self.arity, terms }
    }

    fn scale(&self, s: C) -> Self {
        Self { arity: self.arity, terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect() }
    }

    fn as_constant(&self) -> Option<C> {
        match self.terms.len() {
            0 => Some(ZERO),
            1 => self.terms.get(&vec![0; self.arity]).copied(),
            _ => None,
        }
    }

    /// Largest exponent of variable `k` (0-based) over all terms.
    pub fn degree_in(&self, k: usize) -> u32 {
        self.terms.iter().filter(|(_, c)| **c != ZERO).map(|(e, _)| e[k]).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[C]) -> C {
        self.terms
            .iter()
            .map(|(e, c)| e.iter().zip(x).fold(*c, |acc, (k, xi)| acc * xi.powu(*k)))
            .sum()
    }
}

/// Expansion of a tree built from constants, variables, `+ − *`, integer
/// powers, and division by constants.
pub fn polynomial(n: &Node, arity: usize) -> Option<Polynomial> {
    let p = |a: &Node| polynomial(a, arity);
    Some(match n {
        Node::Const(c) => Polynomial::constant(arity, *c),
        Node::Var(k) => Polynomial::var(arity, *k),
        Node::Add(a, b) => p(a)?.add_scaled(&p(b)?, ONE),
        Node::Sub(a, b) => p(a)?.add_scaled(&p(b)?, -ONE),
        Node::Neg(a) => p(a)?.scale(-ONE),
        Node::Mul(a, b) => p(a)?.mul(&p(b)?),
        Node::Div(a, b) => {
            let d = p(b)?.as_constant()?;
            if d == ZERO {
                return None;
            }
            p(a)?.scale(ONE / d)
        }
        Node::Pow(a, k) => {
            let base = p(a)?;
            let mut acc = Polynomial::constant(arity, ONE);
            for _ in 0..*k {
                acc = acc.mul(&base);
            }
            acc
        }
        Node::Exp(_) | Node::Log(_) | Node::Sin(_) | Node::Cos(_) | Node::Sqrt(_) => return None,
    })
}
