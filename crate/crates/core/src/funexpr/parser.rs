use num_complex::Complex64;

use super::{FunExpr, MatrixFunExpr, Node};
use crate::error::{Error, Result};

pub const MAX_ARITY: usize = 8;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, bool),
    Ident(String),
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    /// Next token and its byte offset.
    fn next(&mut self) -> Result<(Tok, usize)> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let Some(c) = rest.chars().next() else {
            return Ok((Tok::End, start));
        };
        if c.is_ascii_digit() || (c == '.' && rest[1..].starts_with(|d: char| d.is_ascii_digit())) {
            let bytes = rest.as_bytes();
            let mut i = 0;
            let mut integer = true;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                integer = false;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    integer = false;
                    i = j;
                }
            }
            let text = &rest[..i];
            let v: f64 = text
                .parse()
                .map_err(|_| Error::Syntax { offset: start, message: format!("bad number '{text}'") })?;
            self.pos += i;
            return Ok((Tok::Num(v, integer), start));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let len = rest
                .find(|d: char| !(d.is_ascii_alphanumeric() || d == '_'))
                .unwrap_or(rest.len());
            self.pos += len;
            return Ok((Tok::Ident(rest[..len].to_string()), start));
        }
        if "+-*/^()".contains(c) {
            self.pos += 1;
            return Ok((Tok::Op(c), start));
        }
        Err(Error::Syntax { offset: start, message: format!("unexpected character '{c}'") })
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
    tok: Tok,
    at: usize,
    arity: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, arity: usize) -> Result<Self> {
        let mut lex = Lexer { src, pos: 0 };
        let (tok, at) = lex.next()?;
        Ok(Self { lex, tok, at, arity })
    }

    fn bump(&mut self) -> Result<()> {
        let (tok, at) = self.lex.next()?;
        self.tok = tok;
        self.at = at;
        Ok(())
    }

    fn unexpected(&self) -> Error {
        let message = match &self.tok {
            Tok::End => "unexpected end of input".to_string(),
            Tok::Num(v, _) => format!("unexpected number {v}"),
            Tok::Ident(s) => format!("unexpected identifier '{s}'"),
            Tok::Op(c) => format!("unexpected '{c}'"),
        };
        Error::Syntax { offset: self.at, message }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            match self.tok {
                Tok::Op('+') => {
                    self.bump()?;
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Op('-') => {
                    self.bump()?;
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            match self.tok {
                Tok::Op('*') => {
                    self.bump()?;
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Op('/') => {
                    self.bump()?;
                    lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        match self.tok {
            Tok::Op('-') => {
                self.bump()?;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.bump()?;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if self.tok == Tok::Op('^') {
            self.bump()?;
            let k = self.exponent()?;
            return Ok(Node::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<u32> {
        let at = self.at;
        let k = match self.tok {
            Tok::Num(v, true) if v <= u32::MAX as f64 => v as u32,
            _ => return Err(Error::BadExponent { offset: at }),
        };
        self.bump()?;
        if self.tok == Tok::Op('^') {
            self.bump()?;
            let e = self.exponent()?;
            return k.checked_pow(e).ok_or(Error::BadExponent { offset: at });
        }
        Ok(k)
    }

    fn primary(&mut self) -> Result<Node> {
        match self.tok.clone() {
            Tok::Num(v, _) => {
                self.bump()?;
                Ok(Node::Const(Complex64::new(v, 0.0)))
            }
            Tok::Op('(') => {
                self.bump()?;
                let inner = self.expr()?;
                self.expect_close()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let at = self.at;
                self.bump()?;
                self.identifier(&name, at)
            }
            _ => Err(self.unexpected()),
        }
    }

    fn expect_close(&mut self) -> Result<()> {
        if self.tok != Tok::Op(')') {
            return Err(Error::Syntax { offset: self.at, message: "expected ')'".into() });
        }
        self.bump()
    }

    fn identifier(&mut self, name: &str, at: usize) -> Result<Node> {
        let func: Option<fn(Box<Node>) -> Node> = match name {
            "exp" => Some(Node::Exp),
            "log" => Some(Node::Log),
            "sin" => Some(Node::Sin),
            "cos" => Some(Node::Cos),
            "sqrt" => Some(Node::Sqrt),
            _ => None,
        };
        if let Some(make) = func {
            if self.tok != Tok::Op('(') {
                return Err(Error::Syntax { offset: self.at, message: format!("expected '(' after {name}") });
            }
            self.bump()?;
            let arg = self.expr()?;
            self.expect_close()?;
            return Ok(make(Box::new(arg)));
        }
        match name {
            "i" => return Ok(Node::Const(Complex64::new(0.0, 1.0))),
            "pi" => return Ok(Node::Const(Complex64::new(std::f64::consts::PI, 0.0))),
            _ => {}
        }
        let index = match name {
            "x" => Some(1),
            "y" => Some(2),
            _ => name
                .strip_prefix('x')
                .filter(|d| d.len() == 1)
                .and_then(|d| d.parse::<usize>().ok())
                .filter(|&k| (1..=MAX_ARITY).contains(&k)),
        };
        match index {
            Some(k) if k <= self.arity => Ok(Node::Var(k - 1)),
            Some(k) => Err(Error::Syntax {
                offset: at,
                message: format!("variable '{name}' is x{k} but the expression has arity {}", self.arity),
            }),
            None => Err(Error::UnknownIdentifier { name: name.to_string(), offset: at }),
        }
    }
}

fn check_arity(arity: usize) -> Result<()> {
    if arity == 0 || arity > MAX_ARITY {
        return Err(Error::InvalidParameter(format!("arity must be in 1..={MAX_ARITY}, got {arity}")));
    }
    Ok(())
}

pub fn parse(text: &str, arity: usize) -> Result<FunExpr> {
    check_arity(arity)?;
    let mut p = Parser::new(text, arity)?;
    let root = p.expr()?;
    if p.tok != Tok::End {
        return Err(p.unexpected());
    }
    Ok(FunExpr { root, arity })
}

fn shift(err: Error, by: usize) -> Error {
    match err {
        Error::Syntax { offset, message } => Error::Syntax { offset: offset + by, message },
        Error::UnknownIdentifier { name, offset } => Error::UnknownIdentifier { name, offset: offset + by },
        Error::BadExponent { offset } => Error::BadExponent { offset: offset + by },
        other => other,
    }
}

pub fn parse_matrix(text: &str, arity: usize) -> Result<MatrixFunExpr> {
    check_arity(arity)?;
    let trimmed_start = text.len() - text.trim_start().len();
    let body = text.trim();
    if !body.starts_with('[') {
        return parse(text, arity).map(MatrixFunExpr::scalar);
    }
    if !body.ends_with(']') {
        return Err(Error::Syntax { offset: trimmed_start + body.len(), message: "expected ']'".into() });
    }
    let inner_start = trimmed_start + 1;
    let inner = &body[1..body.len() - 1];
    let mut rows: Vec<Vec<FunExpr>> = vec![Vec::new()];
    let mut depth = 0i32;
    let mut cell_start = 0;
    let push_cell = |rows: &mut Vec<Vec<FunExpr>>, from: usize, to: usize| -> Result<()> {
        let cell = &inner[from..to];
        let f = parse(cell, arity).map_err(|e| shift(e, inner_start + from))?;
        rows.last_mut().expect("at least one row").push(f);
        Ok(())
    };
    for (i, c) in inner.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' | ';' if depth == 0 => {
                push_cell(&mut rows, cell_start, i)?;
                if c == ';' {
                    rows.push(Vec::new());
                }
                cell_start = i + 1;
            }
            _ => {}
        }
    }
    push_cell(&mut rows, cell_start, inner.len())?;
    let cols = rows[0].len();
    if let Some(r) = rows.iter().position(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch(format!(
            "row {} has {} entries, expected {cols}",
            r + 1,
            rows[r].len()
        )));
    }
    let n_rows = rows.len();
    MatrixFunExpr::new(n_rows, cols, rows.into_iter().flatten().collect())
}
