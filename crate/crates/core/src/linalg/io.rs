//! Matrix file formats: JSON (`{"rows", "cols", "entries": [[re, im], …]}`,
//! row-major) and Matrix Market (array or coordinate, real/integer/complex).

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ComplexMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.row_major_entries().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;
    fn try_from(j: MatrixJson) -> Result<Self> {
        let entries = j.entries.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        ComplexMatrix::new(j.rows, j.cols, entries)
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        MatrixJson::deserialize(d)?.try_into().map_err(serde::de::Error::custom)
    }
}

pub fn read_matrix_json(text: &str) -> Result<ComplexMatrix> {
    let j: MatrixJson = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    j.try_into()
}

pub fn write_matrix_json(m: &ComplexMatrix) -> String {
    serde_json::to_string(&MatrixJson::from(m)).expect("finite matrix serializes")
}

#[derive(Clone, Copy, PartialEq)]
enum Field {
    Real,
    Complex,
}

#[derive(Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64> {
    tok.ok_or_else(|| Error::Format(format!("line {line}: missing value")))?
        .parse::<f64>()
        .map_err(|e| Error::Format(format!("line {line}: {e}")))
}

fn parse_usize(tok: Option<&str>, line: usize) -> Result<usize> {
    tok.ok_or_else(|| Error::Format(format!("line {line}: missing integer")))?
        .parse::<usize>()
        .map_err(|e| Error::Format(format!("line {line}: {e}")))
}

pub fn read_matrix_market(text: &str) -> Result<ComplexMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Format("empty file".into()))?;
    let words: Vec<String> = header.split_whitespace().map(|w| w.to_ascii_lowercase()).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(Error::Format("missing %%MatrixMarket matrix header".into()));
    }
    let coordinate = match words[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(Error::Format(format!("unsupported layout `{other}`"))),
    };
    let field = match words[3].as_str() {
        "real" | "integer" | "double" => Field::Real,
        "complex" => Field::Complex,
        other => return Err(Error::Format(format!("unsupported field `{other}`"))),
    };
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(Error::Format(format!("unsupported symmetry `{other}`"))),
    };

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body.next().ok_or_else(|| Error::Format("missing size line".into()))?;
    let mut toks = size.split_whitespace();
    let rows = parse_usize(toks.next(), size_line + 1)?;
    let cols = parse_usize(toks.next(), size_line + 1)?;
    if rows == 0 || cols == 0 {
        return Err(Error::Format("matrix dimensions must be positive".into()));
    }
    let mut m = ComplexMatrix::zeros(rows, cols);

    let read_value = |toks: &mut std::str::SplitWhitespace, line: usize| -> Result<Complex64> {
        let re = parse_f64(toks.next(), line)?;
        let im = if field == Field::Complex { parse_f64(toks.next(), line)? } else { 0.0 };
        Ok(Complex64::new(re, im))
    };
    let mirror = |m: &mut ComplexMatrix, i: usize, j: usize, z: Complex64| {
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => m.set(j, i, z),
                Symmetry::SkewSymmetric => m.set(j, i, -z),
                Symmetry::Hermitian => m.set(j, i, z.conj()),
            }
        }
    };

    if coordinate {
        let nnz = parse_usize(toks.next(), size_line + 1)?;
        for _ in 0..nnz {
            let (ln, l) = body.next().ok_or_else(|| Error::Format("truncated entry list".into()))?;
            let mut t = l.split_whitespace();
            let i = parse_usize(t.next(), ln + 1)?;
            let j = parse_usize(t.next(), ln + 1)?;
            if i == 0 || j == 0 || i > rows || j > cols {
                return Err(Error::Format(format!("line {}: index out of range", ln + 1)));
            }
            let z = read_value(&mut t, ln + 1)?;
            m.set(i - 1, j - 1, z);
            mirror(&mut m, i - 1, j - 1, z);
        }
    } else {
        // column-major; symmetric variants store the lower triangle only
        for j in 0..cols {
            let start = if symmetry == Symmetry::General { 0 } else { j };
            let start = if symmetry == Symmetry::SkewSymmetric { j + 1 } else { start };
            for i in start..rows {
                let (ln, l) = body.next().ok_or_else(|| Error::Format("truncated entry list".into()))?;
                let mut t = l.split_whitespace();
                let z = read_value(&mut t, ln + 1)?;
                m.set(i, j, z);
                mirror(&mut m, i, j, z);
            }
        }
    }
    if !m.is_finite() {
        return Err(Error::Format("non-finite entry".into()));
    }
    Ok(m)
}

/// Array layout, complex field, general symmetry; values use shortest
/// round-trip formatting.
pub fn write_matrix_market(m: &ComplexMatrix) -> String {
    let mut s = String::from("%%MatrixMarket matrix array complex general\n");
    let _ = writeln!(s, "{} {}", m.rows(), m.cols());
    for z in m.column_major_entries() {
        let _ = writeln!(s, "{:?} {:?}", z.re, z.im);
    }
    s
}

fn is_matrix_market(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("mtx"))
}

/// Reads a matrix file; `.mtx` selects Matrix Market, anything else JSON.
pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    if is_matrix_market(path) {
        read_matrix_market(&text)
    } else {
        read_matrix_json(&text)
    }
}

pub fn write_matrix(path: &Path, m: &ComplexMatrix) -> Result<()> {
    let text = if is_matrix_market(path) { write_matrix_market(m) } else { write_matrix_json(m) };
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
