//! Plain-text state and density files.
//!
//! State file:
//!
//! ```text
//! dims 2 2 <n>
//! <i> <j> <k> <re> <im>
//! ```
//!
//! one line per nonzero amplitude; omitted amplitudes are zero. Density file:
//!
//! ```text
//! density <dim>
//! <row> <col> <re> <im>
//! ```
//!
//! upper triangle only (`row <= col`); the lower triangle is filled in by
//! Hermiticity. Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::{flat_index, DensityMatrix, PureState};
use crate::error::{Error, Result};
use crate::numerics::{c, CMatrix, CVector};

/// Tolerance on norm/trace for values read from text.
const FILE_TOLERANCE: f64 = 1e-8;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn field<T: FromStr>(token: Option<&str>, line: usize, what: &str) -> Result<T> {
    let token = token.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| parse_err(line, format!("invalid {what} '{token}'")))
}

/// Non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_state(text: &str) -> Result<PureState> {
    let mut lines = content_lines(text);
    let (header_line, header) = lines.next().ok_or_else(|| parse_err(1, "empty state file"))?;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some("dims") {
        return Err(parse_err(header_line, "expected header 'dims 2 2 <n>'"));
    }
    let da: usize = field(tokens.next(), header_line, "dimension of A")?;
    let db: usize = field(tokens.next(), header_line, "dimension of B")?;
    let n: usize = field(tokens.next(), header_line, "dimension of C")?;
    if da != 2 || db != 2 || n == 0 || tokens.next().is_some() {
        return Err(parse_err(header_line, "expected header 'dims 2 2 <n>' with n >= 1"));
    }

    let mut amplitudes = CVector::zeros(4 * n);
    for (line, text) in lines {
        let mut tokens = text.split_whitespace();
        let i: usize = field(tokens.next(), line, "index i")?;
        let j: usize = field(tokens.next(), line, "index j")?;
        let k: usize = field(tokens.next(), line, "index k")?;
        let re: f64 = field(tokens.next(), line, "real part")?;
        let im: f64 = field(tokens.next(), line, "imaginary part")?;
        if tokens.next().is_some() {
            return Err(parse_err(line, "trailing fields"));
        }
        if i > 1 || j > 1 || k >= n {
            return Err(parse_err(line, format!("index ({i},{j},{k}) out of range")));
        }
        if !re.is_finite() || !im.is_finite() {
            return Err(parse_err(line, "non-finite amplitude"));
        }
        amplitudes[flat_index(i, j, k, n)] = c(re, im);
    }
    let norm = amplitudes.norm();
    if (norm - 1.0).abs() > FILE_TOLERANCE {
        return Err(Error::NotNormalized { norm });
    }
    PureState::from_unnormalized(n, amplitudes)
}

pub fn write_state(s: &PureState) -> String {
    let n = s.n();
    let mut out = format!("dims 2 2 {n}\n");
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..n {
                let a = s.amplitude(i, j, k);
                if a.norm() != 0.0 {
                    writeln!(out, "{i} {j} {k} {} {}", a.re, a.im).expect("write to String");
                }
            }
        }
    }
    out
}

pub fn parse_density(text: &str) -> Result<DensityMatrix> {
    let mut lines = content_lines(text);
    let (header_line, header) = lines.next().ok_or_else(|| parse_err(1, "empty density file"))?;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some("density") {
        return Err(parse_err(header_line, "expected header 'density <dim>'"));
    }
    let dim: usize = field(tokens.next(), header_line, "dimension")?;
    if dim == 0 || !dim.is_multiple_of(4) || tokens.next().is_some() {
        return Err(parse_err(header_line, "dimension must be a positive multiple of 4"));
    }

    let mut m = CMatrix::zeros(dim, dim);
    for (line, text) in lines {
        let mut tokens = text.split_whitespace();
        let row: usize = field(tokens.next(), line, "row")?;
        let col: usize = field(tokens.next(), line, "column")?;
        let re: f64 = field(tokens.next(), line, "real part")?;
        let im: f64 = field(tokens.next(), line, "imaginary part")?;
        if tokens.next().is_some() {
            return Err(parse_err(line, "trailing fields"));
        }
        if row >= dim || col >= dim {
            return Err(parse_err(line, format!("entry ({row},{col}) out of range")));
        }
        if row > col {
            return Err(parse_err(line, "only the upper triangle (row <= col) may be given"));
        }
        if !re.is_finite() || !im.is_finite() {
            return Err(parse_err(line, "non-finite entry"));
        }
        if row == col && im.abs() > FILE_TOLERANCE {
            return Err(parse_err(line, "diagonal entry must be real"));
        }
        let z = if row == col { c(re, 0.0) } else { c(re, im) };
        m[(row, col)] = z;
        m[(col, row)] = z.conj();
    }
    let trace = m.trace().re;
    let rho = DensityMatrix::with_tolerance(m, FILE_TOLERANCE)?;
    Ok(DensityMatrix {
        matrix: rho.matrix.unscale(trace),
    })
}

pub fn write_density(rho: &DensityMatrix) -> String {
    let dim = rho.dim();
    let mut out = format!("density {dim}\n");
    for row in 0..dim {
        for col in row..dim {
            let z = rho.matrix()[(row, col)];
            if z.norm() != 0.0 {
                writeln!(out, "{row} {col} {} {}", z.re, z.im).expect("write to String");
            }
        }
    }
    out
}

pub fn read_state(path: impl AsRef<Path>) -> Result<PureState> {
    parse_state(&std::fs::read_to_string(path)?)
}

pub fn read_density(path: impl AsRef<Path>) -> Result<DensityMatrix> {
    parse_density(&std::fs::read_to_string(path)?)
}
