//! Plain-text matrix format: a line holding `n`, then `n` lines of `n`
//! whitespace-separated decimal values.

use std::fmt::Write as _;

use super::{Mat, SymMatrix};
use crate::error::{Error, Result};

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Parses the text format; the result is symmetrized by averaging `(i,j)` and `(j,i)`.
///
/// Blank lines are ignored. Line and column numbers in errors are 1-based.
pub fn parse_matrix(text: &str) -> Result<SymMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());

    let (header_no, header) = lines.next().ok_or_else(|| parse_error(1, 1, "empty input"))?;
    let n: usize = header
        .trim()
        .parse()
        .map_err(|_| parse_error(header_no, column_of(header, header.trim()), "expected dimension"))?;
    if n == 0 {
        return Err(parse_error(header_no, 1, "dimension must be positive"));
    }

    let mut m = Mat::zeros(n, n);
    for row in 0..n {
        let (line_no, line) = lines
            .next()
            .ok_or_else(|| parse_error(header_no + row + 1, 1, format!("missing row {}", row + 1)))?;
        let mut count = 0;
        for token in line.split_whitespace() {
            let col = column_of(line, token);
            if count == n {
                return Err(parse_error(line_no, col, format!("more than {n} values")));
            }
            let v: f64 = token
                .parse()
                .map_err(|_| parse_error(line_no, col, format!("invalid number `{token}`")))?;
            if !v.is_finite() {
                return Err(parse_error(line_no, col, "non-finite value"));
            }
            m[(row, count)] = v;
            count += 1;
        }
        if count < n {
            return Err(parse_error(
                line_no,
                line.len() + 1,
                format!("expected {n} values, found {count}"),
            ));
        }
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(parse_error(line_no, 1, "trailing data after matrix"));
    }
    Ok(SymMatrix::symmetrized(m))
}

fn column_of(line: &str, token: &str) -> usize {
    // token is a subslice of line
    (token.as_ptr() as usize - line.as_ptr() as usize) + 1
}

/// Writes the text format using shortest round-trip exponent notation.
pub fn format_matrix(m: &SymMatrix) -> String {
    let n = m.n();
    let mut out = String::new();
    writeln!(out, "{n}").unwrap();
    for i in 0..n {
        for j in 0..n {
            if j > 0 {
                out.push(' ');
            }
            write!(out, "{:e}", m.get(i, j)).unwrap();
        }
        out.push('\n');
    }
    out
}
