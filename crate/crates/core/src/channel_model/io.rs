//! Text format for augmented channel matrices.
//!
//! ```text
//! n_R n
//! a+bi a-bi ... (n + 1 entries, last one is the direct path)
//! ...           (n_R rows)
//! ```
//!
//! Entries are written with 17 significant digits so that parsing the
//! output reproduces every `f64` exactly.

use super::{ones, ChannelSpec};
use crate::error::{Error, Result};
use crate::{CMatrix, Complex64};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parses `a+bi`, `a-bi`, `a`, `bi` (with optional exponents).
pub fn parse_complex(token: &str) -> Option<Complex64> {
    let s = token.trim();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return s.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |t: &str| -> Option<f64> {
        match t {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => t.parse().ok(),
        }
    };
    match split {
        Some(k) => Some(Complex64::new(body[..k].parse().ok()?, imag(&body[k..])?)),
        None => Some(Complex64::new(0.0, imag(body)?)),
    }
}

pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:.16e}{}{:.16e}i", z.re, sign, z.im.abs())
}

/// Parses the file into the `n_R x (n+1)` augmented matrix.
pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "empty channel file"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(parse_err(hl + 1, "header must be `n_R n`"));
    }
    let n_r: usize = dims[0].parse().map_err(|_| parse_err(hl + 1, "n_R is not a positive integer"))?;
    let n: usize = dims[1].parse().map_err(|_| parse_err(hl + 1, "n is not a positive integer"))?;
    if n_r == 0 || n == 0 {
        return Err(parse_err(hl + 1, "n_R and n must be positive"));
    }
    let mut m = CMatrix::zeros(n_r, n + 1);
    for r in 0..n_r {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| parse_err(hl + 2 + r, format!("expected {n_r} matrix rows, found {r}")))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != n + 1 {
            return Err(parse_err(ln + 1, format!("expected {} entries, found {}", n + 1, tokens.len())));
        }
        for (c, t) in tokens.iter().enumerate() {
            m[(r, c)] = parse_complex(t).ok_or_else(|| parse_err(ln + 1, format!("bad complex entry `{t}`")))?;
        }
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln + 1, "trailing content after matrix rows"));
    }
    Ok(m)
}

/// Parses the file as a raw channel with unit transmitter-to-RIS gains.
pub fn parse_channel_spec(text: &str, srr: u32) -> Result<ChannelSpec> {
    let m = parse_matrix(text)?;
    let n = m.ncols() - 1;
    ChannelSpec::new(m.columns(0, n).into_owned(), ones(n), m.column(n).into_owned(), srr)
}

pub fn write_matrix(m: &CMatrix) -> String {
    let mut out = format!("{} {}\n", m.nrows(), m.ncols().saturating_sub(1));
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format_complex(m[(r, c)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
