//! Plain-text dumps.
//!
//! ```text
//! fock-op N=2
//! 1.0000000000000000e0,0.0000000000000000e0 0.0000000000000000e0,0.0000000000000000e0
//! ...
//! ```
//!
//! Every number carries 17 significant digits, which round-trips f64 exactly.
//! States use the header `fock-state N=<dim>` and one `re,im` pair per line.

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{FockOperator, FockState};
use crate::error::{Error, Result};

const OP_HEADER: &str = "fock-op";
const STATE_HEADER: &str = "fock-state";

fn write_pair(out: &mut String, z: Complex64) {
    let _ = write!(out, "{:.16e},{:.16e}", z.re, z.im);
}

fn parse_pair(tok: &str, line: usize) -> Result<Complex64> {
    let (re, im) = tok
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("line {line}: expected re,im but found {tok:?}")))?;
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("line {line}: {s:?}: {e}")))
    };
    Ok(Complex64::new(num(re)?, num(im)?))
}

fn parse_header(line: Option<&str>, tag: &str) -> Result<usize> {
    let line = line.ok_or_else(|| Error::Parse("empty input".into()))?;
    let rest = line
        .trim()
        .strip_prefix(tag)
        .and_then(|r| r.trim().strip_prefix("N="))
        .ok_or_else(|| Error::Parse(format!("line 1: expected \"{tag} N=<dim>\"")))?;
    rest.trim()
        .parse()
        .map_err(|e| Error::Parse(format!("line 1: bad dimension: {e}")))
}

impl FockOperator {
    pub fn to_dump(&self) -> String {
        let n = self.dim();
        let mut out = String::with_capacity(n * n * 50);
        let _ = writeln!(out, "{OP_HEADER} N={n}");
        for row in self.matrix().row_iter() {
            for (j, z) in row.iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                write_pair(&mut out, *z);
            }
            out.push('\n');
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let n = parse_header(lines.next(), OP_HEADER)?;
        let mut data = Vec::with_capacity(n * n);
        let mut rows = 0;
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let lineno = i + 2;
            let row = line
                .split_whitespace()
                .map(|t| parse_pair(t, lineno))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != n {
                return Err(Error::Parse(format!(
                    "line {lineno}: expected {n} entries, found {}",
                    row.len()
                )));
            }
            data.extend(row);
            rows += 1;
        }
        if rows != n {
            return Err(Error::Parse(format!("expected {n} rows, found {rows}")));
        }
        FockOperator::new(DMatrix::from_row_slice(n, n, &data))
    }
}

impl FromStr for FockOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_dump(s)
    }
}

impl FockState {
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{STATE_HEADER} N={}", self.dim());
        for z in self.amplitudes().iter() {
            write_pair(&mut out, *z);
            out.push('\n');
        }
        out
    }

    pub fn from_dump(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let n = parse_header(lines.next(), STATE_HEADER)?;
        let amps = lines
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| parse_pair(l.trim(), i + 2))
            .collect::<Result<Vec<_>>>()?;
        if amps.len() != n {
            return Err(Error::Parse(format!(
                "expected {n} amplitudes, found {}",
                amps.len()
            )));
        }
        FockState::new(DVector::from_vec(amps))
    }
}

impl FromStr for FockState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_dump(s)
    }
}
