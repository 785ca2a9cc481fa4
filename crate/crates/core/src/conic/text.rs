//! Plain-text program format.
//!
//! ```text
//! conic_program 1
//! n_vars 4
//! n_field 3
//! objective 1 1 1 0
//! equalities 0
//! inequalities 1
//! -1.5 2 0:1 3:-0.25
//! socs 1
//! soc 3
//! 0.5 1 3:0.5
//! 0.5 1 3:-0.5
//! 0 2 0:1 1:-1
//! ```
//!
//! A row is `offset nnz index:value ...`; each `soc k` block lists the bound
//! row then `k - 1` norm rows.

use std::fmt::Write as _;
use std::path::Path;

use super::{ConicProgram, LinearRow, SocConstraint};
use crate::error::{Error, Result};

impl ConicProgram {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "conic_program 1").unwrap();
        writeln!(s, "n_vars {}", self.n_vars).unwrap();
        writeln!(s, "n_field {}", self.n_field).unwrap();
        write!(s, "objective").unwrap();
        for c in &self.objective {
            write!(s, " {c:e}").unwrap();
        }
        s.push('\n');
        let row = |s: &mut String, r: &LinearRow| {
            write!(s, "{:e} {}", r.offset, r.coeffs.len()).unwrap();
            for (i, v) in &r.coeffs {
                write!(s, " {i}:{v:e}").unwrap();
            }
            s.push('\n');
        };
        writeln!(s, "equalities {}", self.equalities.len()).unwrap();
        self.equalities.iter().for_each(|r| row(&mut s, r));
        writeln!(s, "inequalities {}", self.inequalities.len()).unwrap();
        self.inequalities.iter().for_each(|r| row(&mut s, r));
        writeln!(s, "socs {}", self.socs.len()).unwrap();
        for soc in &self.socs {
            writeln!(s, "soc {}", soc.dim()).unwrap();
            row(&mut s, &soc.bound);
            soc.rows.iter().for_each(|r| row(&mut s, r));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<ConicProgram> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        let mut pos = 0;
        let mut next = |what: &str| {
            let item = lines
                .get(pos)
                .copied()
                .ok_or_else(|| Error::parse(0, format!("unexpected end of input, expected {what}")));
            pos += 1;
            item
        };

        let (ln, l) = next("header")?;
        if l != "conic_program 1" {
            return Err(Error::parse(ln, "expected `conic_program 1`"));
        }
        let n_vars = keyed_count(next("n_vars")?, "n_vars")?;
        let n_field = keyed_count(next("n_field")?, "n_field")?;
        let (ln, l) = next("objective")?;
        let objective = l
            .strip_prefix("objective")
            .ok_or_else(|| Error::parse(ln, "expected objective"))?
            .split_whitespace()
            .map(|t| parse_f64(t, ln))
            .collect::<Result<Vec<_>>>()?;

        let n = keyed_count(next("equalities")?, "equalities")?;
        let equalities = (0..n).map(|_| parse_row(next("row")?)).collect::<Result<_>>()?;
        let n = keyed_count(next("inequalities")?, "inequalities")?;
        let inequalities = (0..n).map(|_| parse_row(next("row")?)).collect::<Result<_>>()?;
        let n_socs = keyed_count(next("socs")?, "socs")?;
        let mut socs = Vec::with_capacity(n_socs);
        for _ in 0..n_socs {
            let (ln, l) = next("soc")?;
            let dim = keyed_count((ln, l), "soc")?;
            if dim == 0 {
                return Err(Error::parse(ln, "cone dimension must be positive"));
            }
            let bound = parse_row(next("row")?)?;
            let rows = (1..dim).map(|_| parse_row(next("row")?)).collect::<Result<_>>()?;
            socs.push(SocConstraint { bound, rows });
        }
        let program = ConicProgram {
            n_vars,
            n_field,
            objective,
            equalities,
            inequalities,
            socs,
        };
        program.check()?;
        Ok(program)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<ConicProgram> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ConicProgram::from_text(&text)
    }
}

fn parse_f64(t: &str, line: usize) -> Result<f64> {
    t.parse().map_err(|_| Error::parse(line, format!("bad number `{t}`")))
}

fn keyed_count((line, l): (usize, &str), key: &str) -> Result<usize> {
    let mut tok = l.split_whitespace();
    if tok.next() != Some(key) {
        return Err(Error::parse(line, format!("expected `{key}`")));
    }
    tok.next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::parse(line, format!("expected a count after `{key}`")))
}

fn parse_row((line, l): (usize, &str)) -> Result<LinearRow> {
    let mut tok = l.split_whitespace();
    let offset = parse_f64(tok.next().unwrap_or(""), line)?;
    let nnz: usize = tok
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::parse(line, "expected nonzero count"))?;
    let coeffs = tok
        .map(|t| {
            let (i, v) = t
                .split_once(':')
                .ok_or_else(|| Error::parse(line, format!("expected index:value, got `{t}`")))?;
            let i = i
                .parse()
                .map_err(|_| Error::parse(line, format!("bad index `{i}`")))?;
            Ok((i, parse_f64(v, line)?))
        })
        .collect::<Result<Vec<_>>>()?;
    if coeffs.len() != nnz {
        return Err(Error::parse(line, format!("expected {nnz} entries, found {}", coeffs.len())));
    }
    Ok(LinearRow { coeffs, offset })
}
