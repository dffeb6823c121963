//! Matrix Market coordinate files (`real general`, 1-based indices).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::ObservationSet;
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

const HEADER: &str = "%%MatrixMarket matrix coordinate real general";

/// Writes entries in row-major order with 17 significant digits.
pub fn write_matrix_market<T: Scalar>(obs: &ObservationSet<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{HEADER}")?;
    writeln!(w, "{} {} {}", obs.n1(), obs.n2(), obs.len())?;
    for (&(i, j), &v) in obs.indices().iter().zip(obs.values()) {
        writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v.as_f64())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_market<T: Scalar>(path: impl AsRef<Path>) -> Result<ObservationSet<T>> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let perr = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };

    let mut lines = reader.lines().enumerate().map(|(k, l)| (k + 1, l));
    let (_, header) = lines
        .next()
        .ok_or_else(|| perr(1, "empty file".into()))?;
    let header = header?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5
        || tokens[0] != "%%matrixmarket"
        || tokens[1] != "matrix"
        || tokens[2] != "coordinate"
        || tokens[3] != "real"
        || tokens[4] != "general"
    {
        return Err(perr(1, format!("unsupported header `{header}`")));
    }

    let mut size: Option<(usize, usize, usize)> = None;
    let mut entries = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (lineno, line) in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(perr(lineno, "size line must be `rows cols entries`".into()));
                }
                let parse = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|e| perr(lineno, format!("bad size field `{s}`: {e}")))
                };
                let (n1, n2, m) = (parse(fields[0])?, parse(fields[1])?, parse(fields[2])?);
                if n1 == 0 || n2 == 0 {
                    return Err(perr(lineno, "dimensions must be positive".into()));
                }
                size = Some((n1, n2, m));
                entries.reserve(m);
            }
            Some((n1, n2, _)) => {
                if fields.len() != 3 {
                    return Err(perr(lineno, "entry line must be `row col value`".into()));
                }
                let idx = |s: &str, bound: usize| -> Result<usize> {
                    let k = s
                        .parse::<usize>()
                        .map_err(|e| perr(lineno, format!("bad index `{s}`: {e}")))?;
                    if k == 0 || k > bound {
                        return Err(perr(lineno, format!("index {k} outside 1..={bound}")));
                    }
                    Ok(k - 1)
                };
                let i = idx(fields[0], n1)?;
                let j = idx(fields[1], n2)?;
                let v: f64 = fields[2]
                    .parse()
                    .map_err(|e| perr(lineno, format!("bad value `{}`: {e}", fields[2])))?;
                if !v.is_finite() {
                    return Err(perr(lineno, "non-finite value".into()));
                }
                if !seen.insert((i, j)) {
                    return Err(perr(lineno, format!("duplicate coordinate ({}, {})", i + 1, j + 1)));
                }
                entries.push((i, j, T::lit(v)));
            }
        }
    }

    let (n1, n2, m) = size.ok_or_else(|| perr(1, "missing size line".into()))?;
    if entries.len() != m {
        return Err(perr(
            0,
            format!("size line declares {m} entries but {} were found", entries.len()),
        ));
    }
    if m == 0 {
        return Err(invalid!("{}: no observed entries", path.display()));
    }
    ObservationSet::new(n1, n2, entries)
}
