//! CSV persistence for scenario matrices.
//!
//! Format: header `x1,...,xn`, one scenario per line, values as decimal text
//! at full round-trip precision (shortest representation that parses back to
//! the identical bits), so `load(save(M)) == M` exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::ScenarioMatrix;

pub fn save_scenarios(matrix: &ScenarioMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for j in 0..matrix.n() {
        if j > 0 {
            out.push(',');
        }
        let _ = write!(out, "x{}", j + 1);
    }
    out.push('\n');
    for r in 0..matrix.m() {
        for j in 0..matrix.n() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", matrix.column(j)[r]);
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn load_scenarios(path: impl AsRef<Path>) -> Result<ScenarioMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let display = path.display().to_string();
    let mut lines = text.lines().enumerate();

    let (_, header) = lines.next().filter(|(_, l)| !l.trim().is_empty()).ok_or_else(|| {
        Error::Parse {
            path: display.clone(),
            line: 1,
            msg: "no rows".into(),
        }
    })?;
    let n = header.split(',').count();
    if n == 0 {
        return Err(Error::Parse {
            path: display,
            line: 1,
            msg: "empty header".into(),
        });
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut rows = 0usize;
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != n {
            return Err(Error::Parse {
                path: display,
                line: idx + 1,
                msg: format!("ragged row: {} cells, expected {n}", cells.len()),
            });
        }
        for (j, cell) in cells.iter().enumerate() {
            let x: f64 = cell.trim().parse().map_err(|e| Error::Parse {
                path: display.clone(),
                line: idx + 1,
                msg: format!("column {} (`{}`): {e}", j + 1, cell.trim()),
            })?;
            if !x.is_finite() || x < 0.0 {
                return Err(Error::Parse {
                    path: display,
                    line: idx + 1,
                    msg: format!("column {} holds {x}; losses must be finite and >= 0", j + 1),
                });
            }
            columns[j].push(x);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Parse {
            path: display,
            line: 1,
            msg: "no rows".into(),
        });
    }
    ScenarioMatrix::from_columns(columns, 0)
}
