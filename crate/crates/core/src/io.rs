//! Plain-text formats: series CSV, trajectory CSV + JSON sidecar, test rows.
//!
//! Floats are written with 17 significant digits, which round-trips every
//! `f64` bit-exactly.

use std::io::{self, Write};

use serde_json::json;

use crate::error::{Error, Result};
use crate::hypothesis::{TestName, TestOutcome};
use crate::simulate::Trajectory;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_trajectory_csv<W: Write>(tr: &Trajectory, mut out: W) -> io::Result<()> {
    writeln!(out, "x,eps,v")?;
    for ((x, e), v) in tr.x.iter().zip(&tr.eps).zip(&tr.v) {
        writeln!(out, "{},{},{}", fmt_f64(*x), fmt_f64(*e), fmt_f64(*v))?;
    }
    Ok(())
}

/// Metadata stored next to a trajectory CSV.
pub fn trajectory_sidecar(tr: &Trajectory) -> serde_json::Value {
    json!({
        "params": tr.params,
        "n": tr.n(),
        "seed": tr.seed,
        "burn_in": tr.burn_in,
        "noise": tr.noise,
        "eps0_stationary": tr.eps0_stationary,
        "columns": ["x", "eps", "v"],
    })
}

/// Reads a numeric column from CSV text.
///
/// A first line that does not parse as numbers is a header. With a header,
/// `column` selects by name (default `x` when present, otherwise the first
/// column); without one, `column` may be a zero-based index.
pub fn read_series(text: &str, column: Option<&str>) -> Result<Vec<f64>> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .peekable();
    let first = lines
        .peek()
        .ok_or_else(|| Error::InvalidInput("empty series file".into()))?;
    let first_cells: Vec<&str> = first.split(',').map(str::trim).collect();
    let is_header = first_cells.iter().any(|c| c.parse::<f64>().is_err());
    let index = if is_header {
        let idx = match column {
            Some(name) => first_cells
                .iter()
                .position(|c| *c == name)
                .or_else(|| name.parse::<usize>().ok())
                .ok_or_else(|| Error::InvalidInput(format!("no column named '{name}'")))?,
            None => first_cells.iter().position(|c| *c == "x").unwrap_or(0),
        };
        lines.next();
        idx
    } else {
        match column {
            Some(c) => c
                .parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("file has no header; column '{c}' must be an index")))?,
            None => 0,
        }
    };
    lines
        .enumerate()
        .map(|(i, line)| {
            let cell = line
                .split(',')
                .nth(index)
                .ok_or_else(|| Error::InvalidInput(format!("row {} has no column {index}", i + 1)))?;
            cell.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("row {}: '{}' is not a number", i + 1, cell.trim())))
        })
        .collect()
}

pub const OUTCOME_CSV_HEADER: &str = "name,statistic,p_value,reject,warnings";

/// One CSV row; warnings are joined with `;` and the field is quoted.
pub fn outcome_csv_row(o: &TestOutcome) -> String {
    format!(
        "{},{},{},{},\"{}\"",
        o.name,
        fmt_f64(o.statistic),
        fmt_f64(o.p_value),
        o.reject,
        o.warnings.join(";").replace('"', "'")
    )
}

/// Row for a test that could not be computed: empty numeric fields and the
/// error kind in the warnings column.
pub fn outcome_error_csv_row(name: TestName, err: &Error) -> String {
    format!("{name},,,,\"error={}\"", err.kind())
}
