//! CSV and JSON reading/writing. CSV floats are printed with 17 significant
//! digits ('.' decimal separator, '\n' line endings), which round-trips f64
//! bit-exactly; input parsing reports line-numbered diagnostics.

use crate::{CliError, CliResult};
use lassoboot::Dataset;
use std::fmt::Write as _;
use std::path::Path;

/// Full-precision float formatting for CSV output.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Read `(y, X)` from CSV: header row, column 1 = response, columns
/// 2..p+1 = covariates.
pub fn read_dataset_csv(path: &Path) -> CliResult<Dataset> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::usage(format!("{}: empty file", path.display())))?;
    let ncols = header.split(',').count();
    if ncols < 2 {
        return Err(CliError::usage(format!(
            "{}: line 1: need a response column and at least one covariate, found {ncols} column(s)",
            path.display()
        )));
    }
    let mut y = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != ncols {
            return Err(CliError::usage(format!(
                "{}: line {lineno}: expected {ncols} fields, found {}",
                path.display(),
                fields.len()
            )));
        }
        let mut row = Vec::with_capacity(ncols - 1);
        for (col, field) in fields.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                CliError::usage(format!(
                    "{}: line {lineno}, column {}: `{field}` is not a number",
                    path.display(),
                    col + 1
                ))
            })?;
            if col == 0 {
                y.push(v);
            } else {
                row.push(v);
            }
        }
        rows.push(row);
    }
    Dataset::from_rows(&rows, y).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

pub fn write_file(dir: &Path, name: &str, content: &str) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), content)?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::usage(format!("serialization failed: {e}")))?;
    text.push('\n');
    write_file(dir, name, &text)
}

/// One row of a coverage table as written by `simulate` and read back by
/// `report`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub coef_index: usize,
    pub beta_true: f64,
    pub two_sided_coverage: f64,
    pub two_sided_avg_width: f64,
    pub one_sided_coverage: f64,
    pub m: usize,
}

pub const COVERAGE_HEADER: &str =
    "coef_index,beta_true,two_sided_coverage,two_sided_avg_width,one_sided_coverage,m";

pub fn coverage_csv(rows: &[CoverageRow]) -> String {
    let mut out = String::from(COVERAGE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.coef_index,
            fmt_f64(r.beta_true),
            fmt_f64(r.two_sided_coverage),
            fmt_f64(r.two_sided_avg_width),
            fmt_f64(r.one_sided_coverage),
            r.m
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::fmt_f64;

    #[test]
    fn float_format_round_trips_bit_exactly() {
        let values = [
            0.0,
            1.0,
            -1.0,
            0.1,
            2.0 / 3.0,
            1e-300,
            -3.5e200,
            std::f64::consts::PI,
            f64::MIN_POSITIVE,
            f64::MAX,
        ];
        for v in values {
            let s = fmt_f64(v);
            assert!(!s.contains(','));
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{v} -> {s} -> {back}");
        }
    }
}

pub fn read_coverage_csv(path: &Path) -> CliResult<Vec<CoverageRow>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::usage(format!("{}: empty file", path.display())))?;
    if header != COVERAGE_HEADER {
        return Err(CliError::usage(format!(
            "{}: line 1: not a coverage table (unexpected header)",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(CliError::usage(format!(
                "{}: line {lineno}: expected 6 fields, found {}",
                path.display(),
                f.len()
            )));
        }
        let parse_f = |s: &str, col: usize| -> CliResult<f64> {
            s.trim().parse().map_err(|_| {
                CliError::usage(format!(
                    "{}: line {lineno}, column {col}: `{s}` is not a number",
                    path.display()
                ))
            })
        };
        let parse_u = |s: &str, col: usize| -> CliResult<usize> {
            s.trim().parse().map_err(|_| {
                CliError::usage(format!(
                    "{}: line {lineno}, column {col}: `{s}` is not a count",
                    path.display()
                ))
            })
        };
        rows.push(CoverageRow {
            coef_index: parse_u(f[0], 1)?,
            beta_true: parse_f(f[1], 2)?,
            two_sided_coverage: parse_f(f[2], 3)?,
            two_sided_avg_width: parse_f(f[3], 4)?,
            one_sided_coverage: parse_f(f[4], 5)?,
            m: parse_u(f[5], 6)?,
        });
    }
    Ok(rows)
}
