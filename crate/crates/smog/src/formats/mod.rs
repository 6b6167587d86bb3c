//! The CSV interchange formats.
//!
//! All files are UTF-8 with LF line endings, `.` decimal separators, and a
//! fixed header line. Floats are written in Rust's shortest round-trip
//! form, so write-then-read is the identity. Timestamps travel as Unix
//! seconds in `time_unix` columns.

mod gridfield;
mod meteo;
mod raster;
mod reports;
mod stations;
mod swath;
mod table;

pub use gridfield::{read_grid_field, write_grid_field};
pub use meteo::{read_meteo_dir, write_meteo_dir};
pub use raster::{
    read_elevation, read_landcover, read_predictions, write_elevation, write_landcover,
    write_predictions,
};
pub use reports::{
    write_cv_report, write_importance, write_monthly_stats, write_single_report, write_sweep,
};
pub use stations::{read_observations, read_station_meta, write_observations, write_station_meta};
pub use swath::{read_swath, write_swath};
pub use table::{read_table, write_table};

use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, Context, Result};
use smog_core::Timestamp;

pub(crate) fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read `{}`", path.display()))?;
    Ok(text.lines().map(|l| l.to_string()).collect())
}

/// Check an exact header, naming the first missing column on mismatch.
pub(crate) fn check_header(path: &Path, got: Option<&String>, want: &[&str]) -> Result<()> {
    let got = got.ok_or_else(|| anyhow!("`{}`: empty file, expected a header", path.display()))?;
    let columns: Vec<&str> = got.split(',').collect();
    for expected in want {
        if !columns.contains(expected) {
            return Err(anyhow!(
                "`{}`: missing column `{expected}` (header is `{got}`)",
                path.display()
            ));
        }
    }
    if columns != want {
        return Err(anyhow!(
            "`{}`: header `{got}` must be exactly `{}`",
            path.display(),
            want.join(",")
        ));
    }
    Ok(())
}

pub(crate) fn parse_field<T: FromStr>(
    raw: &str,
    path: &Path,
    line_no: usize,
    column: &str,
) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.trim().parse().map_err(|e| {
        anyhow!(
            "`{}` line {line_no}, column `{column}`: cannot parse `{raw}`: {e}",
            path.display()
        )
    })
}

pub(crate) fn parse_finite(raw: &str, path: &Path, line_no: usize, column: &str) -> Result<f64> {
    let value: f64 = parse_field(raw, path, line_no, column)?;
    if !value.is_finite() {
        return Err(anyhow!(
            "`{}` line {line_no}, column `{column}`: value must be finite",
            path.display()
        ));
    }
    Ok(value)
}

pub(crate) fn parse_timestamp(raw: &str, path: &Path, line_no: usize) -> Result<Timestamp> {
    let unix: i64 = parse_field(raw, path, line_no, "time_unix")?;
    Timestamp::from_unix(unix).map_err(|e| {
        anyhow!(
            "`{}` line {line_no}, column `time_unix`: {e}",
            path.display()
        )
    })
}

/// Split one data line into exactly `n` fields.
pub(crate) fn split_row<'a>(
    line: &'a str,
    n: usize,
    path: &Path,
    line_no: usize,
) -> Result<Vec<&'a str>> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != n {
        return Err(anyhow!(
            "`{}` line {line_no}: expected {n} fields, got {}",
            path.display(),
            fields.len()
        ));
    }
    Ok(fields)
}

/// Sidecar path of a CSV: the same name with the `.spec` extension.
pub fn sidecar_path(csv: &Path) -> std::path::PathBuf {
    csv.with_extension("spec")
}
