//! Weather field directories: one `<variable>.csv` per variable
//! (`time_unix,row,col,value`, hourly totals as-is for the accumulated
//! variables) plus a shared `meteo.spec` grid sidecar. Hours must be
//! contiguous and complete across all nine variables.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use smog_core::join::{MeteoFieldSet, METEO_VARIABLES};
use smog_core::Timestamp;

use super::{check_header, parse_field, parse_finite, read_lines, split_row};
use crate::sidecar::{spec_from_kv, spec_kv_pairs, write_kv, KvFile};

const HEADER: [&str; 4] = ["time_unix", "row", "col", "value"];

pub fn read_meteo_dir(dir: &Path) -> Result<MeteoFieldSet> {
    let kv = KvFile::read(&dir.join("meteo.spec"))?;
    let spec = spec_from_kv(&kv, None)?;
    let n_cells = spec.n_cells();

    // Establish the hourly axis from the first variable's file.
    let mut start_unix: Option<i64> = None;
    let mut n_hours = 0usize;
    let mut values: Vec<f64> = Vec::new();
    for (var, name) in METEO_VARIABLES.iter().enumerate() {
        let path = dir.join(format!("{name}.csv"));
        let lines = read_lines(&path)?;
        check_header(&path, lines.first(), &HEADER)?;
        let mut records: Vec<(i64, usize, usize, f64)> = Vec::new();
        for (i, line) in lines.iter().enumerate().skip(1) {
            let line_no = i + 1;
            let fields = split_row(line, 4, &path, line_no)?;
            let unix: i64 = parse_field(fields[0], &path, line_no, "time_unix")?;
            let row: usize = parse_field(fields[1], &path, line_no, "row")?;
            let col: usize = parse_field(fields[2], &path, line_no, "col")?;
            let value = parse_finite(fields[3], &path, line_no, "value")?;
            if row >= spec.n_rows || col >= spec.n_cols {
                bail!(
                    "`{}` line {line_no}: node ({row}, {col}) outside the {}x{} grid",
                    path.display(),
                    spec.n_rows,
                    spec.n_cols
                );
            }
            records.push((unix, row, col, value));
        }
        if records.is_empty() {
            bail!("`{}`: no records", path.display());
        }
        let lo = records.iter().map(|r| r.0).min().unwrap();
        let hi = records.iter().map(|r| r.0).max().unwrap();
        if (hi - lo) % 3_600 != 0 {
            bail!("`{}`: timestamps are not hour-aligned", path.display());
        }
        let hours = ((hi - lo) / 3_600 + 1) as usize;
        match start_unix {
            None => {
                start_unix = Some(lo);
                n_hours = hours;
                values = vec![f64::NAN; METEO_VARIABLES.len() * n_hours * n_cells];
            }
            Some(start) => {
                if start != lo || hours != n_hours {
                    bail!(
                        "`{}`: hourly span differs from `{}.csv`",
                        path.display(),
                        METEO_VARIABLES[0]
                    );
                }
            }
        }
        let start = start_unix.unwrap();
        let mut seen = vec![false; n_hours * n_cells];
        for (unix, row, col, value) in records {
            let offset = unix - start;
            if offset % 3_600 != 0 || offset < 0 {
                bail!(
                    "`{}`: timestamp {unix} is not on the hourly axis starting at {start}",
                    path.display()
                );
            }
            let hour = (offset / 3_600) as usize;
            if hour >= n_hours {
                bail!(
                    "`{}`: timestamp {unix} beyond the hourly span",
                    path.display()
                );
            }
            let cell = spec.flat(row, col);
            if seen[hour * n_cells + cell] {
                bail!(
                    "`{}`: duplicate record for hour {hour}, node ({row}, {col})",
                    path.display()
                );
            }
            seen[hour * n_cells + cell] = true;
            values[(var * n_hours + hour) * n_cells + cell] = value;
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            bail!(
                "`{}`: hour {} is missing node ({}, {})",
                path.display(),
                missing / n_cells,
                (missing % n_cells) / spec.n_cols,
                (missing % n_cells) % spec.n_cols
            );
        }
    }

    let start = Timestamp::from_unix(start_unix.unwrap())
        .map_err(|e| anyhow!("`{}`: {e}", dir.display()))?;
    MeteoFieldSet::new(spec, start, n_hours, values)
        .map_err(|e| anyhow!("`{}`: {e}", dir.display()))
}

/// Write a field set as a meteo directory; `value_at(var, hour, row, col)`
/// supplies the node values.
pub fn write_meteo_dir(
    dir: &Path,
    spec: &smog_core::regrid::GridSpec,
    start: Timestamp,
    n_hours: usize,
    value_at: impl Fn(usize, usize, usize, usize) -> f64,
) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create `{}`", dir.display()))?;
    write_kv(&dir.join("meteo.spec"), &spec_kv_pairs(spec))?;
    for (var, name) in METEO_VARIABLES.iter().enumerate() {
        let mut text = String::new();
        text.push_str("time_unix,row,col,value\n");
        for hour in 0..n_hours {
            let unix = start.unix() + hour as i64 * 3_600;
            for row in 0..spec.n_rows {
                for col in 0..spec.n_cols {
                    writeln!(text, "{unix},{row},{col},{}", value_at(var, hour, row, col)).unwrap();
                }
            }
        }
        let path = dir.join(format!("{name}.csv"));
        fs::write(&path, text).with_context(|| format!("cannot write `{}`", path.display()))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use smog_core::geo::GeoPoint;
    use smog_core::join::meteo_at;
    use smog_core::regrid::GridSpec;

    #[test]
    fn meteo_directory_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let spec = GridSpec::new(39.5, -4.5, 0.25, 3, 3).unwrap();
        let start = Timestamp::from_unix(1_546_300_800).unwrap();
        write_meteo_dir(dir.path(), &spec, start, 4, |var, hour, row, col| {
            (var * 1_000 + hour * 100 + row * 10 + col) as f64
        })
        .unwrap();
        let fields = read_meteo_dir(dir.path()).unwrap();
        assert_eq!(fields.n_hours(), 4);
        assert_eq!(fields.start(), start);
        let p = GeoPoint::new(39.75, -4.25, 0.0).unwrap();
        let s = meteo_at(
            &fields,
            &p,
            Timestamp::from_unix(start.unix() + 3_600).unwrap(),
        )
        .unwrap();
        // Node (1, 1) at hour 1: dewpoint is var 0, blh var 7.
        assert_eq!(s.dewpoint_2m, 111.0);
        assert_eq!(s.blh, 7_111.0);
    }

    #[test]
    fn incomplete_hours_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let spec = GridSpec::new(39.5, -4.5, 0.25, 2, 2).unwrap();
        let start = Timestamp::from_unix(1_546_300_800).unwrap();
        write_meteo_dir(dir.path(), &spec, start, 2, |_, _, _, _| 1.0).unwrap();
        // Drop one line from one variable file.
        let victim = dir.path().join("blh.csv");
        let text = std::fs::read_to_string(&victim).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        lines.remove(3);
        std::fs::write(&victim, lines.join("\n")).unwrap();
        let err = read_meteo_dir(dir.path()).unwrap_err().to_string();
        assert!(
            err.contains("blh.csv") && err.contains("missing node"),
            "{err}"
        );
    }
}
