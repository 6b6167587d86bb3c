//! ESRI ASCII grid export: textual rasters viewable in common GIS tools.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use smog_core::mapping::Raster;
use smog_core::regrid::GridSpec;

const NODATA: f64 = -9999.0;

/// Write a raster as an ESRI ASCII grid: the six header lines, then
/// space-separated values row-major from the northernmost row down. No-data
/// cells carry the `-9999` token; data values are written in shortest
/// round-trip form.
pub fn write_ascii_grid(path: &Path, raster: &Raster) -> Result<()> {
    let spec = &raster.spec;
    let mut text = String::new();
    writeln!(text, "ncols {}", spec.n_cols).unwrap();
    writeln!(text, "nrows {}", spec.n_rows).unwrap();
    writeln!(text, "xllcorner {}", spec.lon_min).unwrap();
    writeln!(text, "yllcorner {}", spec.lat_min).unwrap();
    writeln!(text, "cellsize {}", spec.cell_size).unwrap();
    writeln!(text, "NODATA_value {NODATA}").unwrap();
    for row in (0..spec.n_rows).rev() {
        for col in 0..spec.n_cols {
            if col > 0 {
                text.push(' ');
            }
            match raster.get(row, col) {
                Some(v) => write!(text, "{v}").unwrap(),
                None => write!(text, "{NODATA}").unwrap(),
            }
        }
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("cannot write `{}`", path.display()))
}

/// Read an ESRI ASCII grid written by [`write_ascii_grid`].
pub fn read_ascii_grid(path: &Path) -> Result<Raster> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read `{}`", path.display()))?;
    let mut lines = text.lines();
    let mut header = |key: &str| -> Result<f64> {
        let line = lines
            .next()
            .ok_or_else(|| anyhow!("`{}`: truncated header", path.display()))?;
        let (k, v) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| anyhow!("`{}`: malformed header line `{line}`", path.display()))?;
        if !k.eq_ignore_ascii_case(key) {
            bail!("`{}`: expected header `{key}`, got `{k}`", path.display());
        }
        v.trim()
            .parse()
            .map_err(|e| anyhow!("`{}`: header `{key}`: {e}", path.display()))
    };
    let n_cols = header("ncols")? as usize;
    let n_rows = header("nrows")? as usize;
    let xllcorner = header("xllcorner")?;
    let yllcorner = header("yllcorner")?;
    let cellsize = header("cellsize")?;
    let nodata = header("NODATA_value")?;

    let spec = GridSpec::new(yllcorner, xllcorner, cellsize, n_rows, n_cols)
        .map_err(|e| anyhow!("`{}`: {e}", path.display()))?;
    let mut raster = Raster::empty(spec);
    let mut filled = 0usize;
    for (line_index, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        if line_index >= n_rows {
            bail!("`{}`: more data rows than nrows", path.display());
        }
        let row = n_rows - 1 - line_index;
        let values: Vec<&str> = line.split_whitespace().collect();
        if values.len() != n_cols {
            bail!(
                "`{}` data row {line_index}: expected {n_cols} values, got {}",
                path.display(),
                values.len()
            );
        }
        for (col, raw) in values.iter().enumerate() {
            let v: f64 = raw
                .parse()
                .map_err(|e| anyhow!("`{}` data row {line_index}: `{raw}`: {e}", path.display()))?;
            raster.set(row, col, if v == nodata { None } else { Some(v) });
        }
        filled += 1;
    }
    if filled != n_rows {
        bail!(
            "`{}`: expected {n_rows} data rows, got {filled}",
            path.display()
        );
    }
    Ok(raster)
}
