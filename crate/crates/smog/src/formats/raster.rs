//! Gridded CSV files with `.spec` sidecars: the land-cover class raster
//! (`row,col,class_code`, complete), the elevation raster
//! (`row,col,altitude_m`, sparse allowed), and per-overpass prediction
//! files (`row,col,value`, sparse).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use smog_core::join::LandCoverRaster;
use smog_core::mapping::{OverpassPredictions, Raster};
use smog_core::regrid::GridSpec;
use smog_core::Timestamp;

use super::{check_header, parse_field, parse_finite, read_lines, sidecar_path, split_row};
use crate::sidecar::{spec_from_kv, spec_kv_pairs, write_kv, KvFile};

pub fn read_landcover(csv_path: &Path) -> Result<LandCoverRaster> {
    let kv = KvFile::read(&sidecar_path(csv_path))?;
    let spec = spec_from_kv(&kv, None)?;
    let lines = read_lines(csv_path)?;
    check_header(csv_path, lines.first(), &["row", "col", "class_code"])?;
    let mut classes: Vec<Option<u16>> = vec![None; spec.n_cells()];
    for (i, line) in lines.iter().enumerate().skip(1) {
        let line_no = i + 1;
        let fields = split_row(line, 3, csv_path, line_no)?;
        let row: usize = parse_field(fields[0], csv_path, line_no, "row")?;
        let col: usize = parse_field(fields[1], csv_path, line_no, "col")?;
        let code: u16 = parse_field(fields[2], csv_path, line_no, "class_code")?;
        if row >= spec.n_rows || col >= spec.n_cols {
            bail!(
                "`{}` line {line_no}: pixel ({row}, {col}) outside the raster",
                csv_path.display()
            );
        }
        let slot = &mut classes[spec.flat(row, col)];
        if slot.is_some() {
            bail!(
                "`{}` line {line_no}: duplicate pixel ({row}, {col})",
                csv_path.display()
            );
        }
        *slot = Some(code);
    }
    if let Some(missing) = classes.iter().position(|c| c.is_none()) {
        bail!(
            "`{}`: pixel ({}, {}) has no class code",
            csv_path.display(),
            missing / spec.n_cols,
            missing % spec.n_cols
        );
    }
    let classes: Vec<u16> = classes.into_iter().map(|c| c.unwrap()).collect();
    LandCoverRaster::new(spec, classes).map_err(|e| anyhow!("`{}`: {e}", csv_path.display()))
}

pub fn write_landcover(csv_path: &Path, raster: &LandCoverRaster) -> Result<()> {
    let spec = raster.spec();
    let mut text = String::new();
    text.push_str("row,col,class_code\n");
    for row in 0..spec.n_rows {
        for col in 0..spec.n_cols {
            writeln!(text, "{row},{col},{}", raster.class_at(row, col)).unwrap();
        }
    }
    fs::write(csv_path, text).with_context(|| format!("cannot write `{}`", csv_path.display()))?;
    write_kv(&sidecar_path(csv_path), &spec_kv_pairs(spec))
}

pub fn read_elevation(csv_path: &Path) -> Result<Raster> {
    let kv = KvFile::read(&sidecar_path(csv_path))?;
    let spec = spec_from_kv(&kv, None)?;
    let lines = read_lines(csv_path)?;
    check_header(csv_path, lines.first(), &["row", "col", "altitude_m"])?;
    let mut raster = Raster::empty(spec.clone());
    for (i, line) in lines.iter().enumerate().skip(1) {
        let line_no = i + 1;
        let fields = split_row(line, 3, csv_path, line_no)?;
        let row: usize = parse_field(fields[0], csv_path, line_no, "row")?;
        let col: usize = parse_field(fields[1], csv_path, line_no, "col")?;
        let altitude = parse_finite(fields[2], csv_path, line_no, "altitude_m")?;
        if row >= spec.n_rows || col >= spec.n_cols {
            bail!(
                "`{}` line {line_no}: cell ({row}, {col}) outside the raster",
                csv_path.display()
            );
        }
        if raster.get(row, col).is_some() {
            bail!(
                "`{}` line {line_no}: duplicate cell ({row}, {col})",
                csv_path.display()
            );
        }
        raster.set(row, col, Some(altitude));
    }
    Ok(raster)
}

pub fn write_elevation(csv_path: &Path, raster: &Raster) -> Result<()> {
    let spec = &raster.spec;
    let mut text = String::new();
    text.push_str("row,col,altitude_m\n");
    for row in 0..spec.n_rows {
        for col in 0..spec.n_cols {
            if let Some(altitude) = raster.get(row, col) {
                writeln!(text, "{row},{col},{altitude}").unwrap();
            }
        }
    }
    fs::write(csv_path, text).with_context(|| format!("cannot write `{}`", csv_path.display()))?;
    write_kv(&sidecar_path(csv_path), &spec_kv_pairs(spec))
}

/// Write one overpass's cell predictions (`row,col,value` plus a sidecar
/// with the grid and the overpass time).
pub fn write_predictions(
    csv_path: &Path,
    spec: &GridSpec,
    predictions: &OverpassPredictions,
) -> Result<()> {
    let mut text = String::new();
    text.push_str("row,col,value\n");
    for (i, value) in predictions.cells.iter().enumerate() {
        if let Some(v) = value {
            writeln!(text, "{},{},{v}", i / spec.n_cols, i % spec.n_cols).unwrap();
        }
    }
    fs::write(csv_path, text).with_context(|| format!("cannot write `{}`", csv_path.display()))?;
    let mut pairs = spec_kv_pairs(spec);
    pairs.push(("overpass_time_unix", predictions.time.unix().to_string()));
    write_kv(&sidecar_path(csv_path), &pairs)
}

pub fn read_predictions(csv_path: &Path) -> Result<(GridSpec, OverpassPredictions)> {
    let kv = KvFile::read(&sidecar_path(csv_path))?;
    let spec = spec_from_kv(&kv, None)?;
    let unix: i64 = kv.parse_value("overpass_time_unix")?;
    let time = Timestamp::from_unix(unix)
        .map_err(|e| anyhow!("`{}`: {e}", sidecar_path(csv_path).display()))?;
    let lines = read_lines(csv_path)?;
    check_header(csv_path, lines.first(), &["row", "col", "value"])?;
    let mut cells: Vec<Option<f64>> = vec![None; spec.n_cells()];
    for (i, line) in lines.iter().enumerate().skip(1) {
        let line_no = i + 1;
        let fields = split_row(line, 3, csv_path, line_no)?;
        let row: usize = parse_field(fields[0], csv_path, line_no, "row")?;
        let col: usize = parse_field(fields[1], csv_path, line_no, "col")?;
        let value = parse_finite(fields[2], csv_path, line_no, "value")?;
        if row >= spec.n_rows || col >= spec.n_cols {
            bail!(
                "`{}` line {line_no}: cell ({row}, {col}) outside the grid",
                csv_path.display()
            );
        }
        if cells[spec.flat(row, col)].is_some() {
            bail!(
                "`{}` line {line_no}: duplicate cell ({row}, {col})",
                csv_path.display()
            );
        }
        cells[spec.flat(row, col)] = Some(value);
    }
    Ok((spec, OverpassPredictions { time, cells }))
}
