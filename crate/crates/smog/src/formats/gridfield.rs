//! Regridded overpass files: `row,col,value,count` for the occupied cells,
//! plus a `.spec` sidecar carrying the grid, variable name, and overpass
//! time. Empty cells are implicit: any (row, col) absent from the CSV holds
//! no data.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use smog_core::regrid::GridField;
use smog_core::Timestamp;

use super::{check_header, parse_field, parse_finite, read_lines, sidecar_path, split_row};
use crate::sidecar::{spec_from_kv, spec_kv_pairs, write_kv, KvFile};

const HEADER: [&str; 4] = ["row", "col", "value", "count"];

pub fn write_grid_field(csv_path: &Path, field: &GridField) -> Result<()> {
    let mut text = String::new();
    text.push_str("row,col,value,count\n");
    for (row, col, value, count) in field.cells() {
        writeln!(text, "{row},{col},{value},{count}").unwrap();
    }
    fs::write(csv_path, text).with_context(|| format!("cannot write `{}`", csv_path.display()))?;

    let mut pairs = spec_kv_pairs(&field.spec);
    pairs.push(("variable", field.variable.clone()));
    pairs.push(("overpass_time_unix", field.overpass_time.unix().to_string()));
    write_kv(&sidecar_path(csv_path), &pairs)
}

pub fn read_grid_field(csv_path: &Path) -> Result<GridField> {
    let kv = KvFile::read(&sidecar_path(csv_path))?;
    let spec = spec_from_kv(&kv, None)?;
    let variable = kv.require("variable")?.to_string();
    let overpass_unix: i64 = kv.parse_value("overpass_time_unix")?;
    let overpass_time = Timestamp::from_unix(overpass_unix).map_err(|e| {
        anyhow!(
            "`{}`: overpass_time_unix: {e}",
            sidecar_path(csv_path).display()
        )
    })?;

    let lines = read_lines(csv_path)?;
    check_header(csv_path, lines.first(), &HEADER)?;
    let mut cells = Vec::with_capacity(lines.len().saturating_sub(1));
    for (i, line) in lines.iter().enumerate().skip(1) {
        let line_no = i + 1;
        let fields = split_row(line, 4, csv_path, line_no)?;
        let row: usize = parse_field(fields[0], csv_path, line_no, "row")?;
        let col: usize = parse_field(fields[1], csv_path, line_no, "col")?;
        let value = parse_finite(fields[2], csv_path, line_no, "value")?;
        let count: u32 = parse_field(fields[3], csv_path, line_no, "count")?;
        cells.push((row, col, value, count));
    }
    GridField::from_cells(spec, &cells, overpass_time, variable)
        .map_err(|e| anyhow!("`{}`: {e}", csv_path.display()))
}
