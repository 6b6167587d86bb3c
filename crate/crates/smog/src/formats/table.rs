//! Feature-table CSVs: the feature columns (the canonical 26 for
//! pipeline-built tables, any schema for synthetic ones) followed by
//! `station_id,time_unix` and, for training tables, `target`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use smog_core::calendar::temporal_features;
use smog_core::dataset::{FeatureTable, TableRow};

use super::{parse_finite, parse_timestamp, read_lines, split_row};

pub fn write_table(path: &Path, table: &FeatureTable) -> Result<()> {
    let mut text = String::new();
    for name in table.feature_names() {
        if name.contains(',') || name.contains('\n') {
            bail!("feature name `{name}` contains a separator");
        }
        text.push_str(name);
        text.push(',');
    }
    text.push_str("station_id,time_unix");
    if table.has_targets() {
        text.push_str(",target");
    }
    text.push('\n');
    for row in table.rows() {
        for value in &row.features {
            write!(text, "{value},").unwrap();
        }
        write!(text, "{},{}", row.station_id, row.time.unix()).unwrap();
        if let Some(target) = row.target {
            write!(text, ",{target}").unwrap();
        }
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("cannot write `{}`", path.display()))
}

pub fn read_table(path: &Path) -> Result<FeatureTable> {
    let lines = read_lines(path)?;
    let header = lines
        .first()
        .ok_or_else(|| anyhow!("`{}`: empty file, expected a header", path.display()))?;
    let columns: Vec<&str> = header.split(',').collect();
    for required in ["station_id", "time_unix"] {
        if !columns.contains(&required) {
            bail!("`{}`: missing column `{required}`", path.display());
        }
    }
    let with_target = match columns.as_slice() {
        [.., "station_id", "time_unix", "target"] => true,
        [.., "station_id", "time_unix"] => false,
        _ => bail!(
            "`{}`: header must end with `station_id,time_unix[,target]`, got `{header}`",
            path.display()
        ),
    };
    let n_features = columns.len() - if with_target { 3 } else { 2 };
    if n_features == 0 {
        bail!(
            "`{}`: table needs at least one feature column",
            path.display()
        );
    }
    let feature_names: Vec<String> = columns[..n_features]
        .iter()
        .map(|s| s.to_string())
        .collect();

    let mut rows = Vec::with_capacity(lines.len().saturating_sub(1));
    for (i, line) in lines.iter().enumerate().skip(1) {
        let line_no = i + 1;
        let fields = split_row(line, columns.len(), path, line_no)?;
        let mut features = Vec::with_capacity(n_features);
        for (raw, name) in fields[..n_features].iter().zip(&feature_names) {
            features.push(parse_finite(raw, path, line_no, name)?);
        }
        let station_id = fields[n_features].trim().to_string();
        let time = parse_timestamp(fields[n_features + 1], path, line_no)?;
        let target = if with_target {
            Some(parse_finite(
                fields[n_features + 2],
                path,
                line_no,
                "target",
            )?)
        } else {
            None
        };
        rows.push(TableRow {
            features,
            station_id,
            time,
            target,
        });
    }
    let mut table =
        FeatureTable::new(feature_names, rows).map_err(|e| anyhow!("`{}`: {e}", path.display()))?;
    table.year = table.rows().first().map(|r| temporal_features(r.time).year);
    Ok(table)
}
