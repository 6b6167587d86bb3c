//! Flat `key = value` text files: grid-spec sidecars, run manifests, and
//! the optional CLI config file all share this format.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use smog_core::regrid::GridSpec;

/// An ordered `key = value` file. Blank lines and `#` comments are ignored;
/// later keys override earlier ones on lookup.
#[derive(Debug, Clone)]
pub struct KvFile {
    pub pairs: Vec<(String, String)>,
    origin: String,
}

impl KvFile {
    pub fn read(path: &Path) -> Result<KvFile> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read `{}`", path.display()))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<KvFile> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{origin} line {}: expected `key = value`", i + 1))?;
            pairs.push((key.trim().to_string(), value.trim().to_string()));
        }
        Ok(KvFile {
            pairs,
            origin: origin.to_string(),
        })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.pairs
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| anyhow!("{}: missing key `{key}`", self.origin))
    }

    pub fn parse_value<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.require(key)?;
        raw.parse()
            .map_err(|e| anyhow!("{}: key `{key}` = `{raw}`: {e}", self.origin))
    }

    pub fn parse_optional<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| anyhow!("{}: key `{key}` = `{raw}`: {e}", self.origin)),
        }
    }
}

pub fn write_kv(path: &Path, pairs: &[(&str, String)]) -> Result<()> {
    let mut text = String::new();
    for (key, value) in pairs {
        writeln!(text, "{key} = {value}").unwrap();
    }
    fs::write(path, text).with_context(|| format!("cannot write `{}`", path.display()))
}

/// Read a grid spec from a sidecar, in either form: the full grid
/// (`lat_min, lon_min, cell_size, n_rows, n_cols`) or an area of interest
/// (`lat_min, lon_min, lat_max, lon_max`) that is cut into cells of
/// `cell_size` (overridable by `cell_override`, e.g. the `--cell` flag).
pub fn spec_from_kv(kv: &KvFile, cell_override: Option<f64>) -> Result<GridSpec> {
    let lat_min: f64 = kv.parse_value("lat_min")?;
    let lon_min: f64 = kv.parse_value("lon_min")?;
    let full_form = kv.get("n_rows").is_some() && kv.get("n_cols").is_some();
    let cell_size = match cell_override {
        Some(c) => c,
        None => kv
            .parse_value("cell_size")
            .context("spec gives no cell_size; supply one in the file or via --cell")?,
    };
    if cell_size <= 0.0 || !cell_size.is_finite() {
        bail!("cell size must be a positive number, got {cell_size}");
    }
    let (n_rows, n_cols) = if full_form {
        (kv.parse_value("n_rows")?, kv.parse_value("n_cols")?)
    } else {
        let lat_max: f64 = kv.parse_value("lat_max")?;
        let lon_max: f64 = kv.parse_value("lon_max")?;
        if lat_max <= lat_min || lon_max <= lon_min {
            bail!("area of interest is empty: need lat_max > lat_min and lon_max > lon_min");
        }
        // Cover the area fully; a hair of slack keeps exact multiples from
        // gaining a spurious extra row.
        let rows = ((lat_max - lat_min) / cell_size - 1e-9).ceil() as usize;
        let cols = ((lon_max - lon_min) / cell_size - 1e-9).ceil() as usize;
        (rows.max(1), cols.max(1))
    };
    GridSpec::new(lat_min, lon_min, cell_size, n_rows, n_cols).map_err(|e| anyhow!("{e}"))
}

pub fn spec_kv_pairs(spec: &GridSpec) -> Vec<(&'static str, String)> {
    vec![
        ("lat_min", format!("{}", spec.lat_min)),
        ("lon_min", format!("{}", spec.lon_min)),
        ("cell_size", format!("{}", spec.cell_size)),
        ("n_rows", format!("{}", spec.n_rows)),
        ("n_cols", format!("{}", spec.n_cols)),
    ]
}
