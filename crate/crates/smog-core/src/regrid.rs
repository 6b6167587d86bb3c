//! Swath-to-grid conversion: per-orbit satellite samples onto a regular
//! latitude/longitude grid with quality filtering and cell-mean aggregation.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::calendar::{Timestamp, MIN_TIMESTAMP};
use crate::geo::GeoPoint;

#[derive(Debug, Clone, PartialEq)]
pub enum RegridError {
    InvalidSpec(&'static str),
    InvalidQaThreshold(f64),
    InvalidSample(&'static str),
    CellOutOfGrid { row: usize, col: usize },
    DuplicateCell { row: usize, col: usize },
}

impl fmt::Display for RegridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegridError::InvalidSpec(why) => write!(f, "invalid grid spec: {why}"),
            RegridError::InvalidQaThreshold(t) => {
                write!(f, "qa threshold {t} outside [0, 1]")
            }
            RegridError::InvalidSample(why) => write!(f, "invalid swath sample: {why}"),
            RegridError::CellOutOfGrid { row, col } => {
                write!(f, "cell ({row}, {col}) outside grid dimensions")
            }
            RegridError::DuplicateCell { row, col } => {
                write!(f, "cell ({row}, {col}) listed twice")
            }
        }
    }
}

impl core::error::Error for RegridError {}

/// A regular latitude/longitude grid. Cells are half-open intervals
/// `[edge, edge + cell_size)` counted from the south-west corner; row 0 is
/// the southernmost row.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub lat_min: f64,
    pub lon_min: f64,
    pub cell_size: f64,
    pub n_rows: usize,
    pub n_cols: usize,
}

impl GridSpec {
    pub fn new(
        lat_min: f64,
        lon_min: f64,
        cell_size: f64,
        n_rows: usize,
        n_cols: usize,
    ) -> Result<GridSpec, RegridError> {
        if !(lat_min.is_finite() && lon_min.is_finite() && cell_size.is_finite()) {
            return Err(RegridError::InvalidSpec("non-finite field"));
        }
        if cell_size <= 0.0 {
            return Err(RegridError::InvalidSpec("cell_size must be positive"));
        }
        if n_rows == 0 || n_cols == 0 {
            return Err(RegridError::InvalidSpec("grid must have at least one cell"));
        }
        if lat_min < -90.0 || lat_min + n_rows as f64 * cell_size > 90.0 {
            return Err(RegridError::InvalidSpec(
                "latitude extent outside [-90, 90]",
            ));
        }
        if lon_min < -180.0 || lon_min + n_cols as f64 * cell_size > 180.0 {
            return Err(RegridError::InvalidSpec(
                "longitude extent outside [-180, 180]",
            ));
        }
        Ok(GridSpec {
            lat_min,
            lon_min,
            cell_size,
            n_rows,
            n_cols,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n_rows * self.n_cols
    }

    pub fn flat(&self, row: usize, col: usize) -> usize {
        row * self.n_cols + col
    }

    /// Grid cell containing `p`, or `None` outside the grid bounds.
    pub fn cell_index(&self, p: &GeoPoint) -> Option<(usize, usize)> {
        let row = libm::floor((p.latitude - self.lat_min) / self.cell_size);
        let col = libm::floor((p.longitude - self.lon_min) / self.cell_size);
        if row < 0.0 || col < 0.0 || row >= self.n_rows as f64 || col >= self.n_cols as f64 {
            return None;
        }
        Some((row as usize, col as usize))
    }

    /// Centre coordinates (lat, lon) of a cell.
    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        (
            self.lat_min + (row as f64 + 0.5) * self.cell_size,
            self.lon_min + (col as f64 + 0.5) * self.cell_size,
        )
    }

    /// Half-open bounding rectangle of a cell.
    pub fn cell_rect(&self, row: usize, col: usize) -> CellRect {
        CellRect {
            lat_min: self.lat_min + row as f64 * self.cell_size,
            lat_max: self.lat_min + (row + 1) as f64 * self.cell_size,
            lon_min: self.lon_min + col as f64 * self.cell_size,
            lon_max: self.lon_min + (col + 1) as f64 * self.cell_size,
        }
    }
}

/// A half-open geographic rectangle: `[lat_min, lat_max) × [lon_min, lon_max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellRect {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

impl CellRect {
    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        lat >= self.lat_min && lat < self.lat_max && lon >= self.lon_min && lon < self.lon_max
    }
}

/// Grid cell containing `p` under `spec`, or `None` outside the bounds.
pub fn cell_index(p: &GeoPoint, spec: &GridSpec) -> Option<(usize, usize)> {
    spec.cell_index(p)
}

/// One geolocated swath retrieval.
#[derive(Debug, Clone, PartialEq)]
pub struct SwathSample {
    pub location: GeoPoint,
    pub value: f64,
    /// Per-pixel retrieval quality in `[0, 1]`.
    pub qa: f64,
    pub time: Timestamp,
}

impl SwathSample {
    pub fn new(
        location: GeoPoint,
        value: f64,
        qa: f64,
        time: Timestamp,
    ) -> Result<SwathSample, RegridError> {
        if !value.is_finite() {
            return Err(RegridError::InvalidSample("value must be finite"));
        }
        if !(0.0..=1.0).contains(&qa) {
            return Err(RegridError::InvalidSample("qa must lie in [0, 1]"));
        }
        Ok(SwathSample {
            location,
            value,
            qa,
            time,
        })
    }
}

/// One regridded overpass: per-cell mean of the accepted samples.
///
/// Cells where no sample was accepted are explicitly empty (`value` returns
/// `None`); they are never zero-valued.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub spec: GridSpec,
    /// Cell means; empty cells (count 0) hold an unreachable 0.0 placeholder.
    values: Vec<f64>,
    counts: Vec<u32>,
    /// Representative instant of the overpass: the lower median sample time.
    pub overpass_time: Timestamp,
    pub variable: String,
}

impl GridField {
    /// Mean value of a cell, or `None` for an empty cell.
    pub fn value(&self, row: usize, col: usize) -> Option<f64> {
        let i = self.spec.flat(row, col);
        if self.counts[i] == 0 {
            None
        } else {
            Some(self.values[i])
        }
    }

    pub fn count(&self, row: usize, col: usize) -> u32 {
        self.counts[self.spec.flat(row, col)]
    }

    /// Non-empty cells in row-major order: `(row, col, mean, count)`.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, f64, u32)> + '_ {
        let n_cols = self.spec.n_cols;
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(move |(i, &c)| (i / n_cols, i % n_cols, self.values[i], c))
    }

    pub fn n_occupied(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Rebuild a field from explicit non-empty cells (the file-format path).
    pub fn from_cells(
        spec: GridSpec,
        cells: &[(usize, usize, f64, u32)],
        overpass_time: Timestamp,
        variable: String,
    ) -> Result<GridField, RegridError> {
        let mut values = vec![0.0f64; spec.n_cells()];
        let mut counts = vec![0u32; spec.n_cells()];
        for &(row, col, value, count) in cells {
            if row >= spec.n_rows || col >= spec.n_cols {
                return Err(RegridError::CellOutOfGrid { row, col });
            }
            if count == 0 || !value.is_finite() {
                return Err(RegridError::InvalidSample(
                    "stored cells must have positive count and finite mean",
                ));
            }
            let i = spec.flat(row, col);
            if counts[i] != 0 {
                return Err(RegridError::DuplicateCell { row, col });
            }
            values[i] = value;
            counts[i] = count;
        }
        Ok(GridField {
            spec,
            values,
            counts,
            overpass_time,
            variable,
        })
    }
}

/// Bin swath samples onto `spec`, keeping samples with `qa >= qa_threshold`
/// that fall inside the grid.
///
/// Each cell's value is the arithmetic mean of its accepted samples,
/// accumulated in input order. The field's overpass time is the lower median
/// time of the accepted samples (of all samples when none pass the filter,
/// and the 1979 range floor for vacuous input). An empty accepted set is not
/// an error: it yields a field of all-empty cells.
pub fn bin_swath(
    samples: &[SwathSample],
    spec: &GridSpec,
    qa_threshold: f64,
    variable: &str,
) -> Result<GridField, RegridError> {
    if !(0.0..=1.0).contains(&qa_threshold) {
        return Err(RegridError::InvalidQaThreshold(qa_threshold));
    }
    let mut sums = vec![0.0f64; spec.n_cells()];
    let mut counts = vec![0u32; spec.n_cells()];
    let mut accepted_times: Vec<Timestamp> = Vec::new();
    for s in samples {
        // Keep the negated form: a NaN qa must never pass the filter.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(s.qa >= qa_threshold) {
            continue;
        }
        let Some((row, col)) = spec.cell_index(&s.location) else {
            continue;
        };
        let i = spec.flat(row, col);
        sums[i] += s.value;
        counts[i] += 1;
        accepted_times.push(s.time);
    }
    let values: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    let overpass_time = if !accepted_times.is_empty() {
        lower_median(&mut accepted_times)
    } else if !samples.is_empty() {
        let mut all: Vec<Timestamp> = samples.iter().map(|s| s.time).collect();
        lower_median(&mut all)
    } else {
        MIN_TIMESTAMP
    };
    Ok(GridField {
        spec: spec.clone(),
        values,
        counts,
        overpass_time,
        variable: String::from(variable),
    })
}

fn lower_median(times: &mut [Timestamp]) -> Timestamp {
    times.sort_unstable();
    times[(times.len() - 1) / 2]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iberia_spec() -> GridSpec {
        GridSpec::new(36.0, -10.0, 0.03, 100, 100).unwrap()
    }

    fn sample(lat: f64, lon: f64, value: f64, qa: f64) -> SwathSample {
        SwathSample::new(
            GeoPoint::new(lat, lon, 0.0).unwrap(),
            value,
            qa,
            Timestamp::from_unix(1_546_349_400).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn cell_index_at_origin_and_edges() {
        let spec = iberia_spec();
        let p = GeoPoint::new(36.0, -10.0, 0.0).unwrap();
        assert_eq!(spec.cell_index(&p), Some((0, 0)));
        // Half-open edges: the first interior edge belongs to the next cell.
        let p = GeoPoint::new(36.03, -10.0, 0.0).unwrap();
        assert_eq!(spec.cell_index(&p), Some((1, 0)));
        let p = GeoPoint::new(90.0, 0.0, 0.0).unwrap();
        assert_eq!(spec.cell_index(&p), None);
        let p = GeoPoint::new(35.999, -10.0, 0.0).unwrap();
        assert_eq!(spec.cell_index(&p), None);
    }

    #[test]
    fn spec_validation() {
        assert!(GridSpec::new(36.0, -10.0, 0.0, 10, 10).is_err());
        assert!(GridSpec::new(36.0, -10.0, 0.03, 0, 10).is_err());
        // 89 + 100 * 0.03 = 92 > 90.
        assert!(GridSpec::new(89.0, -10.0, 0.03, 100, 10).is_err());
        assert!(GridSpec::new(36.0, 179.0, 0.03, 10, 100).is_err());
    }

    #[test]
    fn bin_means_accepted_samples() {
        let spec = iberia_spec();
        let samples = [
            sample(36.01, -9.99, 10.0, 0.9),
            sample(36.012, -9.985, 20.0, 0.9),
        ];
        let field = bin_swath(&samples, &spec, 0.75, "no2_tropospheric_column").unwrap();
        assert_eq!(field.value(0, 0), Some(15.0));
        assert_eq!(field.count(0, 0), 2);
        assert_eq!(field.n_occupied(), 1);
    }

    #[test]
    fn qa_filter_rejects_low_quality() {
        let spec = iberia_spec();
        let samples = [sample(36.01, -9.99, 10.0, 0.5)];
        let field = bin_swath(&samples, &spec, 0.75, "no2_tropospheric_column").unwrap();
        assert_eq!(field.value(0, 0), None);
        assert_eq!(field.count(0, 0), 0);
        assert_eq!(field.n_occupied(), 0);
    }

    #[test]
    fn vacuous_input_yields_empty_field() {
        let spec = iberia_spec();
        let field = bin_swath(&[], &spec, 0.75, "no2_tropospheric_column").unwrap();
        assert_eq!(field.n_occupied(), 0);
        assert_eq!(field.overpass_time, MIN_TIMESTAMP);
    }

    #[test]
    fn overpass_time_is_median_of_accepted() {
        let spec = iberia_spec();
        let t = |offset: i64| Timestamp::from_unix(1_546_349_400 + offset).unwrap();
        let mk = |offset: i64, qa: f64| {
            SwathSample::new(
                GeoPoint::new(36.01, -9.99, 0.0).unwrap(),
                1.0,
                qa,
                t(offset),
            )
            .unwrap()
        };
        let samples = [mk(50, 0.9), mk(0, 0.9), mk(100, 0.9), mk(9_999, 0.1)];
        let field = bin_swath(&samples, &spec, 0.75, "x").unwrap();
        assert_eq!(field.overpass_time, t(50));
    }

    #[test]
    fn threshold_validation() {
        let spec = iberia_spec();
        assert!(bin_swath(&[], &spec, 1.5, "x").is_err());
        assert!(bin_swath(&[], &spec, -0.1, "x").is_err());
    }

    #[test]
    fn from_cells_round_trip_and_validation() {
        let spec = GridSpec::new(0.0, 0.0, 1.0, 2, 2).unwrap();
        let t = Timestamp::from_unix(1_546_349_400).unwrap();
        let field =
            GridField::from_cells(spec.clone(), &[(0, 1, 3.5, 2)], t, String::from("x")).unwrap();
        assert_eq!(field.value(0, 1), Some(3.5));
        assert_eq!(field.value(1, 1), None);
        assert!(
            GridField::from_cells(spec.clone(), &[(2, 0, 1.0, 1)], t, String::from("x")).is_err()
        );
        assert!(GridField::from_cells(
            spec,
            &[(0, 0, 1.0, 1), (0, 0, 2.0, 1)],
            t,
            String::from("x")
        )
        .is_err());
    }
}
