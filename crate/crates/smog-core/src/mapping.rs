//! Grid-wide prediction support: feature rows for every covered cell,
//! annual-mean aggregation, and monthly distribution statistics.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::calendar::{temporal_features, Timestamp};
use crate::dataset::{DatasetError, FeatureTable, TableRow, FEATURE_NAMES};
use crate::geo::StationType;
use crate::join::{landcover_fractions, meteo_at, JoinError, LandCoverRaster, MeteoFieldSet};
use crate::regrid::{GridField, GridSpec};
use crate::wind::wind;

#[derive(Debug, Clone, PartialEq)]
pub enum MappingError {
    SpecMismatch(&'static str),
    MissingElevation { row: usize, col: usize },
    LandCover(JoinError),
    Dataset(DatasetError),
    EmptyInput(&'static str),
}

impl fmt::Display for MappingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MappingError::SpecMismatch(what) => {
                write!(f, "{what} grid spec differs from the prediction grid")
            }
            MappingError::MissingElevation { row, col } => {
                write!(f, "elevation raster has no value for cell ({row}, {col})")
            }
            MappingError::LandCover(e) => write!(f, "land cover: {e}"),
            MappingError::Dataset(e) => write!(f, "{e}"),
            MappingError::EmptyInput(what) => write!(f, "{what} must not be empty"),
        }
    }
}

impl core::error::Error for MappingError {}

/// A single-band raster over a [`GridSpec`]; `None` cells are no-data.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub spec: GridSpec,
    cells: Vec<Option<f64>>,
}

impl Raster {
    pub fn new(spec: GridSpec, cells: Vec<Option<f64>>) -> Result<Raster, MappingError> {
        if cells.len() != spec.n_cells() {
            return Err(MappingError::SpecMismatch("raster buffer"));
        }
        Ok(Raster { spec, cells })
    }

    pub fn empty(spec: GridSpec) -> Raster {
        let cells = vec![None; spec.n_cells()];
        Raster { spec, cells }
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.cells[self.spec.flat(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Option<f64>) {
        let i = self.spec.flat(row, col);
        self.cells[i] = value;
    }

    pub fn cells(&self) -> &[Option<f64>] {
        &self.cells
    }
}

/// Feature rows for one overpass over the whole grid, with the cell
/// coordinates of each row.
#[derive(Debug, Clone)]
pub struct GridRows {
    /// Prediction-mode table (no targets), one row per covered cell.
    pub table: FeatureTable,
    /// `(row, col)` of each table row, in table order.
    pub cells: Vec<(usize, usize)>,
}

/// Per-cell predictions of one overpass, aligned with a grid spec.
#[derive(Debug, Clone, PartialEq)]
pub struct OverpassPredictions {
    pub time: Timestamp,
    pub cells: Vec<Option<f64>>,
}

/// Per-cell attributes that do not change between overpasses: centroid
/// coordinates, altitude, land-cover fractions, and the station type
/// assumed for unmonitored cells. Computed once and reused for every
/// overpass of a prediction run.
#[derive(Debug, Clone)]
pub struct GridAttributes {
    pub spec: GridSpec,
    pub station_type: StationType,
    centroids: Vec<(f64, f64)>,
    altitudes: Vec<Option<f64>>,
    fractions: Vec<[f64; 7]>,
}

impl GridAttributes {
    /// Grid cells carry no monitoring station, so `station_type`
    /// (background by convention) and the elevation raster stand in for
    /// the station-specific features; latitude/longitude are cell
    /// centroids. The land-cover raster must cover the whole grid.
    pub fn compute(
        spec: &GridSpec,
        landcover: &LandCoverRaster,
        elevation: &Raster,
        station_type: StationType,
    ) -> Result<GridAttributes, MappingError> {
        if elevation.spec != *spec {
            return Err(MappingError::SpecMismatch("elevation"));
        }
        let mut centroids = Vec::with_capacity(spec.n_cells());
        let mut altitudes = Vec::with_capacity(spec.n_cells());
        let mut fractions = Vec::with_capacity(spec.n_cells());
        for row in 0..spec.n_rows {
            for col in 0..spec.n_cols {
                centroids.push(spec.cell_center(row, col));
                altitudes.push(elevation.get(row, col));
                let lc = landcover_fractions(landcover, &spec.cell_rect(row, col))
                    .map_err(MappingError::LandCover)?;
                fractions.push(lc);
            }
        }
        Ok(GridAttributes {
            spec: spec.clone(),
            station_type,
            centroids,
            altitudes,
            fractions,
        })
    }
}

/// Assemble prediction-mode feature rows for every cell of `field` that has
/// satellite data and weather coverage at the overpass instant.
///
/// Cells without satellite or weather coverage are skipped; a covered cell
/// missing from the elevation raster is an error.
pub fn build_grid_rows(
    field: &GridField,
    meteo: &MeteoFieldSet,
    attributes: &GridAttributes,
) -> Result<GridRows, MappingError> {
    let spec = &field.spec;
    if attributes.spec != *spec {
        return Err(MappingError::SpecMismatch("attribute"));
    }
    let t = field.overpass_time;
    let cal = temporal_features(t);
    let row_width = digits(spec.n_rows.saturating_sub(1));
    let col_width = digits(spec.n_cols.saturating_sub(1));

    let mut rows: Vec<TableRow> = Vec::new();
    let mut cells: Vec<(usize, usize)> = Vec::new();
    for (row, col, satellite_value, _count) in field.cells() {
        let flat = spec.flat(row, col);
        let (lat, lon) = attributes.centroids[flat];
        let centroid = crate::geo::GeoPoint::new(lat, lon, 0.0)
            .expect("cell centres of a valid spec are valid points");
        let Ok(met) = meteo_at(meteo, &centroid, t) else {
            continue;
        };
        let altitude_m =
            attributes.altitudes[flat].ok_or(MappingError::MissingElevation { row, col })?;
        let lc = &attributes.fractions[flat];
        let (wind_speed, wind_direction) = wind(met.wind_u10, met.wind_v10);
        let features = vec![
            cal.day_of_week as f64,
            cal.day_of_year as f64,
            cal.hour as f64,
            cal.month as f64,
            cal.year as f64,
            attributes.station_type.code() as f64,
            lat,
            lon,
            altitude_m,
            satellite_value,
            lc[0],
            lc[1],
            lc[2],
            lc[3],
            lc[4],
            lc[5],
            lc[6],
            wind_speed,
            wind_direction,
            met.dewpoint_2m,
            met.evaporation,
            met.temp_2m,
            met.precip_total,
            met.surface_pressure,
            met.blh,
            met.ssrd,
        ];
        rows.push(TableRow {
            features,
            station_id: format!("cell_r{row:0row_width$}_c{col:0col_width$}"),
            time: t,
            target: None,
        });
        cells.push((row, col));
    }
    let names = FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    let table = FeatureTable::new(names, rows).map_err(MappingError::Dataset)?;
    Ok(GridRows { table, cells })
}

/// The occupied cells of a regridded field as a raster (for ESRI ASCII
/// export of the inputs themselves).
pub fn field_raster(field: &GridField) -> Raster {
    let mut raster = Raster::empty(field.spec.clone());
    for (row, col, value, _count) in field.cells() {
        raster.set(row, col, Some(value));
    }
    raster
}

fn digits(mut n: usize) -> usize {
    let mut width = 1;
    while n >= 10 {
        n /= 10;
        width += 1;
    }
    width
}

/// Per-cell arithmetic mean over all overpasses holding a prediction there;
/// cells never covered stay no-data.
pub fn annual_mean(
    spec: &GridSpec,
    overpasses: &[OverpassPredictions],
) -> Result<Raster, MappingError> {
    let n = spec.n_cells();
    for overpass in overpasses {
        if overpass.cells.len() != n {
            return Err(MappingError::SpecMismatch("prediction"));
        }
    }
    let mut sums = vec![0.0f64; n];
    let mut counts = vec![0u32; n];
    for overpass in overpasses {
        for (i, value) in overpass.cells.iter().enumerate() {
            if let Some(v) = value {
                sums[i] += v;
                counts[i] += 1;
            }
        }
    }
    let cells = sums
        .into_iter()
        .zip(counts)
        .map(|(s, c)| if c > 0 { Some(s / c as f64) } else { None })
        .collect();
    Ok(Raster {
        spec: spec.clone(),
        cells,
    })
}

/// Distribution summary of one month's predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthlyStats {
    pub month: u8,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    /// Lowest datum within `q1 - 1.5·IQR`.
    pub whisker_lo: f64,
    /// Highest datum within `q3 + 1.5·IQR`.
    pub whisker_hi: f64,
    pub n: usize,
}

/// Pool every cell prediction by overpass month and summarise each month's
/// distribution. Quartiles interpolate linearly between closest ranks;
/// whiskers clamp to the data extremes within 1.5·IQR. Months with no
/// predictions are omitted.
pub fn monthly_stats(overpasses: &[OverpassPredictions]) -> Vec<MonthlyStats> {
    let mut by_month: [Vec<f64>; 12] = Default::default();
    for overpass in overpasses {
        let month = temporal_features(overpass.time).month as usize;
        let bucket = &mut by_month[month - 1];
        bucket.extend(overpass.cells.iter().flatten());
    }
    let mut out = Vec::new();
    for (i, values) in by_month.iter_mut().enumerate() {
        if values.is_empty() {
            continue;
        }
        values.sort_unstable_by(f64::total_cmp);
        let n = values.len();
        let q1 = quantile(values, 0.25);
        let median = quantile(values, 0.5);
        let q3 = quantile(values, 0.75);
        let iqr = q3 - q1;
        let lo_fence = q1 - 1.5 * iqr;
        let hi_fence = q3 + 1.5 * iqr;
        let whisker_lo = values
            .iter()
            .copied()
            .find(|&v| v >= lo_fence)
            .unwrap_or(values[0]);
        let whisker_hi = values
            .iter()
            .rev()
            .copied()
            .find(|&v| v <= hi_fence)
            .unwrap_or(values[n - 1]);
        out.push(MonthlyStats {
            month: (i + 1) as u8,
            min: values[0],
            q1,
            median,
            q3,
            max: values[n - 1],
            mean: values.iter().sum::<f64>() / n as f64,
            whisker_lo,
            whisker_hi,
            n,
        });
    }
    out
}

/// Quantile by linear interpolation between closest ranks of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
