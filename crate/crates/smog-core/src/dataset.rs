//! Per-pollutant feature tables: assembly from the aligned data sources and
//! the tabular type the models train on.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::calendar::{temporal_features, Timestamp};
use crate::geo::{PollutantKind, StationType};
use crate::join::{
    interp_observation, landcover_fractions, meteo_at, LandCoverRaster, MeteoFieldSet,
    StationSeries,
};
use crate::regrid::GridField;
use crate::wind::wind;

pub const FEATURE_COUNT: usize = 26;

/// Canonical feature column order of pipeline-built tables.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "day_of_week",
    "day_of_year",
    "hour",
    "month",
    "year",
    "station_type_code",
    "latitude",
    "longitude",
    "altitude_m",
    "satellite_value",
    "lc_continuous_urban",
    "lc_discontinuous_urban",
    "lc_industrial",
    "lc_road_rail",
    "lc_port",
    "lc_airport",
    "lc_broadleaf",
    "wind_speed",
    "wind_direction",
    "dewpoint_2m",
    "evaporation",
    "temp_2m",
    "precip_total",
    "surface_pressure",
    "blh",
    "ssrd",
];

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetError {
    WidthMismatch {
        row: usize,
        expected: usize,
        got: usize,
    },
    NonFiniteFeature {
        row: usize,
        column: String,
    },
    InvalidTarget {
        row: usize,
    },
    MixedTargets,
    DuplicateKey {
        station_id: String,
        unix: i64,
    },
    DuplicateStationId(String),
    InconsistentGridSpecs,
    EmptyFeatureSet,
    LandCover(crate::join::JoinError),
}

impl fmt::Display for DatasetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetError::WidthMismatch { row, expected, got } => {
                write!(f, "row {row}: expected {expected} features, got {got}")
            }
            DatasetError::NonFiniteFeature { row, column } => {
                write!(f, "row {row}: column `{column}` is not finite")
            }
            DatasetError::InvalidTarget { row } => {
                write!(f, "row {row}: target must be finite and >= 0")
            }
            DatasetError::MixedTargets => {
                write!(f, "all rows must carry a target, or none of them")
            }
            DatasetError::DuplicateKey { station_id, unix } => {
                write!(f, "duplicate (station `{station_id}`, time {unix}) pair")
            }
            DatasetError::DuplicateStationId(id) => {
                write!(f, "station id `{id}` appears more than once")
            }
            DatasetError::InconsistentGridSpecs => {
                write!(f, "all grid fields must share one grid spec")
            }
            DatasetError::EmptyFeatureSet => write!(f, "table needs at least one feature column"),
            DatasetError::LandCover(e) => write!(f, "land cover: {e}"),
        }
    }
}

impl core::error::Error for DatasetError {}

/// One assembled pipeline row: the 26 model variables plus row metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub day_of_week: u8,
    pub day_of_year: u16,
    pub hour: u8,
    pub month: u8,
    pub year: i32,
    pub station_type: StationType,
    pub latitude: f64,
    pub longitude: f64,
    pub altitude_m: f64,
    pub satellite_value: f64,
    pub lc_continuous_urban: f64,
    pub lc_discontinuous_urban: f64,
    pub lc_industrial: f64,
    pub lc_road_rail: f64,
    pub lc_port: f64,
    pub lc_airport: f64,
    pub lc_broadleaf: f64,
    pub wind_speed: f64,
    pub wind_direction: f64,
    pub dewpoint_2m: f64,
    pub evaporation: f64,
    pub temp_2m: f64,
    pub precip_total: f64,
    pub surface_pressure: f64,
    pub blh: f64,
    pub ssrd: f64,
    /// Row metadata, not model features.
    pub station_id: String,
    pub time: Timestamp,
    /// Ground concentration in µg/m³; absent in prediction-mode rows.
    pub target: Option<f64>,
}

impl FeatureRow {
    /// The 26 features in [`FEATURE_NAMES`] order.
    pub fn features(&self) -> [f64; FEATURE_COUNT] {
        [
            self.day_of_week as f64,
            self.day_of_year as f64,
            self.hour as f64,
            self.month as f64,
            self.year as f64,
            self.station_type.code() as f64,
            self.latitude,
            self.longitude,
            self.altitude_m,
            self.satellite_value,
            self.lc_continuous_urban,
            self.lc_discontinuous_urban,
            self.lc_industrial,
            self.lc_road_rail,
            self.lc_port,
            self.lc_airport,
            self.lc_broadleaf,
            self.wind_speed,
            self.wind_direction,
            self.dewpoint_2m,
            self.evaporation,
            self.temp_2m,
            self.precip_total,
            self.surface_pressure,
            self.blh,
            self.ssrd,
        ]
    }
}

/// One table row: a feature vector plus metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub features: Vec<f64>,
    pub station_id: String,
    pub time: Timestamp,
    pub target: Option<f64>,
}

/// An ordered feature table with a fixed column schema.
///
/// Pipeline-built tables carry the canonical 26 columns of
/// [`FEATURE_NAMES`]; synthetic and test tables may use any schema. The
/// invariants hold for both: uniform row width, finite features, finite
/// non-negative targets (all present or all absent), and no duplicate
/// `(station_id, time)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    feature_names: Vec<String>,
    rows: Vec<TableRow>,
    pub pollutant: Option<PollutantKind>,
    pub year: Option<i32>,
}

impl FeatureTable {
    pub fn new(feature_names: Vec<String>, rows: Vec<TableRow>) -> Result<Self, DatasetError> {
        if feature_names.is_empty() {
            return Err(DatasetError::EmptyFeatureSet);
        }
        let width = feature_names.len();
        let with_target = rows.first().map(|r| r.target.is_some());
        for (i, row) in rows.iter().enumerate() {
            if row.features.len() != width {
                return Err(DatasetError::WidthMismatch {
                    row: i,
                    expected: width,
                    got: row.features.len(),
                });
            }
            if let Some(col) = row.features.iter().position(|v| !v.is_finite()) {
                return Err(DatasetError::NonFiniteFeature {
                    row: i,
                    column: feature_names[col].clone(),
                });
            }
            match (with_target, row.target) {
                (Some(true), Some(t)) => {
                    if !t.is_finite() || t < 0.0 {
                        return Err(DatasetError::InvalidTarget { row: i });
                    }
                }
                (Some(true), None) | (Some(false), Some(_)) => {
                    return Err(DatasetError::MixedTargets)
                }
                _ => {}
            }
        }
        let mut keys: Vec<(&str, i64)> = rows
            .iter()
            .map(|r| (r.station_id.as_str(), r.time.unix()))
            .collect();
        keys.sort_unstable();
        for pair in keys.windows(2) {
            if pair[0] == pair[1] {
                return Err(DatasetError::DuplicateKey {
                    station_id: pair[0].0.to_string(),
                    unix: pair[0].1,
                });
            }
        }
        Ok(FeatureTable {
            feature_names,
            rows,
            pollutant: None,
            year: None,
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn rows(&self) -> &[TableRow] {
        &self.rows
    }

    pub fn has_targets(&self) -> bool {
        self.rows
            .first()
            .map(|r| r.target.is_some())
            .unwrap_or(false)
    }

    /// Targets of a training table; empty when the table carries none.
    pub fn targets(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.target).collect()
    }

    /// Row-major feature matrix copy.
    pub fn matrix(&self) -> Vec<f64> {
        let mut m = Vec::with_capacity(self.rows.len() * self.n_features());
        for row in &self.rows {
            m.extend_from_slice(&row.features);
        }
        m
    }

    /// Sort rows by (time, station_id): the canonical emission order.
    pub fn sort_rows(&mut self) {
        self.rows
            .sort_by(|a, b| (a.time, &a.station_id).cmp(&(b.time, &b.station_id)));
    }

    /// New table with the selected rows, preserving schema and metadata.
    pub fn subset(&self, indices: &[usize]) -> FeatureTable {
        // Rows of a valid table keep every invariant under selection.
        FeatureTable {
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            pollutant: self.pollutant,
            year: self.year,
        }
    }
}

/// Assemble the training table for `pollutant`: one row per
/// (station, overpass) pair where the station's grid cell has satellite
/// data, the observation interpolates within `max_gap_secs`, and the weather
/// fields cover the station at the overpass instant. Pairs failing any of
/// those are skipped, never imputed.
///
/// Rows are sorted by (overpass time, station id). An empty result is a
/// valid outcome, not an error.
pub fn build_table(
    stations: &[StationSeries],
    fields: &[GridField],
    meteo: &MeteoFieldSet,
    landcover: &LandCoverRaster,
    pollutant: PollutantKind,
    max_gap_secs: i64,
) -> Result<FeatureTable, DatasetError> {
    for pair in fields.windows(2) {
        if pair[0].spec != pair[1].spec {
            return Err(DatasetError::InconsistentGridSpecs);
        }
    }
    {
        let mut ids: Vec<&str> = stations
            .iter()
            .map(|s| s.meta.station_id.as_str())
            .collect();
        ids.sort_unstable();
        for pair in ids.windows(2) {
            if pair[0] == pair[1] {
                return Err(DatasetError::DuplicateStationId(pair[0].to_string()));
            }
        }
    }

    let mut rows: Vec<TableRow> = Vec::new();
    for field in fields {
        let t = field.overpass_time;
        let cal = temporal_features(t);
        for station in stations {
            let meta = &station.meta;
            let Some((row, col)) = field.spec.cell_index(&meta.location) else {
                continue;
            };
            let Some(satellite_value) = field.value(row, col) else {
                continue;
            };
            let Some(target) = interp_observation(station, t, max_gap_secs) else {
                continue;
            };
            let Ok(met) = meteo_at(meteo, &meta.location, t) else {
                continue;
            };
            let lc = landcover_fractions(landcover, &field.spec.cell_rect(row, col))
                .map_err(DatasetError::LandCover)?;
            let (wind_speed, wind_direction) = wind(met.wind_u10, met.wind_v10);
            let feature_row = FeatureRow {
                day_of_week: cal.day_of_week,
                day_of_year: cal.day_of_year,
                hour: cal.hour,
                month: cal.month,
                year: cal.year,
                station_type: meta.station_type,
                latitude: meta.location.latitude,
                longitude: meta.location.longitude,
                altitude_m: meta.location.altitude_m,
                satellite_value,
                lc_continuous_urban: lc[0],
                lc_discontinuous_urban: lc[1],
                lc_industrial: lc[2],
                lc_road_rail: lc[3],
                lc_port: lc[4],
                lc_airport: lc[5],
                lc_broadleaf: lc[6],
                wind_speed,
                wind_direction,
                dewpoint_2m: met.dewpoint_2m,
                evaporation: met.evaporation,
                temp_2m: met.temp_2m,
                precip_total: met.precip_total,
                surface_pressure: met.surface_pressure,
                blh: met.blh,
                ssrd: met.ssrd,
                station_id: meta.station_id.clone(),
                time: t,
                target: Some(target),
            };
            rows.push(TableRow {
                features: feature_row.features().to_vec(),
                station_id: feature_row.station_id,
                time: feature_row.time,
                target: feature_row.target,
            });
        }
    }

    let names = FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    let mut table = FeatureTable::new(names, rows)?;
    table.sort_rows();
    table.pollutant = Some(pollutant);
    table.year = table.rows.first().map(|r| temporal_features(r.time).year);
    Ok(table)
}
