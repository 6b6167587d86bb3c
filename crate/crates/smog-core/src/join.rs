//! Spatio-temporal alignment: station observations to overpass time, coarse
//! weather fields to arbitrary points and instants, and 100 m land-cover
//! classes to per-cell fractions.

use alloc::vec::Vec;
use core::fmt;

use crate::calendar::Timestamp;
use crate::geo::{GeoPoint, StationMeta};
use crate::regrid::{CellRect, GridSpec};

#[derive(Debug, Clone, PartialEq)]
pub enum JoinError {
    UnsortedSeries { station: alloc::string::String },
    InvalidConcentration { station: alloc::string::String },
    BadFieldSet(&'static str),
    SpaceOutOfBounds { latitude: f64, longitude: f64 },
    TimeOutOfBounds { unix: i64 },
    UnknownLandCoverCode(u16),
    BadRaster(&'static str),
    ResolutionMismatch,
}

impl fmt::Display for JoinError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JoinError::UnsortedSeries { station } => {
                write!(
                    f,
                    "station `{station}`: timestamps must be strictly increasing"
                )
            }
            JoinError::InvalidConcentration { station } => {
                write!(
                    f,
                    "station `{station}`: concentrations must be finite and >= 0"
                )
            }
            JoinError::BadFieldSet(why) => write!(f, "invalid weather field set: {why}"),
            JoinError::SpaceOutOfBounds {
                latitude,
                longitude,
            } => write!(
                f,
                "point ({latitude}, {longitude}) outside the weather grid"
            ),
            JoinError::TimeOutOfBounds { unix } => {
                write!(f, "instant {unix} outside the weather field hourly span")
            }
            JoinError::UnknownLandCoverCode(code) => {
                write!(
                    f,
                    "land-cover class code {code} not in the 44-class nomenclature"
                )
            }
            JoinError::BadRaster(why) => write!(f, "invalid land-cover raster: {why}"),
            JoinError::ResolutionMismatch => {
                write!(
                    f,
                    "cell contains no land-cover pixel centres (resolution mismatch)"
                )
            }
        }
    }
}

impl core::error::Error for JoinError {}

/// A station's hourly concentration record, time-sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct StationSeries {
    pub meta: StationMeta,
    samples: Vec<(Timestamp, f64)>,
}

impl StationSeries {
    /// `samples` must be strictly increasing in time with finite
    /// non-negative concentrations.
    pub fn new(meta: StationMeta, samples: Vec<(Timestamp, f64)>) -> Result<Self, JoinError> {
        for window in samples.windows(2) {
            if window[1].0 <= window[0].0 {
                return Err(JoinError::UnsortedSeries {
                    station: meta.station_id.clone(),
                });
            }
        }
        if samples.iter().any(|&(_, v)| !v.is_finite() || v < 0.0) {
            return Err(JoinError::InvalidConcentration {
                station: meta.station_id.clone(),
            });
        }
        Ok(StationSeries { meta, samples })
    }

    pub fn samples(&self) -> &[(Timestamp, f64)] {
        &self.samples
    }
}

/// Concentration at `t` by linear interpolation between the bracketing
/// samples.
///
/// An exact timestamp match returns that sample. Otherwise the bracketing
/// pair must span no more than `max_gap_secs` (hourly data with one missing
/// record still interpolates under the 2 h default; longer outages are
/// rejected rather than bridged). Missing data is a `None`, not an error.
pub fn interp_observation(series: &StationSeries, t: Timestamp, max_gap_secs: i64) -> Option<f64> {
    debug_assert!(max_gap_secs > 0);
    let samples = series.samples();
    match samples.binary_search_by_key(&t, |&(time, _)| time) {
        Ok(i) => Some(samples[i].1),
        Err(pos) => {
            if pos == 0 || pos == samples.len() {
                return None;
            }
            let (t_lo, v_lo) = samples[pos - 1];
            let (t_hi, v_hi) = samples[pos];
            let span = t_lo.seconds_until(t_hi);
            if span > max_gap_secs {
                return None;
            }
            let frac = t_lo.seconds_until(t) as f64 / span as f64;
            Some(v_lo + (v_hi - v_lo) * frac)
        }
    }
}

/// Names of the nine weather variables carried by a [`MeteoFieldSet`], in
/// storage order.
pub const METEO_VARIABLES: [&str; 9] = [
    "dewpoint_2m",
    "temp_2m",
    "wind_u10",
    "wind_v10",
    "ssrd",
    "evaporation",
    "precip_total",
    "blh",
    "surface_pressure",
];

/// Hourly weather grids for the nine variables over one shared grid.
///
/// Grid values are point samples at the lattice nodes
/// `(lat_min + row·cell, lon_min + col·cell)`; hours are contiguous from
/// `start`. Accumulated variables (precipitation, evaporation, ssrd) are
/// carried as-is per hourly record.
#[derive(Debug, Clone)]
pub struct MeteoFieldSet {
    spec: GridSpec,
    start: Timestamp,
    n_hours: usize,
    /// Indexed `((var * n_hours) + hour) * n_cells + cell`.
    values: Vec<f64>,
}

impl MeteoFieldSet {
    pub fn new(
        spec: GridSpec,
        start: Timestamp,
        n_hours: usize,
        values: Vec<f64>,
    ) -> Result<Self, JoinError> {
        if n_hours == 0 {
            return Err(JoinError::BadFieldSet("need at least one hourly step"));
        }
        if values.len() != METEO_VARIABLES.len() * n_hours * spec.n_cells() {
            return Err(JoinError::BadFieldSet("value buffer length mismatch"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(JoinError::BadFieldSet("values must be finite"));
        }
        if Timestamp::from_unix(start.unix() + (n_hours as i64 - 1) * 3_600).is_err() {
            return Err(JoinError::BadFieldSet(
                "hourly span leaves the valid time range",
            ));
        }
        Ok(MeteoFieldSet {
            spec,
            start,
            n_hours,
            values,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn start(&self) -> Timestamp {
        self.start
    }

    pub fn n_hours(&self) -> usize {
        self.n_hours
    }

    fn node(&self, var: usize, hour: usize, row: usize, col: usize) -> f64 {
        self.values[(var * self.n_hours + hour) * self.spec.n_cells() + self.spec.flat(row, col)]
    }
}

/// Interpolated weather at one point and instant. Wind is carried as raw
/// components; convert with [`crate::wind::wind`] after interpolation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeteoSample {
    pub dewpoint_2m: f64,
    pub temp_2m: f64,
    pub wind_u10: f64,
    pub wind_v10: f64,
    pub ssrd: f64,
    pub evaporation: f64,
    pub precip_total: f64,
    pub blh: f64,
    pub surface_pressure: f64,
}

/// All nine variables at `p` and `t`: bilinear in space at the bracketing
/// hours, then linear in time.
///
/// Points outside the node hull or instants outside the hourly span are an
/// explicit error; this function never extrapolates.
pub fn meteo_at(
    fields: &MeteoFieldSet,
    p: &GeoPoint,
    t: Timestamp,
) -> Result<MeteoSample, JoinError> {
    let spec = &fields.spec;
    let r = (p.latitude - spec.lat_min) / spec.cell_size;
    let c = (p.longitude - spec.lon_min) / spec.cell_size;
    let r_max = (spec.n_rows - 1) as f64;
    let c_max = (spec.n_cols - 1) as f64;
    if !(0.0..=r_max).contains(&r) || !(0.0..=c_max).contains(&c) {
        return Err(JoinError::SpaceOutOfBounds {
            latitude: p.latitude,
            longitude: p.longitude,
        });
    }

    let rel = fields.start.seconds_until(t);
    if rel < 0 {
        return Err(JoinError::TimeOutOfBounds { unix: t.unix() });
    }
    let hour = (rel / 3_600) as usize;
    let frac_t = (rel % 3_600) as f64 / 3_600.0;
    let last = fields.n_hours - 1;
    if hour > last || (hour == last && frac_t > 0.0) {
        return Err(JoinError::TimeOutOfBounds { unix: t.unix() });
    }

    // Corner indices; at the far edges the weight collapses onto one node.
    let i0 = if spec.n_rows == 1 {
        0
    } else if r >= r_max {
        spec.n_rows - 2
    } else {
        libm::floor(r) as usize
    };
    let j0 = if spec.n_cols == 1 {
        0
    } else if c >= c_max {
        spec.n_cols - 2
    } else {
        libm::floor(c) as usize
    };
    let i1 = (i0 + 1).min(spec.n_rows - 1);
    let j1 = (j0 + 1).min(spec.n_cols - 1);
    let fr = r - i0 as f64;
    let fc = c - j0 as f64;

    let mut out = [0.0f64; 9];
    for (var, slot) in out.iter_mut().enumerate() {
        let plane = |hour: usize| {
            let v00 = fields.node(var, hour, i0, j0);
            let v01 = fields.node(var, hour, i0, j1);
            let v10 = fields.node(var, hour, i1, j0);
            let v11 = fields.node(var, hour, i1, j1);
            (1.0 - fr) * ((1.0 - fc) * v00 + fc * v01) + fr * ((1.0 - fc) * v10 + fc * v11)
        };
        let v = if frac_t == 0.0 {
            plane(hour)
        } else {
            let lo = plane(hour);
            let hi = plane(hour + 1);
            lo + (hi - lo) * frac_t
        };
        *slot = v;
    }
    Ok(MeteoSample {
        dewpoint_2m: out[0],
        temp_2m: out[1],
        wind_u10: out[2],
        wind_v10: out[3],
        ssrd: out[4],
        evaporation: out[5],
        precip_total: out[6],
        blh: out[7],
        surface_pressure: out[8],
    })
}

/// The land-cover classes fed to the models, with their class codes.
pub const SELECTED_LANDCOVER: [(u16, &str); 7] = [
    (111, "lc_continuous_urban"),
    (112, "lc_discontinuous_urban"),
    (121, "lc_industrial"),
    (122, "lc_road_rail"),
    (123, "lc_port"),
    (124, "lc_airport"),
    (311, "lc_broadleaf"),
];

/// The full 44-class land-cover nomenclature.
pub const LANDCOVER_CLASSES: [u16; 44] = [
    111, 112, 121, 122, 123, 124, 131, 132, 133, 141, 142, // artificial surfaces
    211, 212, 213, 221, 222, 223, 231, 241, 242, 243, 244, // agricultural areas
    311, 312, 313, 321, 322, 323, 324, 331, 332, 333, 334, 335, // forest and seminatural
    411, 412, 421, 422, 423, // wetlands
    511, 512, 521, 522, 523, // water bodies
];

/// A geo-registered class-code raster (100 m-scale pixels in degrees).
///
/// `spec.cell_size` is the pixel size; class codes must come from the
/// 44-class nomenclature.
#[derive(Debug, Clone)]
pub struct LandCoverRaster {
    spec: GridSpec,
    classes: Vec<u16>,
}

impl LandCoverRaster {
    pub fn new(spec: GridSpec, classes: Vec<u16>) -> Result<Self, JoinError> {
        if classes.len() != spec.n_cells() {
            return Err(JoinError::BadRaster("class buffer length mismatch"));
        }
        for &code in &classes {
            if !LANDCOVER_CLASSES.contains(&code) {
                return Err(JoinError::UnknownLandCoverCode(code));
            }
        }
        Ok(LandCoverRaster { spec, classes })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn class_at(&self, row: usize, col: usize) -> u16 {
        self.classes[self.spec.flat(row, col)]
    }
}

/// Fraction of each selected class within `cell`, by counting the raster
/// pixel centres that fall inside it.
///
/// Fractions are ordered as [`SELECTED_LANDCOVER`]; unselected classes are
/// not emitted, so the seven fractions sum to at most 1. A cell containing
/// zero pixel centres is a resolution-mismatch error.
pub fn landcover_fractions(
    raster: &LandCoverRaster,
    cell: &CellRect,
) -> Result<[f64; 7], JoinError> {
    let spec = &raster.spec;
    let px = spec.cell_size;
    // Conservative pixel index window around the cell; centres are tested
    // individually so the window bounds only need to over-cover.
    let row_lo = libm::floor((cell.lat_min - spec.lat_min) / px - 1.0).max(0.0) as usize;
    let row_hi =
        (libm::ceil((cell.lat_max - spec.lat_min) / px + 1.0).max(0.0) as usize).min(spec.n_rows);
    let col_lo = libm::floor((cell.lon_min - spec.lon_min) / px - 1.0).max(0.0) as usize;
    let col_hi =
        (libm::ceil((cell.lon_max - spec.lon_min) / px + 1.0).max(0.0) as usize).min(spec.n_cols);

    let mut selected = [0u64; 7];
    let mut total = 0u64;
    for row in row_lo..row_hi {
        let lat = spec.lat_min + (row as f64 + 0.5) * px;
        if lat < cell.lat_min || lat >= cell.lat_max {
            continue;
        }
        for col in col_lo..col_hi {
            let lon = spec.lon_min + (col as f64 + 0.5) * px;
            if lon < cell.lon_min || lon >= cell.lon_max {
                continue;
            }
            total += 1;
            let code = raster.class_at(row, col);
            if let Some(k) = SELECTED_LANDCOVER.iter().position(|&(c, _)| c == code) {
                selected[k] += 1;
            }
        }
    }
    if total == 0 {
        return Err(JoinError::ResolutionMismatch);
    }
    let mut fractions = [0.0f64; 7];
    for (f, &count) in fractions.iter_mut().zip(&selected) {
        *f = count as f64 / total as f64;
    }
    Ok(fractions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::StationType;
    use alloc::string::String;
    use alloc::vec;

    fn ts(unix: i64) -> Timestamp {
        Timestamp::from_unix(unix).unwrap()
    }

    fn meta() -> StationMeta {
        StationMeta::new(
            String::from("es0001a"),
            GeoPoint::new(40.0, -3.7, 650.0).unwrap(),
            StationType::Traffic,
        )
        .unwrap()
    }

    const T0: i64 = 1_546_347_600; // 2019-01-01T13:00:00Z

    #[test]
    fn interpolates_at_midpoint_and_exact_hits() {
        let series =
            StationSeries::new(meta(), vec![(ts(T0), 10.0), (ts(T0 + 3_600), 20.0)]).unwrap();
        assert_eq!(
            interp_observation(&series, ts(T0 + 1_800), 7_200),
            Some(15.0)
        );
        assert_eq!(interp_observation(&series, ts(T0), 7_200), Some(10.0));
        assert_eq!(
            interp_observation(&series, ts(T0 + 3_600), 7_200),
            Some(20.0)
        );
    }

    #[test]
    fn wide_brackets_are_rejected() {
        // Samples three hours apart: the bracket exceeds the 2 h gap limit.
        let series =
            StationSeries::new(meta(), vec![(ts(T0), 10.0), (ts(T0 + 10_800), 20.0)]).unwrap();
        assert_eq!(interp_observation(&series, ts(T0 + 5_400), 7_200), None);
        // A single missing hourly record still interpolates.
        let series =
            StationSeries::new(meta(), vec![(ts(T0), 10.0), (ts(T0 + 7_200), 20.0)]).unwrap();
        assert_eq!(
            interp_observation(&series, ts(T0 + 3_600), 7_200),
            Some(15.0)
        );
    }

    #[test]
    fn no_bracket_outside_the_series() {
        let series =
            StationSeries::new(meta(), vec![(ts(T0), 10.0), (ts(T0 + 3_600), 20.0)]).unwrap();
        assert_eq!(interp_observation(&series, ts(T0 - 60), 7_200), None);
        assert_eq!(interp_observation(&series, ts(T0 + 3_660), 7_200), None);
    }

    #[test]
    fn series_validation() {
        assert!(StationSeries::new(meta(), vec![(ts(T0), 1.0), (ts(T0), 2.0)]).is_err());
        assert!(StationSeries::new(meta(), vec![(ts(T0 + 60), 1.0), (ts(T0), 2.0)]).is_err());
        assert!(StationSeries::new(meta(), vec![(ts(T0), -1.0)]).is_err());
    }

    fn field_set(values_by_hour_node: impl Fn(usize, usize, usize, usize) -> f64) -> MeteoFieldSet {
        let spec = GridSpec::new(40.0, -4.0, 0.25, 2, 2).unwrap();
        let n_hours = 3;
        let mut values = Vec::new();
        for var in 0..9 {
            for hour in 0..n_hours {
                for row in 0..2 {
                    for col in 0..2 {
                        values.push(values_by_hour_node(var, hour, row, col));
                    }
                }
            }
        }
        MeteoFieldSet::new(spec, ts(T0), n_hours, values).unwrap()
    }

    #[test]
    fn constant_field_interpolates_to_the_constant() {
        let fields = field_set(|_, _, _, _| 7.0);
        let p = GeoPoint::new(40.1, -3.9, 0.0).unwrap();
        let s = meteo_at(&fields, &p, ts(T0)).unwrap();
        assert_eq!(s.temp_2m, 7.0);
        assert_eq!(s.surface_pressure, 7.0);
    }

    #[test]
    fn bilinear_centre_and_quarter_points() {
        // Corners v(0,0)=0, v(0,1)=0, v(1,0)=10, v(1,1)=10 -> centre 5.
        let fields = field_set(|_, _, row, _| row as f64 * 10.0);
        let p = GeoPoint::new(40.125, -3.875, 0.0).unwrap();
        let s = meteo_at(&fields, &p, ts(T0)).unwrap();
        assert!((s.temp_2m - 5.0).abs() < 1e-12);

        // Corners 0,0,0,8 (only the NE corner non-zero), point at the
        // quarter position: weight fr*fc = 0.25 * 0.25.
        let fields = field_set(|_, _, row, col| if row == 1 && col == 1 { 8.0 } else { 0.0 });
        let p = GeoPoint::new(40.0625, -3.9375, 0.0).unwrap();
        let s = meteo_at(&fields, &p, ts(T0)).unwrap();
        assert!((s.temp_2m - 8.0 * 0.25 * 0.25).abs() < 1e-12);
    }

    #[test]
    fn reproduces_node_values_exactly() {
        let fields =
            field_set(|var, hour, row, col| (var * 1000 + hour * 100 + row * 10 + col) as f64);
        for row in 0..2 {
            for col in 0..2 {
                for hour in 0..3 {
                    let p = GeoPoint::new(40.0 + row as f64 * 0.25, -4.0 + col as f64 * 0.25, 0.0)
                        .unwrap();
                    let s = meteo_at(&fields, &p, ts(T0 + hour as i64 * 3_600)).unwrap();
                    assert_eq!(s.dewpoint_2m, (hour * 100 + row * 10 + col) as f64);
                    assert_eq!(s.temp_2m, (1000 + hour * 100 + row * 10 + col) as f64);
                }
            }
        }
    }

    #[test]
    fn time_interpolation_is_linear() {
        let fields = field_set(|_, hour, _, _| hour as f64 * 10.0);
        let p = GeoPoint::new(40.1, -3.9, 0.0).unwrap();
        let s = meteo_at(&fields, &p, ts(T0 + 1_800)).unwrap();
        assert!((s.blh - 5.0).abs() < 1e-12);
    }

    #[test]
    fn refuses_to_extrapolate() {
        let fields = field_set(|_, _, _, _| 1.0);
        let outside = GeoPoint::new(41.0, -3.9, 0.0).unwrap();
        assert!(matches!(
            meteo_at(&fields, &outside, ts(T0)),
            Err(JoinError::SpaceOutOfBounds { .. })
        ));
        let p = GeoPoint::new(40.1, -3.9, 0.0).unwrap();
        assert!(matches!(
            meteo_at(&fields, &p, ts(T0 - 1)),
            Err(JoinError::TimeOutOfBounds { .. })
        ));
        // Two hourly steps after start is the last node; one second past it
        // has no upper bracket.
        assert!(meteo_at(&fields, &p, ts(T0 + 2 * 3_600)).is_ok());
        assert!(matches!(
            meteo_at(&fields, &p, ts(T0 + 2 * 3_600 + 1)),
            Err(JoinError::TimeOutOfBounds { .. })
        ));
    }

    fn raster(classes: impl Fn(usize, usize) -> u16) -> LandCoverRaster {
        // 60x60 pixels of 0.001 degrees covering [0, 0.06) x [0, 0.06).
        let spec = GridSpec::new(0.0, 0.0, 0.001, 60, 60).unwrap();
        let mut codes = Vec::with_capacity(spec.n_cells());
        for row in 0..60 {
            for col in 0..60 {
                codes.push(classes(row, col));
            }
        }
        LandCoverRaster::new(spec, codes).unwrap()
    }

    #[test]
    fn uniform_raster_gives_unit_fraction() {
        let raster = raster(|_, _| 111);
        let cell = CellRect {
            lat_min: 0.0,
            lat_max: 0.03,
            lon_min: 0.0,
            lon_max: 0.03,
        };
        let fractions = landcover_fractions(&raster, &cell).unwrap();
        assert_eq!(fractions[0], 1.0);
        assert!(fractions[1..].iter().all(|&f| f == 0.0));
    }

    #[test]
    fn split_raster_gives_half_fractions() {
        // West half continuous urban, east half broad-leaved forest.
        let raster = raster(|_, col| if col < 30 { 111 } else { 311 });
        let cell = CellRect {
            lat_min: 0.0,
            lat_max: 0.06,
            lon_min: 0.0,
            lon_max: 0.06,
        };
        let fractions = landcover_fractions(&raster, &cell).unwrap();
        assert_eq!(fractions[0], 0.5);
        assert_eq!(fractions[6], 0.5);
        assert!((fractions.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unselected_classes_yield_zero_fractions() {
        let raster = raster(|_, _| 523); // sea and ocean
        let cell = CellRect {
            lat_min: 0.0,
            lat_max: 0.03,
            lon_min: 0.0,
            lon_max: 0.03,
        };
        let fractions = landcover_fractions(&raster, &cell).unwrap();
        assert!(fractions.iter().all(|&f| f == 0.0));
    }

    #[test]
    fn empty_cell_is_a_resolution_mismatch() {
        let raster = raster(|_, _| 111);
        let cell = CellRect {
            lat_min: 0.5,
            lat_max: 0.53,
            lon_min: 0.5,
            lon_max: 0.53,
        };
        assert!(matches!(
            landcover_fractions(&raster, &cell),
            Err(JoinError::ResolutionMismatch)
        ));
    }

    #[test]
    fn raster_rejects_unknown_codes() {
        let spec = GridSpec::new(0.0, 0.0, 0.001, 2, 2).unwrap();
        assert!(LandCoverRaster::new(spec, vec![111, 112, 999, 311]).is_err());
    }
}
