//! Synthetic data generation for tests, demos, and the acceptance suite.
//!
//! Everything is driven by a single seed, so regenerated suites are
//! byte-identical. The table generators produce self-contained training
//! tables; [`generate_pipeline`] writes a complete set of interchange files
//! (swaths, stations, observations, weather, land cover, elevation) that
//! exercises the whole pipeline without any external data.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use smog_core::calendar::days_from_civil;
use smog_core::dataset::{FeatureTable, TableRow};
use smog_core::geo::{GeoPoint, StationMeta, StationType};
use smog_core::join::StationSeries;
use smog_core::mapping::Raster;
use smog_core::regrid::GridSpec;
use smog_core::rng::Xoshiro256;
use smog_core::Timestamp;

use crate::formats;
use crate::sidecar::{spec_kv_pairs, write_kv};

/// 2019-01-01T12:00:00Z, the base instant of the synthetic tables.
const TABLE_T0: i64 = 1_546_344_000;

fn ts(unix: i64) -> Timestamp {
    Timestamp::from_unix(unix).unwrap()
}

/// Standard normal draw via Box-Muller.
fn normal(rng: &mut Xoshiro256, sigma: f64) -> f64 {
    let u1 = 1.0 - rng.next_f64();
    let u2 = rng.next_f64();
    sigma * (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

fn table(names: &[&str], rows: Vec<TableRow>) -> FeatureTable {
    FeatureTable::new(names.iter().map(|s| s.to_string()).collect(), rows)
        .expect("synthetic rows satisfy the table invariants")
}

/// Smooth two-feature signal: `y = 20 + 10·sin(x0) + x1² + ε`,
/// `x0, x1 ~ U(-3, 3)`, `ε ~ N(0, 0.5)` (standard deviation). The +20
/// offset keeps targets in concentration range (non-negative) without
/// changing the explainable variance.
pub fn smooth_table(n: usize, seed: u64) -> FeatureTable {
    let mut rng = Xoshiro256::from_seed(seed);
    let rows = (0..n)
        .map(|i| {
            let x0 = rng.next_f64() * 6.0 - 3.0;
            let x1 = rng.next_f64() * 6.0 - 3.0;
            let y = 20.0 + 10.0 * x0.sin() + x1 * x1 + normal(&mut rng, 0.5);
            TableRow {
                features: vec![x0, x1],
                station_id: format!("r{i:05}"),
                time: ts(TABLE_T0 + i as i64 * 3_600),
                target: Some(y.max(0.0)),
            }
        })
        .collect();
    table(&["x0", "x1"], rows)
}

/// Four irrelevant features and an independent uniform target: nothing to
/// learn.
pub fn noise_table(n: usize, seed: u64) -> FeatureTable {
    let mut rng = Xoshiro256::from_seed(seed);
    let rows = (0..n)
        .map(|i| {
            let features: Vec<f64> = (0..4).map(|_| rng.next_f64()).collect();
            TableRow {
                features,
                station_id: format!("r{i:05}"),
                time: ts(TABLE_T0 + i as i64 * 3_600),
                target: Some(rng.next_f64() * 10.0),
            }
        })
        .collect();
    table(&["x0", "x1", "x2", "x3"], rows)
}

/// `y = x0` exactly, plus five pure-noise features.
pub fn linear_table(n: usize, seed: u64) -> FeatureTable {
    let mut rng = Xoshiro256::from_seed(seed);
    let rows = (0..n)
        .map(|i| {
            let x0 = rng.next_f64() * 10.0;
            let mut features = vec![x0];
            features.extend((0..5).map(|_| rng.next_f64()));
            TableRow {
                features,
                station_id: format!("r{i:05}"),
                time: ts(TABLE_T0 + i as i64 * 3_600),
                target: Some(x0),
            }
        })
        .collect();
    table(&["x0", "x1", "x2", "x3", "x4", "x5"], rows)
}

/// The smooth signal plus station-level random effects: each of
/// `n_stations` stations carries a fixed offset `~ N(0, 3)` on top of
/// `y = 30 + 10·sin(x0) + x1²`, and rows expose the station coordinates as
/// features. Row-level cross-validation can memorise the offsets from
/// (lat, lon); held-out stations cannot be memorised, which is exactly the
/// gap station-blocked validation measures.
pub fn station_effects_table(
    n: usize,
    n_stations: usize,
    seed: u64,
) -> (FeatureTable, Vec<StationMeta>) {
    assert!(n_stations >= 1);
    let mut rng = Xoshiro256::from_seed(seed);
    let mut stations = Vec::with_capacity(n_stations);
    let mut offsets = Vec::with_capacity(n_stations);
    for s in 0..n_stations {
        let lat = 36.0 + rng.next_f64() * 8.0;
        let lon = -10.0 + rng.next_f64() * 14.0;
        let meta = StationMeta::new(
            format!("s{s:03}"),
            GeoPoint::new(lat, lon, 100.0 + rng.next_f64() * 900.0).unwrap(),
            StationType::from_code((s % 3 + 1) as u8).unwrap(),
        )
        .unwrap();
        stations.push(meta);
        offsets.push(normal(&mut rng, 3.0));
    }
    let rows = (0..n)
        .map(|i| {
            let s = i % n_stations;
            let day = (i / n_stations) as i64;
            let x0 = rng.next_f64() * 6.0 - 3.0;
            let x1 = rng.next_f64() * 6.0 - 3.0;
            let y = 30.0 + 10.0 * x0.sin() + x1 * x1 + offsets[s] + normal(&mut rng, 0.5);
            TableRow {
                features: vec![
                    stations[s].location.latitude,
                    stations[s].location.longitude,
                    x0,
                    x1,
                ],
                station_id: stations[s].station_id.clone(),
                time: ts(TABLE_T0 + day * 86_400),
                target: Some(y.max(0.0)),
            }
        })
        .collect();
    (
        table(&["latitude", "longitude", "x0", "x1"], rows),
        stations,
    )
}

/// Files written by [`generate_pipeline`].
#[derive(Debug, Clone)]
pub struct PipelinePaths {
    pub grid_spec: PathBuf,
    pub stations: PathBuf,
    pub observations: PathBuf,
    pub swaths: Vec<PathBuf>,
    pub meteo_dir: PathBuf,
    pub landcover: PathBuf,
    pub elevation: PathBuf,
}

/// The synthetic study area: a 10x10 grid of 0.03° cells.
pub fn pipeline_grid() -> GridSpec {
    GridSpec::new(40.0, -4.0, 0.03, 10, 10).unwrap()
}

/// Synthetic satellite column field over the study area.
fn column_field(lat: f64, lon: f64, day_of_year: f64) -> f64 {
    let hotspot = (-((lat - 40.15) * (lat - 40.15) + (lon + 3.85) * (lon + 3.85)) / 0.01).exp();
    60.0 + 30.0 * (2.0 * PI * day_of_year / 365.0).sin() + 25.0 * hotspot
}

/// Ground concentration consistent with the column field.
fn surface_concentration(lat: f64, lon: f64, day_of_year: f64, hour: f64, type_code: f64) -> f64 {
    5.0 + 0.25 * column_field(lat, lon, day_of_year)
        + 2.0 * (2.0 * PI * hour / 24.0).sin()
        + type_code
}

/// Write a full set of interchange files under `dir`: `grid.spec`,
/// `stations.csv`, `observations.csv`, `swath_*.csv`, `meteo/`,
/// `landcover.csv`, and `elevation.csv`. Overpasses fall every five days
/// from 1 March 2019 around 13:30 UTC; observations cover 10:00-17:00 on
/// each overpass day.
pub fn generate_pipeline(
    dir: &Path,
    seed: u64,
    n_stations: usize,
    n_overpasses: usize,
) -> Result<PipelinePaths> {
    assert!(n_stations >= 1 && n_overpasses >= 1);
    fs::create_dir_all(dir).with_context(|| format!("cannot create `{}`", dir.display()))?;
    let grid = pipeline_grid();
    let mut rng = Xoshiro256::from_seed(seed);

    let grid_spec_path = dir.join("grid.spec");
    write_kv(&grid_spec_path, &spec_kv_pairs(&grid))?;

    // Elevation: smooth hills, one value per grid cell.
    let mut elevation = Raster::empty(grid.clone());
    for row in 0..grid.n_rows {
        for col in 0..grid.n_cols {
            let (lat, lon) = grid.cell_center(row, col);
            let altitude = 300.0 + 150.0 * (lat * 40.0).sin() * (lon * 40.0).cos();
            elevation.set(row, col, Some(altitude));
        }
    }
    let elevation_path = dir.join("elevation.csv");
    formats::write_elevation(&elevation_path, &elevation)?;

    // Land cover: 0.001° pixels, banded classes with urban around the
    // hotspot; class 211 (arable land) and 523 (sea) stay unselected.
    let lc_spec = GridSpec::new(40.0, -4.0, 0.001, 300, 300).unwrap();
    let mut classes = Vec::with_capacity(lc_spec.n_cells());
    for row in 0..lc_spec.n_rows {
        for col in 0..lc_spec.n_cols {
            let lat = 40.0 + (row as f64 + 0.5) * 0.001;
            let lon = -4.0 + (col as f64 + 0.5) * 0.001;
            let hotspot = ((lat - 40.15) * (lat - 40.15) + (lon + 3.85) * (lon + 3.85)).sqrt();
            let code = if hotspot < 0.03 {
                111 // continuous urban core
            } else if hotspot < 0.06 {
                112
            } else if hotspot < 0.08 {
                121
            } else if (row / 30 + col / 30) % 7 == 3 {
                311
            } else if row % 50 == 0 {
                122
            } else if col > 280 {
                523
            } else {
                211
            };
            classes.push(code);
        }
    }
    let landcover =
        smog_core::join::LandCoverRaster::new(lc_spec, classes).expect("codes are in-nomenclature");
    let landcover_path = dir.join("landcover.csv");
    formats::write_landcover(&landcover_path, &landcover)?;

    // Stations at jittered cell centres.
    let mut stations = Vec::with_capacity(n_stations);
    for s in 0..n_stations {
        let row = rng.below(grid.n_rows as u64) as usize;
        let col = rng.below(grid.n_cols as u64) as usize;
        let (lat, lon) = grid.cell_center(row, col);
        let lat = lat + (rng.next_f64() - 0.5) * 0.02;
        let lon = lon + (rng.next_f64() - 0.5) * 0.02;
        let altitude = elevation.get(row, col).unwrap();
        let meta = StationMeta::new(
            format!("st{s:03}"),
            GeoPoint::new(lat, lon, altitude).unwrap(),
            StationType::from_code((s % 3 + 1) as u8).unwrap(),
        )
        .unwrap();
        stations.push(meta);
    }
    let stations_path = dir.join("stations.csv");
    formats::write_station_meta(&stations_path, &stations)?;

    // Overpass days: every five days from 1 March.
    let march1 = days_from_civil(2019, 3, 1);
    let overpass_days: Vec<i64> = (0..n_overpasses).map(|i| march1 + i as i64 * 5).collect();

    // Swaths: a jittered 0.015° lattice per overpass, qa ~ U(0.55, 1).
    let mut swath_paths = Vec::with_capacity(n_overpasses);
    for (i, &day) in overpass_days.iter().enumerate() {
        let doy = (day - days_from_civil(2019, 1, 1) + 1) as f64;
        let pass_unix = day * 86_400 + 13 * 3_600 + 1_800 + rng.below(600) as i64 - 300;
        let mut samples = Vec::new();
        for si in 0..21 {
            for sj in 0..21 {
                let lat = 39.995 + si as f64 * 0.015 + (rng.next_f64() - 0.5) * 0.006;
                let lon = -4.005 + sj as f64 * 0.015 + (rng.next_f64() - 0.5) * 0.006;
                if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
                    continue;
                }
                let value = column_field(lat, lon, doy) + normal(&mut rng, 2.0);
                let qa = 0.55 + rng.next_f64() * 0.45;
                let time = ts(pass_unix + rng.below(120) as i64);
                samples.push(
                    smog_core::regrid::SwathSample::new(
                        GeoPoint::new(lat, lon, 0.0).unwrap(),
                        value,
                        qa,
                        time,
                    )
                    .unwrap(),
                );
            }
        }
        let path = dir.join(format!("swath_{i:02}.csv"));
        formats::write_swath(&path, &samples)?;
        swath_paths.push(path);
    }

    // Hourly observations, 10:00-17:00 on each overpass day.
    let mut series = Vec::with_capacity(n_stations);
    for meta in &stations {
        let mut samples = Vec::new();
        for &day in &overpass_days {
            let doy = (day - days_from_civil(2019, 1, 1) + 1) as f64;
            for hour in 10..=17 {
                let unix = day * 86_400 + hour * 3_600;
                let value = surface_concentration(
                    meta.location.latitude,
                    meta.location.longitude,
                    doy,
                    hour as f64,
                    meta.station_type.code() as f64,
                ) + normal(&mut rng, 0.4);
                samples.push((ts(unix), value.max(0.0)));
            }
        }
        series.push(StationSeries::new(meta.clone(), samples).unwrap());
    }
    let observations_path = dir.join("observations.csv");
    formats::write_observations(&observations_path, &series)?;

    // Weather: hourly from the day before the first overpass to the day
    // after the last, on a 4x4 grid of 0.25° nodes enclosing the study
    // area. Values are smooth functions of node position and hour.
    let meteo_spec = GridSpec::new(39.75, -4.25, 0.25, 4, 4).unwrap();
    let start_unix = (overpass_days[0] - 1) * 86_400;
    let end_unix = (overpass_days[overpass_days.len() - 1] + 2) * 86_400;
    let n_hours = ((end_unix - start_unix) / 3_600) as usize;
    let meteo_dir = dir.join("meteo");
    formats::write_meteo_dir(
        &meteo_dir,
        &meteo_spec,
        ts(start_unix),
        n_hours,
        |var, hour, row, col| {
            let t = hour as f64;
            let phase = (var + 1) as f64;
            match var {
                0 => 278.0 + 6.0 * (2.0 * PI * (t - 4.0) / 24.0).sin() + row as f64 * 0.5,
                1 => 285.0 + 8.0 * (2.0 * PI * (t - 2.0) / 24.0).sin() + row as f64 * 0.4,
                2 => 2.0 * (2.0 * PI * t / 48.0 + phase).sin() + col as f64 * 0.2,
                3 => 1.5 * (2.0 * PI * t / 36.0 + phase).cos() + row as f64 * 0.1,
                4 => (600.0 * (2.0 * PI * (t - 6.0) / 24.0).sin()).max(0.0) * 3_600.0,
                5 => -0.0002 * (1.0 + (2.0 * PI * t / 24.0).sin().abs()),
                6 => 0.0001 * ((t / 7.0).sin().abs()) * (1.0 + col as f64 * 0.1),
                7 => {
                    (650.0 + 500.0 * (2.0 * PI * (t - 3.0) / 24.0).sin()).max(80.0)
                        + row as f64 * 10.0
                }
                _ => 101_300.0 - row as f64 * 120.0 + 40.0 * (2.0 * PI * t / 96.0).sin(),
            }
        },
    )?;

    Ok(PipelinePaths {
        grid_spec: grid_spec_path,
        stations: stations_path,
        observations: observations_path,
        swaths: swath_paths,
        meteo_dir,
        landcover: landcover_path,
        elevation: elevation_path,
    })
}
