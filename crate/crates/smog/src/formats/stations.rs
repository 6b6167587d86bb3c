//! Station files: metadata (`station_id,lat,lon,altitude_m,station_type_code`)
//! and hourly observations (`station_id,time_unix,value`).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use smog_core::geo::{GeoPoint, StationMeta, StationType};
use smog_core::join::StationSeries;
use smog_core::Timestamp;

use super::{check_header, parse_field, parse_finite, parse_timestamp, read_lines, split_row};

const META_HEADER: [&str; 5] = [
    "station_id",
    "lat",
    "lon",
    "altitude_m",
    "station_type_code",
];
const OBS_HEADER: [&str; 3] = ["station_id", "time_unix", "value"];

pub fn read_station_meta(path: &Path) -> Result<Vec<StationMeta>> {
    let lines = read_lines(path)?;
    check_header(path, lines.first(), &META_HEADER)?;
    let mut out: Vec<StationMeta> = Vec::new();
    for (i, line) in lines.iter().enumerate().skip(1) {
        let line_no = i + 1;
        let fields = split_row(line, 5, path, line_no)?;
        let station_id = fields[0].trim().to_string();
        let lat = parse_finite(fields[1], path, line_no, "lat")?;
        let lon = parse_finite(fields[2], path, line_no, "lon")?;
        let altitude = parse_finite(fields[3], path, line_no, "altitude_m")?;
        let code: u8 = parse_field(fields[4], path, line_no, "station_type_code")?;
        let location = GeoPoint::new(lat, lon, altitude)
            .map_err(|e| anyhow!("`{}` line {line_no}: {e}", path.display()))?;
        let station_type = StationType::from_code(code)
            .map_err(|e| anyhow!("`{}` line {line_no}: {e}", path.display()))?;
        if out.iter().any(|s| s.station_id == station_id) {
            return Err(anyhow!(
                "`{}` line {line_no}: duplicate station id `{station_id}`",
                path.display()
            ));
        }
        let meta = StationMeta::new(station_id, location, station_type)
            .map_err(|e| anyhow!("`{}` line {line_no}: {e}", path.display()))?;
        out.push(meta);
    }
    Ok(out)
}

pub fn write_station_meta(path: &Path, stations: &[StationMeta]) -> Result<()> {
    let mut text = String::new();
    text.push_str("station_id,lat,lon,altitude_m,station_type_code\n");
    for s in stations {
        writeln!(
            text,
            "{},{},{},{},{}",
            s.station_id,
            s.location.latitude,
            s.location.longitude,
            s.location.altitude_m,
            s.station_type.code()
        )
        .unwrap();
    }
    fs::write(path, text).with_context(|| format!("cannot write `{}`", path.display()))
}

/// Read the observation file and group it into per-station series. Every
/// referenced station must appear in `stations`; records are sorted by time
/// per station, and duplicate timestamps are rejected. Stations without any
/// observations yield empty series.
pub fn read_observations(path: &Path, stations: &[StationMeta]) -> Result<Vec<StationSeries>> {
    let lines = read_lines(path)?;
    check_header(path, lines.first(), &OBS_HEADER)?;
    let mut by_station: BTreeMap<&str, Vec<(Timestamp, f64)>> = stations
        .iter()
        .map(|s| (s.station_id.as_str(), Vec::new()))
        .collect();
    for (i, line) in lines.iter().enumerate().skip(1) {
        let line_no = i + 1;
        let fields = split_row(line, 3, path, line_no)?;
        let station_id = fields[0].trim();
        let time = parse_timestamp(fields[1], path, line_no)?;
        let value = parse_finite(fields[2], path, line_no, "value")?;
        let series = by_station.get_mut(station_id).ok_or_else(|| {
            anyhow!(
                "`{}` line {line_no}: station `{station_id}` not in the station list",
                path.display()
            )
        })?;
        series.push((time, value));
    }
    let mut out = Vec::with_capacity(stations.len());
    for meta in stations {
        let mut samples = by_station.remove(meta.station_id.as_str()).unwrap();
        samples.sort_by_key(|&(t, _)| t);
        let series = StationSeries::new(meta.clone(), samples)
            .map_err(|e| anyhow!("`{}`: {e}", path.display()))?;
        out.push(series);
    }
    Ok(out)
}

pub fn write_observations(path: &Path, series: &[StationSeries]) -> Result<()> {
    let mut text = String::new();
    text.push_str("station_id,time_unix,value\n");
    for s in series {
        for &(t, v) in s.samples() {
            writeln!(text, "{},{},{}", s.meta.station_id, t.unix(), v).unwrap();
        }
    }
    fs::write(path, text).with_context(|| format!("cannot write `{}`", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meta_and_observations_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let stations: Vec<StationMeta> = (0..3)
            .map(|i| {
                StationMeta::new(
                    format!("st{i:02}"),
                    GeoPoint::new(40.0 + i as f64 * 0.1, -3.7, 600.0 + i as f64).unwrap(),
                    StationType::from_code((i % 3 + 1) as u8).unwrap(),
                )
                .unwrap()
            })
            .collect();
        let meta_path = dir.path().join("stations.csv");
        write_station_meta(&meta_path, &stations).unwrap();
        let back = read_station_meta(&meta_path).unwrap();
        assert_eq!(back, stations);

        let t0 = 1_546_347_600i64;
        let series: Vec<StationSeries> = stations
            .iter()
            .map(|meta| {
                let samples: Vec<(Timestamp, f64)> = (0..5)
                    .map(|h| {
                        (
                            Timestamp::from_unix(t0 + h * 3_600).unwrap(),
                            h as f64 * 1.5,
                        )
                    })
                    .collect();
                StationSeries::new(meta.clone(), samples).unwrap()
            })
            .collect();
        let obs_path = dir.path().join("observations.csv");
        write_observations(&obs_path, &series).unwrap();
        let back = read_observations(&obs_path, &stations).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in back.iter().zip(&series) {
            assert_eq!(a.samples(), b.samples());
        }
    }

    #[test]
    fn schema_errors_name_the_problem() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stations.csv");
        std::fs::write(&path, "station_id,lat,lon,altitude_m\na,40,-3,10\n").unwrap();
        let err = read_station_meta(&path).unwrap_err().to_string();
        assert!(err.contains("station_type_code"), "{err}");

        let path = dir.path().join("obs.csv");
        std::fs::write(&path, "station_id,time_unix,value\na,1546347600,oops\n").unwrap();
        let stations = vec![StationMeta::new(
            "a".to_string(),
            GeoPoint::new(0.0, 0.0, 0.0).unwrap(),
            StationType::Background,
        )
        .unwrap()];
        let err = read_observations(&path, &stations).unwrap_err().to_string();
        assert!(err.contains("line 2") && err.contains("value"), "{err}");
    }
}
