//! Swath sample files: one CSV per orbit/overpass,
//! `lat,lon,value,qa,time_unix`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use smog_core::geo::GeoPoint;
use smog_core::regrid::SwathSample;

use super::{check_header, parse_finite, parse_timestamp, read_lines, split_row};

pub const SWATH_HEADER: [&str; 5] = ["lat", "lon", "value", "qa", "time_unix"];

pub fn read_swath(path: &Path) -> Result<Vec<SwathSample>> {
    let lines = read_lines(path)?;
    check_header(path, lines.first(), &SWATH_HEADER)?;
    let mut samples = Vec::with_capacity(lines.len().saturating_sub(1));
    for (i, line) in lines.iter().enumerate().skip(1) {
        let line_no = i + 1;
        let fields = split_row(line, 5, path, line_no)?;
        let lat = parse_finite(fields[0], path, line_no, "lat")?;
        let lon = parse_finite(fields[1], path, line_no, "lon")?;
        let value = parse_finite(fields[2], path, line_no, "value")?;
        let qa = parse_finite(fields[3], path, line_no, "qa")?;
        let time = parse_timestamp(fields[4], path, line_no)?;
        let location = GeoPoint::new(lat, lon, 0.0)
            .map_err(|e| anyhow!("`{}` line {line_no}: {e}", path.display()))?;
        let sample = SwathSample::new(location, value, qa, time)
            .map_err(|e| anyhow!("`{}` line {line_no}: {e}", path.display()))?;
        samples.push(sample);
    }
    Ok(samples)
}

pub fn write_swath(path: &Path, samples: &[SwathSample]) -> Result<()> {
    let mut text = String::new();
    text.push_str("lat,lon,value,qa,time_unix\n");
    for s in samples {
        writeln!(
            text,
            "{},{},{},{},{}",
            s.location.latitude,
            s.location.longitude,
            s.value,
            s.qa,
            s.time.unix()
        )
        .unwrap();
    }
    fs::write(path, text).with_context(|| format!("cannot write `{}`", path.display()))
}
