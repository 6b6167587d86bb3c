//! Geographic domain types: points, monitoring stations, pollutants.

use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum GeoError {
    LatitudeOutOfRange(f64),
    LongitudeOutOfRange(f64),
    NonFiniteCoordinate,
    EmptyStationId,
    UnknownStationType(u8),
    UnknownPollutant(String),
}

impl fmt::Display for GeoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeoError::LatitudeOutOfRange(v) => write!(f, "latitude {v} outside [-90, 90]"),
            GeoError::LongitudeOutOfRange(v) => write!(f, "longitude {v} outside [-180, 180]"),
            GeoError::NonFiniteCoordinate => write!(f, "coordinates must be finite"),
            GeoError::EmptyStationId => write!(f, "station id must be non-empty"),
            GeoError::UnknownStationType(c) => {
                write!(f, "station type code {c} not in {{1, 2, 3}}")
            }
            GeoError::UnknownPollutant(s) => {
                write!(
                    f,
                    "unknown pollutant `{s}` (expected no2, o3, so2, pm10, or pm25)"
                )
            }
        }
    }
}

impl core::error::Error for GeoError {}

/// A geographic position in degrees, altitude in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    pub latitude: f64,
    pub longitude: f64,
    pub altitude_m: f64,
}

impl GeoPoint {
    pub fn new(latitude: f64, longitude: f64, altitude_m: f64) -> Result<GeoPoint, GeoError> {
        if !latitude.is_finite() || !longitude.is_finite() || !altitude_m.is_finite() {
            return Err(GeoError::NonFiniteCoordinate);
        }
        if !(-90.0..=90.0).contains(&latitude) {
            return Err(GeoError::LatitudeOutOfRange(latitude));
        }
        if !(-180.0..=180.0).contains(&longitude) {
            return Err(GeoError::LongitudeOutOfRange(longitude));
        }
        Ok(GeoPoint {
            latitude,
            longitude,
            altitude_m,
        })
    }
}

/// Monitoring-station classification by dominant local emission influence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StationType {
    Industrial,
    Traffic,
    Background,
}

impl StationType {
    pub fn code(self) -> u8 {
        match self {
            StationType::Industrial => 1,
            StationType::Traffic => 2,
            StationType::Background => 3,
        }
    }

    pub fn from_code(code: u8) -> Result<StationType, GeoError> {
        match code {
            1 => Ok(StationType::Industrial),
            2 => Ok(StationType::Traffic),
            3 => Ok(StationType::Background),
            other => Err(GeoError::UnknownStationType(other)),
        }
    }
}

/// Identity, location, and type of one monitoring station.
#[derive(Debug, Clone, PartialEq)]
pub struct StationMeta {
    pub station_id: String,
    pub location: GeoPoint,
    pub station_type: StationType,
}

impl StationMeta {
    pub fn new(
        station_id: String,
        location: GeoPoint,
        station_type: StationType,
    ) -> Result<StationMeta, GeoError> {
        if station_id.is_empty() {
            return Err(GeoError::EmptyStationId);
        }
        Ok(StationMeta {
            station_id,
            location,
            station_type,
        })
    }
}

/// The modelled pollutants and the satellite variable each one uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PollutantKind {
    No2,
    O3,
    So2,
    Pm10,
    Pm25,
}

impl PollutantKind {
    pub const ALL: [PollutantKind; 5] = [
        PollutantKind::No2,
        PollutantKind::O3,
        PollutantKind::So2,
        PollutantKind::Pm10,
        PollutantKind::Pm25,
    ];

    /// The satellite column variable feeding this pollutant's model. The
    /// particulate models use the absorbing aerosol index because the
    /// instrument provides no aerosol optical depth product.
    pub fn satellite_variable(self) -> &'static str {
        match self {
            PollutantKind::No2 => "no2_tropospheric_column",
            PollutantKind::O3 => "o3_total_column",
            PollutantKind::So2 => "so2_total_column",
            PollutantKind::Pm10 | PollutantKind::Pm25 => "absorbing_aerosol_index",
        }
    }

    /// Recommended per-pixel quality threshold: 0.75, except 0.8 for the
    /// aerosol index.
    pub fn default_qa_threshold(self) -> f64 {
        match self {
            PollutantKind::Pm10 | PollutantKind::Pm25 => 0.8,
            _ => 0.75,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PollutantKind::No2 => "no2",
            PollutantKind::O3 => "o3",
            PollutantKind::So2 => "so2",
            PollutantKind::Pm10 => "pm10",
            PollutantKind::Pm25 => "pm25",
        }
    }

    pub fn parse(name: &str) -> Result<PollutantKind, GeoError> {
        match name {
            "no2" => Ok(PollutantKind::No2),
            "o3" => Ok(PollutantKind::O3),
            "so2" => Ok(PollutantKind::So2),
            "pm10" => Ok(PollutantKind::Pm10),
            "pm25" => Ok(PollutantKind::Pm25),
            other => Err(GeoError::UnknownPollutant(String::from(other))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_validation() {
        assert!(GeoPoint::new(36.0, -10.0, 0.0).is_ok());
        assert!(GeoPoint::new(90.0, 180.0, 5.0).is_ok());
        assert!(GeoPoint::new(90.5, 0.0, 0.0).is_err());
        assert!(GeoPoint::new(0.0, -180.5, 0.0).is_err());
        assert!(GeoPoint::new(f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn station_type_codes_round_trip() {
        for code in 1..=3 {
            assert_eq!(StationType::from_code(code).unwrap().code(), code);
        }
        assert!(StationType::from_code(0).is_err());
        assert!(StationType::from_code(4).is_err());
    }

    #[test]
    fn pollutant_variable_mapping_is_total() {
        for p in PollutantKind::ALL {
            assert!(!p.satellite_variable().is_empty());
            assert_eq!(PollutantKind::parse(p.name()).unwrap(), p);
        }
        assert_eq!(
            PollutantKind::Pm10.satellite_variable(),
            PollutantKind::Pm25.satellite_variable()
        );
        assert_eq!(PollutantKind::No2.default_qa_threshold(), 0.75);
        assert_eq!(PollutantKind::Pm25.default_qa_threshold(), 0.8);
        assert!(PollutantKind::parse("nox").is_err());
    }
}
