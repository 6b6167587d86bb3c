//! UTC timestamps and calendar features derived from them.

use core::fmt;

const SECS_PER_DAY: i64 = 86_400;
const SECS_PER_HOUR: i64 = 3_600;

/// A UTC instant with one-second resolution, stored as Unix seconds.
///
/// Valid instants lie in years 1979..=2100 (the span of the hourly
/// reanalysis record, with headroom). No local-time values exist anywhere in
/// the system: satellite, station, and weather sources are aligned in UTC
/// before any join.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(i64);

/// First valid instant, 1979-01-01T00:00:00Z.
pub const MIN_TIMESTAMP: Timestamp = Timestamp(days_from_civil(1979, 1, 1) * SECS_PER_DAY);
/// Last valid instant, 2100-12-31T23:59:59Z.
pub const MAX_TIMESTAMP: Timestamp = Timestamp(days_from_civil(2101, 1, 1) * SECS_PER_DAY - 1);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeError {
    pub unix: i64,
}

impl fmt::Display for TimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "timestamp {} outside the supported range 1979-01-01..=2100-12-31",
            self.unix
        )
    }
}

impl core::error::Error for TimeError {}

impl Timestamp {
    pub fn from_unix(unix: i64) -> Result<Timestamp, TimeError> {
        if !(MIN_TIMESTAMP.0..=MAX_TIMESTAMP.0).contains(&unix) {
            return Err(TimeError { unix });
        }
        Ok(Timestamp(unix))
    }

    pub fn unix(self) -> i64 {
        self.0
    }

    /// Seconds from `self` to `other` (positive when `other` is later).
    pub fn seconds_until(self, other: Timestamp) -> i64 {
        other.0 - self.0
    }

    pub fn year(self) -> i32 {
        temporal_features(self).year
    }
}

/// Calendar features of one instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TemporalFeatures {
    /// 1 (Monday) ..= 7 (Sunday).
    pub day_of_week: u8,
    /// 1 ..= 365, or 366 in leap years.
    pub day_of_year: u16,
    /// UTC hour, truncated: 0 ..= 23.
    pub hour: u8,
    /// 1 ..= 12.
    pub month: u8,
    pub year: i32,
}

/// Calendar features of a UTC instant in the proleptic Gregorian calendar.
pub fn temporal_features(t: Timestamp) -> TemporalFeatures {
    let days = t.0.div_euclid(SECS_PER_DAY);
    let secs_of_day = t.0.rem_euclid(SECS_PER_DAY);
    let (year, month, _day) = civil_from_days(days);
    let day_of_year = (days - days_from_civil(year, 1, 1) + 1) as u16;
    // Day 0 (1970-01-01) was a Thursday.
    let day_of_week = (days.rem_euclid(7) + 3) % 7 + 1;
    TemporalFeatures {
        day_of_week: day_of_week as u8,
        day_of_year,
        hour: (secs_of_day / SECS_PER_HOUR) as u8,
        month: month as u8,
        year,
    }
}

pub fn is_leap(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

/// Days since 1970-01-01 of a proleptic-Gregorian civil date.
pub const fn days_from_civil(year: i32, month: u32, day: u32) -> i64 {
    let y = (if month <= 2 { year - 1 } else { year }) as i64;
    let era = if y >= 0 { y } else { y - 399 } / 400;
    let yoe = y - era * 400;
    let m = month as i64;
    let doy = (153 * (if m > 2 { m - 3 } else { m + 9 }) + 2) / 5 + day as i64 - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

/// Civil date (year, month, day) of a count of days since 1970-01-01.
pub fn civil_from_days(days: i64) -> (i32, u32, u32) {
    let z = days + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let day = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let month = (if mp < 10 { mp + 3 } else { mp - 9 }) as u32;
    ((if month <= 2 { y + 1 } else { y }) as i32, month, day)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{Datelike, TimeZone, Timelike, Utc};

    fn ts(unix: i64) -> Timestamp {
        Timestamp::from_unix(unix).unwrap()
    }

    #[test]
    fn features_of_known_instants() {
        // 2019-01-01T13:30:00Z, a Tuesday.
        let t = ts(1_546_349_400);
        let f = temporal_features(t);
        assert_eq!(
            (f.day_of_week, f.day_of_year, f.hour, f.month, f.year),
            (2, 1, 13, 1, 2019)
        );

        // 2019-12-31T00:00:00Z: last day of a non-leap year.
        let f = temporal_features(ts(1_577_750_400));
        assert_eq!((f.day_of_year, f.hour, f.month, f.year), (365, 0, 12, 2019));

        // 2020-12-31T12:00:00Z: leap year reaches day 366.
        let f = temporal_features(ts(1_609_416_000));
        assert_eq!(
            (f.day_of_year, f.hour, f.month, f.year),
            (366, 12, 12, 2020)
        );
    }

    #[test]
    fn year_range_is_enforced() {
        assert!(Timestamp::from_unix(MIN_TIMESTAMP.unix()).is_ok());
        assert!(Timestamp::from_unix(MAX_TIMESTAMP.unix()).is_ok());
        assert!(Timestamp::from_unix(MIN_TIMESTAMP.unix() - 1).is_err());
        assert!(Timestamp::from_unix(MAX_TIMESTAMP.unix() + 1).is_err());
        assert_eq!(temporal_features(MIN_TIMESTAMP).year, 1979);
        assert_eq!(temporal_features(MAX_TIMESTAMP).year, 2100);
    }

    #[test]
    fn matches_chrono_on_random_instants() {
        let mut rng = crate::rng::Xoshiro256::from_seed(2024);
        let span = (MAX_TIMESTAMP.unix() - MIN_TIMESTAMP.unix()) as u64;
        for _ in 0..5_000 {
            let unix = MIN_TIMESTAMP.unix() + rng.below(span + 1) as i64;
            let f = temporal_features(ts(unix));
            let c = Utc.timestamp_opt(unix, 0).unwrap();
            assert_eq!(f.year, c.year(), "unix {unix}");
            assert_eq!(f.month as u32, c.month());
            assert_eq!(f.hour as u32, c.hour());
            assert_eq!(f.day_of_year as u32, c.ordinal());
            assert_eq!(f.day_of_week as u32, c.weekday().number_from_monday());
        }
    }

    #[test]
    fn dec_31_tracks_leapness() {
        for year in [1979, 1980, 1999, 2000, 2019, 2020, 2100] {
            let unix = days_from_civil(year, 12, 31) * 86_400;
            let f = temporal_features(ts(unix));
            let expect = if is_leap(year) { 366 } else { 365 };
            assert_eq!(f.day_of_year, expect, "year {year}");
        }
        assert!(!is_leap(2100));
        assert!(is_leap(2000));
    }
}
