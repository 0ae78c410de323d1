//! Raw dataset ingestion: the station-event feed ("courses") and the GPS
//! fix feed ("locations"), plus the join that assembles per-trajectory
//! traces from both.

mod csv_io;
mod join;

pub use csv_io::{parse_courses, parse_locations, write_rejections, ParseOutcome};
pub use join::{join_datasets, JoinOutcome, CLAIM_MARGIN_S};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    Outbound,
    Inbound,
}

impl Direction {
    pub fn from_code(code: &str) -> Option<Direction> {
        match code.trim() {
            "0" => Some(Direction::Outbound),
            "1" => Some(Direction::Inbound),
            _ => None,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Direction::Outbound => "0",
            Direction::Inbound => "1",
        }
    }
}

/// One row of the station-event feed: the bus passed `station_name` at
/// `timestamp_s` (seconds since local midnight).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CourseEvent {
    pub line: String,
    pub subline: String,
    pub chain: String,
    pub range: String,
    pub direction: Direction,
    pub parc: String,
    pub date: NaiveDate,
    pub station_name: String,
    pub timestamp_s: u32,
}

/// One row of the GPS feed.
#[derive(Debug, Clone, PartialEq)]
pub struct GpsFix {
    pub parc: String,
    pub date: NaiveDate,
    pub timestamp_s: u32,
    pub lat: f64,
    pub lon: f64,
}

/// Identity of one trajectory. `chain` and `range` are opaque trip
/// discriminators from the upstream system.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RouteKey {
    pub line: String,
    pub subline: String,
    pub direction: Direction,
    pub chain: String,
    pub range: String,
    pub parc: String,
    pub date: NaiveDate,
}

impl RouteKey {
    /// Pooling key for clustering: trajectories of the same line, subline
    /// and direction are statistically one route across days and vehicles.
    pub fn route_pool(&self) -> (String, String, Direction) {
        (self.line.clone(), self.subline.clone(), self.direction)
    }

    pub fn label(&self) -> String {
        format!(
            "{}/{}/{}/{}/{}/{}/{}",
            self.line, self.subline, self.direction.code(), self.chain, self.range, self.parc,
            self.date
        )
    }
}

/// One trajectory: its station events and the fixes the join assigned to it.
/// Fixes are strictly increasing in timestamp.
#[derive(Debug, Clone)]
pub struct Trace {
    pub key: RouteKey,
    pub fixes: Vec<GpsFix>,
    pub station_events: Vec<CourseEvent>,
}

impl Trace {
    pub fn first_event_s(&self) -> u32 {
        self.station_events.first().map(|e| e.timestamp_s).unwrap_or(0)
    }

    pub fn last_event_s(&self) -> u32 {
        self.station_events.last().map(|e| e.timestamp_s).unwrap_or(0)
    }
}

/// A row that failed validation; collected, never fatal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub file: String,
    pub line_number: u64,
    pub reason: String,
}

/// Parses "HH:MM:SS" into seconds since midnight, rejecting out-of-day
/// values (the schema has no midnight crossing).
pub fn parse_hms(s: &str) -> Option<u32> {
    let mut parts = s.trim().split(':');
    let h: u32 = parts.next()?.parse().ok()?;
    let m: u32 = parts.next()?.parse().ok()?;
    let sec: u32 = parts.next()?.parse().ok()?;
    if parts.next().is_some() || h > 23 || m > 59 || sec > 59 {
        return None;
    }
    Some(h * 3600 + m * 60 + sec)
}

/// Formats seconds since midnight as "HH:MM:SS".
pub fn format_hms(t: u32) -> String {
    format!("{:02}:{:02}:{:02}", t / 3600, (t / 60) % 60, t % 60)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hms_round_trip_and_bounds() {
        assert_eq!(parse_hms("00:00:00"), Some(0));
        assert_eq!(parse_hms("23:59:59"), Some(86399));
        assert_eq!(parse_hms("25:00:00"), None);
        assert_eq!(parse_hms("12:60:00"), None);
        assert_eq!(parse_hms("12:00"), None);
        assert_eq!(format_hms(45296), "12:34:56");
        assert_eq!(parse_hms(&format_hms(45296)), Some(45296));
    }
}
