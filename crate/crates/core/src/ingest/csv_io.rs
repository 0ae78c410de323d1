//! CSV parsing for the two raw feeds. Bad rows are rejected and counted,
//! never fatal; a missing column is a schema error and aborts.

use super::{parse_hms, CourseEvent, Direction, GpsFix, Rejection};
use crate::error::{Error, Result};
use chrono::NaiveDate;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug)]
pub struct ParseOutcome<T> {
    pub records: Vec<T>,
    pub rejections: Vec<Rejection>,
}

const COURSES_HEADER: [&str; 9] = [
    "line",
    "subline",
    "chain",
    "range",
    "direction",
    "parc",
    "date",
    "station_name",
    "timestamp",
];

const LOCATIONS_HEADER: [&str; 5] = ["parc", "date", "timestamp", "lat", "lon"];

fn header_positions(
    headers: &csv::StringRecord,
    required: &[&str],
    file: &str,
) -> Result<BTreeMap<String, usize>> {
    let mut pos = BTreeMap::new();
    for (i, h) in headers.iter().enumerate() {
        pos.insert(h.trim().to_string(), i);
    }
    for col in required {
        if !pos.contains_key(*col) {
            return Err(Error::Schema {
                file: file.to_string(),
                message: format!("missing required column {col:?}"),
            });
        }
    }
    Ok(pos)
}

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file))
}

/// Parses the station-event feed.
pub fn parse_courses(path: impl AsRef<Path>) -> Result<ParseOutcome<CourseEvent>> {
    let path = path.as_ref();
    let file_label = path.display().to_string();
    let mut rdr = open_reader(path)?;
    let headers = rdr.headers().map_err(|e| Error::Schema {
        file: file_label.clone(),
        message: e.to_string(),
    })?;
    let pos = header_positions(headers, &COURSES_HEADER, &file_label)?;

    let mut records = Vec::new();
    let mut rejections = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line_number = i as u64 + 2; // header is line 1
        let mut reject = |reason: String, rejections: &mut Vec<Rejection>| {
            rejections.push(Rejection {
                file: file_label.clone(),
                line_number,
                reason,
            });
        };
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                reject(format!("unreadable row: {e}"), &mut rejections);
                continue;
            }
        };
        let field = |name: &str| row.get(pos[name]).unwrap_or("").trim().to_string();
        let direction = match Direction::from_code(&field("direction")) {
            Some(d) => d,
            None => {
                reject(format!("bad direction {:?}", field("direction")), &mut rejections);
                continue;
            }
        };
        let date = match NaiveDate::parse_from_str(&field("date"), "%Y-%m-%d") {
            Ok(d) => d,
            Err(_) => {
                reject(format!("bad date {:?}", field("date")), &mut rejections);
                continue;
            }
        };
        let timestamp_s = match parse_hms(&field("timestamp")) {
            Some(t) => t,
            None => {
                reject(format!("bad timestamp {:?}", field("timestamp")), &mut rejections);
                continue;
            }
        };
        let station_name = field("station_name");
        if station_name.is_empty() {
            reject("empty station_name".into(), &mut rejections);
            continue;
        }
        records.push(CourseEvent {
            line: field("line"),
            subline: field("subline"),
            chain: field("chain"),
            range: field("range"),
            direction,
            parc: field("parc"),
            date,
            station_name,
            timestamp_s,
        });
    }
    Ok(ParseOutcome {
        records,
        rejections,
    })
}

/// Parses the GPS feed. Fixes come out sorted by (parc, date, timestamp).
pub fn parse_locations(path: impl AsRef<Path>) -> Result<ParseOutcome<GpsFix>> {
    let path = path.as_ref();
    let file_label = path.display().to_string();
    let mut rdr = open_reader(path)?;
    let headers = rdr.headers().map_err(|e| Error::Schema {
        file: file_label.clone(),
        message: e.to_string(),
    })?;
    let pos = header_positions(headers, &LOCATIONS_HEADER, &file_label)?;

    let mut records = Vec::new();
    let mut rejections = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line_number = i as u64 + 2;
        let mut reject = |reason: String, rejections: &mut Vec<Rejection>| {
            rejections.push(Rejection {
                file: file_label.clone(),
                line_number,
                reason,
            });
        };
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                reject(format!("unreadable row: {e}"), &mut rejections);
                continue;
            }
        };
        let field = |name: &str| row.get(pos[name]).unwrap_or("").trim().to_string();
        let date = match NaiveDate::parse_from_str(&field("date"), "%Y-%m-%d") {
            Ok(d) => d,
            Err(_) => {
                reject(format!("bad date {:?}", field("date")), &mut rejections);
                continue;
            }
        };
        let timestamp_s = match parse_hms(&field("timestamp")) {
            Some(t) => t,
            None => {
                reject(format!("bad timestamp {:?}", field("timestamp")), &mut rejections);
                continue;
            }
        };
        let lat: f64 = match field("lat").parse() {
            Ok(v) => v,
            Err(_) => {
                reject(format!("bad lat {:?}", field("lat")), &mut rejections);
                continue;
            }
        };
        let lon: f64 = match field("lon").parse() {
            Ok(v) => v,
            Err(_) => {
                reject(format!("bad lon {:?}", field("lon")), &mut rejections);
                continue;
            }
        };
        if !(-90.0..=90.0).contains(&lat) || !lat.is_finite() {
            reject(format!("lat {lat} out of range"), &mut rejections);
            continue;
        }
        if !(-180.0..=180.0).contains(&lon) || !lon.is_finite() {
            reject(format!("lon {lon} out of range"), &mut rejections);
            continue;
        }
        records.push(GpsFix {
            parc: field("parc"),
            date,
            timestamp_s,
            lat,
            lon,
        });
    }
    records.sort_by(|a, b| {
        (&a.parc, a.date, a.timestamp_s).cmp(&(&b.parc, b.date, b.timestamp_s))
    });
    Ok(ParseOutcome {
        records,
        rejections,
    })
}

/// Writes the rejection report: one row per rejected input line.
pub fn write_rejections(path: impl AsRef<Path>, rejections: &[Rejection]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Schema {
        file: path.display().to_string(),
        message: e.to_string(),
    })?;
    w.write_record(["file", "line_number", "reason"])
        .and_then(|_| {
            for r in rejections {
                w.write_record([r.file.as_str(), &r.line_number.to_string(), &r.reason])?;
            }
            w.flush()?;
            Ok(())
        })
        .map_err(|e| Error::Schema {
            file: path.display().to_string(),
            message: e.to_string(),
        })
}
