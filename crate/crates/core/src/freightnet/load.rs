use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Hub, Mode, NetworkError, Segment, TransportNetwork};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LoadIssue {
    DuplicateHub(String),
    DuplicateSegment(String),
    DanglingEndpoint {
        segment: String,
        hub: String,
    },
    NonPositiveDistance(String),
    BadCongestion(String),
    UnknownMode {
        segment: String,
        value: String,
    },
    Row {
        file: String,
        line: u64,
        message: String,
    },
}

impl fmt::Display for LoadIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadIssue::DuplicateHub(id) => write!(f, "duplicate hub id {id}"),
            LoadIssue::DuplicateSegment(id) => write!(f, "duplicate segment id {id}"),
            LoadIssue::DanglingEndpoint { segment, hub } => {
                write!(f, "segment {segment} references unknown hub {hub}")
            }
            LoadIssue::NonPositiveDistance(id) => {
                write!(f, "segment {id} has a non-positive distance")
            }
            LoadIssue::BadCongestion(id) => {
                write!(f, "segment {id} has a congestion multiplier below 1")
            }
            LoadIssue::UnknownMode { segment, value } => {
                write!(f, "segment {segment} has unknown mode '{value}'")
            }
            LoadIssue::Row {
                file,
                line,
                message,
            } => write!(f, "{file} line {line}: {message}"),
        }
    }
}

#[derive(Debug, Deserialize)]
struct HubRow {
    id: String,
    name: String,
    #[serde(default)]
    region: String,
    intermodal: String,
    lon: f64,
    lat: f64,
}

#[derive(Debug, Deserialize)]
struct SegmentRow {
    id: String,
    from: String,
    to: String,
    mode: String,
    distance_km: f64,
    #[serde(default)]
    slope: Option<f64>,
    #[serde(default)]
    one_way: Option<String>,
    #[serde(default)]
    congestion: Option<f64>,
}

fn flag(text: &str) -> Result<bool, String> {
    match text.trim().to_lowercase().as_str() {
        "true" | "1" | "yes" | "y" => Ok(true),
        "false" | "0" | "no" | "n" | "" => Ok(false),
        other => Err(format!("'{other}' is not a boolean")),
    }
}

fn rows<T: for<'de> Deserialize<'de>>(
    text: &str,
    file: &str,
    issues: &mut Vec<LoadIssue>,
) -> Vec<T> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for record in reader.deserialize::<T>() {
        match record {
            Ok(r) => out.push(r),
            Err(e) => issues.push(LoadIssue::Row {
                file: file.to_string(),
                line: e.position().map(|p| p.line()).unwrap_or(0),
                message: e.to_string(),
            }),
        }
    }
    out
}

/// Parses `hubs.csv` and `segments.csv` text. Row-level problems and
/// referential problems are reported together.
pub fn load_network(hubs_csv: &str, segments_csv: &str) -> Result<TransportNetwork, NetworkError> {
    let mut issues = Vec::new();
    let mut hubs = Vec::new();
    for (i, r) in rows::<HubRow>(hubs_csv, "hubs.csv", &mut issues)
        .into_iter()
        .enumerate()
    {
        match flag(&r.intermodal) {
            Ok(intermodal) => hubs.push(Hub {
                id: r.id,
                name: r.name,
                region: r.region,
                intermodal,
                lon: r.lon,
                lat: r.lat,
            }),
            Err(message) => issues.push(LoadIssue::Row {
                file: "hubs.csv".into(),
                line: i as u64 + 2,
                message,
            }),
        }
    }
    let mut segments = Vec::new();
    for (i, r) in rows::<SegmentRow>(segments_csv, "segments.csv", &mut issues)
        .into_iter()
        .enumerate()
    {
        let mode = match r.mode.parse::<Mode>() {
            Ok(m) => m,
            Err(_) => {
                issues.push(LoadIssue::UnknownMode {
                    segment: r.id,
                    value: r.mode,
                });
                continue;
            }
        };
        let one_way = match flag(r.one_way.as_deref().unwrap_or("")) {
            Ok(b) => b,
            Err(message) => {
                issues.push(LoadIssue::Row {
                    file: "segments.csv".into(),
                    line: i as u64 + 2,
                    message,
                });
                continue;
            }
        };
        segments.push(Segment {
            id: r.id,
            from: r.from,
            to: r.to,
            mode,
            distance_km: r.distance_km,
            slope: r.slope,
            one_way,
            congestion: r.congestion.unwrap_or(1.0),
        });
    }
    match TransportNetwork::new(hubs, segments) {
        Ok(net) if issues.is_empty() => Ok(net),
        Ok(_) => Err(NetworkError::Invalid(issues)),
        Err(NetworkError::Invalid(more)) => {
            issues.extend(more);
            Err(NetworkError::Invalid(issues))
        }
        Err(e) => Err(e),
    }
}

/// Reads `hubs.csv` and `segments.csv` from `dir`.
pub fn load_network_files(dir: &Path) -> Result<TransportNetwork, NetworkError> {
    let read = |name: &str| {
        let p = dir.join(name);
        std::fs::read_to_string(&p).map_err(|e| NetworkError::Io(format!("{}: {e}", p.display())))
    };
    load_network(&read("hubs.csv")?, &read("segments.csv")?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HUBS: &str = "id,name,region,intermodal,lon,lat\n";
    const SEGS: &str = "id,from,to,mode,distance_km,slope,one_way\n";

    #[test]
    fn headers_only_is_empty() {
        let net = load_network(HUBS, SEGS).unwrap();
        assert!(net.is_empty());
    }

    #[test]
    fn two_hubs_one_segment() {
        let net = load_network(
            &format!("{HUBS}A,Alpha,r,true,0,0\nB,Beta,r,no,1,1\n"),
            &format!("{SEGS}s1,A,B,road,10,,\n"),
        )
        .unwrap();
        assert_eq!(net.incident("A").count(), 1);
        assert_eq!(net.incident("B").count(), 1);
        assert!(net.hub("A").unwrap().intermodal);
        assert_eq!(net.segment("s1").unwrap().slope, None);
    }

    #[test]
    fn problems_reported_together() {
        let err = load_network(
            &format!("{HUBS}A,Alpha,r,true,0,0\nA,Again,r,true,0,0\n"),
            &format!("{SEGS}s1,A,B,road,10,,\ns2,A,A,canoe,5,,\ns3,A,A,rail,-1,0.1,false\n"),
        )
        .unwrap_err();
        let NetworkError::Invalid(issues) = err else {
            panic!()
        };
        assert!(issues.contains(&LoadIssue::DuplicateHub("A".into())));
        assert!(issues.contains(&LoadIssue::UnknownMode {
            segment: "s2".into(),
            value: "canoe".into()
        }));
        assert!(issues.contains(&LoadIssue::NonPositiveDistance("s3".into())));
        assert!(issues
            .iter()
            .any(|i| matches!(i, LoadIssue::DanglingEndpoint { hub, .. } if hub == "B")));
    }
}
