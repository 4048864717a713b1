//! Intermodal network model: loading, shortest distances, bounded
//! enumeration of route/mode combinations and metric aggregation.

mod enumerate;
mod load;
mod metrics;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use enumerate::{enumerate_combinations, shortest_distance, shortest_distance_open};
pub use load::{load_network, load_network_files, LoadIssue};
pub use metrics::{
    aggregate_metrics, build_lookup_table, load_factors, FactorRow, LookupRow, LookupTable,
    MetricFactors, RouteMetrics, TransferPenalty,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Road,
    Rail,
    Water,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Road, Mode::Rail, Mode::Water];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Road => "road",
            Mode::Rail => "rail",
            Mode::Water => "water",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "road" => Ok(Mode::Road),
            "rail" => Ok(Mode::Rail),
            "water" => Ok(Mode::Water),
            other => Err(format!("unknown mode '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hub {
    pub id: String,
    pub name: String,
    pub region: String,
    pub intermodal: bool,
    pub lon: f64,
    pub lat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub id: String,
    pub from: String,
    pub to: String,
    pub mode: Mode,
    pub distance_km: f64,
    pub slope: Option<f64>,
    pub one_way: bool,
    /// Baseline travel-time multiplier, at least 1.
    pub congestion: f64,
}

impl Segment {
    /// The far end when leaving `node`, if the segment may be traversed that
    /// way.
    pub fn leave(&self, node: &str) -> Option<&str> {
        if self.from == node {
            Some(&self.to)
        } else if self.to == node && !self.one_way {
            Some(&self.from)
        } else {
            None
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("network has {} problem(s): {}", .0.len(), .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<LoadIssue>),
    #[error("unknown hub '{0}'")]
    UnknownHub(String),
    #[error("unknown segment '{0}'")]
    UnknownSegment(String),
    #[error("origin and destination are both '{0}'")]
    SameEndpoints(String),
    #[error("invalid constraints: {0}")]
    Constraints(String),
    #[error("no factor for mode {mode} with fuel '{fuel}'")]
    MissingFactor { mode: Mode, fuel: String },
    #[error("route {key}: {source}")]
    Row {
        key: String,
        #[source]
        source: Box<NetworkError>,
    },
    #[error("{0}")]
    Io(String),
}

/// Hubs and segments with an adjacency index. Immutable once built.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TransportNetwork {
    hubs: BTreeMap<String, Hub>,
    segments: BTreeMap<String, Segment>,
    adjacency: BTreeMap<String, Vec<String>>,
}

impl TransportNetwork {
    /// Validates everything at once; all problems are reported together.
    pub fn new(hubs: Vec<Hub>, segments: Vec<Segment>) -> Result<Self, NetworkError> {
        let mut issues = Vec::new();
        let mut hub_map = BTreeMap::new();
        for h in hubs {
            if hub_map.contains_key(&h.id) {
                issues.push(LoadIssue::DuplicateHub(h.id.clone()));
            } else {
                hub_map.insert(h.id.clone(), h);
            }
        }
        let mut seg_map = BTreeMap::new();
        for s in segments {
            if seg_map.contains_key(&s.id) {
                issues.push(LoadIssue::DuplicateSegment(s.id.clone()));
                continue;
            }
            for end in [&s.from, &s.to] {
                if !hub_map.contains_key(end) {
                    issues.push(LoadIssue::DanglingEndpoint {
                        segment: s.id.clone(),
                        hub: end.clone(),
                    });
                }
            }
            if !(s.distance_km > 0.0 && s.distance_km.is_finite()) {
                issues.push(LoadIssue::NonPositiveDistance(s.id.clone()));
            }
            if !(s.congestion >= 1.0 && s.congestion.is_finite()) {
                issues.push(LoadIssue::BadCongestion(s.id.clone()));
            }
            seg_map.insert(s.id.clone(), s);
        }
        if !issues.is_empty() {
            return Err(NetworkError::Invalid(issues));
        }
        let mut adjacency: BTreeMap<String, Vec<String>> =
            hub_map.keys().map(|k| (k.clone(), Vec::new())).collect();
        for s in seg_map.values() {
            adjacency
                .get_mut(&s.from)
                .expect("checked")
                .push(s.id.clone());
            if s.to != s.from {
                adjacency
                    .get_mut(&s.to)
                    .expect("checked")
                    .push(s.id.clone());
            }
        }
        Ok(TransportNetwork {
            hubs: hub_map,
            segments: seg_map,
            adjacency,
        })
    }

    pub fn hubs(&self) -> impl Iterator<Item = &Hub> {
        self.hubs.values()
    }

    pub fn segments(&self) -> impl Iterator<Item = &Segment> {
        self.segments.values()
    }

    pub fn hub(&self, id: &str) -> Option<&Hub> {
        self.hubs.get(id)
    }

    pub fn segment(&self, id: &str) -> Option<&Segment> {
        self.segments.get(id)
    }

    /// Segments touching `hub`, sorted by id.
    pub fn incident(&self, hub: &str) -> impl Iterator<Item = &Segment> {
        self.adjacency
            .get(hub)
            .into_iter()
            .flatten()
            .map(|id| &self.segments[id])
    }

    /// Modes of the segments touching `hub`.
    pub fn modes_at(&self, hub: &str) -> BTreeSet<Mode> {
        self.incident(hub).map(|s| s.mode).collect()
    }

    pub fn require_hub(&self, id: &str) -> Result<&Hub, NetworkError> {
        self.hub(id)
            .ok_or_else(|| NetworkError::UnknownHub(id.to_string()))
    }

    pub fn hub_count(&self) -> usize {
        self.hubs.len()
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hubs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Disruption {
    pub segment: String,
    #[serde(default)]
    pub closed: bool,
    #[serde(default = "one")]
    pub multiplier: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnumerationConstraints {
    pub max_hops: usize,
    pub detour_factor: f64,
    pub allowed_modes: BTreeSet<Mode>,
    pub max_transfers: usize,
    pub disruptions: Vec<Disruption>,
    pub payload_tonnes: f64,
    /// Fuel per mode; modes not listed use the factor table's default.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub fuels: BTreeMap<Mode, String>,
}

impl Default for EnumerationConstraints {
    fn default() -> Self {
        EnumerationConstraints {
            max_hops: 8,
            detour_factor: 2.0,
            allowed_modes: Mode::ALL.into_iter().collect(),
            max_transfers: 3,
            disruptions: Vec::new(),
            payload_tonnes: 1.0,
            fuels: BTreeMap::new(),
        }
    }
}

impl EnumerationConstraints {
    pub fn check(&self, network: &TransportNetwork) -> Result<(), NetworkError> {
        let bad = |m: String| Err(NetworkError::Constraints(m));
        if self.max_hops < 1 {
            return bad("max_hops must be at least 1".into());
        }
        if !(self.detour_factor >= 1.0 && self.detour_factor.is_finite()) {
            return bad("detour_factor must be at least 1".into());
        }
        if !(self.payload_tonnes > 0.0 && self.payload_tonnes.is_finite()) {
            return bad("payload_tonnes must be positive".into());
        }
        for d in &self.disruptions {
            if network.segment(&d.segment).is_none() {
                return Err(NetworkError::UnknownSegment(d.segment.clone()));
            }
            if !(d.multiplier > 0.0 && d.multiplier.is_finite()) {
                return bad(format!("multiplier for {} must be positive", d.segment));
            }
        }
        Ok(())
    }

    pub fn is_closed(&self, segment: &str) -> bool {
        self.disruptions
            .iter()
            .any(|d| d.segment == segment && d.closed)
    }

    /// Product of the scenario multipliers for `segment`.
    pub fn multiplier(&self, segment: &str) -> f64 {
        self.disruptions
            .iter()
            .filter(|d| d.segment == segment)
            .map(|d| d.multiplier)
            .product()
    }

    pub fn usable(&self, segment: &Segment) -> bool {
        self.allowed_modes.contains(&segment.mode) && !self.is_closed(&segment.id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteCombination {
    pub nodes: Vec<String>,
    pub edges: Vec<String>,
    pub modes: Vec<Mode>,
    pub transfers: usize,
    pub key: String,
}

impl RouteCombination {
    /// `NSH>road>MEM>rail>NOL`.
    pub fn canonical_key(nodes: &[String], modes: &[Mode]) -> String {
        let mut key = String::new();
        for (i, n) in nodes.iter().enumerate() {
            if i > 0 {
                key.push('>');
                key.push_str(modes[i - 1].as_str());
                key.push('>');
            }
            key.push_str(n);
        }
        key
    }

    pub fn new(nodes: Vec<String>, edges: Vec<String>, modes: Vec<Mode>) -> Self {
        let transfers = modes.windows(2).filter(|w| w[0] != w[1]).count();
        let key = Self::canonical_key(&nodes, &modes);
        RouteCombination {
            nodes,
            edges,
            modes,
            transfers,
            key,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn hub(id: &str, intermodal: bool) -> Hub {
        Hub {
            id: id.into(),
            name: id.into(),
            region: String::new(),
            intermodal,
            lon: 0.0,
            lat: 0.0,
        }
    }

    #[test]
    fn validation_collects_all_issues() {
        let seg = |id: &str, from: &str, to: &str, d: f64| Segment {
            id: id.into(),
            from: from.into(),
            to: to.into(),
            mode: Mode::Road,
            distance_km: d,
            slope: None,
            one_way: false,
            congestion: 1.0,
        };
        let err = TransportNetwork::new(
            vec![hub("A", false), hub("A", false), hub("B", false)],
            vec![
                seg("s", "A", "B", 1.0),
                seg("s", "A", "B", 1.0),
                seg("t", "A", "Z", 0.0),
            ],
        )
        .unwrap_err();
        let NetworkError::Invalid(issues) = err else {
            panic!()
        };
        assert_eq!(issues.len(), 4);
    }

    #[test]
    fn keys_and_transfers() {
        let c = RouteCombination::new(
            vec!["NSH".into(), "MEM".into(), "NOL".into()],
            vec!["a".into(), "b".into()],
            vec![Mode::Road, Mode::Rail],
        );
        assert_eq!(c.key, "NSH>road>MEM>rail>NOL");
        assert_eq!(c.transfers, 1);
        assert_eq!("Water".parse::<Mode>(), Ok(Mode::Water));
    }
}
