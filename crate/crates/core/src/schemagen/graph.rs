use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};

use crate::freightnet::{Mode, TransportNetwork};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeRecord {
    pub id: String,
    pub labels: Vec<String>,
    pub attributes: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeRecord {
    pub id: String,
    pub from: String,
    pub to: String,
    pub label: String,
    pub attributes: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PropertyGraphExport {
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
}

fn to_csv(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

fn attr_json(attrs: &BTreeMap<String, Value>) -> String {
    serde_json::to_string(attrs).expect("json values")
}

impl PropertyGraphExport {
    /// `id,labels,attr_json` with labels joined by `;`.
    pub fn nodes_csv(&self) -> String {
        to_csv(
            &["id", "labels", "attr_json"],
            self.nodes
                .iter()
                .map(|n| vec![n.id.clone(), n.labels.join(";"), attr_json(&n.attributes)]),
        )
    }

    /// `id,from,to,label,attr_json`.
    pub fn edges_csv(&self) -> String {
        to_csv(
            &["id", "from", "to", "label", "attr_json"],
            self.edges.iter().map(|e| {
                vec![
                    e.id.clone(),
                    e.from.clone(),
                    e.to.clone(),
                    e.label.clone(),
                    attr_json(&e.attributes),
                ]
            }),
        )
    }
}

/// Topology only: hubs keep their id, name and which modes reach them;
/// segments keep id, mode, distance and slope. Costs, emissions, fuel
/// data and coordinates stay out of the graph.
pub fn export_property_graph(network: &TransportNetwork) -> PropertyGraphExport {
    let nodes = network
        .hubs()
        .map(|h| {
            let modes = network.modes_at(&h.id);
            let mut attributes = BTreeMap::from([
                ("id".to_string(), json!(h.id)),
                ("name".to_string(), json!(h.name)),
            ]);
            for m in Mode::ALL {
                attributes.insert(m.as_str().to_string(), json!(modes.contains(&m)));
            }
            let mut labels = vec!["Hub".to_string()];
            if h.intermodal {
                labels.push("Intermodal".into());
            }
            NodeRecord {
                id: h.id.clone(),
                labels,
                attributes,
            }
        })
        .collect();
    let edges = network
        .segments()
        .map(|s| EdgeRecord {
            id: s.id.clone(),
            from: s.from.clone(),
            to: s.to.clone(),
            label: s.mode.as_str().to_uppercase(),
            attributes: BTreeMap::from([
                ("id".to_string(), json!(s.id)),
                ("mode".to_string(), json!(s.mode)),
                ("distance".to_string(), json!(s.distance_km)),
                ("slope".to_string(), json!(s.slope)),
            ]),
        })
        .collect();
    PropertyGraphExport { nodes, edges }
}
