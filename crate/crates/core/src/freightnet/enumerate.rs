use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use super::{
    EnumerationConstraints, Mode, NetworkError, RouteCombination, Segment, TransportNetwork,
};

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    node: String,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(
    network: &TransportNetwork,
    origin: &str,
    destination: &str,
    usable: impl Fn(&Segment) -> bool,
) -> Result<Option<f64>, NetworkError> {
    network.require_hub(origin)?;
    network.require_hub(destination)?;
    let mut best: BTreeMap<&str, f64> = BTreeMap::from([(origin, 0.0)]);
    let mut heap = BinaryHeap::from([Entry {
        dist: 0.0,
        node: origin.to_string(),
    }]);
    while let Some(Entry { dist, node }) = heap.pop() {
        if node == destination {
            return Ok(Some(dist));
        }
        if best.get(node.as_str()).is_some_and(|&b| dist > b) {
            continue;
        }
        for seg in network.incident(&node).filter(|s| usable(s)) {
            let Some(next) = seg.leave(&node) else {
                continue;
            };
            let d = dist + seg.distance_km;
            if best.get(next).is_none_or(|&b| d < b) {
                best.insert(next, d);
                heap.push(Entry {
                    dist: d,
                    node: next.to_string(),
                });
            }
        }
    }
    Ok(None)
}

/// Minimal distance using only segments of the allowed modes, or `None`
/// when the destination cannot be reached.
pub fn shortest_distance(
    network: &TransportNetwork,
    origin: &str,
    destination: &str,
    allowed_modes: &BTreeSet<Mode>,
) -> Result<Option<f64>, NetworkError> {
    dijkstra(network, origin, destination, |s| {
        allowed_modes.contains(&s.mode)
    })
}

/// Like [`shortest_distance`], also skipping closed segments.
pub fn shortest_distance_open(
    network: &TransportNetwork,
    origin: &str,
    destination: &str,
    constraints: &EnumerationConstraints,
) -> Result<Option<f64>, NetworkError> {
    dijkstra(network, origin, destination, |s| constraints.usable(s))
}

/// Relative slack for the detour bound.
const DETOUR_EPS: f64 = 1e-9;

struct Search<'a> {
    network: &'a TransportNetwork,
    constraints: &'a EnumerationConstraints,
    destination: &'a str,
    limit: f64,
    /// Cheapest open segment per (node, neighbour, mode).
    moves: BTreeMap<&'a str, Vec<(&'a str, Mode, &'a Segment)>>,
    nodes: Vec<&'a str>,
    edges: Vec<&'a Segment>,
    visited: BTreeSet<&'a str>,
    out: Vec<RouteCombination>,
}

impl<'a> Search<'a> {
    fn moves_from(&mut self, node: &'a str) -> Vec<(&'a str, Mode, &'a Segment)> {
        if let Some(m) = self.moves.get(node) {
            return m.clone();
        }
        let mut best: BTreeMap<(&'a str, Mode), &'a Segment> = BTreeMap::new();
        for seg in self
            .network
            .incident(node)
            .filter(|s| self.constraints.usable(s))
        {
            let Some(next) = seg.leave(node) else {
                continue;
            };
            best.entry((next, seg.mode))
                .and_modify(|cur| {
                    if (seg.distance_km, &seg.id) < (cur.distance_km, &cur.id) {
                        *cur = seg;
                    }
                })
                .or_insert(seg);
        }
        let list: Vec<_> = best.into_iter().map(|((n, m), s)| (n, m, s)).collect();
        self.moves.insert(node, list.clone());
        list
    }

    fn walk(&mut self, node: &'a str, dist: f64, transfers: usize) {
        if node == self.destination {
            let nodes = self.nodes.iter().map(|n| n.to_string()).collect();
            let edges = self.edges.iter().map(|s| s.id.clone()).collect();
            let modes = self.edges.iter().map(|s| s.mode).collect();
            self.out.push(RouteCombination::new(nodes, edges, modes));
            return;
        }
        if self.edges.len() >= self.constraints.max_hops {
            return;
        }
        let here = self.network.hub(node).expect("known hub");
        for (next, mode, seg) in self.moves_from(node) {
            if self.visited.contains(next) {
                continue;
            }
            let change = self.edges.last().is_some_and(|prev| prev.mode != mode);
            if change && (!here.intermodal || transfers >= self.constraints.max_transfers) {
                continue;
            }
            let d = dist + seg.distance_km;
            if d > self.limit {
                continue;
            }
            self.visited.insert(next);
            self.nodes.push(next);
            self.edges.push(seg);
            self.walk(next, d, transfers + usize::from(change));
            self.edges.pop();
            self.nodes.pop();
            self.visited.remove(next);
        }
    }
}

/// Every simple path from `origin` to `destination` within the hop,
/// transfer, mode, closure and detour limits, one per distinct node and mode
/// sequence, sorted by canonical key. Transfers happen only at intermodal
/// hubs. The detour bound is measured against the shortest distance over
/// the allowed modes with closures ignored, so closing a segment can only
/// remove combinations.
pub fn enumerate_combinations(
    network: &TransportNetwork,
    origin: &str,
    destination: &str,
    constraints: &EnumerationConstraints,
) -> Result<Vec<RouteCombination>, NetworkError> {
    network.require_hub(origin)?;
    network.require_hub(destination)?;
    if origin == destination {
        return Err(NetworkError::SameEndpoints(origin.to_string()));
    }
    constraints.check(network)?;
    let Some(shortest) =
        shortest_distance(network, origin, destination, &constraints.allowed_modes)?
    else {
        return Ok(Vec::new());
    };
    let mut search = Search {
        network,
        constraints,
        destination,
        limit: constraints.detour_factor * shortest * (1.0 + DETOUR_EPS),
        moves: BTreeMap::new(),
        nodes: vec![origin],
        edges: Vec::new(),
        visited: BTreeSet::from([origin]),
        out: Vec::new(),
    };
    search.walk(origin, 0.0, 0);
    let mut out = search.out;
    out.sort_by(|a, b| a.key.cmp(&b.key));
    Ok(out)
}
