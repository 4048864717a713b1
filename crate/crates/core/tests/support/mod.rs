//! Random instance generators and brute-force oracles shared by the
//! integration suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use ontoroute_core::freightnet::{
    Disruption, EnumerationConstraints, Hub, MetricFactors, Mode, RouteCombination, RouteMetrics,
    Segment, TransportNetwork,
};
use ontoroute_core::kstore::{Datatype, Graph, Iri, Literal, Term, Triple};
use ontoroute_core::mcda::{Criterion, McdaRow, McdaTable, Weights};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const NAMESPACES: [&str; 3] = [
    "http://example.org/a#",
    "http://example.org/b/",
    "urn:test:",
];
const LOCALS: [&str; 8] = [
    "Alpha", "beta", "Gamma_2", "d-e", "x1", "Pizza", "has.part", "n",
];
const STRINGS: [&str; 9] = [
    "",
    "plain",
    "with \"quotes\"",
    "line\nbreak\ttab",
    "back\\slash",
    "ünïcödé ✓",
    "'single'",
    "trailing space ",
    "#hash and ; semi , comma .",
];

fn random_iri(rng: &mut ChaCha8Rng) -> Iri {
    let ns = NAMESPACES.choose(rng).unwrap();
    let local = LOCALS.choose(rng).unwrap();
    Iri::new(format!("{ns}{local}{}", rng.gen_range(0..6))).unwrap()
}

fn random_literal(rng: &mut ChaCha8Rng) -> Literal {
    match rng.gen_range(0..6) {
        0 => Literal::string(*STRINGS.choose(rng).unwrap()),
        1 => Literal::lang_string(
            *STRINGS.choose(rng).unwrap(),
            *["en", "de", "en-GB"].choose(rng).unwrap(),
        )
        .unwrap(),
        2 => Literal::typed(rng.gen_range(-1000i64..1000).to_string(), Datatype::Integer).unwrap(),
        3 => Literal::typed(
            format!("{}.{}", rng.gen_range(-50..50), rng.gen_range(0..1000)),
            Datatype::Decimal,
        )
        .unwrap(),
        4 => Literal::typed(["true", "false"][rng.gen_range(0..2)], Datatype::Boolean).unwrap(),
        _ => Literal::typed(
            format!(
                "20{:02}-{:02}-{:02}T10:20:30Z",
                rng.gen_range(0..30),
                rng.gen_range(1..13),
                rng.gen_range(1..29)
            ),
            Datatype::Datetime,
        )
        .unwrap(),
    }
}

/// Up to `max_triples` random triples; some namespaces get prefixes.
pub fn random_graph(rng: &mut ChaCha8Rng, max_triples: usize) -> Graph {
    let mut g = Graph::new();
    if rng.gen_bool(0.5) {
        g.bind_prefix("a", NAMESPACES[0]);
    }
    if rng.gen_bool(0.5) {
        g.bind_prefix("b", NAMESPACES[1]);
    }
    let n = rng.gen_range(0..=max_triples);
    for _ in 0..n {
        let s = random_iri(rng);
        let p = if rng.gen_bool(0.2) {
            Iri::new("http://www.w3.org/1999/02/22-rdf-syntax-ns#type").unwrap()
        } else {
            random_iri(rng)
        };
        let o: Term = if rng.gen_bool(0.5) {
            random_iri(rng).into()
        } else {
            random_literal(rng).into()
        };
        g.insert(Triple::new(s, p, o));
    }
    g
}

/// Random network with at most 12 hubs and 30 segments plus random
/// constraints and endpoints.
pub fn random_network(
    rng: &mut ChaCha8Rng,
) -> (TransportNetwork, String, String, EnumerationConstraints) {
    // A quarter of the instances are as large and loosely constrained as
    // allowed, so long routes with several transfers show up.
    let dense = rng.gen_bool(0.25);
    let n = if dense { 12 } else { rng.gen_range(2..=12) };
    let hubs: Vec<Hub> = (0..n)
        .map(|i| Hub {
            id: format!("H{i:02}"),
            name: format!("Hub {i}"),
            region: String::new(),
            intermodal: dense || rng.gen_bool(0.75),
            lon: 0.0,
            lat: 0.0,
        })
        .collect();
    let m = if dense { 30 } else { rng.gen_range(n - 1..=30) };
    // Most instances start from a random spanning tree so that the endpoints
    // are usually connected.
    let tree = dense || rng.gen_bool(0.8);
    let segments: Vec<Segment> = (0..m)
        .map(|i| {
            let (a, b) = if tree && i + 1 < n {
                (i + 1, rng.gen_range(0..=i))
            } else {
                let a = rng.gen_range(0..n);
                let mut b = rng.gen_range(0..n);
                while b == a {
                    b = rng.gen_range(0..n);
                }
                (a, b)
            };
            Segment {
                id: format!("S{i:02}"),
                from: hubs[a].id.clone(),
                to: hubs[b].id.clone(),
                mode: *Mode::ALL.choose(rng).unwrap(),
                distance_km: rng.gen_range(1..=100) as f64,
                slope: None,
                one_way: rng.gen_bool(0.2),
                congestion: 1.0 + rng.gen_range(0..3) as f64 * 0.5,
            }
        })
        .collect();
    let mut allowed: BTreeSet<Mode> = if dense || rng.gen_bool(0.5) {
        Mode::ALL.into_iter().collect()
    } else {
        Mode::ALL
            .into_iter()
            .filter(|_| rng.gen_bool(0.6))
            .collect()
    };
    if allowed.is_empty() {
        allowed.insert(Mode::Road);
    }
    let mut disruptions = Vec::new();
    for s in &segments {
        if rng.gen_bool(0.1) {
            disruptions.push(Disruption {
                segment: s.id.clone(),
                closed: rng.gen_bool(0.5),
                multiplier: 1.0 + rng.gen_range(0..4) as f64 * 0.25,
            });
        }
    }
    let constraints = EnumerationConstraints {
        max_hops: if dense { 8 } else { rng.gen_range(1..=8) },
        detour_factor: if dense {
            10.0
        } else {
            [1.0, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0][rng.gen_range(0..7)]
        },
        allowed_modes: allowed,
        max_transfers: if dense { 3 } else { rng.gen_range(0..=3) },
        disruptions,
        payload_tonnes: rng.gen_range(1..=20) as f64,
        fuels: BTreeMap::new(),
    };
    let o = rng.gen_range(0..n);
    let mut d = rng.gen_range(0..n);
    while d == o {
        d = rng.gen_range(0..n);
    }
    let origin = hubs[o].id.clone();
    let destination = hubs[d].id.clone();
    (
        TransportNetwork::new(hubs, segments).unwrap(),
        origin,
        destination,
        constraints,
    )
}

fn traversals<'a>(
    net: &'a TransportNetwork,
    usable: &dyn Fn(&Segment) -> bool,
) -> Vec<(&'a str, &'a str, &'a Segment)> {
    let mut out = Vec::new();
    for s in net.segments().filter(|s| usable(s)) {
        out.push((s.from.as_str(), s.to.as_str(), s));
        if !s.one_way {
            out.push((s.to.as_str(), s.from.as_str(), s));
        }
    }
    out
}

/// Bellman-Ford relaxation over every usable traversal.
pub fn shortest_oracle(
    net: &TransportNetwork,
    o: &str,
    d: &str,
    usable: &dyn Fn(&Segment) -> bool,
) -> Option<f64> {
    let arcs = traversals(net, usable);
    let mut dist: BTreeMap<&str, f64> = BTreeMap::from([(o, 0.0)]);
    for _ in 0..net.hub_count() {
        let mut changed = false;
        for (a, b, s) in &arcs {
            if let Some(&da) = dist.get(a) {
                let nd = da + s.distance_km;
                if dist.get(b).is_none_or(|&db| nd < db) {
                    dist.insert(b, nd);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist.get(d).copied()
}

/// Every segment-level simple path obeying the constraints, reduced to one
/// entry per (node sequence, mode sequence) holding the cheapest segment per
/// hop.
pub fn enumeration_oracle(
    net: &TransportNetwork,
    o: &str,
    d: &str,
    k: &EnumerationConstraints,
) -> BTreeMap<String, RouteCombination> {
    let usable = |s: &Segment| k.allowed_modes.contains(&s.mode) && !k.is_closed(&s.id);
    let Some(shortest) = shortest_oracle(net, o, d, &|s| k.allowed_modes.contains(&s.mode)) else {
        return BTreeMap::new();
    };
    let limit = k.detour_factor * shortest * (1.0 + 1e-9);
    let arcs = traversals(net, &usable);
    let mut found: Vec<Vec<&Segment>> = Vec::new();
    let mut stack: Vec<(Vec<&str>, Vec<&Segment>)> = vec![(vec![o], Vec::new())];
    while let Some((nodes, segs)) = stack.pop() {
        let here = *nodes.last().unwrap();
        if here == d {
            found.push(segs);
            continue;
        }
        if segs.len() == k.max_hops {
            continue;
        }
        for (a, b, s) in &arcs {
            if *a == here && !nodes.contains(b) {
                let mut n2 = nodes.clone();
                n2.push(b);
                let mut s2 = segs.clone();
                s2.push(s);
                stack.push((n2, s2));
            }
        }
    }
    let mut out: BTreeMap<String, RouteCombination> = BTreeMap::new();
    let mut best_dist: BTreeMap<String, Vec<(f64, String)>> = BTreeMap::new();
    for segs in found {
        let mut nodes = vec![o.to_string()];
        for s in &segs {
            let last = nodes.last().unwrap().clone();
            nodes.push(if s.from == last {
                s.to.clone()
            } else {
                s.from.clone()
            });
        }
        let modes: Vec<Mode> = segs.iter().map(|s| s.mode).collect();
        let ok_transfers = (1..modes.len())
            .all(|i| modes[i] == modes[i - 1] || net.hub(&nodes[i]).unwrap().intermodal);
        let transfers = (1..modes.len())
            .filter(|&i| modes[i] != modes[i - 1])
            .count();
        if !ok_transfers || transfers > k.max_transfers {
            continue;
        }
        let combo =
            RouteCombination::new(nodes, segs.iter().map(|s| s.id.clone()).collect(), modes);
        let per_hop: Vec<(f64, String)> =
            segs.iter().map(|s| (s.distance_km, s.id.clone())).collect();
        let better = match best_dist.get(&combo.key) {
            None => true,
            Some(prev) => per_hop
                .iter()
                .zip(prev)
                .map(|(a, b)| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)))
                .all(|o| o.is_le()),
        };
        if better {
            best_dist.insert(combo.key.clone(), per_hop);
            out.insert(combo.key.clone(), combo);
        }
    }
    out.retain(|_, c| {
        let total: f64 = c
            .edges
            .iter()
            .map(|e| net.segment(e).unwrap().distance_km)
            .sum();
        total <= limit
    });
    out
}

/// Straight summation of the metric formulas.
pub fn metrics_oracle(
    net: &TransportNetwork,
    combo: &RouteCombination,
    factors: &MetricFactors,
    k: &EnumerationConstraints,
) -> RouteMetrics {
    let mut ghg = 0.0;
    let mut cost = 0.0;
    let mut time = 0.0;
    let mut fuel = 0.0;
    let mut distance = 0.0;
    for id in &combo.edges {
        let s = net.segment(id).unwrap();
        let fuel_name = k.fuels.get(&s.mode).cloned().unwrap_or_else(|| {
            factors
                .rows()
                .find(|r| r.mode == s.mode)
                .unwrap()
                .fuel
                .clone()
        });
        let f = factors
            .rows()
            .find(|r| r.mode == s.mode && r.fuel == fuel_name)
            .unwrap();
        let mult: f64 = k
            .disruptions
            .iter()
            .filter(|d| &d.segment == id)
            .map(|d| d.multiplier)
            .product();
        ghg += s.distance_km * k.payload_tonnes * f.emission_kg_per_tkm;
        cost += s.distance_km * k.payload_tonnes * f.cost_per_tkm;
        fuel += s.distance_km * k.payload_tonnes * f.fuel_l_per_tkm;
        time += s.distance_km / f.speed_kmh * s.congestion * mult;
        distance += s.distance_km;
    }
    let changes = combo.modes.windows(2).filter(|w| w[0] != w[1]).count() as f64;
    RouteMetrics {
        ghg: ghg + changes * factors.transfer.ghg_kg,
        cost: cost + changes * factors.transfer.cost,
        time: time + changes * factors.transfer.hours,
        fuel,
        distance,
    }
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-12)
}

pub fn metrics_close(a: &RouteMetrics, b: &RouteMetrics, rel: f64) -> bool {
    close(a.ghg, b.ghg, rel)
        && close(a.cost, b.cost, rel)
        && close(a.time, b.time, rel)
        && close(a.fuel, b.fuel, rel)
        && close(a.distance, b.distance, rel)
}

/// Random table with `1..=max_rows` rows; values sometimes repeat so ties
/// and duplicates occur.
pub fn random_table(rng: &mut ChaCha8Rng, max_rows: usize) -> McdaTable {
    let n = rng.gen_range(1..=max_rows);
    let coarse = rng.gen_bool(0.3);
    let rows = (0..n)
        .map(|i| {
            let values = [(); 5].map(|_| {
                if coarse {
                    rng.gen_range(0..5) as f64
                } else {
                    rng.gen_range(0.0..1000.0)
                }
            });
            McdaRow::new(format!("r{i:04}"), values)
        })
        .collect();
    McdaTable { rows }
}

pub fn random_weights(rng: &mut ChaCha8Rng) -> Weights {
    let mut w = Weights::new();
    for c in Criterion::ALL {
        if rng.gen_bool(0.6) {
            w.insert(c, rng.gen_range(0.0..1.0));
        }
    }
    if !w.values().any(|v| *v > 0.0) {
        w.insert(Criterion::Time, 1.0);
    }
    w
}

/// Pairwise dominance scan.
pub fn front_oracle(table: &McdaTable) -> Vec<String> {
    let dominated = |a: &McdaRow, b: &McdaRow| {
        (0..5).all(|i| a.values[i] <= b.values[i]) && (0..5).any(|i| a.values[i] < b.values[i])
    };
    let mut keys: Vec<String> = table
        .rows
        .iter()
        .filter(|r| !table.rows.iter().any(|o| dominated(o, r)))
        .map(|r| r.key.clone())
        .collect();
    keys.sort();
    keys
}

/// Min-max normalization and a linear scan for the smallest score.
pub fn min_score_oracle(table: &McdaTable, weights: &Weights) -> String {
    let mut lo = [f64::INFINITY; 5];
    let mut hi = [f64::NEG_INFINITY; 5];
    for r in &table.rows {
        for i in 0..5 {
            lo[i] = lo[i].min(r.values[i]);
            hi[i] = hi[i].max(r.values[i]);
        }
    }
    let mut best: Option<(f64, &str)> = None;
    for r in &table.rows {
        let mut s = 0.0;
        for (c, w) in weights {
            let i = c.index();
            let v = if hi[i] > lo[i] {
                (r.values[i] - lo[i]) / (hi[i] - lo[i])
            } else {
                0.0
            };
            s += w * v;
        }
        if best.is_none_or(|(bs, bk)| s < bs || (s == bs && r.key.as_str() < bk)) {
            best = Some((s, &r.key));
        }
    }
    best.unwrap().1.to_string()
}

/// Stable multi-key sort: sort by key first, then by each criterion from
/// last to first.
pub fn lex_oracle(table: &McdaTable, order: &[Criterion]) -> String {
    let mut rows: Vec<&McdaRow> = table.rows.iter().collect();
    rows.sort_by(|a, b| a.key.cmp(&b.key));
    for c in order.iter().rev() {
        rows.sort_by(|a, b| {
            a.values[c.index()]
                .partial_cmp(&b.values[c.index()])
                .unwrap()
        });
    }
    rows[0].key.clone()
}
