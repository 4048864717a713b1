//! Ranking and filtering of route lookup tables: min-max normalization,
//! weighted sums, lexicographic order and Pareto fronts. All criteria are
//! minimized and ties always fall back to the canonical key.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::freightnet::{
    build_lookup_table, enumerate_combinations, EnumerationConstraints, LookupTable, MetricFactors,
    Mode, NetworkError, RouteMetrics, TransportNetwork,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Ghg,
    Cost,
    Time,
    Fuel,
    Distance,
}

impl Criterion {
    pub const ALL: [Criterion; 5] = [
        Criterion::Ghg,
        Criterion::Cost,
        Criterion::Time,
        Criterion::Fuel,
        Criterion::Distance,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::Ghg => "ghg",
            Criterion::Cost => "cost",
            Criterion::Time => "time",
            Criterion::Fuel => "fuel",
            Criterion::Distance => "distance",
        }
    }

    pub fn of(self, m: &RouteMetrics) -> f64 {
        match self {
            Criterion::Ghg => m.ghg,
            Criterion::Cost => m.cost,
            Criterion::Time => m.time,
            Criterion::Fuel => m.fuel,
            Criterion::Distance => m.distance,
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Criterion {
    type Err = McdaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.as_str() == s.trim().to_lowercase())
            .ok_or_else(|| McdaError::Invalid(format!("unknown criterion '{s}'")))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum McdaError {
    #[error("table is empty")]
    EmptyTable,
    #[error("at least one weight must be positive")]
    NoPositiveWeight,
    #[error("lexicographic order is empty")]
    EmptyOrder,
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

pub type Weights = BTreeMap<Criterion, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McdaRow {
    pub key: String,
    /// Indexed by [`Criterion::index`].
    pub values: [f64; 5],
}

impl McdaRow {
    pub fn new(key: impl Into<String>, values: [f64; 5]) -> Self {
        McdaRow {
            key: key.into(),
            values,
        }
    }

    pub fn from_metrics(key: impl Into<String>, m: &RouteMetrics) -> Self {
        McdaRow::new(key, Criterion::ALL.map(|c| c.of(m)))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct McdaTable {
    pub rows: Vec<McdaRow>,
}

impl McdaTable {
    pub fn from_lookup(table: &LookupTable) -> Self {
        McdaTable {
            rows: table
                .rows
                .iter()
                .map(|r| McdaRow::from_metrics(&r.key, &r.metrics))
                .collect(),
        }
    }
}

/// Rescales each criterion to `[0, 1]`; a constant column becomes all zeros.
pub fn normalize(table: &McdaTable) -> Result<McdaTable, McdaError> {
    if table.rows.is_empty() {
        return Err(McdaError::EmptyTable);
    }
    let mut lo = [f64::INFINITY; 5];
    let mut hi = [f64::NEG_INFINITY; 5];
    for r in &table.rows {
        for i in 0..5 {
            lo[i] = lo[i].min(r.values[i]);
            hi[i] = hi[i].max(r.values[i]);
        }
    }
    let rows = table
        .rows
        .iter()
        .map(|r| {
            let mut v = [0.0; 5];
            for i in 0..5 {
                if hi[i] > lo[i] {
                    v[i] = (r.values[i] - lo[i]) / (hi[i] - lo[i]);
                }
            }
            McdaRow::new(r.key.clone(), v)
        })
        .collect();
    Ok(McdaTable { rows })
}

fn check_weights(weights: &Weights) -> Result<(), McdaError> {
    if let Some((c, w)) = weights.iter().find(|(_, w)| !(**w >= 0.0 && w.is_finite())) {
        return Err(McdaError::Invalid(format!("weight for {c} is {w}")));
    }
    if !weights.values().any(|w| *w > 0.0) {
        return Err(McdaError::NoPositiveWeight);
    }
    Ok(())
}

pub fn score(row: &McdaRow, weights: &Weights) -> f64 {
    weights.iter().map(|(c, w)| w * row.values[c.index()]).sum()
}

/// Keys with their scores, ascending by score then key.
pub fn weighted_rank(
    normalized: &McdaTable,
    weights: &Weights,
) -> Result<Vec<(String, f64)>, McdaError> {
    check_weights(weights)?;
    let mut ranked: Vec<(String, f64)> = normalized
        .rows
        .iter()
        .map(|r| (r.key.clone(), score(r, weights)))
        .collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    Ok(ranked)
}

pub fn dominates(a: &[f64; 5], b: &[f64; 5]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

fn lex_cmp(a: &[f64; 5], b: &[f64; 5]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Keys of the non-dominated rows, sorted. Rows are visited in
/// lexicographic value order, so a row can only be dominated by an earlier
/// row and it is enough to test against the front found so far.
pub fn pareto_front(table: &McdaTable) -> Vec<String> {
    let mut order: Vec<&McdaRow> = table.rows.iter().collect();
    order.sort_by(|a, b| lex_cmp(&a.values, &b.values).then_with(|| a.key.cmp(&b.key)));
    let mut front: Vec<&McdaRow> = Vec::new();
    for row in order {
        if !front.iter().any(|f| dominates(&f.values, &row.values)) {
            front.push(row);
        }
    }
    let mut keys: Vec<String> = front.into_iter().map(|r| r.key.clone()).collect();
    keys.sort();
    keys
}

fn lex_order(rows: &mut [&McdaRow], order: &[Criterion]) {
    rows.sort_by(|a, b| {
        order
            .iter()
            .map(|c| a.values[c.index()].total_cmp(&b.values[c.index()]))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.key.cmp(&b.key))
    });
}

pub fn lexicographic_best(table: &McdaTable, order: &[Criterion]) -> Result<String, McdaError> {
    if order.is_empty() {
        return Err(McdaError::EmptyOrder);
    }
    let mut rows: Vec<&McdaRow> = table.rows.iter().collect();
    lex_order(&mut rows, order);
    rows.first()
        .map(|r| r.key.clone())
        .ok_or(McdaError::EmptyTable)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Weighted,
    Lexicographic,
    Pareto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub origin: String,
    pub destination: String,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub weights: Weights,
    #[serde(default)]
    pub lex_order: Vec<Criterion>,
    #[serde(default)]
    pub constraints: EnumerationConstraints,
}

impl ScenarioSpec {
    pub fn check(&self, network: &TransportNetwork) -> Result<(), McdaError> {
        match self.method {
            Method::Weighted => check_weights(&self.weights)?,
            Method::Lexicographic if self.lex_order.is_empty() => {
                return Err(McdaError::EmptyOrder)
            }
            _ => {
                if !self.weights.is_empty() && self.weights.values().any(|w| *w > 0.0) {
                    check_weights(&self.weights)?;
                }
            }
        }
        if self.constraints.allowed_modes.is_empty() {
            return Err(McdaError::Invalid("allowed_modes is empty".into()));
        }
        network.require_hub(&self.origin)?;
        network.require_hub(&self.destination)?;
        self.constraints.check(network)?;
        Ok(())
    }

    /// The given weights, or equal weights when none is positive.
    pub fn effective_weights(&self) -> Weights {
        if self.weights.values().any(|w| *w > 0.0) {
            self.weights.clone()
        } else {
            Criterion::ALL.into_iter().map(|c| (c, 1.0)).collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioStatus {
    Ok,
    Unreachable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub key: String,
    pub nodes: Vec<String>,
    pub edges: Vec<String>,
    pub modes: Vec<Mode>,
    pub transfers: usize,
    pub metrics: RouteMetrics,
    pub normalized: RouteMetrics,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub status: ScenarioStatus,
    /// Rows in canonical key order.
    pub rows: Vec<ScenarioRow>,
    pub ranking: Vec<String>,
    pub pareto_front: Vec<String>,
    pub best: Option<String>,
    /// The exact scenario that produced this result.
    pub config: ScenarioSpec,
}

fn as_metrics(values: &[f64; 5]) -> RouteMetrics {
    RouteMetrics {
        ghg: values[0],
        cost: values[1],
        time: values[2],
        fuel: values[3],
        distance: values[4],
    }
}

/// Enumerates, aggregates, normalizes and ranks. Weighted ranks every row;
/// lexicographic sorts every row by `lex_order`; pareto ranks only the
/// front, by score. The score column always uses the effective weights.
pub fn solve_scenario(
    network: &TransportNetwork,
    factors: &MetricFactors,
    spec: &ScenarioSpec,
) -> Result<ScenarioResult, McdaError> {
    spec.check(network)?;
    let combos =
        enumerate_combinations(network, &spec.origin, &spec.destination, &spec.constraints)?;
    let lookup = build_lookup_table(network, &combos, factors, &spec.constraints)?;
    if lookup.is_empty() {
        return Ok(ScenarioResult {
            status: ScenarioStatus::Unreachable,
            rows: Vec::new(),
            ranking: Vec::new(),
            pareto_front: Vec::new(),
            best: None,
            config: spec.clone(),
        });
    }
    let table = McdaTable::from_lookup(&lookup);
    let normalized = normalize(&table)?;
    let weights = spec.effective_weights();
    let scored = weighted_rank(&normalized, &weights)?;
    let front = pareto_front(&table);
    let ranking: Vec<String> = match spec.method {
        Method::Weighted => scored.iter().map(|(k, _)| k.clone()).collect(),
        Method::Lexicographic => {
            let mut rows: Vec<&McdaRow> = table.rows.iter().collect();
            lex_order(&mut rows, &spec.lex_order);
            rows.into_iter().map(|r| r.key.clone()).collect()
        }
        Method::Pareto => scored
            .iter()
            .filter(|(k, _)| front.binary_search(k).is_ok())
            .map(|(k, _)| k.clone())
            .collect(),
    };
    let scores: BTreeMap<&str, f64> = scored.iter().map(|(k, s)| (k.as_str(), *s)).collect();
    let rows = lookup
        .rows
        .iter()
        .zip(&normalized.rows)
        .map(|(r, n)| ScenarioRow {
            key: r.key.clone(),
            nodes: r.combination.nodes.clone(),
            edges: r.combination.edges.clone(),
            modes: r.combination.modes.clone(),
            transfers: r.combination.transfers,
            metrics: r.metrics,
            normalized: as_metrics(&n.values),
            score: scores[r.key.as_str()],
        })
        .collect();
    Ok(ScenarioResult {
        status: ScenarioStatus::Ok,
        rows,
        best: ranking.first().cloned(),
        ranking,
        pareto_front: front,
        config: spec.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[(&str, [f64; 5])]) -> McdaTable {
        McdaTable {
            rows: rows.iter().map(|(k, v)| McdaRow::new(*k, *v)).collect(),
        }
    }

    #[test]
    fn normalization_rules() {
        assert_eq!(normalize(&McdaTable::default()), Err(McdaError::EmptyTable));
        let one = normalize(&table(&[("a", [3.0, 4.0, 5.0, 6.0, 7.0])])).unwrap();
        assert_eq!(one.rows[0].values, [0.0; 5]);
        let two = normalize(&table(&[
            ("a", [10.0, 1.0, 1.0, 1.0, 1.0]),
            ("b", [30.0, 1.0, 1.0, 1.0, 1.0]),
        ]))
        .unwrap();
        assert_eq!(two.rows[0].values[0], 0.0);
        assert_eq!(two.rows[1].values[0], 1.0);
    }

    #[test]
    fn weighted_and_ties() {
        let t = table(&[
            ("b", [1.0, 0.0, 0.0, 0.0, 5.0]),
            ("a", [1.0, 0.0, 0.0, 0.0, 5.0]),
            ("c", [0.0, 0.0, 0.0, 0.0, 9.0]),
        ]);
        let n = normalize(&t).unwrap();
        let dist = Weights::from([(Criterion::Distance, 1.0)]);
        let keys: Vec<String> = weighted_rank(&n, &dist)
            .unwrap()
            .into_iter()
            .map(|(k, _)| k)
            .collect();
        assert_eq!(keys, ["a", "b", "c"]);
        assert_eq!(
            weighted_rank(&n, &Weights::new()),
            Err(McdaError::NoPositiveWeight)
        );
        assert!(weighted_rank(
            &n,
            &Weights::from([(Criterion::Ghg, -1.0), (Criterion::Cost, 1.0)])
        )
        .is_err());
    }

    #[test]
    fn front_and_lexicographic() {
        assert!(pareto_front(&McdaTable::default()).is_empty());
        let t = table(&[
            ("a", [1.0, 5.0, 0.0, 0.0, 0.0]),
            ("b", [5.0, 1.0, 0.0, 0.0, 0.0]),
            ("c", [5.0, 5.0, 0.0, 0.0, 0.0]),
            ("d", [1.0, 5.0, 0.0, 0.0, 0.0]),
        ]);
        assert_eq!(pareto_front(&t), ["a", "b", "d"]);
        assert_eq!(lexicographic_best(&t, &[Criterion::Ghg]).unwrap(), "a");
        assert_eq!(
            lexicographic_best(&t, &[Criterion::Cost, Criterion::Ghg]).unwrap(),
            "b"
        );
        assert_eq!(lexicographic_best(&t, &[]), Err(McdaError::EmptyOrder));
        assert_eq!(
            lexicographic_best(&McdaTable::default(), &[Criterion::Ghg]),
            Err(McdaError::EmptyTable)
        );
    }

    #[test]
    fn scenario_json_shape() {
        let spec: ScenarioSpec = serde_json::from_str(
            r#"{"origin":"A","destination":"B","method":"pareto","weights":{"time":1},"lex_order":["ghg"],
               "constraints":{"max_hops":3,"allowed_modes":["road"],"disruptions":[{"segment":"s","closed":true}]}}"#,
        )
        .unwrap();
        assert_eq!(spec.method, Method::Pareto);
        assert_eq!(spec.constraints.max_hops, 3);
        assert_eq!(spec.constraints.detour_factor, 2.0);
        assert!(serde_json::from_str::<ScenarioSpec>(
            r#"{"origin":"A","destination":"B","colour":1}"#
        )
        .is_err());
        assert_eq!("Time".parse::<Criterion>(), Ok(Criterion::Time));
    }
}
