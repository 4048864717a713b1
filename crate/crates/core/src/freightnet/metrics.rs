use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    EnumerationConstraints, LoadIssue, Mode, NetworkError, RouteCombination, TransportNetwork,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorRow {
    pub mode: Mode,
    pub fuel: String,
    pub emission_kg_per_tkm: f64,
    pub cost_per_tkm: f64,
    pub speed_kmh: f64,
    pub fuel_l_per_tkm: f64,
}

/// Flat penalty charged once per mode change.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransferPenalty {
    pub hours: f64,
    pub cost: f64,
    pub ghg_kg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricFactors {
    /// Rows in input order.
    listed: Vec<FactorRow>,
    rows: BTreeMap<(Mode, String), FactorRow>,
    /// First listed fuel per mode.
    defaults: BTreeMap<Mode, String>,
    pub transfer: TransferPenalty,
}

impl MetricFactors {
    pub fn new(rows: Vec<FactorRow>, transfer: TransferPenalty) -> Result<Self, NetworkError> {
        let bad = |m: String| Err(NetworkError::Constraints(m));
        let valid = |v: f64| v >= 0.0 && v.is_finite();
        if ![transfer.hours, transfer.cost, transfer.ghg_kg]
            .into_iter()
            .all(valid)
        {
            return bad("transfer penalties must be non-negative".into());
        }
        let mut map = BTreeMap::new();
        let mut defaults = BTreeMap::new();
        for r in rows.iter().cloned() {
            let label = format!("{}/{}", r.mode, r.fuel);
            if ![r.emission_kg_per_tkm, r.cost_per_tkm, r.fuel_l_per_tkm]
                .into_iter()
                .all(valid)
            {
                return bad(format!("factors for {label} must be non-negative"));
            }
            if !(r.speed_kmh > 0.0 && r.speed_kmh.is_finite()) {
                return bad(format!("speed for {label} must be positive"));
            }
            defaults.entry(r.mode).or_insert_with(|| r.fuel.clone());
            if map.insert((r.mode, r.fuel.clone()), r).is_some() {
                return bad(format!("duplicate factor row {label}"));
            }
        }
        Ok(MetricFactors {
            listed: rows,
            rows: map,
            defaults,
            transfer,
        })
    }

    pub fn rows(&self) -> impl Iterator<Item = &FactorRow> {
        self.listed.iter()
    }

    /// The fuel used for `mode`: the scenario's choice, else the default.
    pub fn fuel_for<'a>(
        &'a self,
        mode: Mode,
        constraints: &'a EnumerationConstraints,
    ) -> Option<&'a str> {
        constraints
            .fuels
            .get(&mode)
            .or_else(|| self.defaults.get(&mode))
            .map(String::as_str)
    }

    pub fn factor(
        &self,
        mode: Mode,
        constraints: &EnumerationConstraints,
    ) -> Result<&FactorRow, NetworkError> {
        let fuel = self.fuel_for(mode, constraints).unwrap_or("");
        self.rows
            .get(&(mode, fuel.to_string()))
            .ok_or_else(|| NetworkError::MissingFactor {
                mode,
                fuel: fuel.to_string(),
            })
    }
}

/// Parses `factors.csv` text and the transfer penalty JSON.
pub fn load_factors(factors_csv: &str, transfer_json: &str) -> Result<MetricFactors, NetworkError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(factors_csv.as_bytes());
    let mut rows = Vec::new();
    let mut issues = Vec::new();
    for record in reader.deserialize::<FactorRow>() {
        match record {
            Ok(r) => rows.push(r),
            Err(e) => issues.push(LoadIssue::Row {
                file: "factors.csv".into(),
                line: e.position().map(|p| p.line()).unwrap_or(0),
                message: e.to_string(),
            }),
        }
    }
    if !issues.is_empty() {
        return Err(NetworkError::Invalid(issues));
    }
    let transfer = if transfer_json.trim().is_empty() {
        TransferPenalty::default()
    } else {
        serde_json::from_str(transfer_json)
            .map_err(|e| NetworkError::Constraints(format!("transfer penalties: {e}")))?
    };
    MetricFactors::new(rows, transfer)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RouteMetrics {
    /// kg CO2e.
    pub ghg: f64,
    pub cost: f64,
    /// Hours.
    pub time: f64,
    /// Litres.
    pub fuel: f64,
    /// Kilometres.
    pub distance: f64,
}

impl RouteMetrics {
    pub fn add(&mut self, other: &RouteMetrics) {
        self.ghg += other.ghg;
        self.cost += other.cost;
        self.time += other.time;
        self.fuel += other.fuel;
        self.distance += other.distance;
    }
}

/// Sums per-edge contributions and one flat penalty per mode change.
/// Travel time is distance over speed, scaled by the segment's congestion
/// and any scenario multiplier.
pub fn aggregate_metrics(
    network: &TransportNetwork,
    combination: &RouteCombination,
    factors: &MetricFactors,
    constraints: &EnumerationConstraints,
) -> Result<RouteMetrics, NetworkError> {
    let mut total = RouteMetrics::default();
    let payload = constraints.payload_tonnes;
    for id in &combination.edges {
        let seg = network
            .segment(id)
            .ok_or_else(|| NetworkError::UnknownSegment(id.clone()))?;
        let f = factors.factor(seg.mode, constraints)?;
        let tkm = seg.distance_km * payload;
        total.add(&RouteMetrics {
            ghg: tkm * f.emission_kg_per_tkm,
            cost: tkm * f.cost_per_tkm,
            time: seg.distance_km / f.speed_kmh * seg.congestion * constraints.multiplier(id),
            fuel: tkm * f.fuel_l_per_tkm,
            distance: seg.distance_km,
        });
    }
    let n = combination.transfers as f64;
    total.ghg += n * factors.transfer.ghg_kg;
    total.cost += n * factors.transfer.cost;
    total.time += n * factors.transfer.hours;
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookupRow {
    pub key: String,
    pub combination: RouteCombination,
    pub metrics: RouteMetrics,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LookupTable {
    pub rows: Vec<LookupRow>,
}

impl LookupTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// One row per combination, ordered by canonical key.
pub fn build_lookup_table(
    network: &TransportNetwork,
    combinations: &[RouteCombination],
    factors: &MetricFactors,
    constraints: &EnumerationConstraints,
) -> Result<LookupTable, NetworkError> {
    let mut rows = combinations
        .iter()
        .map(|c| {
            let metrics = aggregate_metrics(network, c, factors, constraints).map_err(|e| {
                NetworkError::Row {
                    key: c.key.clone(),
                    source: Box::new(e),
                }
            })?;
            Ok(LookupRow {
                key: c.key.clone(),
                combination: c.clone(),
                metrics,
            })
        })
        .collect::<Result<Vec<_>, NetworkError>>()?;
    rows.sort_by(|a, b| a.key.cmp(&b.key));
    Ok(LookupTable { rows })
}
