//! Bundled sample data: reference ontologies, competency queries, source
//! documents and the Nashville to New Orleans demo network.

use crate::freightnet::{
    load_factors, load_network, MetricFactors, NetworkError, TransportNetwork,
};
use crate::mcda::ScenarioSpec;

pub const PIZZA_TTL: &str = include_str!("../fixtures/ontologies/pizza_auto.ttl");
pub const FAF_TTL: &str = include_str!("../fixtures/ontologies/faf.ttl");
pub const FTOT_TTL: &str = include_str!("../fixtures/ontologies/ftot.ttl");
pub const OPTIM_TTL: &str = include_str!("../fixtures/ontologies/optim.ttl");
/// Three classes in a subclass cycle and one unrelated class.
pub const CYCLIC_TTL: &str = include_str!("../fixtures/ontologies/cyclic.ttl");

pub const PIZZA_DOC: &str = include_str!("../fixtures/documents/pizza.json");
pub const FAF_DOC: &str = include_str!("../fixtures/documents/faf.json");
pub const FTOT_DOC: &str = include_str!("../fixtures/documents/ftot.json");
pub const OPTIM_DOC: &str = include_str!("../fixtures/documents/optim.json");

pub const QUERIES: &[(&str, &str)] = &[
    (
        "pizza_classes",
        include_str!("../fixtures/queries/pizza_classes.rq"),
    ),
    (
        "pizza_ingredients",
        include_str!("../fixtures/queries/pizza_ingredients.rq"),
    ),
    (
        "pizza_topping_subclasses",
        include_str!("../fixtures/queries/pizza_topping_subclasses.rq"),
    ),
    (
        "pizza_dough_dishes",
        include_str!("../fixtures/queries/pizza_dough_dishes.rq"),
    ),
    (
        "pizza_vegetable_toppings",
        include_str!("../fixtures/queries/pizza_vegetable_toppings.rq"),
    ),
    (
        "pizza_types",
        include_str!("../fixtures/queries/pizza_types.rq"),
    ),
    (
        "ftot_parameters",
        include_str!("../fixtures/queries/ftot_parameters.rq"),
    ),
    (
        "ftot_inputs",
        include_str!("../fixtures/queries/ftot_inputs.rq"),
    ),
    (
        "faf_geography",
        include_str!("../fixtures/queries/faf_geography.rq"),
    ),
    (
        "faf_regions",
        include_str!("../fixtures/queries/faf_regions.rq"),
    ),
];

pub fn query(name: &str) -> Option<&'static str> {
    QUERIES.iter().find(|(n, _)| *n == name).map(|(_, q)| *q)
}

pub const DEMO_HUBS: &str = include_str!("../fixtures/networks/demo/hubs.csv");
pub const DEMO_SEGMENTS: &str = include_str!("../fixtures/networks/demo/segments.csv");
pub const DEMO_FACTORS: &str = include_str!("../fixtures/networks/demo/factors.csv");
pub const DEMO_TRANSFER: &str = include_str!("../fixtures/networks/demo/transfer.json");

pub const SCENARIOS: &[(&str, &str)] = &[
    (
        "nsh_nol_time",
        include_str!("../fixtures/scenarios/nsh_nol_time.json"),
    ),
    (
        "nsh_nol_ghg",
        include_str!("../fixtures/scenarios/nsh_nol_ghg.json"),
    ),
    (
        "nsh_nol_pareto",
        include_str!("../fixtures/scenarios/nsh_nol_pareto.json"),
    ),
    (
        "nsh_nol_lex",
        include_str!("../fixtures/scenarios/nsh_nol_lex.json"),
    ),
    (
        "nsh_nol_river_closed",
        include_str!("../fixtures/scenarios/nsh_nol_river_closed.json"),
    ),
    (
        "nsh_nol_congested",
        include_str!("../fixtures/scenarios/nsh_nol_congested.json"),
    ),
];

pub fn demo_network() -> Result<TransportNetwork, NetworkError> {
    load_network(DEMO_HUBS, DEMO_SEGMENTS)
}

pub fn demo_factors() -> Result<MetricFactors, NetworkError> {
    load_factors(DEMO_FACTORS, DEMO_TRANSFER)
}

pub fn scenario(name: &str) -> Option<ScenarioSpec> {
    SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .and_then(|(_, text)| serde_json::from_str(text).ok())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_data_loads() {
        let net = demo_network().unwrap();
        assert_eq!(net.hub_count(), 24);
        demo_factors().unwrap();
        for (name, _) in SCENARIOS {
            assert!(scenario(name).is_some(), "{name}");
        }
        for text in [PIZZA_DOC, FAF_DOC, FTOT_DOC, OPTIM_DOC] {
            crate::docprep::SourceDocument::from_json(text).unwrap();
        }
        assert!(query("faf_regions").is_some());
    }
}
