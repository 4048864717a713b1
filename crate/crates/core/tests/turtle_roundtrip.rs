mod support;

use ontoroute_core::kstore::{merge_graphs, parse_turtle, serialize_turtle};
use ontoroute_core::samples;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn parse_after_serialize_keeps_triples(seed in any::<u64>()) {
        let g = support::random_graph(&mut support::rng(seed), 500);
        let text = g.to_turtle();
        let back = parse_turtle(&text).unwrap();
        let (got, want) = (back.triple_set(), g.triple_set());
        prop_assert_eq!(got, want);
        let again = back.to_turtle();
        prop_assert_eq!(again, text);
    }

    #[test]
    fn serialization_without_prefixes_also_round_trips(seed in any::<u64>()) {
        let g = support::random_graph(&mut support::rng(seed), 60);
        let text = serialize_turtle(&g, &Default::default());
        let back = parse_turtle(&text).unwrap();
        let (got, want) = (back.triple_set(), g.triple_set());
        prop_assert_eq!(got, want);
    }

    #[test]
    fn merge_is_union(a in any::<u64>(), b in any::<u64>()) {
        let ga = support::random_graph(&mut support::rng(a), 50);
        let gb = support::random_graph(&mut support::rng(b), 50);
        let m = merge_graphs([&ga, &gb]).unwrap();
        let union: std::collections::BTreeSet<_> = ga.triple_set().union(gb.triple_set()).cloned().collect();
        let merged = m.triple_set();
        prop_assert_eq!(merged, &union);
    }
}

#[test]
fn bundled_ontologies_round_trip() {
    for text in [
        samples::PIZZA_TTL,
        samples::FAF_TTL,
        samples::FTOT_TTL,
        samples::OPTIM_TTL,
        samples::CYCLIC_TTL,
    ] {
        let g = parse_turtle(text).unwrap();
        let back = parse_turtle(&g.to_turtle()).unwrap();
        assert_eq!(back.triple_set(), g.triple_set());
    }
}
