use std::collections::BTreeSet;

use ontoroute_core::kstore::{extract_ontology_view, parse_turtle};
use ontoroute_core::samples;
use ontoroute_core::schemagen::{
    check_ddl, derive_schema, emit_ddl, export_property_graph, seed_inserts, SchemaError,
};

#[test]
fn faf_tables_follow_classes_and_join_properties() {
    let snap = extract_ontology_view(&parse_turtle(samples::FAF_TTL).unwrap());
    let out = derive_schema(&snap).unwrap();
    let joins = snap
        .object_properties
        .iter()
        .filter(|p| !p.functional && p.domain.is_some() && p.range.is_some())
        .count();
    assert_eq!(out.schema.tables.len(), snap.classes.len() + joins);
    assert_eq!(out.schema.tables.len(), 11);
    out.schema.validate().unwrap();
    let names: BTreeSet<&str> = out.schema.tables.iter().map(|t| t.name.as_str()).collect();
    assert_eq!(names.len(), out.schema.tables.len());
}

#[test]
fn faf_ddl_parses_back_to_same_structure() {
    let snap = extract_ontology_view(&parse_turtle(samples::FAF_TTL).unwrap());
    let schema = derive_schema(&snap).unwrap().schema;
    let ddl = emit_ddl(&schema);
    assert_eq!(check_ddl(&ddl).unwrap(), schema.shape());
    assert_eq!(emit_ddl(&schema), ddl);
}

#[test]
fn faf_regions_seed_rows() {
    let snap = extract_ontology_view(&parse_turtle(samples::FAF_TTL).unwrap());
    let schema = derive_schema(&snap).unwrap().schema;
    let seeds = seed_inserts(&snap, &schema);
    let regions = schema
        .tables
        .iter()
        .find(|t| t.name.eq_ignore_ascii_case("regions"))
        .unwrap();
    let bare = format!("INSERT INTO {} ", regions.name);
    let quoted = format!("INSERT INTO \"{}\" ", regions.name);
    let n = seeds
        .sql
        .lines()
        .filter(|l| l.starts_with(&bare) || l.starts_with(&quoted))
        .count();
    assert_eq!(n, 24);
}

#[test]
fn cyclic_fixture_is_rejected() {
    let snap = extract_ontology_view(&parse_turtle(samples::CYCLIC_TTL).unwrap());
    assert!(matches!(derive_schema(&snap), Err(SchemaError::Cycle(_))));
}

#[test]
fn empty_ontology_gives_empty_ddl() {
    let snap = extract_ontology_view(&parse_turtle("").unwrap());
    let schema = derive_schema(&snap).unwrap().schema;
    assert!(schema.tables.is_empty());
    assert!(check_ddl(&emit_ddl(&schema)).unwrap().is_empty());
}

#[test]
fn property_graph_keeps_topology_only() {
    let net = samples::demo_network().unwrap();
    let g = export_property_graph(&net);
    assert_eq!(g.nodes.len(), net.hubs().count());
    assert_eq!(g.edges.len(), net.segments().count());
    let node_keys: BTreeSet<&str> = ["id", "name", "road", "rail", "water"].into();
    let edge_keys: BTreeSet<&str> = ["id", "mode", "distance", "slope"].into();
    for n in &g.nodes {
        assert!(
            n.attributes.keys().all(|k| node_keys.contains(k.as_str())),
            "{n:?}"
        );
    }
    for e in &g.edges {
        assert!(
            e.attributes.keys().all(|k| edge_keys.contains(k.as_str())),
            "{e:?}"
        );
        assert_eq!(
            e.label,
            e.attributes["mode"].as_str().unwrap().to_uppercase()
        );
    }
    assert_eq!(g.nodes_csv().lines().count(), g.nodes.len() + 1);
    assert_eq!(g.edges_csv().lines().count(), g.edges.len() + 1);
}
