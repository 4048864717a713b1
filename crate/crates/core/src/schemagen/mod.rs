//! Relational schema, DDL, seed rows and property-graph records derived
//! from ontology snapshots and transport networks.

mod ddl;
mod graph;
mod seed;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::kstore::{check_acyclic_subclasses, AcyclicReport, Datatype, Iri, OntologySnapshot};
use crate::naming::snake_case;

pub use ddl::{check_ddl, emit_ddl, DdlError, TableShape};
pub use graph::{export_property_graph, EdgeRecord, NodeRecord, PropertyGraphExport};
pub use seed::{seed_inserts, seed_inserts_with_values, SeedOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum ColumnType {
    #[serde(rename = "TEXT")]
    Text,
    #[serde(rename = "INTEGER")]
    Integer,
    #[serde(rename = "DECIMAL")]
    Decimal,
    #[serde(rename = "BOOLEAN")]
    Boolean,
    #[serde(rename = "TIMESTAMP")]
    Timestamp,
}

impl ColumnType {
    pub fn sql(self) -> &'static str {
        match self {
            ColumnType::Text => "TEXT",
            ColumnType::Integer => "INTEGER",
            ColumnType::Decimal => "DECIMAL",
            ColumnType::Boolean => "BOOLEAN",
            ColumnType::Timestamp => "TIMESTAMP",
        }
    }

    pub fn from_sql(text: &str) -> Option<Self> {
        Some(match text.to_ascii_uppercase().as_str() {
            "TEXT" => ColumnType::Text,
            "INTEGER" => ColumnType::Integer,
            "DECIMAL" => ColumnType::Decimal,
            "BOOLEAN" => ColumnType::Boolean,
            "TIMESTAMP" => ColumnType::Timestamp,
            _ => return None,
        })
    }

    pub fn for_datatype(dt: Option<Datatype>) -> Self {
        match dt {
            None | Some(Datatype::String) => ColumnType::Text,
            Some(Datatype::Integer) => ColumnType::Integer,
            Some(Datatype::Decimal) => ColumnType::Decimal,
            Some(Datatype::Boolean) => ColumnType::Boolean,
            Some(Datatype::Datetime) => ColumnType::Timestamp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Column {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: ColumnType,
    pub nullable: bool,
    /// Data property whose values fill this column.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin: Option<Iri>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ForeignKey {
    pub column: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
    pub primary_key: String,
    pub foreign_keys: Vec<ForeignKey>,
    /// Source class, or source object property for join tables.
    pub origin: Iri,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RelationalSchema {
    pub tables: Vec<Table>,
}

impl RelationalSchema {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn table_for(&self, origin: &Iri) -> Option<&Table> {
        self.tables.iter().find(|t| &t.origin == origin)
    }

    /// Table shapes sorted by name, for structural comparison.
    pub fn shape(&self) -> Vec<TableShape> {
        let mut out: Vec<TableShape> = self.tables.iter().map(TableShape::of).collect();
        out.sort_by(|a, b| a.name.cmp(&b.name));
        out
    }

    /// Unique table and column names, existing primary keys and resolvable
    /// foreign keys.
    pub fn validate(&self) -> Result<(), String> {
        let mut names = BTreeSet::new();
        for t in &self.tables {
            if !names.insert(t.name.as_str()) {
                return Err(format!("duplicate table {}", t.name));
            }
            let mut cols = BTreeSet::new();
            for c in &t.columns {
                if !cols.insert(c.name.as_str()) {
                    return Err(format!("duplicate column {}.{}", t.name, c.name));
                }
            }
            match t.column(&t.primary_key) {
                Some(c) if !c.nullable => {}
                _ => return Err(format!("bad primary key on {}", t.name)),
            }
        }
        for t in &self.tables {
            for fk in &t.foreign_keys {
                if t.column(&fk.column).is_none() {
                    return Err(format!("{}.{} does not exist", t.name, fk.column));
                }
                if !names.contains(fk.target.as_str()) {
                    return Err(format!(
                        "{}.{} references missing table {}",
                        t.name, fk.column, fk.target
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedProperty {
    pub property: Iri,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SchemaOutcome {
    pub schema: RelationalSchema,
    pub skipped: Vec<SkippedProperty>,
}

#[derive(Debug, Error, PartialEq)]
pub enum SchemaError {
    #[error("subclass cycle: {}", .0.iter().map(|i| i.as_str()).collect::<Vec<_>>().join(" -> "))]
    Cycle(Vec<Iri>),
}

/// Picks `base`, or `base_2`, `base_3`, ... when taken.
fn unique(base: String, taken: &mut BTreeSet<String>) -> String {
    let mut name = base.clone();
    let mut n = 2;
    while taken.contains(&name) {
        name = format!("{base}_{n}");
        n += 1;
    }
    taken.insert(name.clone());
    name
}

fn id_column(name: String, nullable: bool) -> Column {
    Column {
        name,
        ty: ColumnType::Integer,
        nullable,
        origin: None,
    }
}

struct TableBuilder {
    table: Table,
    taken: BTreeSet<String>,
}

impl TableBuilder {
    fn new(name: String, origin: Iri) -> Self {
        TableBuilder {
            table: Table {
                name,
                columns: vec![id_column("id".into(), false)],
                primary_key: "id".into(),
                foreign_keys: Vec::new(),
                origin,
            },
            taken: BTreeSet::from(["id".to_string()]),
        }
    }

    fn column(
        &mut self,
        base: String,
        ty: ColumnType,
        nullable: bool,
        origin: Option<Iri>,
    ) -> String {
        let name = unique(base, &mut self.taken);
        self.table.columns.push(Column {
            name: name.clone(),
            ty,
            nullable,
            origin,
        });
        name
    }

    fn reference(&mut self, base: String, target: &str, nullable: bool) {
        let column = self.column(base, ColumnType::Integer, nullable, None);
        self.table.foreign_keys.push(ForeignKey {
            column,
            target: target.to_string(),
        });
    }
}

/// One table per class with a synthetic `id` key. Subclasses reference each
/// parent through `parent_id`; data properties become nullable columns on
/// their domain's table; functional object properties become `<prop>_id`
/// columns and all other object properties become join tables. Classes
/// with individuals also get a `label` column.
pub fn derive_schema(snapshot: &OntologySnapshot) -> Result<SchemaOutcome, SchemaError> {
    if let AcyclicReport::Cycle(cycle) = check_acyclic_subclasses(snapshot) {
        return Err(SchemaError::Cycle(cycle));
    }
    let mut taken_tables = BTreeSet::new();
    let mut builders: BTreeMap<&Iri, TableBuilder> = BTreeMap::new();
    for class in &snapshot.classes {
        let name = unique(snake_case(class.local_name()), &mut taken_tables);
        builders.insert(class, TableBuilder::new(name, class.clone()));
    }
    let table_of: BTreeMap<&Iri, String> = builders
        .iter()
        .map(|(k, b)| (*k, b.table.name.clone()))
        .collect();
    let mut skipped = Vec::new();

    for class in &snapshot.classes {
        let b = builders.get_mut(class).expect("class table");
        if snapshot.individuals_of(class).next().is_some() {
            b.column("label".into(), ColumnType::Text, true, None);
        }
        for parent in snapshot.parents_of(class) {
            if let Some(target) = table_of.get(parent) {
                b.reference("parent_id".into(), target, true);
            }
        }
    }

    let mut data: Vec<_> = snapshot.data_properties.iter().collect();
    data.sort();
    for p in data {
        match p.domain.as_ref().and_then(|d| builders.get_mut(d)) {
            Some(b) => {
                b.column(
                    snake_case(p.iri.local_name()),
                    ColumnType::for_datatype(p.range),
                    true,
                    Some(p.iri.clone()),
                );
            }
            None => skipped.push(SkippedProperty {
                property: p.iri.clone(),
                reason: match &p.domain {
                    None => "no domain".into(),
                    Some(d) => format!("domain {d} is not a class"),
                },
            }),
        }
    }

    let mut joins = Vec::new();
    let mut objects: Vec<_> = snapshot.object_properties.iter().collect();
    objects.sort();
    for p in objects {
        let ends = (
            p.domain.as_ref().and_then(|d| table_of.get(d)),
            p.range.as_ref().and_then(|r| table_of.get(r)),
        );
        let (Some(domain), Some(range)) = ends else {
            let reason = match (&p.domain, &p.range) {
                (None, _) => "no domain".to_string(),
                (_, None) => "no range".to_string(),
                _ => "domain or range is not a class".to_string(),
            };
            skipped.push(SkippedProperty {
                property: p.iri.clone(),
                reason,
            });
            continue;
        };
        let prop = snake_case(p.iri.local_name());
        if p.functional {
            let b = builders
                .get_mut(p.domain.as_ref().unwrap())
                .expect("domain table");
            b.reference(format!("{prop}_id"), range, true);
        } else {
            let mut j = TableBuilder::new(unique(prop, &mut taken_tables), p.iri.clone());
            j.reference(format!("{domain}_id"), domain, false);
            j.reference(format!("{range}_id"), range, false);
            joins.push(j.table);
        }
    }

    let mut tables: Vec<Table> = builders.into_values().map(|b| b.table).collect();
    tables.extend(joins);
    Ok(SchemaOutcome {
        schema: RelationalSchema { tables },
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kstore::{extract_ontology_view, parse_turtle};

    pub(crate) fn snap(ttl: &str) -> OntologySnapshot {
        let doc = format!(
            "@prefix owl: <http://www.w3.org/2002/07/owl#> .\n@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n\
             @prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n@prefix ex: <http://e/#> .\n{ttl}"
        );
        extract_ontology_view(&parse_turtle(&doc).unwrap())
    }

    #[test]
    fn empty_snapshot_empty_schema() {
        let out = derive_schema(&OntologySnapshot::default()).unwrap();
        assert!(out.schema.tables.is_empty() && out.skipped.is_empty());
    }

    #[test]
    fn data_properties_become_columns() {
        let s = snap(
            "ex:Ship a owl:Class .\n\
             ex:tons a owl:DatatypeProperty ; rdfs:domain ex:Ship ; rdfs:range xsd:decimal .\n\
             ex:year a owl:DatatypeProperty ; rdfs:domain ex:Ship ; rdfs:range xsd:integer .\n\
             ex:loose a owl:DatatypeProperty .",
        );
        let out = derive_schema(&s).unwrap();
        let t = &out.schema.tables[0];
        let cols: Vec<(&str, ColumnType)> =
            t.columns.iter().map(|c| (c.name.as_str(), c.ty)).collect();
        assert_eq!(
            cols,
            [
                ("id", ColumnType::Integer),
                ("tons", ColumnType::Decimal),
                ("year", ColumnType::Integer)
            ]
        );
        assert_eq!(out.skipped.len(), 1);
        out.schema.validate().unwrap();
    }

    #[test]
    fn object_properties_and_inheritance() {
        let s = snap(
            "ex:Pizza a owl:Class . ex:Topping a owl:Class . ex:Cheese a owl:Class ; rdfs:subClassOf ex:Topping .\n\
             ex:hasTopping a owl:ObjectProperty ; rdfs:domain ex:Pizza ; rdfs:range ex:Topping .\n\
             ex:hasBase a owl:ObjectProperty, owl:FunctionalProperty ; rdfs:domain ex:Pizza ; rdfs:range ex:Cheese .\n\
             ex:nested a owl:ObjectProperty ; rdfs:domain ex:Topping ; rdfs:range ex:Topping .",
        );
        let schema = derive_schema(&s).unwrap().schema;
        schema.validate().unwrap();
        let names: Vec<&str> = schema.tables.iter().map(|t| t.name.as_str()).collect();
        assert_eq!(
            names,
            ["cheese", "pizza", "topping", "has_topping", "nested"]
        );
        let join = schema.table("has_topping").unwrap();
        let cols: Vec<&str> = join.columns.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(cols, ["id", "pizza_id", "topping_id"]);
        let nested = schema.table("nested").unwrap();
        assert_eq!(nested.foreign_keys[1].column, "topping_id_2");
        assert_eq!(
            schema.table("cheese").unwrap().foreign_keys[0].column,
            "parent_id"
        );
        assert_eq!(
            schema.table("pizza").unwrap().foreign_keys[0].column,
            "has_base_id"
        );
    }

    #[test]
    fn collisions_are_suffixed() {
        let s = snap("ex:FooBar a owl:Class . ex:Foo_bar a owl:Class . ex:id a owl:DatatypeProperty ; rdfs:domain ex:FooBar .");
        let schema = derive_schema(&s).unwrap().schema;
        let names: Vec<&str> = schema.tables.iter().map(|t| t.name.as_str()).collect();
        assert_eq!(names, ["foo_bar", "foo_bar_2"]);
        assert!(schema.tables.iter().any(|t| t.column("id_2").is_some()));
    }

    #[test]
    fn cycles_are_rejected() {
        let s = snap(
            "ex:A a owl:Class ; rdfs:subClassOf ex:B . ex:B a owl:Class ; rdfs:subClassOf ex:A .",
        );
        assert!(matches!(derive_schema(&s), Err(SchemaError::Cycle(_))));
    }
}
