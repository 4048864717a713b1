use std::collections::BTreeMap;

use serde::Serialize;

use super::ddl::ident;
use super::{ColumnType, RelationalSchema, Table};
use crate::kstore::{Graph, IndividualEntry, OntologySnapshot, Term};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SeedOutcome {
    pub sql: String,
    pub rows: usize,
    /// Individuals typed by classes that have no table.
    pub skipped: Vec<String>,
}

fn quote(text: &str) -> String {
    format!("'{}'", text.replace('\'', "''"))
}

fn sql_value(term: &Term, ty: ColumnType) -> String {
    let text = term.text();
    match ty {
        ColumnType::Integer | ColumnType::Decimal if text.parse::<f64>().is_ok() => {
            text.to_string()
        }
        ColumnType::Boolean => match text {
            "true" | "1" => "TRUE".into(),
            "false" | "0" => "FALSE".into(),
            _ => "NULL".into(),
        },
        ColumnType::Integer | ColumnType::Decimal => "NULL".into(),
        ColumnType::Text | ColumnType::Timestamp => quote(text),
    }
}

fn insert(
    t: &Table,
    id: usize,
    label: &str,
    individual: &IndividualEntry,
    graph: Option<&Graph>,
) -> String {
    let mut cols = vec![ident("id")];
    let mut vals = vec![id.to_string()];
    if t.column("label").is_some() {
        cols.push(ident("label"));
        vals.push(quote(label));
    }
    if let Some(g) = graph {
        for c in &t.columns {
            let Some(prop) = &c.origin else { continue };
            if let Some(v) = g.objects(&individual.iri, prop.as_str()).next() {
                cols.push(ident(&c.name));
                vals.push(sql_value(v, c.ty));
            }
        }
    }
    format!(
        "INSERT INTO {} ({}) VALUES ({});\n",
        ident(&t.name),
        cols.join(", "),
        vals.join(", ")
    )
}

fn seed(
    snapshot: &OntologySnapshot,
    schema: &RelationalSchema,
    graph: Option<&Graph>,
) -> SeedOutcome {
    let mut individuals: Vec<&IndividualEntry> = snapshot.individuals.iter().collect();
    individuals.sort_by(|a, b| a.iri.cmp(&b.iri));
    let mut next_id: BTreeMap<&str, usize> = BTreeMap::new();
    let mut out = SeedOutcome::default();
    for ind in individuals {
        let label = snapshot.label_or_local(&ind.iri);
        for class in &ind.types {
            match schema.table_for(class) {
                Some(t) => {
                    let id = next_id.entry(t.name.as_str()).or_insert(0);
                    *id += 1;
                    out.sql.push_str(&insert(t, *id, label, ind, graph));
                    out.rows += 1;
                }
                None => out.skipped.push(format!(
                    "{} is typed by {class}, which has no table",
                    ind.iri
                )),
            }
        }
    }
    out
}

/// One `INSERT` per (individual, asserted class) with `id` and `label`.
/// Ids count up per table in individual IRI order.
pub fn seed_inserts(snapshot: &OntologySnapshot, schema: &RelationalSchema) -> SeedOutcome {
    seed(snapshot, schema, None)
}

/// Like [`seed_inserts`], also filling data-property columns from `graph`.
pub fn seed_inserts_with_values(
    graph: &Graph,
    snapshot: &OntologySnapshot,
    schema: &RelationalSchema,
) -> SeedOutcome {
    seed(snapshot, schema, Some(graph))
}

#[cfg(test)]
mod tests {
    use super::super::{derive_schema, tests::snap};
    use super::*;
    use crate::kstore::{extract_ontology_view, parse_turtle};

    #[test]
    fn no_individuals_no_rows() {
        let s = snap("ex:A a owl:Class .");
        let schema = derive_schema(&s).unwrap().schema;
        assert_eq!(seed_inserts(&s, &schema), SeedOutcome::default());
    }

    #[test]
    fn two_classes_two_rows() {
        let s = snap(
            "ex:A a owl:Class . ex:B a owl:Class .\n\
             ex:x a ex:A, ex:B ; rdfs:label \"It's x\" .\n\
             ex:w a ex:A .",
        );
        let schema = derive_schema(&s).unwrap().schema;
        let out = seed_inserts(&s, &schema);
        assert_eq!(out.rows, 3);
        assert_eq!(
            out.sql,
            "INSERT INTO a (id, label) VALUES (1, 'w');\nINSERT INTO a (id, label) VALUES (2, 'It''s x');\n\
             INSERT INTO b (id, label) VALUES (1, 'It''s x');\n"
        );
    }

    #[test]
    fn values_fill_columns() {
        let g = parse_turtle(
            "@prefix owl: <http://www.w3.org/2002/07/owl#> .\n@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n\
             @prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n@prefix ex: <http://e/#> .\n\
             ex:R a owl:Class . ex:zone a owl:DatatypeProperty ; rdfs:domain ex:R ; rdfs:range xsd:integer .\n\
             ex:r1 a ex:R ; ex:zone 101 .",
        )
        .unwrap();
        let s = extract_ontology_view(&g);
        let schema = derive_schema(&s).unwrap().schema;
        let out = seed_inserts_with_values(&g, &s, &schema);
        assert_eq!(
            out.sql,
            "INSERT INTO r (id, label, \"zone\") VALUES (1, 'r1', 101);\n"
        );
    }
}
