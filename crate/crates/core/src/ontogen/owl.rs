use std::collections::{BTreeMap, BTreeSet};

use super::{
    AdHocRelation, GlossaryTerm, PipelineError, RelationKind, RelationRange, TaxonomyEdge,
};
use crate::kstore::{
    check_acyclic_subclasses, extract_ontology_view, vocab, AcyclicReport, Graph, Iri, KstoreError,
    Literal, Triple,
};
use crate::naming::{lower_camel, normalized_key, pascal_case};

/// Everything needed to write one ontology module.
#[derive(Debug, Clone, Copy)]
pub struct OwlInput<'a> {
    /// Classes and individuals.
    pub glossary: &'a [GlossaryTerm],
    pub taxonomy: &'a [TaxonomyEdge],
    pub relations: &'a [AdHocRelation],
    /// Label of the root class edges and untyped individuals may refer to.
    pub root_label: Option<&'a str>,
    pub base_iri: &'a str,
}

/// Namespace for terms minted under `base`.
pub fn namespace(base: &str) -> String {
    if base.ends_with('#') || base.ends_with('/') {
        base.to_string()
    } else {
        format!("{base}#")
    }
}

/// PascalCase local name for classes and individuals, lowerCamelCase for
/// properties.
pub fn term_iri(base: &str, label: &str, property: bool) -> Result<Iri, KstoreError> {
    let local = if property {
        lower_camel(label)
    } else {
        pascal_case(label)
    };
    Iri::new(format!("{}{local}", namespace(base)))
}

fn iri(s: &str) -> Iri {
    Iri::new(s).expect("vocabulary IRI")
}

pub fn emit_owl(input: &OwlInput<'_>) -> Result<Graph, PipelineError> {
    let emit = |source| PipelineError::Emit { section: 0, source };
    let mut prefixes: BTreeMap<String, String> = vocab::well_known()
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    prefixes.insert("ontology".into(), namespace(input.base_iri));
    let mut g = Graph::with_prefixes(prefixes);
    let header = Iri::new(input.base_iri.trim_end_matches(['#', '/'])).map_err(emit)?;
    g.insert(Triple::new(
        header,
        iri(vocab::RDF_TYPE),
        iri(vocab::OWL_ONTOLOGY),
    ));

    let mut terms: Vec<&GlossaryTerm> = input.glossary.iter().collect();
    terms.sort_by(|a, b| a.key.cmp(&b.key));
    let mut iris: BTreeMap<String, Iri> = BTreeMap::new();
    let mut taken: BTreeSet<Iri> = BTreeSet::new();
    let mut mint = |key: &str, label: &str, property: bool| -> Result<Iri, KstoreError> {
        let base = term_iri(input.base_iri, label, property)?;
        let mut candidate = base.clone();
        let mut n = 2;
        while taken.contains(&candidate) {
            candidate = Iri::new(format!("{}{n}", base.as_str()))?;
            n += 1;
        }
        taken.insert(candidate.clone());
        iris.insert(key.to_string(), candidate.clone());
        Ok(candidate)
    };
    let root = input.root_label.map(|l| (normalized_key(l), l));
    let mut class_keys: BTreeSet<String> = BTreeSet::new();
    for t in terms.iter().filter(|t| t.is_class()) {
        mint(&t.key, &t.label, false).map_err(emit)?;
        class_keys.insert(t.key.clone());
    }
    let mut root_iri = None;
    if let Some((key, label)) = &root {
        if !class_keys.contains(key) {
            root_iri = Some(mint(key, label, false).map_err(emit)?);
        }
    }
    for t in terms.iter().filter(|t| !t.is_class()) {
        mint(&t.key, &t.label, false).map_err(emit)?;
    }

    let label = |g: &mut Graph, s: &Iri, text: &str| {
        g.insert(Triple::new(
            s.clone(),
            iri(vocab::RDFS_LABEL),
            Literal::string(text),
        ));
    };
    let mut uses_root = false;
    for t in &terms {
        let s = iris[&t.key].clone();
        if t.is_class() {
            g.insert(Triple::new(
                s.clone(),
                iri(vocab::RDF_TYPE),
                iri(vocab::OWL_CLASS),
            ));
        } else {
            g.insert(Triple::new(
                s.clone(),
                iri(vocab::RDF_TYPE),
                iri(vocab::OWL_NAMED_INDIVIDUAL),
            ));
            let types: Vec<&Iri> = t
                .instance_of
                .iter()
                .filter(|c| class_keys.contains(*c))
                .map(|c| &iris[c])
                .collect();
            if types.is_empty() {
                if let Some(r) = &root_iri {
                    uses_root = true;
                    g.insert(Triple::new(s.clone(), iri(vocab::RDF_TYPE), r.clone()));
                }
            }
            for c in types {
                g.insert(Triple::new(s.clone(), iri(vocab::RDF_TYPE), c.clone()));
            }
        }
        label(&mut g, &s, &t.label);
    }
    for e in input.taxonomy {
        let (Some(c), Some(p)) = (iris.get(&e.child), iris.get(&e.parent)) else {
            continue;
        };
        if root_iri.as_ref() == Some(p) {
            uses_root = true;
        }
        g.insert(Triple::new(
            c.clone(),
            iri(vocab::RDFS_SUBCLASS_OF),
            p.clone(),
        ));
    }
    if let (true, Some(r), Some((_, l))) = (uses_root, &root_iri, &root) {
        g.insert(Triple::new(
            r.clone(),
            iri(vocab::RDF_TYPE),
            iri(vocab::OWL_CLASS),
        ));
        label(&mut g, r, l);
    }

    for r in input.relations {
        let Some(domain) = iris
            .get(&r.domain)
            .filter(|_| class_keys.contains(&r.domain))
        else {
            continue;
        };
        let p = term_iri(input.base_iri, &r.name, true).map_err(emit)?;
        match (&r.range, r.kind) {
            (RelationRange::Datatype(dt), RelationKind::Attribute) => {
                g.insert(Triple::new(
                    p.clone(),
                    iri(vocab::RDF_TYPE),
                    iri(vocab::OWL_DATATYPE_PROPERTY),
                ));
                g.insert(Triple::new(
                    p.clone(),
                    iri(vocab::RDFS_RANGE),
                    iri(dt.iri()),
                ));
            }
            (RelationRange::Term(t), RelationKind::Associative | RelationKind::Adhoc) => {
                let Some(range) = iris.get(t).filter(|_| class_keys.contains(t)) else {
                    continue;
                };
                g.insert(Triple::new(
                    p.clone(),
                    iri(vocab::RDF_TYPE),
                    iri(vocab::OWL_OBJECT_PROPERTY),
                ));
                g.insert(Triple::new(
                    p.clone(),
                    iri(vocab::RDFS_RANGE),
                    range.clone(),
                ));
            }
            _ => continue,
        }
        g.insert(Triple::new(p, iri(vocab::RDFS_DOMAIN), domain.clone()));
    }

    if let AcyclicReport::Cycle(nodes) = check_acyclic_subclasses(&extract_ontology_view(&g)) {
        return Err(PipelineError::Cycle(
            nodes.iter().map(|n| n.local_name().to_string()).collect(),
        ));
    }
    Ok(g)
}
