use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{AdHocRelation, GlossaryTerm, RelationKind, RelationRange, TaxonomyEdge};
use crate::naming::{lower_camel, normalized_key};
use crate::reasoning::{CoreError, ReasoningCore};

const HIERARCHICAL: &[&str] = &[
    "subclassof",
    "subclass",
    "superclassof",
    "superclass",
    "isa",
    "type",
    "kindof",
    "instanceof",
    "broader",
    "narrower",
    "parentof",
    "childof",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectedRelation {
    pub relation: AdHocRelation,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RelationOutcome {
    pub accepted: Vec<AdHocRelation>,
    pub rejected: Vec<RejectedRelation>,
}

fn check(
    r: &AdHocRelation,
    classes: &BTreeSet<&str>,
    hierarchy: &BTreeSet<(&str, &str)>,
    names: &BTreeMap<String, AdHocRelation>,
) -> Result<(), String> {
    if r.name.is_empty() {
        return Err("empty name".into());
    }
    if HIERARCHICAL.contains(&r.name.to_lowercase().as_str()) {
        return Err("hierarchical relation".into());
    }
    if !classes.contains(r.domain.as_str()) {
        return Err(format!("unknown domain {}", r.domain));
    }
    match (&r.range, r.kind) {
        (RelationRange::Datatype(_), RelationKind::Attribute) => {}
        (RelationRange::Datatype(_), _) => {
            return Err("datatype range on an object relation".into())
        }
        (RelationRange::Term(_), RelationKind::Attribute) => {
            return Err("attribute without a datatype range".into())
        }
        (RelationRange::Term(t), _) => {
            if !classes.contains(t.as_str()) {
                return Err(format!("unknown range {t}"));
            }
            if hierarchy.contains(&(r.domain.as_str(), t.as_str()))
                || hierarchy.contains(&(t.as_str(), r.domain.as_str()))
            {
                return Err("duplicates a taxonomy edge".into());
            }
        }
    }
    match names.get(&r.name) {
        Some(prev) if prev != r => Err(format!(
            "name already used for {} -> {:?}",
            prev.domain, prev.range
        )),
        _ => Ok(()),
    }
}

/// Normalizes names to lowerCamelCase and keys to glossary keys, then keeps
/// relations between known classes that are not hierarchy in disguise.
pub fn define_adhoc_relations(
    glossary: &[GlossaryTerm],
    taxonomy: &[TaxonomyEdge],
    sentences: &[String],
    core: &dyn ReasoningCore,
) -> Result<RelationOutcome, CoreError> {
    if sentences.is_empty() || glossary.is_empty() {
        return Ok(RelationOutcome::default());
    }
    let classes: BTreeSet<&str> = glossary
        .iter()
        .filter(|t| t.is_class())
        .map(|t| t.key.as_str())
        .collect();
    let hierarchy: BTreeSet<(&str, &str)> = taxonomy
        .iter()
        .map(|e| (e.child.as_str(), e.parent.as_str()))
        .collect();
    let mut proposed: Vec<AdHocRelation> = core
        .propose_relations(glossary, sentences)?
        .into_iter()
        .map(|r| AdHocRelation {
            name: lower_camel(&r.name),
            domain: normalized_key(&r.domain),
            range: match r.range {
                RelationRange::Term(t) => RelationRange::Term(normalized_key(&t)),
                d => d,
            },
            kind: r.kind,
        })
        .collect();
    proposed.sort();
    proposed.dedup();

    let mut names: BTreeMap<String, AdHocRelation> = BTreeMap::new();
    let mut out = RelationOutcome::default();
    for r in proposed {
        match check(&r, &classes, &hierarchy, &names) {
            Ok(()) => {
                names.insert(r.name.clone(), r.clone());
                out.accepted.push(r);
            }
            Err(reason) => out.rejected.push(RejectedRelation {
                relation: r,
                reason,
            }),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kstore::Datatype;
    use crate::reasoning::{RuleCore, ScriptedCore};

    fn rel(name: &str, d: &str, r: &str, kind: RelationKind) -> AdHocRelation {
        AdHocRelation {
            name: name.into(),
            domain: d.into(),
            range: RelationRange::Term(r.into()),
            kind,
        }
    }

    #[test]
    fn has_pattern_through_rule_core() {
        let g = vec![GlossaryTerm::class("pizza"), GlossaryTerm::class("base")];
        let out = define_adhoc_relations(&g, &[], &["a pizza has a base".into()], &RuleCore::new())
            .unwrap();
        assert_eq!(
            out.accepted,
            vec![rel("hasBase", "pizza", "base", RelationKind::Associative)]
        );
        assert!(define_adhoc_relations(&g, &[], &[], &RuleCore::new())
            .unwrap()
            .accepted
            .is_empty());
    }

    #[test]
    fn rejections() {
        let g = vec![GlossaryTerm::class("pizza"), GlossaryTerm::class("food")];
        let core = ScriptedCore::default().with_relations(vec![
            rel("subClassOf", "pizza", "pizza", RelationKind::Adhoc),
            rel("madeFrom", "pizza", "food", RelationKind::Adhoc),
            rel("made from", "pizza", "food", RelationKind::Adhoc),
            rel("servedWith", "pizza", "wine", RelationKind::Associative),
            rel("weight", "pizza", "food", RelationKind::Attribute),
            AdHocRelation {
                name: "pizzaName".into(),
                domain: "pizza".into(),
                range: RelationRange::Datatype(Datatype::String),
                kind: RelationKind::Attribute,
            },
        ]);
        let tax = vec![TaxonomyEdge::new("pizza", "food")];
        let out = define_adhoc_relations(&g, &tax, &["x".into()], &core).unwrap();
        assert_eq!(out.accepted.len(), 1);
        assert_eq!(out.accepted[0].name, "pizzaName");
        let reasons: Vec<&str> = out.rejected.iter().map(|r| r.reason.as_str()).collect();
        assert!(reasons.contains(&"hierarchical relation"));
        assert!(reasons.contains(&"duplicates a taxonomy edge"));
        assert!(reasons.contains(&"unknown range wine"));
        assert_eq!(out.rejected.len(), 4, "{reasons:?}");
    }
}
