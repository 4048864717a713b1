use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::kstore::{Iri, OntologySnapshot};
use crate::naming::normalized_key;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MappingReport {
    pub mapped: Vec<(String, Iri)>,
    pub unmapped: Vec<String>,
    pub conflicts: Vec<(String, String)>,
}

fn class_key(iri: &Iri) -> String {
    normalized_key(iri.local_name())
}

/// True when `longer` is `shorter` followed by exactly one more word.
fn extends_by_head(longer: &str, shorter: &str) -> bool {
    longer
        .strip_prefix(shorter)
        .and_then(|rest| rest.strip_prefix('_'))
        .is_some_and(|head| !head.is_empty() && !head.contains('_'))
}

fn ancestors_or_self<'a>(snap: &'a OntologySnapshot, node: &'a Iri) -> BTreeSet<&'a Iri> {
    let mut seen = BTreeSet::from([node]);
    let mut stack = vec![node];
    while let Some(n) = stack.pop() {
        for p in snap.parents_of(n) {
            if seen.insert(p) {
                stack.push(p);
            }
        }
    }
    seen
}

/// Maps candidate classes onto reference classes by normalized local name.
/// Exact key matches win; otherwise keys that differ by one trailing word
/// match, taking the smallest reference IRI. A conflict is reported when a
/// candidate's parent maps somewhere that is not an ancestor of where the
/// candidate itself maps.
pub fn validate_against_domain(
    candidate: &OntologySnapshot,
    reference: &OntologySnapshot,
) -> MappingReport {
    let reference_keys: Vec<(String, &Iri)> = reference
        .classes
        .iter()
        .map(|c| (class_key(c), c))
        .collect();
    let mut mapping: BTreeMap<&Iri, &Iri> = BTreeMap::new();
    let mut report = MappingReport::default();
    let mut ordered: Vec<(String, &Iri)> = candidate
        .classes
        .iter()
        .map(|c| (class_key(c), c))
        .collect();
    ordered.sort();
    for (key, class) in &ordered {
        let exact = reference_keys
            .iter()
            .filter(|(k, _)| k == key)
            .map(|(_, r)| *r)
            .min();
        let loose = || {
            reference_keys
                .iter()
                .filter(|(k, _)| extends_by_head(k, key) || extends_by_head(key, k))
                .map(|(_, r)| *r)
                .min()
        };
        match exact.or_else(loose) {
            Some(r) => {
                mapping.insert(class, r);
                report.mapped.push((key.clone(), r.clone()));
            }
            None => report.unmapped.push(key.clone()),
        }
    }
    for (key, class) in &ordered {
        let Some(target) = mapping.get(class) else {
            continue;
        };
        let allowed = ancestors_or_self(reference, target);
        for parent in candidate.parents_of(class) {
            let Some(parent_target) = mapping.get(parent) else {
                continue;
            };
            if !allowed.contains(parent_target) {
                report.conflicts.push((
                    key.clone(),
                    format!(
                        "parent {} maps to {}, which is not above {}",
                        class_key(parent),
                        parent_target.as_str(),
                        target.as_str()
                    ),
                ));
            }
        }
    }
    report
}
