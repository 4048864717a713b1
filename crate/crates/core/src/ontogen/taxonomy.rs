use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{GlossaryTerm, TaxonomyEdge};
use crate::docprep::Lexicon;
use crate::naming::normalized_key;
use crate::reasoning::{CoreError, ReasoningCore};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaxonomyOutcome {
    pub edges: Vec<TaxonomyEdge>,
    pub root_label: String,
    pub root_key: String,
    /// Edges removed to break cycles, in removal order.
    pub broken_cycles: Vec<TaxonomyEdge>,
    /// Proposed edges that referenced unknown keys, repeated an edge or
    /// pointed a class at itself.
    pub rejected: Vec<TaxonomyEdge>,
}

/// Root class label: the title's non-stopword words, or "thing" when there
/// are none. A clash with an individual of the same key gets " root"
/// appended.
pub fn root_label(title: &str, glossary: &[GlossaryTerm]) -> String {
    let lex = Lexicon::bundled();
    let words: Vec<String> = lex
        .tokenize(&lex.normalize_text(title))
        .into_iter()
        .filter(|t| !lex.is_stopword(t) && t.chars().any(char::is_alphanumeric))
        .collect();
    let label = if words.is_empty() {
        "thing".to_string()
    } else {
        words.join(" ")
    };
    let key = normalized_key(&label);
    match glossary.iter().find(|t| t.key == key) {
        Some(t) if !t.is_class() => format!("{label} root"),
        _ => label,
    }
}

fn first_cycle(edges: &[TaxonomyEdge]) -> Option<Vec<usize>> {
    let mut out: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, e) in edges.iter().enumerate() {
        out.entry(e.child.as_str()).or_default().push(i);
    }
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    let mut marks: BTreeMap<&str, Mark> = BTreeMap::new();
    let nodes: Vec<&str> = out.keys().copied().collect();
    for start in nodes {
        if marks.contains_key(start) {
            continue;
        }
        let mut stack: Vec<(&str, usize)> = vec![(start, 0)];
        let mut path: Vec<usize> = Vec::new();
        marks.insert(start, Mark::Active);
        while let Some(top) = stack.last_mut() {
            let (node, next) = *top;
            top.1 += 1;
            let succ = out.get(node).map(Vec::as_slice).unwrap_or(&[]);
            if next >= succ.len() {
                marks.insert(node, Mark::Done);
                stack.pop();
                path.pop();
                continue;
            }
            let ei = succ[next];
            let parent = edges[ei].parent.as_str();
            match marks.get(parent) {
                Some(Mark::Active) => {
                    path.push(ei);
                    let from = path
                        .iter()
                        .position(|&p| edges[p].child == parent)
                        .unwrap_or(0);
                    return Some(path[from..].to_vec());
                }
                Some(Mark::Done) => {}
                None => {
                    marks.insert(parent, Mark::Active);
                    path.push(ei);
                    stack.push((parent, 0));
                }
            }
        }
    }
    None
}

/// Filters proposed edges, breaks cycles by dropping the cycle edge whose
/// child key sorts last, and attaches parentless classes to a root class
/// named after `title`.
pub fn build_taxonomy(
    glossary: &[GlossaryTerm],
    title: &str,
    core: &dyn ReasoningCore,
) -> Result<TaxonomyOutcome, CoreError> {
    build_taxonomy_under(glossary, &root_label(title, glossary), core)
}

pub fn build_taxonomy_under(
    glossary: &[GlossaryTerm],
    root_label: &str,
    core: &dyn ReasoningCore,
) -> Result<TaxonomyOutcome, CoreError> {
    let root_label = root_label.to_string();
    let root_key = normalized_key(&root_label);
    let classes: BTreeSet<&str> = glossary
        .iter()
        .filter(|t| t.is_class())
        .map(|t| t.key.as_str())
        .collect();
    let proposed = if classes.is_empty() {
        Vec::new()
    } else {
        core.propose_taxonomy(glossary)?
    };

    let mut edges: Vec<TaxonomyEdge> = Vec::new();
    let mut rejected = Vec::new();
    let mut seen = BTreeSet::new();
    for e in proposed {
        let e = TaxonomyEdge::new(normalized_key(&e.child), normalized_key(&e.parent));
        let known = classes.contains(e.child.as_str())
            && (classes.contains(e.parent.as_str()) || e.parent == root_key);
        if !known || e.child == e.parent || e.child == root_key || !seen.insert(e.clone()) {
            rejected.push(e);
        } else {
            edges.push(e);
        }
    }
    edges.sort();

    let mut broken_cycles = Vec::new();
    while let Some(cycle) = first_cycle(&edges) {
        let drop = *cycle
            .iter()
            .max_by(|&&a, &&b| {
                edges[a]
                    .child
                    .cmp(&edges[b].child)
                    .then(edges[a].parent.cmp(&edges[b].parent))
            })
            .expect("cycles have edges");
        broken_cycles.push(edges.remove(drop));
    }

    let with_parent: BTreeSet<&str> = edges.iter().map(|e| e.child.as_str()).collect();
    let orphans: Vec<TaxonomyEdge> = classes
        .iter()
        .filter(|k| **k != root_key && !with_parent.contains(**k))
        .map(|k| TaxonomyEdge::new(*k, root_key.clone()))
        .collect();
    edges.extend(orphans);
    edges.sort();
    Ok(TaxonomyOutcome {
        edges,
        root_label,
        root_key,
        broken_cycles,
        rejected,
    })
}
