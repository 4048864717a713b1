use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{GlossaryTerm, PipelineConfig, PipelineError, TermKind};
use crate::docprep::TokenChunk;
use crate::naming::normalized_key;
use crate::reasoning::{CoreError, ReasoningCore};

/// Minimum support ⌈n·τ⌉, never below 1.
pub fn persistence_threshold(iterations: usize, tau: f64) -> usize {
    let t = (iterations as f64 * tau - 1e-9).ceil();
    if t < 1.0 {
        1
    } else {
        t as usize
    }
}

pub fn survives(support: usize, iterations: usize, tau: f64) -> bool {
    support >= persistence_threshold(iterations, tau)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DroppedTerm {
    pub label: String,
    pub key: String,
    pub support: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GlossaryOutcome {
    /// Surviving terms ordered by key.
    pub terms: Vec<GlossaryTerm>,
    pub dropped: Vec<DroppedTerm>,
}

pub(crate) fn with_retries<T>(
    retries: usize,
    mut call: impl FnMut() -> Result<T, CoreError>,
) -> Result<T, CoreError> {
    let mut last = None;
    for attempt in 0..=retries {
        match call() {
            Ok(v) => return Ok(v),
            Err(e) => {
                log::warn!("core call failed (attempt {}): {e}", attempt + 1);
                last = Some(e);
            }
        }
    }
    Err(last.expect("at least one attempt"))
}

pub fn extract_glossary(
    chunks: &[TokenChunk],
    title: &str,
    keywords: &[String],
    core: &dyn ReasoningCore,
    config: &PipelineConfig,
) -> Result<GlossaryOutcome, PipelineError> {
    extract_glossary_with(chunks, title, keywords, &[], core, config)
}

/// Like [`extract_glossary`], passing the previous round's glossary to the
/// core.
pub fn extract_glossary_with(
    chunks: &[TokenChunk],
    title: &str,
    keywords: &[String],
    known: &[GlossaryTerm],
    core: &dyn ReasoningCore,
    config: &PipelineConfig,
) -> Result<GlossaryOutcome, PipelineError> {
    let n = config.iterations.max(1);
    let mut merged: BTreeMap<String, GlossaryTerm> = BTreeMap::new();
    for (ci, chunk) in chunks.iter().enumerate() {
        let mut support: BTreeMap<String, usize> = BTreeMap::new();
        for _ in 0..n {
            let proposals = with_retries(config.retries, || {
                core.extract_terms(chunk, title, keywords, known)
            })
            .map_err(|source| PipelineError::Core {
                stage: "glossary",
                section: chunk.section_index,
                chunk: Some(ci),
                source,
            })?;
            let mut seen = BTreeSet::new();
            for p in proposals {
                let key = normalized_key(&p.label);
                if key.is_empty() || p.label.trim().is_empty() {
                    continue;
                }
                let entry = merged.entry(key.clone()).or_insert_with(|| GlossaryTerm {
                    label: p.label.trim().to_string(),
                    key: key.clone(),
                    definition: None,
                    support: 0,
                    source_section: chunk.section_index,
                    kind: p.kind,
                    instance_of: BTreeSet::new(),
                    broader: None,
                });
                if p.kind == TermKind::Class {
                    entry.kind = TermKind::Class;
                }
                entry
                    .instance_of
                    .extend(p.instance_of.iter().map(|c| normalized_key(c)));
                if entry.broader.is_none() {
                    entry.broader = p.broader.as_deref().map(normalized_key);
                }
                if entry.definition.is_none() {
                    entry.definition = p.definition.clone();
                }
                if seen.insert(key.clone()) {
                    *support.entry(key).or_default() += 1;
                }
            }
        }
        for (key, s) in support {
            let entry = merged.get_mut(&key).expect("merged above");
            entry.support = entry.support.max(s);
        }
    }
    let mut out = GlossaryOutcome::default();
    for (_, mut term) in merged {
        if survives(term.support, n, config.persistence_threshold) {
            if term.kind == TermKind::Class {
                term.instance_of.clear();
            }
            out.terms.push(term);
        } else {
            out.dropped.push(DroppedTerm {
                label: term.label,
                key: term.key,
                support: term.support,
            });
        }
    }
    Ok(out)
}

/// Keeps the terms the core confirms for the section. Confirmations may name
/// a term by label or key.
pub fn verify_consistency(
    glossary: &[GlossaryTerm],
    heading: &str,
    body: &str,
    core: &dyn ReasoningCore,
) -> Result<Vec<GlossaryTerm>, CoreError> {
    if glossary.is_empty() {
        return Ok(Vec::new());
    }
    let confirmed: BTreeSet<String> = core
        .confirm_terms(glossary, heading, body)?
        .iter()
        .map(|c| normalized_key(c))
        .collect();
    Ok(glossary
        .iter()
        .filter(|t| confirmed.contains(&t.key))
        .cloned()
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reasoning::{RuleCore, ScriptedCore};

    fn one_chunk() -> Vec<TokenChunk> {
        vec![TokenChunk {
            tokens: vec!["x".into()],
            section_index: 0,
            overlap_prefix_len: 0,
        }]
    }

    #[test]
    fn threshold_truth_table() {
        for n in 1..=6usize {
            for (num, den) in [(1usize, 3usize), (1, 2), (2, 3), (1, 1)] {
                let tau = num as f64 / den as f64;
                let exact = (n * num).div_ceil(den).max(1);
                for s in 0..=n {
                    assert_eq!(
                        survives(s, n, tau),
                        s >= exact,
                        "n={n} tau={num}/{den} s={s}"
                    );
                }
            }
        }
    }

    #[test]
    fn empty_chunks_give_empty_glossary() {
        let cfg = PipelineConfig {
            iterations: 1,
            ..PipelineConfig::default()
        };
        let out = extract_glossary(&[], "t", &[], &RuleCore::new(), &cfg).unwrap();
        assert!(out.terms.is_empty());
    }

    #[test]
    fn unstable_term_dropped() {
        let core = ScriptedCore::from_labels(&[&["ham", "spam"], &["ham"], &["ham"]]);
        let out =
            extract_glossary(&one_chunk(), "t", &[], &core, &PipelineConfig::default()).unwrap();
        assert_eq!(
            out.terms.iter().map(|t| t.key.as_str()).collect::<Vec<_>>(),
            ["ham"]
        );
        assert_eq!(out.terms[0].support, 3);
        assert_eq!(out.dropped[0].key, "spam");
        assert_eq!(out.dropped[0].support, 1);
    }

    #[test]
    fn failure_names_chunk() {
        let core = ScriptedCore::failing("boom");
        let err = extract_glossary(&one_chunk(), "t", &[], &core, &PipelineConfig::default())
            .unwrap_err();
        assert!(matches!(
            err,
            PipelineError::Core {
                stage: "glossary",
                chunk: Some(0),
                ..
            }
        ));
        assert_eq!(core.calls(), 3);
    }

    #[test]
    fn consistency_filters_absent_terms() {
        let core = RuleCore::new();
        let terms = vec![
            GlossaryTerm::class("river port"),
            GlossaryTerm::class("barge"),
        ];
        let kept = verify_consistency(&terms, "Ports", "A barge moves slowly.", &core).unwrap();
        assert_eq!(kept, vec![GlossaryTerm::class("barge")]);
        assert!(verify_consistency(&[], "", "", &core).unwrap().is_empty());
    }
}
