use std::collections::BTreeSet;

use serde::Serialize;

use super::glossary::{extract_glossary_with, with_retries, DroppedTerm};
use super::owl::{emit_owl, OwlInput};
use super::relations::{define_adhoc_relations, RejectedRelation};
use super::taxonomy::{build_taxonomy_under, root_label};
use super::{GlossaryTerm, PipelineConfig, PipelineError, TaxonomyEdge, TermKind};
use crate::docprep::{chunk_section, prepare_section, Lexicon, SourceDocument};
use crate::kstore::{merge_graphs, Graph};
use crate::reasoning::{CoreError, ReasoningCore};

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SectionReport {
    pub index: usize,
    pub heading: String,
    pub tokens: usize,
    pub chunks: usize,
    pub rounds: usize,
    pub extracted: usize,
    pub dropped: Vec<DroppedTerm>,
    /// Labels removed by the consistency check.
    pub unconfirmed: Vec<String>,
    pub classes: usize,
    pub individuals: usize,
    pub taxonomy_edges: usize,
    pub broken_cycles: Vec<TaxonomyEdge>,
    pub rejected_edges: Vec<TaxonomyEdge>,
    pub relations: usize,
    pub rejected_relations: Vec<RejectedRelation>,
    pub triples: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub core: String,
    pub title: String,
    pub root_class: String,
    pub sections: Vec<SectionReport>,
    pub merged_triples: usize,
    pub warnings: Vec<String>,
    pub config: PipelineConfig,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    /// One module per section, in section order.
    pub modules: Vec<Graph>,
    pub merged: Graph,
    pub report: PipelineReport,
}

fn signature(terms: &[GlossaryTerm]) -> BTreeSet<(String, TermKind)> {
    terms.iter().map(|t| (t.key.clone(), t.kind)).collect()
}

fn core_err(stage: &'static str, section: usize) -> impl Fn(CoreError) -> PipelineError {
    move |source| PipelineError::Core {
        stage,
        section,
        chunk: None,
        source,
    }
}

/// Runs every stage per section, repeating glossary extraction until the
/// confirmed glossary stops changing or `max_rounds` is reached, then merges
/// the section modules.
pub fn run_pipeline(
    document: &SourceDocument,
    core: &dyn ReasoningCore,
    config: &PipelineConfig,
) -> Result<PipelineOutput, PipelineError> {
    config.check()?;
    let mut warnings = document
        .check()
        .map_err(|e| PipelineError::Document(e.to_string()))?;
    let lexicon = Lexicon::bundled();
    let retries = config.retries;
    let mut modules = Vec::new();
    let mut sections = Vec::new();
    let mut all_terms: Vec<GlossaryTerm> = Vec::new();
    let mut glossaries = Vec::new();

    for (index, section) in document.sections.iter().enumerate() {
        let mut rep = SectionReport {
            index,
            heading: section.heading.clone(),
            ..SectionReport::default()
        };
        let summaries: Vec<String> = section
            .figure_captions
            .iter()
            .map(|c| with_retries(retries, || core.summarize_caption(c)))
            .collect::<Result<_, _>>()
            .map_err(core_err("summarize", index))?;
        let (sentences, tokens) = prepare_section(lexicon, section, &summaries);
        let chunks = chunk_section(&tokens, index, config.chunk_budget, config.chunk_overlap)
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        rep.tokens = tokens.len();
        rep.chunks = chunks.len();
        let body: String = std::iter::once(section.body.as_str())
            .chain(summaries.iter().map(String::as_str))
            .collect::<Vec<_>>()
            .join(" ");

        let mut known: Vec<GlossaryTerm> = Vec::new();
        for round in 1..=config.max_rounds {
            let outcome = extract_glossary_with(
                &chunks,
                &document.title,
                &document.keywords,
                &known,
                core,
                config,
            )?;
            let confirmed = with_retries(retries, || {
                super::verify_consistency(&outcome.terms, &section.heading, &body, core)
            })
            .map_err(core_err("consistency", index))?;
            let kept: BTreeSet<&str> = confirmed.iter().map(|t| t.key.as_str()).collect();
            rep.rounds = round;
            rep.extracted = outcome.terms.len();
            rep.dropped = outcome.dropped;
            rep.unconfirmed = outcome
                .terms
                .iter()
                .filter(|t| !kept.contains(t.key.as_str()))
                .map(|t| t.label.clone())
                .collect();
            let fixpoint = round > 1 && signature(&confirmed) == signature(&known);
            known = confirmed;
            if fixpoint {
                break;
            }
        }
        if tokens.is_empty() {
            rep.warnings.push(format!("section {index} has no text"));
        }
        all_terms.extend(known.iter().cloned());
        glossaries.push((rep, known, sentences));
    }

    let class_keys: BTreeSet<String> = all_terms
        .iter()
        .filter(|t| t.is_class())
        .map(|t| t.key.clone())
        .collect();
    for (rep, glossary, _) in &mut glossaries {
        for t in glossary
            .iter_mut()
            .filter(|t| !t.is_class() && class_keys.contains(&t.key))
        {
            t.kind = TermKind::Class;
            t.instance_of.clear();
            rep.warnings
                .push(format!("{} is a class in another section", t.label));
        }
    }
    all_terms.retain(|t| t.is_class() || !class_keys.contains(&t.key));
    let root = root_label(&document.title, &all_terms);
    for (index, (mut rep, glossary, sentences)) in glossaries.into_iter().enumerate() {
        let module = if glossary.is_empty() {
            let mut g = Graph::new();
            for (k, v) in crate::kstore::vocab::well_known() {
                g.bind_prefix(k, v);
            }
            g.bind_prefix("ontology", super::owl::namespace(&config.base_iri));
            rep.warnings
                .push(format!("section {index} produced no terms"));
            g
        } else {
            let taxonomy = with_retries(retries, || build_taxonomy_under(&glossary, &root, core))
                .map_err(core_err("taxonomy", index))?;
            let relations = with_retries(retries, || {
                define_adhoc_relations(&glossary, &taxonomy.edges, &sentences, core)
            })
            .map_err(core_err("relations", index))?;
            let g = emit_owl(&OwlInput {
                glossary: &glossary,
                taxonomy: &taxonomy.edges,
                relations: &relations.accepted,
                root_label: Some(&root),
                base_iri: &config.base_iri,
            })
            .map_err(|e| match e {
                PipelineError::Emit { source, .. } => PipelineError::Emit {
                    section: index,
                    source,
                },
                other => other,
            })?;
            rep.classes = glossary.iter().filter(|t| t.is_class()).count();
            rep.individuals = glossary.len() - rep.classes;
            rep.taxonomy_edges = taxonomy.edges.len();
            rep.broken_cycles = taxonomy.broken_cycles;
            rep.rejected_edges = taxonomy.rejected;
            rep.relations = relations.accepted.len();
            rep.rejected_relations = relations.rejected;
            g
        };
        rep.triples = module.len();
        warnings.extend(rep.warnings.iter().cloned());
        sections.push(rep);
        modules.push(module);
    }

    let merged =
        merge_graphs(&modules).map_err(|source| PipelineError::Emit { section: 0, source })?;
    Ok(PipelineOutput {
        report: PipelineReport {
            core: core.name().to_string(),
            title: document.title.clone(),
            root_class: root,
            sections,
            merged_triples: merged.len(),
            warnings,
            config: config.clone(),
        },
        modules,
        merged,
    })
}
