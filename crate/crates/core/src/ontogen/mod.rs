//! Staged ontology construction: glossary with persistence filtering,
//! consistency check, taxonomy, ad-hoc relations, OWL emission, per-section
//! modules and validation against a reference ontology.

mod glossary;
mod owl;
mod pipeline;
mod relations;
mod taxonomy;
mod validate;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kstore::{Datatype, KstoreError};
use crate::reasoning::CoreError;

pub use glossary::{
    extract_glossary, extract_glossary_with, persistence_threshold, survives, verify_consistency,
    DroppedTerm, GlossaryOutcome,
};
pub use owl::{emit_owl, namespace, term_iri, OwlInput};
pub use pipeline::{run_pipeline, PipelineOutput, PipelineReport, SectionReport};
pub use relations::{define_adhoc_relations, RejectedRelation, RelationOutcome};
pub use taxonomy::{build_taxonomy, build_taxonomy_under, root_label, TaxonomyOutcome};
pub use validate::{validate_against_domain, MappingReport};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    #[default]
    Class,
    Individual,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlossaryTerm {
    pub label: String,
    pub key: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub definition: Option<String>,
    pub support: usize,
    pub source_section: usize,
    pub kind: TermKind,
    /// Keys of the classes an individual belongs to.
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub instance_of: BTreeSet<String>,
    /// Key of a broader class suggested during extraction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub broader: Option<String>,
}

impl GlossaryTerm {
    pub fn class(label: &str) -> Self {
        GlossaryTerm {
            label: label.to_string(),
            key: crate::naming::normalized_key(label),
            definition: None,
            support: 1,
            source_section: 0,
            kind: TermKind::Class,
            instance_of: BTreeSet::new(),
            broader: None,
        }
    }

    pub fn individual(label: &str, of: &[&str]) -> Self {
        GlossaryTerm {
            kind: TermKind::Individual,
            instance_of: of
                .iter()
                .map(|c| crate::naming::normalized_key(c))
                .collect(),
            ..Self::class(label)
        }
    }

    pub fn is_class(&self) -> bool {
        self.kind == TermKind::Class
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaxonomyEdge {
    pub child: String,
    pub parent: String,
}

impl TaxonomyEdge {
    pub fn new(child: impl Into<String>, parent: impl Into<String>) -> Self {
        TaxonomyEdge {
            child: child.into(),
            parent: parent.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationKind {
    Associative,
    Attribute,
    Adhoc,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationRange {
    Term(String),
    Datatype(Datatype),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AdHocRelation {
    pub name: String,
    pub domain: String,
    pub range: RelationRange,
    pub kind: RelationKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub iterations: usize,
    pub persistence_threshold: f64,
    pub base_iri: String,
    pub max_rounds: usize,
    pub chunk_budget: usize,
    pub chunk_overlap: usize,
    /// Extra attempts after a failed core call.
    pub retries: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            iterations: 3,
            persistence_threshold: 2.0 / 3.0,
            base_iri: "http://www.semanticweb.org/ontoroute/ontology".to_string(),
            max_rounds: 5,
            chunk_budget: crate::docprep::DEFAULT_BUDGET,
            chunk_overlap: crate::docprep::DEFAULT_OVERLAP,
            retries: 2,
        }
    }
}

impl PipelineConfig {
    pub fn check(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::Config(m.to_string()));
        if self.iterations == 0 {
            return bad("iterations must be at least 1");
        }
        if !(self.persistence_threshold > 0.0 && self.persistence_threshold <= 1.0) {
            return bad("persistence_threshold must lie in (0, 1]");
        }
        if self.max_rounds == 0 {
            return bad("max_rounds must be at least 1");
        }
        if self.chunk_overlap >= self.chunk_budget {
            return bad("chunk_overlap must be smaller than chunk_budget");
        }
        crate::kstore::Iri::new(self.base_iri.clone())
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid pipeline config: {0}")]
    Config(String),
    #[error("invalid document: {0}")]
    Document(String),
    #[error("{stage} failed in section {section}{}: {source}", chunk.map(|c| format!(", chunk {c}")).unwrap_or_default())]
    Core {
        stage: &'static str,
        section: usize,
        chunk: Option<usize>,
        #[source]
        source: CoreError,
    },
    #[error("taxonomy contains a cycle through {0:?}")]
    Cycle(Vec<String>),
    #[error("emitting section {section}: {source}")]
    Emit {
        section: usize,
        #[source]
        source: KstoreError,
    },
}
