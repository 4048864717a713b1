//! Pluggable reasoning cores used by the ontology pipeline.

mod llm;
mod rule;
mod scripted;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::docprep::TokenChunk;
use crate::ontogen::{AdHocRelation, GlossaryTerm, TaxonomyEdge, TermKind};

pub use llm::{LlmConfig, LlmCore, PromptSet};
pub use rule::RuleCore;
pub use scripted::ScriptedCore;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoreError {
    #[error("request failed: {0}")]
    Transport(String),
    #[error("request timed out after {0} s")]
    Timeout(u64),
    #[error("unusable response: {0}")]
    BadResponse(String),
    #[error("{0}")]
    Other(String),
}

/// A term as proposed by a core, before persistence filtering.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TermProposal {
    pub label: String,
    #[serde(default)]
    pub kind: TermKind,
    /// Labels of classes this individual belongs to.
    #[serde(default)]
    pub instance_of: Vec<String>,
    #[serde(default)]
    pub broader: Option<String>,
    #[serde(default)]
    pub definition: Option<String>,
}

impl TermProposal {
    pub fn class(label: impl Into<String>) -> Self {
        TermProposal {
            label: label.into(),
            kind: TermKind::Class,
            instance_of: Vec::new(),
            broader: None,
            definition: None,
        }
    }

    pub fn individual(label: impl Into<String>, of: impl Into<String>) -> Self {
        TermProposal {
            kind: TermKind::Individual,
            instance_of: vec![of.into()],
            ..Self::class(label)
        }
    }
}

pub trait ReasoningCore: Send + Sync {
    fn name(&self) -> &'static str;

    /// `known` is the glossary from the previous round (empty in the first).
    fn extract_terms(
        &self,
        chunk: &TokenChunk,
        title: &str,
        keywords: &[String],
        known: &[GlossaryTerm],
    ) -> Result<Vec<TermProposal>, CoreError>;

    /// Returns the labels or keys of the accepted terms.
    fn confirm_terms(
        &self,
        terms: &[GlossaryTerm],
        heading: &str,
        body: &str,
    ) -> Result<Vec<String>, CoreError>;

    fn propose_taxonomy(&self, terms: &[GlossaryTerm]) -> Result<Vec<TaxonomyEdge>, CoreError>;

    fn propose_relations(
        &self,
        terms: &[GlossaryTerm],
        sentences: &[String],
    ) -> Result<Vec<AdHocRelation>, CoreError>;

    fn summarize_caption(&self, caption: &str) -> Result<String, CoreError>;
}
