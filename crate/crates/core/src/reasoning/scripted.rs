use std::sync::atomic::{AtomicUsize, Ordering};

use super::{CoreError, ReasoningCore, TermProposal};
use crate::docprep::TokenChunk;
use crate::ontogen::{AdHocRelation, GlossaryTerm, TaxonomyEdge};

/// Replays canned responses. Each `extract_terms` call returns the next
/// scripted term list, wrapping around, so a script of three lists models a
/// core whose output changes between iterations.
#[derive(Debug, Default)]
pub struct ScriptedCore {
    script: Vec<Vec<TermProposal>>,
    cursor: AtomicUsize,
    taxonomy: Vec<TaxonomyEdge>,
    relations: Vec<AdHocRelation>,
    failures: Option<String>,
}

impl ScriptedCore {
    pub fn new(script: Vec<Vec<TermProposal>>) -> Self {
        ScriptedCore {
            script,
            ..Self::default()
        }
    }

    /// Every label becomes a class proposal.
    pub fn from_labels(script: &[&[&str]]) -> Self {
        Self::new(
            script
                .iter()
                .map(|call| call.iter().map(|l| TermProposal::class(*l)).collect())
                .collect(),
        )
    }

    pub fn with_taxonomy(mut self, edges: Vec<TaxonomyEdge>) -> Self {
        self.taxonomy = edges;
        self
    }

    pub fn with_relations(mut self, relations: Vec<AdHocRelation>) -> Self {
        self.relations = relations;
        self
    }

    /// Makes every call fail with the given message.
    pub fn failing(message: impl Into<String>) -> Self {
        ScriptedCore {
            failures: Some(message.into()),
            ..Self::default()
        }
    }

    pub fn calls(&self) -> usize {
        self.cursor.load(Ordering::SeqCst)
    }

    fn check(&self) -> Result<(), CoreError> {
        match &self.failures {
            Some(m) => Err(CoreError::Other(m.clone())),
            None => Ok(()),
        }
    }
}

impl ReasoningCore for ScriptedCore {
    fn name(&self) -> &'static str {
        "scripted"
    }

    fn extract_terms(
        &self,
        _chunk: &TokenChunk,
        _title: &str,
        _keywords: &[String],
        _known: &[GlossaryTerm],
    ) -> Result<Vec<TermProposal>, CoreError> {
        let n = self.cursor.fetch_add(1, Ordering::SeqCst);
        self.check()?;
        if self.script.is_empty() {
            return Ok(Vec::new());
        }
        Ok(self.script[n % self.script.len()].clone())
    }

    fn confirm_terms(
        &self,
        terms: &[GlossaryTerm],
        _heading: &str,
        _body: &str,
    ) -> Result<Vec<String>, CoreError> {
        self.check()?;
        Ok(terms.iter().map(|t| t.key.clone()).collect())
    }

    fn propose_taxonomy(&self, _terms: &[GlossaryTerm]) -> Result<Vec<TaxonomyEdge>, CoreError> {
        self.check()?;
        Ok(self.taxonomy.clone())
    }

    fn propose_relations(
        &self,
        _terms: &[GlossaryTerm],
        _sentences: &[String],
    ) -> Result<Vec<AdHocRelation>, CoreError> {
        self.check()?;
        Ok(self.relations.clone())
    }

    fn summarize_caption(&self, caption: &str) -> Result<String, CoreError> {
        self.check()?;
        Ok(caption.to_string())
    }
}
