//! SPARQL subset: `PREFIX`, `SELECT [DISTINCT] vars|*`, basic graph
//! patterns, `OPTIONAL { ... }` groups and the `*` path on a concrete
//! predicate.

mod eval;
mod parse;
mod render;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::kstore::{Literal, Term};

pub use eval::evaluate;
pub use parse::parse_query;
pub use render::{render_table, Format};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("query syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("projected variable ?{0} does not occur in the pattern")]
    UnboundProjection(String),
    #[error("path modifier on a variable predicate at line {line}, column {column}")]
    PathOnVariable { line: usize, column: usize },
    #[error("unknown prefix '{0}'")]
    UnknownPrefix(String),
    #[error("malformed IRI: {0}")]
    MalformedIri(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IriRef {
    Full(String),
    Prefixed { prefix: String, local: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QTerm {
    Var(String),
    Iri(IriRef),
    Literal(Literal),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predicate {
    Term(QTerm),
    ZeroOrMore(IriRef),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: QTerm,
    pub predicate: Predicate,
    pub object: QTerm,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternElement {
    Triple(TriplePattern),
    Optional(Vec<TriplePattern>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    All,
    Vars(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub prefixes: BTreeMap<String, String>,
    pub projection: Projection,
    pub distinct: bool,
    pub pattern: Vec<PatternElement>,
}

impl TriplePattern {
    fn vars(&self) -> impl Iterator<Item = &str> {
        let p = match &self.predicate {
            Predicate::Term(t) => Some(t),
            Predicate::ZeroOrMore(_) => None,
        };
        [Some(&self.subject), p, Some(&self.object)]
            .into_iter()
            .flatten()
            .filter_map(|t| match t {
                QTerm::Var(v) => Some(v.as_str()),
                _ => None,
            })
    }
}

impl Query {
    /// Pattern variables in order of first appearance.
    pub fn pattern_vars(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for el in &self.pattern {
            let tps: &[TriplePattern] = match el {
                PatternElement::Triple(t) => std::slice::from_ref(t),
                PatternElement::Optional(g) => g,
            };
            for v in tps.iter().flat_map(TriplePattern::vars) {
                if !out.iter().any(|o| o == v) {
                    out.push(v.to_string());
                }
            }
        }
        out
    }

    pub fn columns(&self) -> Vec<String> {
        match &self.projection {
            Projection::All => self.pattern_vars(),
            Projection::Vars(vs) => vs.clone(),
        }
    }
}

/// Rows are in canonical order; `None` marks an unbound OPTIONAL variable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<Term>>>,
}

impl ResultTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Bound values of one column, in row order.
    pub fn column(&self, name: &str) -> Vec<&Term> {
        let Some(idx) = self.columns.iter().position(|c| c == name) else {
            return Vec::new();
        };
        self.rows.iter().filter_map(|r| r[idx].as_ref()).collect()
    }

    /// Local names of IRI values in a column.
    pub fn local_names(&self, name: &str) -> Vec<&str> {
        self.column(name)
            .into_iter()
            .map(|t| match t {
                Term::Iri(i) => i.local_name(),
                Term::Literal(l) => l.lexical(),
            })
            .collect()
    }
}

impl Serialize for ResultTable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let rows: Vec<BTreeMap<&str, &str>> = self
            .rows
            .iter()
            .map(|row| {
                self.columns
                    .iter()
                    .zip(row)
                    .filter_map(|(c, v)| v.as_ref().map(|t| (c.as_str(), t.text())))
                    .collect()
            })
            .collect();
        let mut s = serializer.serialize_struct("ResultTable", 2)?;
        s.serialize_field("columns", &self.columns)?;
        s.serialize_field("rows", &rows)?;
        s.end()
    }
}
