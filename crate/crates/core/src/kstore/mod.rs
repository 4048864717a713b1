//! In-memory triple store.
//!
//! A [`Graph`] is an immutable-after-construction set of [`Triple`]s plus the
//! prefix map it was written with. Iteration order is always the canonical
//! `(subject, predicate, object)` order, so every list output derived from a
//! graph is reproducible.

mod ontology;
mod store;
mod turtle;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ontology::{
    check_acyclic_subclasses, extract_ontology_view, AcyclicReport, DataProperty, IndividualEntry,
    ObjectProperty, OntologySnapshot,
};
pub use store::GraphStore;
pub use turtle::{parse_turtle, serialize_turtle};

pub mod vocab {
    pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
    pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
    pub const OWL: &str = "http://www.w3.org/2002/07/owl#";
    pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

    pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
    pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
    pub const RDFS_DOMAIN: &str = "http://www.w3.org/2000/01/rdf-schema#domain";
    pub const RDFS_RANGE: &str = "http://www.w3.org/2000/01/rdf-schema#range";
    pub const OWL_CLASS: &str = "http://www.w3.org/2002/07/owl#Class";
    pub const OWL_ONTOLOGY: &str = "http://www.w3.org/2002/07/owl#Ontology";
    pub const OWL_NAMED_INDIVIDUAL: &str = "http://www.w3.org/2002/07/owl#NamedIndividual";
    pub const OWL_OBJECT_PROPERTY: &str = "http://www.w3.org/2002/07/owl#ObjectProperty";
    pub const OWL_DATATYPE_PROPERTY: &str = "http://www.w3.org/2002/07/owl#DatatypeProperty";
    pub const OWL_FUNCTIONAL_PROPERTY: &str = "http://www.w3.org/2002/07/owl#FunctionalProperty";

    /// Prefixes every tool in this crate treats as implicitly declared.
    pub fn well_known() -> [(&'static str, &'static str); 4] {
        [("rdf", RDF), ("rdfs", RDFS), ("owl", OWL), ("xsd", XSD)]
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KstoreError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown prefix '{prefix}' at line {line}, column {column}")]
    UnknownPrefix {
        prefix: String,
        line: usize,
        column: usize,
    },
    #[error("malformed IRI <{iri}>: {reason}")]
    MalformedIri { iri: String, reason: String },
    #[error("invalid {datatype} literal '{lexical}'")]
    InvalidLiteral { lexical: String, datatype: String },
    #[error("conflicting bindings for prefix '{prefix}': <{first}> vs <{second}>")]
    PrefixConflict {
        prefix: String,
        first: String,
        second: String,
    },
}

/// An absolute IRI.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, KstoreError> {
        let value = value.into();
        let bad = |reason: &str| KstoreError::MalformedIri {
            iri: value.clone(),
            reason: reason.to_string(),
        };
        if value.is_empty() {
            return Err(bad("empty"));
        }
        if let Some(c) = value.chars().find(|c| {
            c.is_whitespace() || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')
        }) {
            return Err(bad(&format!("illegal character {c:?}")));
        }
        let scheme_end = value.find(':').ok_or_else(|| bad("missing scheme"))?;
        let scheme = &value[..scheme_end];
        let mut chars = scheme.chars();
        let scheme_ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic())
            && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
        if !scheme_ok {
            return Err(bad("invalid scheme"));
        }
        Ok(Iri(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Text after the last `#` or `/`.
    pub fn local_name(&self) -> &str {
        let cut = self.0.rfind(['#', '/']).map(|i| i + 1).unwrap_or(0);
        &self.0[cut..]
    }
}

impl TryFrom<String> for Iri {
    type Error = KstoreError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        Iri::new(value)
    }
}

impl From<Iri> for String {
    fn from(iri: Iri) -> Self {
        iri.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Datatype {
    String,
    Integer,
    Decimal,
    Boolean,
    Datetime,
}

impl Datatype {
    pub fn iri(self) -> &'static str {
        match self {
            Datatype::String => "http://www.w3.org/2001/XMLSchema#string",
            Datatype::Integer => "http://www.w3.org/2001/XMLSchema#integer",
            Datatype::Decimal => "http://www.w3.org/2001/XMLSchema#decimal",
            Datatype::Boolean => "http://www.w3.org/2001/XMLSchema#boolean",
            Datatype::Datetime => "http://www.w3.org/2001/XMLSchema#dateTime",
        }
    }

    pub fn from_iri(iri: &str) -> Option<Self> {
        let local = iri.strip_prefix(vocab::XSD)?;
        Some(match local {
            "string" => Datatype::String,
            "integer" | "int" | "long" | "short" | "nonNegativeInteger" | "positiveInteger" => {
                Datatype::Integer
            }
            "decimal" | "double" | "float" => Datatype::Decimal,
            "boolean" => Datatype::Boolean,
            "dateTime" | "date" => Datatype::Datetime,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Datatype::String => "string",
            Datatype::Integer => "integer",
            Datatype::Decimal => "decimal",
            Datatype::Boolean => "boolean",
            Datatype::Datetime => "datetime",
        }
    }

    fn accepts(self, lexical: &str) -> bool {
        match self {
            Datatype::String => true,
            Datatype::Integer => is_integer(lexical),
            Datatype::Decimal => is_decimal(lexical) || is_integer(lexical),
            Datatype::Boolean => matches!(lexical, "true" | "false" | "1" | "0"),
            Datatype::Datetime => is_datetime(lexical),
        }
    }
}

fn is_integer(s: &str) -> bool {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

fn is_decimal(s: &str) -> bool {
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    match body.split_once('.') {
        Some((int, frac)) => {
            !frac.is_empty()
                && int.bytes().all(|b| b.is_ascii_digit())
                && frac.bytes().all(|b| b.is_ascii_digit())
        }
        None => false,
    }
}

// YYYY-MM-DD with optional Thh:mm:ss[.fff][Z|±hh:mm]
fn is_datetime(s: &str) -> bool {
    fn num(s: &str, len: usize, max: u32) -> bool {
        s.len() == len
            && s.bytes().all(|b| b.is_ascii_digit())
            && s.parse::<u32>().is_ok_and(|v| v <= max)
    }
    let (date, time) = match s.split_once('T') {
        Some((d, t)) => (d, Some(t)),
        None => (s, None),
    };
    let parts: Vec<&str> = date.split('-').collect();
    if parts.len() != 3 || !num(parts[0], 4, 9999) || !num(parts[1], 2, 12) || !num(parts[2], 2, 31)
    {
        return false;
    }
    if parts[1] == "00" || parts[2] == "00" {
        return false;
    }
    let Some(time) = time else { return true };
    let (clock, zone) = if let Some(t) = time.strip_suffix('Z') {
        (t, None)
    } else if let Some(idx) = time.rfind(['+', '-']) {
        (&time[..idx], Some(&time[idx + 1..]))
    } else {
        (time, None)
    };
    if let Some(zone) = zone {
        let z: Vec<&str> = zone.split(':').collect();
        if z.len() != 2 || !num(z[0], 2, 14) || !num(z[1], 2, 59) {
            return false;
        }
    }
    let (hms, frac) = match clock.split_once('.') {
        Some((h, f)) => (h, Some(f)),
        None => (clock, None),
    };
    if frac.is_some_and(|f| f.is_empty() || !f.bytes().all(|b| b.is_ascii_digit())) {
        return false;
    }
    let t: Vec<&str> = hms.split(':').collect();
    t.len() == 3 && num(t[0], 2, 24) && num(t[1], 2, 59) && num(t[2], 2, 60)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    lexical: String,
    datatype: Datatype,
    language: Option<String>,
}

impl Literal {
    pub fn string(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: Datatype::String,
            language: None,
        }
    }

    pub fn lang_string(
        lexical: impl Into<String>,
        language: impl Into<String>,
    ) -> Result<Self, KstoreError> {
        let language = language.into();
        let valid = !language.is_empty()
            && language
                .split('-')
                .all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric()))
            && language
                .chars()
                .next()
                .is_some_and(|c| c.is_ascii_alphabetic());
        if !valid {
            return Err(KstoreError::InvalidLiteral {
                lexical: language,
                datatype: "language tag".into(),
            });
        }
        Ok(Literal {
            lexical: lexical.into(),
            datatype: Datatype::String,
            language: Some(language),
        })
    }

    pub fn typed(lexical: impl Into<String>, datatype: Datatype) -> Result<Self, KstoreError> {
        let lexical = lexical.into();
        if !datatype.accepts(&lexical) {
            return Err(KstoreError::InvalidLiteral {
                lexical,
                datatype: datatype.name().into(),
            });
        }
        Ok(Literal {
            lexical,
            datatype,
            language: None,
        })
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Datatype {
        self.datatype
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
}

impl Term {
    pub fn iri(value: &str) -> Result<Self, KstoreError> {
        Iri::new(value).map(Term::Iri)
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            Term::Literal(_) => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            Term::Iri(_) => None,
        }
    }

    /// Plain display text: the full IRI or the literal's lexical form.
    pub fn text(&self) -> &str {
        match self {
            Term::Iri(iri) => iri.as_str(),
            Term::Literal(lit) => lit.lexical(),
        }
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<Literal> for Term {
    fn from(lit: Literal) -> Self {
        Term::Literal(lit)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Iri, predicate: Iri, object: impl Into<Term>) -> Self {
        Triple {
            subject,
            predicate,
            object: object.into(),
        }
    }
}

/// One slot of a [`Graph::matching`] pattern; `None` is a wildcard.
#[derive(Debug, Clone, Default)]
pub struct Pattern<'a> {
    pub subject: Option<&'a Iri>,
    pub predicate: Option<&'a Iri>,
    pub object: Option<&'a Term>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    triples: BTreeSet<Triple>,
    prefixes: BTreeMap<String, String>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_prefixes(prefixes: BTreeMap<String, String>) -> Self {
        Graph {
            triples: BTreeSet::new(),
            prefixes,
        }
    }

    /// Returns `false` when the triple was already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        self.triples.insert(triple)
    }

    pub fn bind_prefix(&mut self, label: impl Into<String>, namespace: impl Into<String>) {
        self.prefixes.insert(label.into(), namespace.into());
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn triples(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn triple_set(&self) -> &BTreeSet<Triple> {
        &self.triples
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    /// All triples consistent with the bound slots, in canonical order.
    pub fn matching(&self, pattern: &Pattern<'_>) -> Vec<&Triple> {
        let keep = |t: &&Triple| {
            pattern.predicate.is_none_or(|p| &t.predicate == p)
                && pattern.object.is_none_or(|o| &t.object == o)
        };
        match pattern.subject {
            Some(s) => self.subject_range(s).filter(keep).collect(),
            None => self.triples.iter().filter(keep).collect(),
        }
    }

    fn subject_range<'a>(&'a self, subject: &Iri) -> impl Iterator<Item = &'a Triple> + 'a {
        let lower = Triple {
            subject: subject.clone(),
            predicate: Iri(String::new()),
            object: Term::Iri(Iri(String::new())),
        };
        let subject = subject.clone();
        self.triples
            .range(lower..)
            .take_while(move |t| t.subject == subject)
    }

    /// Objects of `(subject, predicate, ?)`.
    pub fn objects<'a>(
        &'a self,
        subject: &'a Iri,
        predicate: &'a str,
    ) -> impl Iterator<Item = &'a Term> + 'a {
        self.subject_range(subject)
            .filter(move |t| t.predicate.as_str() == predicate)
            .map(|t| &t.object)
    }

    /// Subjects of `(?, predicate, object-iri)`.
    pub fn subjects_with<'a>(
        &'a self,
        predicate: &'a str,
        object: &'a str,
    ) -> impl Iterator<Item = &'a Iri> + 'a {
        self.triples
            .iter()
            .filter(move |t| {
                t.predicate.as_str() == predicate
                    && t.object.as_iri().is_some_and(|o| o.as_str() == object)
            })
            .map(|t| &t.subject)
    }

    /// Expands `label:local` using this graph's prefixes, then the well-known ones.
    pub fn expand(&self, label: &str, local: &str) -> Option<String> {
        self.prefixes
            .get(label)
            .map(String::as_str)
            .or_else(|| {
                vocab::well_known()
                    .iter()
                    .find(|(l, _)| *l == label)
                    .map(|(_, ns)| *ns)
            })
            .map(|ns| format!("{ns}{local}"))
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        Graph {
            triples: iter.into_iter().collect(),
            prefixes: BTreeMap::new(),
        }
    }
}

/// `match(graph, pattern)` as a free function.
pub fn match_pattern<'g>(graph: &'g Graph, pattern: &Pattern<'_>) -> Vec<&'g Triple> {
    graph.matching(pattern)
}

/// Union of triple sets and prefix maps; the same label bound to two
/// different namespaces is an error.
pub fn merge_graphs<'a, I>(graphs: I) -> Result<Graph, KstoreError>
where
    I: IntoIterator<Item = &'a Graph>,
{
    let mut merged = Graph::new();
    for graph in graphs {
        for (label, ns) in &graph.prefixes {
            match merged.prefixes.get(label) {
                Some(existing) if existing != ns => {
                    return Err(KstoreError::PrefixConflict {
                        prefix: label.clone(),
                        first: existing.clone(),
                        second: ns.clone(),
                    })
                }
                Some(_) => {}
                None => {
                    merged.prefixes.insert(label.clone(), ns.clone());
                }
            }
        }
        merged.triples.extend(graph.triples.iter().cloned());
    }
    Ok(merged)
}
