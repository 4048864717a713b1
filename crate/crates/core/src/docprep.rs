//! Text preparation: normalization, stopwords, sentence boundaries,
//! tokenization and fixed-budget chunking.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reasoning::{CoreError, ReasoningCore};

const STOPWORDS: &str = include_str!("../resources/stopwords.txt");
const ABBREVIATIONS: &str = include_str!("../resources/abbreviations.txt");

pub const DEFAULT_BUDGET: usize = 2048;
pub const DEFAULT_OVERLAP: usize = 128;

#[derive(Debug, Error)]
pub enum DocprepError {
    #[error("chunk overlap {overlap} must be smaller than budget {budget}")]
    Overlap { budget: usize, overlap: usize },
    #[error("figure caption {index}: {source}")]
    Caption {
        index: usize,
        #[source]
        source: CoreError,
    },
    #[error("invalid document: {0}")]
    Document(String),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub heading: String,
    #[serde(default)]
    pub body: String,
    #[serde(default)]
    pub figure_captions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceDocument {
    pub title: String,
    #[serde(default)]
    pub keywords: Vec<String>,
    pub sections: Vec<Section>,
}

impl SourceDocument {
    pub fn from_json(text: &str) -> Result<Self, DocprepError> {
        let doc: SourceDocument =
            serde_json::from_str(text).map_err(|e| DocprepError::Document(e.to_string()))?;
        doc.check()?;
        Ok(doc)
    }

    /// Hard errors for a missing title or sections. Sections with neither
    /// body nor captions come back as warnings.
    pub fn check(&self) -> Result<Vec<String>, DocprepError> {
        if self.title.trim().is_empty() {
            return Err(DocprepError::Document("title is empty".into()));
        }
        if self.sections.is_empty() {
            return Err(DocprepError::Document("document has no sections".into()));
        }
        Ok(self
            .sections
            .iter()
            .enumerate()
            .filter(|(_, s)| s.body.trim().is_empty() && s.figure_captions.is_empty())
            .map(|(i, s)| {
                format!(
                    "section {i} ('{}') has neither body text nor figure captions",
                    s.heading
                )
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenChunk {
    pub tokens: Vec<String>,
    pub section_index: usize,
    /// Leading tokens repeated from the previous chunk.
    pub overlap_prefix_len: usize,
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '?' | '!')
}

fn is_terminator_token(t: &str) -> bool {
    t.len() == 1 && t.chars().all(is_terminator)
}

/// Stopword and abbreviation lists.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    stopwords: BTreeSet<String>,
    abbreviations: Vec<String>,
}

fn list_entries(text: &str) -> impl Iterator<Item = String> + '_ {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.trim_end_matches('.').to_lowercase())
}

impl Lexicon {
    pub fn from_lists(stopwords: &str, abbreviations: &str) -> Self {
        let mut abbreviations: Vec<String> = list_entries(abbreviations).collect();
        abbreviations.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        Lexicon {
            stopwords: list_entries(stopwords).collect(),
            abbreviations,
        }
    }

    pub fn from_files(stopwords: &Path, abbreviations: &Path) -> Result<Self, DocprepError> {
        let read = |p: &Path| {
            std::fs::read_to_string(p).map_err(|source| DocprepError::Io {
                path: p.display().to_string(),
                source,
            })
        };
        Ok(Self::from_lists(&read(stopwords)?, &read(abbreviations)?))
    }

    /// The lists shipped with the crate.
    pub fn bundled() -> &'static Lexicon {
        static LEXICON: OnceLock<Lexicon> = OnceLock::new();
        LEXICON.get_or_init(|| Lexicon::from_lists(STOPWORDS, ABBREVIATIONS))
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }

    /// Whether `text` ends with a listed abbreviation that starts at a word
    /// boundary.
    fn ends_with_abbreviation(&self, text: &str) -> bool {
        let lower = text.to_lowercase();
        self.abbreviations.iter().any(|a| {
            lower.ends_with(a.as_str())
                && lower[..lower.len() - a.len()]
                    .chars()
                    .next_back()
                    .is_none_or(|c| !c.is_alphanumeric())
        })
    }

    pub fn normalize_text(&self, text: &str) -> String {
        let chars: Vec<char> = text.chars().collect();
        let mut out = String::with_capacity(text.len());
        for (i, &c) in chars.iter().enumerate() {
            let prev_alnum = i > 0 && chars[i - 1].is_alphanumeric();
            let next_alnum = chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
            if c.is_alphanumeric() {
                out.extend(c.to_lowercase());
            } else if (c == '-' || c == '.') && prev_alnum && next_alnum {
                out.push(c);
            } else if is_terminator(c) {
                if c == '.' && prev_alnum && self.ends_with_abbreviation(&out) {
                    out.push('.');
                    continue;
                }
                let tail = out.trim_end();
                let after_detached = tail.chars().next_back().is_some_and(is_terminator)
                    && tail[..tail.len() - 1]
                        .chars()
                        .next_back()
                        .is_none_or(char::is_whitespace);
                if !after_detached {
                    out.push(' ');
                    out.push(c);
                    out.push(' ');
                }
            } else {
                out.push(' ');
            }
        }
        out.split_whitespace().collect::<Vec<_>>().join(" ")
    }

    pub fn remove_stopwords(&self, tokens: &[String]) -> Vec<String> {
        tokens
            .iter()
            .filter(|t| !self.is_stopword(t))
            .cloned()
            .collect()
    }

    /// Splits after `.`, `?` or `!` when followed by whitespace and a letter,
    /// unless the period closes a listed abbreviation.
    pub fn detect_sentences(&self, text: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut start = 0;
        let iter = text.char_indices().peekable();
        for (i, c) in iter {
            if !is_terminator(c) {
                continue;
            }
            let end = i + c.len_utf8();
            let rest = &text[end..];
            let trimmed = rest.trim_start();
            let boundary = trimmed.len() < rest.len()
                && trimmed.chars().next().is_some_and(char::is_alphabetic);
            if !boundary || (c == '.' && self.ends_with_abbreviation(&text[..i])) {
                continue;
            }
            let sentence = text[start..end].trim();
            if !sentence.is_empty() {
                out.push(sentence.to_string());
            }
            start = end;
        }
        let last = text[start..].trim();
        if !last.is_empty() {
            out.push(last.to_string());
        }
        out
    }

    /// Words (with inner hyphens and periods) and numbers are single tokens;
    /// a trailing period stays attached when it closes an abbreviation; any
    /// other punctuation character is its own token.
    pub fn tokenize(&self, sentence: &str) -> Vec<String> {
        let chars: Vec<char> = sentence.chars().collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
            } else if c.is_alphanumeric() {
                let mut j = i + 1;
                while j < chars.len()
                    && (chars[j].is_alphanumeric()
                        || (matches!(chars[j], '-' | '.')
                            && chars.get(j + 1).is_some_and(|n| n.is_alphanumeric())))
                {
                    j += 1;
                }
                let mut word: String = chars[i..j].iter().collect();
                if chars.get(j) == Some(&'.') && self.ends_with_abbreviation(&word) {
                    word.push('.');
                    j += 1;
                }
                out.push(word);
                i = j;
            } else {
                out.push(c.to_string());
                i += 1;
            }
        }
        out
    }
}

pub fn normalize_text(text: &str) -> String {
    Lexicon::bundled().normalize_text(text)
}

pub fn remove_stopwords(tokens: &[String]) -> Vec<String> {
    Lexicon::bundled().remove_stopwords(tokens)
}

pub fn detect_sentences(text: &str) -> Vec<String> {
    Lexicon::bundled().detect_sentences(text)
}

pub fn tokenize(sentence: &str) -> Vec<String> {
    Lexicon::bundled().tokenize(sentence)
}

pub fn is_sentence_end(token: &str) -> bool {
    is_terminator_token(token)
}

/// Windows of at most `budget` tokens advancing by `budget - overlap`.
pub fn chunk(
    tokens: &[String],
    budget: usize,
    overlap: usize,
) -> Result<Vec<TokenChunk>, DocprepError> {
    chunk_section(tokens, 0, budget, overlap)
}

pub fn chunk_section(
    tokens: &[String],
    section_index: usize,
    budget: usize,
    overlap: usize,
) -> Result<Vec<TokenChunk>, DocprepError> {
    if overlap >= budget {
        return Err(DocprepError::Overlap { budget, overlap });
    }
    let step = budget - overlap;
    let mut out = Vec::new();
    let mut start = 0;
    while start < tokens.len() {
        let end = (start + budget).min(tokens.len());
        out.push(TokenChunk {
            tokens: tokens[start..end].to_vec(),
            section_index,
            overlap_prefix_len: if start == 0 { 0 } else { overlap },
        });
        if end == tokens.len() {
            break;
        }
        start += step;
    }
    Ok(out)
}

pub fn summarize_figures(
    captions: &[String],
    core: &dyn ReasoningCore,
) -> Result<Vec<String>, DocprepError> {
    captions
        .iter()
        .enumerate()
        .map(|(index, c)| {
            core.summarize_caption(c)
                .map_err(|source| DocprepError::Caption { index, source })
        })
        .collect()
}

/// Section text with figure summaries appended, normalized and tokenized,
/// stopwords kept. Returns the normalized sentences and the token stream.
pub fn prepare_section(
    lexicon: &Lexicon,
    section: &Section,
    summaries: &[String],
) -> (Vec<String>, Vec<String>) {
    let mut text = String::new();
    for part in std::iter::once(section.heading.as_str())
        .chain(std::iter::once(section.body.as_str()))
        .chain(summaries.iter().map(String::as_str))
    {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        text.push_str(part);
        if !part.ends_with(is_terminator) {
            text.push('.');
        }
        text.push(' ');
    }
    let normalized = lexicon.normalize_text(&text);
    let sentences = lexicon.detect_sentences(&normalized);
    let tokens = sentences.iter().flat_map(|s| lexicon.tokenize(s)).collect();
    (sentences, tokens)
}
