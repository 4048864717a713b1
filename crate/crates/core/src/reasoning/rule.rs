use std::collections::{BTreeMap, BTreeSet};

use super::{CoreError, ReasoningCore, TermProposal};
use crate::docprep::{is_sentence_end, Lexicon, TokenChunk};
use crate::kstore::Datatype;
use crate::naming::{lower_camel, normalized_key, strip_plural, words};
use crate::ontogen::{
    AdHocRelation, GlossaryTerm, RelationKind, RelationRange, TaxonomyEdge, TermKind,
};

const MAX_NGRAM: usize = 4;

const CUES: &[&[&str]] = &[
    &["such", "as"],
    &["consist", "of"],
    &["consists", "of"],
    &["consisting", "of"],
    &["include"],
    &["includes"],
    &["including"],
    &["namely"],
    &["comprise"],
    &["comprises"],
];

/// Stopwords that may separate enumerated items.
const CONNECTORS: &[&str] = &["and", "or", "also", "both", "either"];

const ATTRIBUTES: &[(&str, Datatype)] = &[
    ("name", Datatype::String),
    ("title", Datatype::String),
    ("label", Datatype::String),
    ("code", Datatype::String),
    ("description", Datatype::String),
    ("number", Datatype::Integer),
    ("count", Datatype::Integer),
    ("id", Datatype::Integer),
    ("identifier", Datatype::Integer),
    ("year", Datatype::Integer),
    ("quantity", Datatype::Integer),
    ("price", Datatype::Decimal),
    ("cost", Datatype::Decimal),
    ("weight", Datatype::Decimal),
    ("distance", Datatype::Decimal),
    ("time", Datatype::Decimal),
    ("duration", Datatype::Decimal),
    ("length", Datatype::Decimal),
    ("speed", Datatype::Decimal),
    ("value", Datatype::Decimal),
    ("rate", Datatype::Decimal),
    ("tonnage", Datatype::Decimal),
    ("temperature", Datatype::Decimal),
    ("date", Datatype::Datetime),
    ("timestamp", Datatype::Datetime),
];

fn attribute_type(word: &str) -> Option<Datatype> {
    let word = strip_plural(word);
    ATTRIBUTES.iter().find(|(w, _)| *w == word).map(|(_, d)| *d)
}

type Phrase = Vec<String>;

/// Deterministic heuristics over normalized token streams.
///
/// Terms are keyword matches, known glossary labels, and stopword-free
/// n-grams seen at least twice outside longer accepted phrases. Enumeration
/// cues (`include`, `such as`, ...) connect a preceding term to the items
/// after it: items sharing the enumerator's head word become narrower
/// classes, other items become its individuals.
#[derive(Debug, Clone)]
pub struct RuleCore {
    lexicon: Lexicon,
}

impl Default for RuleCore {
    fn default() -> Self {
        RuleCore {
            lexicon: Lexicon::bundled().clone(),
        }
    }
}

impl RuleCore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_lexicon(lexicon: Lexicon) -> Self {
        RuleCore { lexicon }
    }

    fn phrase_of(&self, text: &str) -> Phrase {
        self.lexicon
            .tokenize(&self.lexicon.normalize_text(text))
            .into_iter()
            .filter(|t| !is_sentence_end(t))
            .collect()
    }

    fn is_cue_word(token: &str) -> bool {
        CUES.iter().any(|c| c[0] == token)
    }

    fn is_content(&self, token: &str) -> bool {
        !self.lexicon.is_stopword(token)
            && !Self::is_cue_word(token)
            && token.chars().any(char::is_alphabetic)
    }

    fn cue_len_at(tokens: &[String], i: usize) -> Option<usize> {
        CUES.iter()
            .find(|cue| {
                tokens.len() >= i + cue.len() && cue.iter().zip(&tokens[i..]).all(|(c, t)| c == t)
            })
            .map(|cue| cue.len())
    }
}

fn head(phrase: &[String]) -> &str {
    phrase.last().map(|w| strip_plural(w)).unwrap_or("")
}

fn longest_at(
    accepted: &BTreeSet<Phrase>,
    max_len: usize,
    toks: &[String],
    start: usize,
) -> Option<usize> {
    (1..=max_len.min(toks.len() - start))
        .rev()
        .find(|&n| accepted.contains(&toks[start..start + n]))
}

struct Enumeration {
    enumerator: Phrase,
    items: Vec<Phrase>,
}

impl ReasoningCore for RuleCore {
    fn name(&self) -> &'static str {
        "rule"
    }

    fn extract_terms(
        &self,
        chunk: &TokenChunk,
        _title: &str,
        keywords: &[String],
        known: &[GlossaryTerm],
    ) -> Result<Vec<TermProposal>, CoreError> {
        let sentences: Vec<Vec<String>> = chunk
            .tokens
            .split(|t| is_sentence_end(t))
            .filter(|s| !s.is_empty())
            .map(|s| s.to_vec())
            .collect();

        let mut seeds: Vec<Phrase> = keywords
            .iter()
            .map(String::as_str)
            .chain(known.iter().map(|t| t.label.as_str()))
            .map(|k| self.phrase_of(k))
            .filter(|p| !p.is_empty())
            .collect();
        seeds.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        seeds.dedup();

        let mut accepted: BTreeSet<Phrase> = BTreeSet::new();
        let mut covered: BTreeSet<(usize, usize)> = BTreeSet::new();
        for seed in &seeds {
            for (s, toks) in sentences.iter().enumerate() {
                for i in 0..toks.len().saturating_sub(seed.len() - 1) {
                    if toks[i..i + seed.len()] == seed[..] {
                        accepted.insert(seed.clone());
                        covered.extend((i..i + seed.len()).map(|p| (s, p)));
                    }
                }
            }
        }

        let mut grams: BTreeMap<Phrase, Vec<(usize, usize)>> = BTreeMap::new();
        for (s, toks) in sentences.iter().enumerate() {
            let mut i = 0;
            while i < toks.len() {
                if !self.is_content(&toks[i]) {
                    i += 1;
                    continue;
                }
                let mut j = i;
                while j < toks.len() && self.is_content(&toks[j]) {
                    j += 1;
                }
                for a in i..j {
                    for n in 1..=MAX_NGRAM.min(j - a) {
                        grams
                            .entry(toks[a..a + n].to_vec())
                            .or_default()
                            .push((s, a));
                    }
                }
                i = j;
            }
        }
        let mut ordered: Vec<(Phrase, Vec<(usize, usize)>)> = grams.into_iter().collect();
        ordered.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        for (phrase, occs) in ordered {
            if accepted.contains(&phrase) {
                continue;
            }
            let free: Vec<(usize, usize)> = occs
                .into_iter()
                .filter(|&(s, i)| (i..i + phrase.len()).all(|p| !covered.contains(&(s, p))))
                .collect();
            if free.len() >= 2 {
                for (s, i) in free {
                    covered.extend((i..i + phrase.len()).map(|p| (s, p)));
                }
                accepted.insert(phrase);
            }
        }

        let max_len = accepted.iter().map(Vec::len).max().unwrap_or(1);
        let mut enumerations = Vec::new();
        for toks in &sentences {
            let mut i = 0;
            while i < toks.len() {
                let Some(cue_len) = Self::cue_len_at(toks, i) else {
                    i += 1;
                    continue;
                };
                let mut end = i;
                while end > 0 && self.lexicon.is_stopword(&toks[end - 1]) {
                    end -= 1;
                }
                let tail_start = i + cue_len;
                let mut tail_end = tail_start;
                while tail_end < toks.len() && Self::cue_len_at(toks, tail_end).is_none() {
                    tail_end += 1;
                }
                i = tail_end;
                if end == 0 {
                    continue;
                }
                let enumerator = match (1..=max_len.min(end))
                    .rev()
                    .find(|&n| accepted.contains(&toks[end - n..end]))
                {
                    Some(n) => toks[end - n..end].to_vec(),
                    None if self.is_content(&toks[end - 1]) => vec![toks[end - 1].clone()],
                    None => continue,
                };
                let tail = &toks[..tail_end];
                let mut items = Vec::new();
                let mut pos = tail_start;
                while pos < tail_end {
                    if let Some(n) = longest_at(&accepted, max_len, tail, pos) {
                        items.push(tail[pos..pos + n].to_vec());
                        pos += n;
                    } else if self.is_content(&tail[pos]) {
                        let ehead = head(&enumerator);
                        let grouped = (pos + 1..tail_end.min(pos + MAX_NGRAM))
                            .take_while(|&j| self.is_content(&tail[j]))
                            .find(|&j| strip_plural(&tail[j]) == ehead);
                        let stop = grouped.unwrap_or(pos) + 1;
                        items.push(tail[pos..stop].to_vec());
                        pos = stop;
                    } else if items.is_empty() || CONNECTORS.contains(&tail[pos].as_str()) {
                        pos += 1;
                    } else {
                        break;
                    }
                }
                enumerations.push(Enumeration { enumerator, items });
            }
        }

        let mut labels: BTreeMap<String, Phrase> = BTreeMap::new();
        let mut remember = |p: &Phrase| {
            let key = normalized_key(&p.join(" "));
            labels.entry(key.clone()).or_insert_with(|| p.clone());
            key
        };
        for p in &accepted {
            remember(p);
        }
        let enumerator_keys: BTreeSet<String> = enumerations
            .iter()
            .map(|e| remember(&e.enumerator))
            .collect();
        let mut classes: BTreeSet<String> = enumerator_keys.clone();
        let mut broader: BTreeMap<String, String> = BTreeMap::new();
        let mut members: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for e in &enumerations {
            let ekey = normalized_key(&e.enumerator.join(" "));
            for item in &e.items {
                let ikey = remember(item);
                if ikey == ekey {
                    continue;
                }
                if head(item) == head(&e.enumerator) || enumerator_keys.contains(&ikey) {
                    classes.insert(ikey.clone());
                    broader
                        .entry(ikey)
                        .or_insert_with(|| e.enumerator.join(" "));
                } else {
                    members
                        .entry(ikey)
                        .or_default()
                        .insert(e.enumerator.join(" "));
                }
            }
        }

        let mut out: Vec<TermProposal> = labels
            .into_iter()
            .map(|(key, phrase)| {
                let label = phrase.join(" ");
                match members.get(&key) {
                    Some(of) if !classes.contains(&key) => TermProposal {
                        label,
                        kind: TermKind::Individual,
                        instance_of: of.iter().cloned().collect(),
                        broader: None,
                        definition: None,
                    },
                    _ => TermProposal {
                        label,
                        kind: TermKind::Class,
                        instance_of: Vec::new(),
                        broader: broader.get(&key).cloned(),
                        definition: None,
                    },
                }
            })
            .collect();
        out.sort();
        Ok(out)
    }

    fn confirm_terms(
        &self,
        terms: &[GlossaryTerm],
        heading: &str,
        body: &str,
    ) -> Result<Vec<String>, CoreError> {
        let present: BTreeSet<String> = self
            .phrase_of(&format!("{heading} {body}"))
            .into_iter()
            .collect();
        Ok(terms
            .iter()
            .filter(|t| {
                let words = self.phrase_of(&t.label);
                !words.is_empty() && words.iter().all(|w| present.contains(w))
            })
            .map(|t| t.key.clone())
            .collect())
    }

    fn propose_taxonomy(&self, terms: &[GlossaryTerm]) -> Result<Vec<TaxonomyEdge>, CoreError> {
        let classes: Vec<(&GlossaryTerm, Phrase)> = terms
            .iter()
            .filter(|t| t.is_class())
            .map(|t| {
                (
                    t,
                    words(&t.label)
                        .iter()
                        .map(|w| w.to_lowercase())
                        .collect::<Phrase>(),
                )
            })
            .collect();
        let keys: BTreeSet<&str> = classes.iter().map(|(t, _)| t.key.as_str()).collect();
        let mut edges = Vec::new();
        let mut hinted = BTreeSet::new();
        for (t, _) in &classes {
            if let Some(b) = &t.broader {
                let bkey = normalized_key(b);
                if bkey != t.key && keys.contains(bkey.as_str()) {
                    edges.push(TaxonomyEdge::new(t.key.clone(), bkey));
                    hinted.insert(t.key.as_str());
                }
            }
        }
        for (t, words) in &classes {
            if hinted.contains(t.key.as_str()) || words.is_empty() {
                continue;
            }
            let len = t.label.chars().count();
            let best = classes
                .iter()
                .filter(|(c, cw)| {
                    if c.key == t.key
                        || cw.is_empty()
                        || head(cw) != head(words)
                        || c.label.chars().count() >= len
                    {
                        return false;
                    }
                    let proper_suffix =
                        cw.len() < words.len() && words.ends_with(&cw[..cw.len() - 1]) && {
                            let tail = &words[words.len() - cw.len()..];
                            tail[..tail.len() - 1] == cw[..cw.len() - 1]
                        };
                    !hinted.contains(c.key.as_str()) || proper_suffix
                })
                .map(|(c, cw)| {
                    let shared = words
                        .iter()
                        .rev()
                        .skip(1)
                        .zip(cw.iter().rev().skip(1))
                        .take_while(|(a, b)| a == b)
                        .count();
                    (
                        std::cmp::Reverse(shared),
                        c.label.chars().count(),
                        c.key.clone(),
                    )
                })
                .min();
            if let Some((_, _, parent)) = best {
                edges.push(TaxonomyEdge::new(t.key.clone(), parent));
            }
        }
        edges.sort();
        Ok(edges)
    }

    fn propose_relations(
        &self,
        terms: &[GlossaryTerm],
        sentences: &[String],
    ) -> Result<Vec<AdHocRelation>, CoreError> {
        let classes: BTreeMap<&str, &GlossaryTerm> = terms
            .iter()
            .filter(|t| t.is_class())
            .map(|t| (t.key.as_str(), t))
            .collect();
        let max_len = terms
            .iter()
            .map(|t| self.phrase_of(&t.label).len())
            .max()
            .unwrap_or(0);
        let mut out = BTreeSet::new();
        for sentence in sentences {
            let toks = self.phrase_of(sentence);
            let mut spans: BTreeMap<usize, (usize, &GlossaryTerm)> = BTreeMap::new();
            let mut i = 0;
            while i < toks.len() {
                let hit = (1..=max_len.min(toks.len() - i)).rev().find_map(|n| {
                    classes
                        .get(normalized_key(&toks[i..i + n].join(" ")).as_str())
                        .map(|t| (n, *t))
                });
                match hit {
                    Some((n, t)) => {
                        spans.insert(i, (i + n, t));
                        i += n;
                    }
                    None => i += 1,
                }
            }
            let skip_stop = |mut j: usize, keep: &[&str]| {
                while j < toks.len()
                    && self.lexicon.is_stopword(&toks[j])
                    && !keep.contains(&toks[j].as_str())
                {
                    j += 1;
                }
                j
            };
            for (&start, &(end, x)) in &spans {
                let j = skip_stop(end, &["has", "have", "of"]);
                if j < toks.len() && (toks[j] == "has" || toks[j] == "have") {
                    let k = skip_stop(j + 1, &[]);
                    if let Some(&(_, y)) = spans.get(&k) {
                        if y.key != x.key {
                            out.insert(AdHocRelation {
                                name: lower_camel(&format!("has {}", y.label)),
                                domain: x.key.clone(),
                                range: RelationRange::Term(y.key.clone()),
                                kind: RelationKind::Associative,
                            });
                        }
                    } else if let Some(dt) = toks.get(k).and_then(|w| attribute_type(w)) {
                        out.insert(AdHocRelation {
                            name: lower_camel(&format!("{} {}", x.label, strip_plural(&toks[k]))),
                            domain: x.key.clone(),
                            range: RelationRange::Datatype(dt),
                            kind: RelationKind::Attribute,
                        });
                    }
                }
                if end < toks.len() && toks[end] == "of" {
                    let k = skip_stop(end + 1, &[]);
                    if let Some(&(_, y)) = spans.get(&k) {
                        if y.key != x.key {
                            out.insert(AdHocRelation {
                                name: lower_camel(&format!("{} of", x.label)),
                                domain: x.key.clone(),
                                range: RelationRange::Term(y.key.clone()),
                                kind: RelationKind::Adhoc,
                            });
                        }
                    }
                }
                let _ = start;
            }
            for (j, w) in toks.iter().enumerate() {
                if w != "of" || j == 0 || spans.values().any(|&(e, _)| e == j) {
                    continue;
                }
                let Some(dt) = attribute_type(&toks[j - 1]) else {
                    continue;
                };
                let k = skip_stop(j + 1, &[]);
                if let Some(&(_, y)) = spans.get(&k) {
                    out.insert(AdHocRelation {
                        name: lower_camel(&format!("{} {}", y.label, strip_plural(&toks[j - 1]))),
                        domain: y.key.clone(),
                        range: RelationRange::Datatype(dt),
                        kind: RelationKind::Attribute,
                    });
                }
            }
        }
        Ok(out.into_iter().collect())
    }

    fn summarize_caption(&self, caption: &str) -> Result<String, CoreError> {
        Ok(caption.to_string())
    }
}
