use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{CoreError, ReasoningCore, TermProposal};
use crate::docprep::TokenChunk;
use crate::kstore::Datatype;
use crate::naming::normalized_key;
use crate::ontogen::{
    AdHocRelation, GlossaryTerm, RelationKind, RelationRange, TaxonomyEdge, TermKind,
};

/// Prompt templates with `{name}` placeholders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSet {
    pub extract_terms: String,
    pub confirm_terms: String,
    pub propose_taxonomy: String,
    pub propose_relations: String,
    pub summarize_caption: String,
}

const TEMPLATE_NAMES: [&str; 5] = [
    "extract_terms",
    "confirm_terms",
    "propose_taxonomy",
    "propose_relations",
    "summarize_caption",
];

impl PromptSet {
    pub fn bundled() -> Self {
        PromptSet {
            extract_terms: include_str!("../../resources/prompts/extract_terms.txt").to_string(),
            confirm_terms: include_str!("../../resources/prompts/confirm_terms.txt").to_string(),
            propose_taxonomy: include_str!("../../resources/prompts/propose_taxonomy.txt")
                .to_string(),
            propose_relations: include_str!("../../resources/prompts/propose_relations.txt")
                .to_string(),
            summarize_caption: include_str!("../../resources/prompts/summarize_caption.txt")
                .to_string(),
        }
    }

    /// Reads `<name>.txt` from `dir`; missing files fall back to the bundled
    /// template.
    pub fn from_dir(dir: &Path) -> std::io::Result<Self> {
        let mut set = Self::bundled();
        for name in TEMPLATE_NAMES {
            let path = dir.join(format!("{name}.txt"));
            if !path.exists() {
                continue;
            }
            let text = std::fs::read_to_string(&path)?;
            *set.slot(name) = text;
        }
        Ok(set)
    }

    fn slot(&mut self, name: &str) -> &mut String {
        match name {
            "extract_terms" => &mut self.extract_terms,
            "confirm_terms" => &mut self.confirm_terms,
            "propose_taxonomy" => &mut self.propose_taxonomy,
            "propose_relations" => &mut self.propose_relations,
            _ => &mut self.summarize_caption,
        }
    }
}

/// Substitutes `{name}` placeholders; unknown placeholders are left intact.
pub fn render_template(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let hit = after.find('}').and_then(|close| {
            let name = &after[..close];
            values
                .iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| (close, *v))
        });
        match hit {
            Some((close, v)) => {
                out.push_str(v);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmConfig {
    /// Chat-completions URL of an OpenAI-compatible server.
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    pub timeout_secs: u64,
    pub temperature: f64,
    pub prompt_dir: Option<PathBuf>,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            endpoint: String::new(),
            model: "gpt-4".to_string(),
            api_key_env: "ONTOROUTE_LLM_API_KEY".to_string(),
            timeout_secs: 60,
            temperature: 0.0,
            prompt_dir: None,
        }
    }
}

/// Reasoning core backed by a chat-completions HTTP endpoint.
#[derive(Debug)]
pub struct LlmCore {
    config: LlmConfig,
    prompts: PromptSet,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl LlmCore {
    pub fn new(config: LlmConfig) -> Result<Self, CoreError> {
        if config.endpoint.trim().is_empty() {
            return Err(CoreError::Other("llm endpoint is not configured".into()));
        }
        let prompts = match &config.prompt_dir {
            Some(dir) => PromptSet::from_dir(dir)
                .map_err(|e| CoreError::Other(format!("{}: {e}", dir.display())))?,
            None => PromptSet::bundled(),
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs.max(1)))
            .build()
            .map_err(|e| CoreError::Transport(e.to_string()))?;
        let api_key = std::env::var(&config.api_key_env)
            .ok()
            .filter(|k| !k.is_empty());
        Ok(LlmCore {
            config,
            prompts,
            api_key,
            client,
        })
    }

    pub fn config(&self) -> &LlmConfig {
        &self.config
    }

    fn complete(&self, prompt: String) -> Result<String, CoreError> {
        let body = json!({
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": [{"role": "user", "content": prompt}],
        });
        let mut req = self.client.post(&self.config.endpoint).json(&body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| {
            if e.is_timeout() {
                CoreError::Timeout(self.config.timeout_secs)
            } else {
                CoreError::Transport(e.to_string())
            }
        })?;
        let status = resp.status();
        if !status.is_success() {
            return Err(CoreError::Transport(format!("endpoint answered {status}")));
        }
        let value: Value = resp
            .json()
            .map_err(|e| CoreError::BadResponse(e.to_string()))?;
        value
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| CoreError::BadResponse("missing choices[0].message.content".into()))
    }

    fn complete_list(&self, prompt: String) -> Result<Vec<Value>, CoreError> {
        parse_json_list(&self.complete(prompt)?)
    }
}

/// Extracts the first JSON array from a model answer, tolerating code
/// fences and surrounding prose.
pub fn parse_json_list(content: &str) -> Result<Vec<Value>, CoreError> {
    let (Some(start), Some(end)) = (content.find('['), content.rfind(']')) else {
        return Err(CoreError::BadResponse("no JSON array in response".into()));
    };
    if end < start {
        return Err(CoreError::BadResponse("no JSON array in response".into()));
    }
    match serde_json::from_str::<Value>(&content[start..=end]) {
        Ok(Value::Array(items)) => Ok(items),
        Ok(_) => Err(CoreError::BadResponse("expected a JSON array".into())),
        Err(e) => Err(CoreError::BadResponse(e.to_string())),
    }
}

fn text_field(v: &Value, names: &[&str]) -> Option<String> {
    names
        .iter()
        .find_map(|n| v.get(*n).and_then(Value::as_str))
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
}

fn string_list(v: Option<&Value>) -> Vec<String> {
    match v {
        Some(Value::String(s)) if !s.trim().is_empty() => vec![s.trim().to_string()],
        Some(Value::Array(items)) => items
            .iter()
            .filter_map(Value::as_str)
            .map(|s| s.trim().to_string())
            .collect(),
        _ => Vec::new(),
    }
}

fn datatype_named(name: &str) -> Option<Datatype> {
    match name.trim().to_lowercase().trim_start_matches("xsd:") {
        "string" | "text" => Some(Datatype::String),
        "integer" | "int" => Some(Datatype::Integer),
        "decimal" | "float" | "double" | "number" => Some(Datatype::Decimal),
        "boolean" | "bool" => Some(Datatype::Boolean),
        "datetime" | "date" | "timestamp" => Some(Datatype::Datetime),
        _ => None,
    }
}

fn term_proposal(v: &Value) -> Option<TermProposal> {
    if let Some(s) = v.as_str() {
        return (!s.trim().is_empty()).then(|| TermProposal::class(s.trim()));
    }
    let label = text_field(v, &["label", "term", "name"])?;
    let instance_of = string_list(v.get("instance_of"));
    let kind = match v
        .get("kind")
        .and_then(Value::as_str)
        .map(str::to_lowercase)
        .as_deref()
    {
        Some("individual") | Some("instance") => TermKind::Individual,
        Some(_) => TermKind::Class,
        None if !instance_of.is_empty() => TermKind::Individual,
        None => TermKind::Class,
    };
    Some(TermProposal {
        label,
        kind,
        instance_of,
        broader: text_field(v, &["broader", "parent"]),
        definition: text_field(v, &["definition"]),
    })
}

fn taxonomy_edge(v: &Value) -> Option<TaxonomyEdge> {
    let (child, parent) = match v {
        Value::Array(pair) if pair.len() == 2 => {
            (pair[0].as_str()?.to_string(), pair[1].as_str()?.to_string())
        }
        _ => (text_field(v, &["child"])?, text_field(v, &["parent"])?),
    };
    Some(TaxonomyEdge::new(
        normalized_key(&child),
        normalized_key(&parent),
    ))
}

fn relation(v: &Value) -> Option<AdHocRelation> {
    let name = text_field(v, &["name"])?;
    let domain = normalized_key(&text_field(v, &["domain"])?);
    let range_text = text_field(v, &["range"])?;
    let kind = match v
        .get("kind")
        .and_then(Value::as_str)
        .map(str::to_lowercase)
        .as_deref()
    {
        Some("attribute") => RelationKind::Attribute,
        Some("adhoc") | Some("ad-hoc") => RelationKind::Adhoc,
        _ if datatype_named(&range_text).is_some() => RelationKind::Attribute,
        _ => RelationKind::Associative,
    };
    let range = match (kind, datatype_named(&range_text)) {
        (RelationKind::Attribute, Some(dt)) => RelationRange::Datatype(dt),
        (RelationKind::Attribute, None) => return None,
        _ => RelationRange::Term(normalized_key(&range_text)),
    };
    Some(AdHocRelation {
        name,
        domain,
        range,
        kind,
    })
}

fn labels(terms: &[GlossaryTerm]) -> String {
    terms
        .iter()
        .map(|t| t.label.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

impl ReasoningCore for LlmCore {
    fn name(&self) -> &'static str {
        "llm"
    }

    fn extract_terms(
        &self,
        chunk: &TokenChunk,
        title: &str,
        keywords: &[String],
        known: &[GlossaryTerm],
    ) -> Result<Vec<TermProposal>, CoreError> {
        let prompt = render_template(
            &self.prompts.extract_terms,
            &[
                ("title", title),
                ("keywords", &keywords.join(", ")),
                ("glossary", &labels(known)),
                ("chunk", &chunk.tokens.join(" ")),
            ],
        );
        Ok(self
            .complete_list(prompt)?
            .iter()
            .filter_map(term_proposal)
            .collect())
    }

    fn confirm_terms(
        &self,
        terms: &[GlossaryTerm],
        heading: &str,
        body: &str,
    ) -> Result<Vec<String>, CoreError> {
        if terms.is_empty() {
            return Ok(Vec::new());
        }
        let prompt = render_template(
            &self.prompts.confirm_terms,
            &[
                ("heading", heading),
                ("body", body),
                ("terms", &labels(terms)),
            ],
        );
        Ok(self
            .complete_list(prompt)?
            .iter()
            .filter_map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .or_else(|| text_field(v, &["label", "term"]))
            })
            .collect())
    }

    fn propose_taxonomy(&self, terms: &[GlossaryTerm]) -> Result<Vec<TaxonomyEdge>, CoreError> {
        let classes: Vec<GlossaryTerm> = terms.iter().filter(|t| t.is_class()).cloned().collect();
        if classes.len() < 2 {
            return Ok(Vec::new());
        }
        let prompt = render_template(
            &self.prompts.propose_taxonomy,
            &[("terms", &labels(&classes))],
        );
        Ok(self
            .complete_list(prompt)?
            .iter()
            .filter_map(taxonomy_edge)
            .collect())
    }

    fn propose_relations(
        &self,
        terms: &[GlossaryTerm],
        sentences: &[String],
    ) -> Result<Vec<AdHocRelation>, CoreError> {
        if sentences.is_empty() || terms.is_empty() {
            return Ok(Vec::new());
        }
        let prompt = render_template(
            &self.prompts.propose_relations,
            &[
                ("terms", &labels(terms)),
                ("sentences", &sentences.join("\n")),
            ],
        );
        Ok(self
            .complete_list(prompt)?
            .iter()
            .filter_map(relation)
            .collect())
    }

    fn summarize_caption(&self, caption: &str) -> Result<String, CoreError> {
        let prompt = render_template(&self.prompts.summarize_caption, &[("caption", caption)]);
        let text = self.complete(prompt)?.trim().to_string();
        if text.is_empty() {
            return Err(CoreError::BadResponse("empty summary".into()));
        }
        Ok(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::mpsc;

    /// Serves one canned chat-completions answer per entry, recording the
    /// request bodies.
    fn mock_server(answers: Vec<(u16, String)>) -> (String, mpsc::Receiver<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!(
            "http://{}/v1/chat/completions",
            listener.local_addr().unwrap()
        );
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for (status, content) in answers {
                let (stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                    if let Some(v) = line.to_lowercase().strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                }
                let mut body = vec![0; len];
                reader.read_exact(&mut body).unwrap();
                tx.send(String::from_utf8(body).unwrap()).unwrap();
                let payload =
                    json!({"choices": [{"message": {"role": "assistant", "content": content}}]})
                        .to_string();
                let mut stream = stream;
                write!(
                    stream,
                    "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{payload}",
                    payload.len()
                )
                .unwrap();
            }
        });
        (url, rx)
    }

    fn core(url: String) -> LlmCore {
        LlmCore::new(LlmConfig {
            endpoint: url,
            api_key_env: "ONTOROUTE_TEST_UNSET_KEY".into(),
            timeout_secs: 5,
            ..LlmConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn placeholders() {
        assert_eq!(
            render_template("{a} and {b} {c}", &[("a", "x"), ("b", "{a}")]),
            "x and {a} {c}"
        );
        assert_eq!(render_template("no {", &[]), "no {");
    }

    #[test]
    fn json_list_extraction() {
        let v = parse_json_list("Sure:\n```json\n[\"a\", {\"label\": \"b\"}]\n```").unwrap();
        assert_eq!(v.len(), 2);
        assert!(parse_json_list("nothing here").is_err());
        assert!(parse_json_list("] [").is_err());
    }

    #[test]
    fn extract_terms_over_http() {
        let answer = r#"```json
[{"label": "onion", "kind": "individual", "instance_of": "vegetable toppings"}, "vegetable toppings"]
```"#;
        let (url, rx) = mock_server(vec![(200, answer.to_string())]);
        let core = core(url);
        let chunk = TokenChunk {
            tokens: vec!["onion".into(), ".".into()],
            section_index: 0,
            overlap_prefix_len: 0,
        };
        let terms = core
            .extract_terms(&chunk, "Pizza", &["toppings".into()], &[])
            .unwrap();
        assert_eq!(
            terms[0],
            TermProposal::individual("onion", "vegetable toppings")
        );
        assert_eq!(terms[1], TermProposal::class("vegetable toppings"));
        let sent: Value = serde_json::from_str(&rx.recv().unwrap()).unwrap();
        let prompt = sent["messages"][0]["content"].as_str().unwrap();
        assert!(prompt.contains("titled \"Pizza\"") && prompt.contains("onion ."));
        assert_eq!(sent["model"], "gpt-4");
    }

    #[test]
    fn relations_and_taxonomy_over_http() {
        let (url, _rx) = mock_server(vec![
            (200, r#"[{"child": "Vegetable Toppings", "parent": "pizza toppings"}, ["a", "b"]]"#.into()),
            (
                200,
                r#"[{"name": "hasBase", "domain": "pizza", "range": "base"}, {"name": "pizzaName", "domain": "pizza", "range": "xsd:string", "kind": "attribute"}]"#
                    .into(),
            ),
        ]);
        let core = core(url);
        let terms = vec![GlossaryTerm::class("pizza"), GlossaryTerm::class("base")];
        let edges = core.propose_taxonomy(&terms).unwrap();
        assert_eq!(
            edges[0],
            TaxonomyEdge::new("vegetable_topping", "pizza_topping")
        );
        let rels = core
            .propose_relations(&terms, &["a pizza has a base".into()])
            .unwrap();
        assert_eq!(rels[0].kind, RelationKind::Associative);
        assert_eq!(rels[1].range, RelationRange::Datatype(Datatype::String));
    }

    #[test]
    fn http_errors_surface() {
        let (url, _rx) = mock_server(vec![(500, "[]".into()), (200, "not a list".into())]);
        let core = core(url);
        assert!(matches!(
            core.summarize_caption("x"),
            Err(CoreError::Transport(_))
        ));
        let terms = vec![GlossaryTerm::class("a")];
        assert!(matches!(
            core.confirm_terms(&terms, "h", "b"),
            Err(CoreError::BadResponse(_))
        ));
        assert!(LlmCore::new(LlmConfig::default()).is_err());
    }
}
