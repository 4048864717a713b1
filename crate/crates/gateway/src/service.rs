use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use ontoroute_core::docprep::SourceDocument;
use ontoroute_core::freightnet::{
    load_factors, load_network, MetricFactors, NetworkError, TransportNetwork,
};
use ontoroute_core::kstore::{extract_ontology_view, parse_turtle, Graph, KstoreError};
use ontoroute_core::mcda::{solve_scenario, McdaError, ScenarioResult, ScenarioSpec};
use ontoroute_core::ontogen::{run_pipeline, PipelineConfig, PipelineError, PipelineReport};
use ontoroute_core::query::{evaluate, parse_query, ResultTable};
use ontoroute_core::reasoning::{LlmConfig, LlmCore, ReasoningCore, RuleCore};
use ontoroute_core::samples;
use ontoroute_core::schemagen::{
    derive_schema, emit_ddl, export_property_graph, seed_inserts, PropertyGraphExport,
    RelationalSchema, SkippedProperty,
};

use crate::workspace::{Registry, Workspace, WorkspaceError};

pub const ONTOLOGY_FILE: &str = "ontology.ttl";
pub const DOCUMENT_FILE: &str = "document.json";
pub const HUBS_FILE: &str = "hubs.csv";
pub const SEGMENTS_FILE: &str = "segments.csv";
pub const FACTORS_FILE: &str = "factors.csv";
pub const TRANSFER_FILE: &str = "transfer.json";
pub const SCENARIO_FILE: &str = "scenario.json";
pub const RESULT_FILE: &str = "result.json";
pub const REPORT_FILE: &str = "report.json";
pub const SCHEMA_FILE: &str = "schema.json";
pub const DDL_FILE: &str = "schema.sql";
pub const SEED_FILE: &str = "seed.sql";

#[derive(Debug, Error)]
pub enum ApiError {
    #[error("{message}")]
    BadRequest {
        message: String,
        line: Option<usize>,
        column: Option<usize>,
    },
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Unprocessable(String),
    #[error("{0}")]
    BadGateway(String),
    #[error("{0}")]
    Internal(String),
}

impl ApiError {
    pub fn bad(message: impl Into<String>) -> Self {
        ApiError::BadRequest {
            message: message.into(),
            line: None,
            column: None,
        }
    }

    pub fn status(&self) -> u16 {
        match self {
            ApiError::BadRequest { .. } => 400,
            ApiError::NotFound(_) => 404,
            ApiError::Conflict(_) => 409,
            ApiError::Unprocessable(_) => 422,
            ApiError::BadGateway(_) => 502,
            ApiError::Internal(_) => 500,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ApiError::BadRequest { .. } => "bad_request",
            ApiError::NotFound(_) => "not_found",
            ApiError::Conflict(_) => "conflict",
            ApiError::Unprocessable(_) => "unprocessable",
            ApiError::BadGateway(_) => "bad_gateway",
            ApiError::Internal(_) => "internal",
        }
    }

    /// `{"error": kind, "message": text}` plus `line`/`column` for parse errors.
    pub fn body(&self) -> Value {
        let mut body = serde_json::json!({ "error": self.kind(), "message": self.to_string() });
        if let ApiError::BadRequest {
            line: Some(l),
            column: Some(c),
            ..
        } = self
        {
            body["line"] = (*l).into();
            body["column"] = (*c).into();
        }
        body
    }
}

impl From<WorkspaceError> for ApiError {
    fn from(e: WorkspaceError) -> Self {
        match e {
            WorkspaceError::NotFound { .. } => ApiError::NotFound(e.to_string()),
            WorkspaceError::Conflict { .. } => ApiError::Conflict(e.to_string()),
            WorkspaceError::BadId(_) => ApiError::bad(e.to_string()),
            WorkspaceError::Corrupt(_) | WorkspaceError::Io { .. } => {
                ApiError::Internal(e.to_string())
            }
        }
    }
}

fn turtle_error(e: KstoreError) -> ApiError {
    let (line, column) = match &e {
        KstoreError::Syntax { line, column, .. }
        | KstoreError::UnknownPrefix { line, column, .. } => (Some(*line), Some(*column)),
        _ => (None, None),
    };
    ApiError::BadRequest {
        message: e.to_string(),
        line,
        column,
    }
}

/// Syntax errors are 400, well-formed JSON of the wrong shape is 422.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T, ApiError> {
    serde_json::from_str(text).map_err(|e| {
        let message = format!("{what}: {e}");
        match e.classify() {
            serde_json::error::Category::Data => ApiError::Unprocessable(message),
            _ => ApiError::BadRequest {
                message,
                line: Some(e.line()),
                column: Some(e.column()),
            },
        }
    })
}

fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("response serializes");
    out.push(b'\n');
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoreKind {
    #[default]
    Rule,
    Llm,
}

impl std::str::FromStr for CoreKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rule" => Ok(CoreKind::Rule),
            "llm" => Ok(CoreKind::Llm),
            other => Err(format!("unknown core '{other}' (expected rule or llm)")),
        }
    }
}

/// Contents of the `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GatewayConfig {
    pub pipeline: PipelineConfig,
    pub llm: LlmConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stored {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sections: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hubs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segments: Option<usize>,
}

impl Stored {
    fn id(id: String) -> Self {
        Stored {
            id,
            triples: None,
            sections: None,
            hubs: None,
            segments: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkUpload {
    pub hubs_csv: String,
    pub segments_csv: String,
    /// Defaults to the bundled factor table.
    #[serde(default)]
    pub factors_csv: Option<String>,
    #[serde(default)]
    pub transfer_json: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryRequest {
    pub ontology: String,
    pub query: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineRequest {
    pub document: String,
    #[serde(default)]
    pub core: Option<CoreKind>,
    #[serde(default)]
    pub config: Option<PipelineConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineResponse {
    pub id: String,
    pub modules: Vec<String>,
    pub report: PipelineReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaRequest {
    pub ontology: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemaResponse {
    pub ontology: String,
    pub ddl: String,
    pub schema: RelationalSchema,
    pub skipped: Vec<SkippedProperty>,
    pub seed_sql: String,
    pub seed_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioRequest {
    pub network: String,
    pub scenario: ScenarioSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResponse {
    pub id: String,
    pub network: String,
    pub result: ScenarioResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphResponse {
    pub network: String,
    #[serde(flatten)]
    pub graph: PropertyGraphExport,
    pub nodes_csv: String,
    pub edges_csv: String,
}

/// Every gateway operation. HTTP handlers and CLI subcommands both call
/// these, so their outputs agree by construction.
#[derive(Debug)]
pub struct Service {
    workspace: Workspace,
    core: CoreKind,
    config: GatewayConfig,
}

impl Service {
    pub fn new(workspace: Workspace, core: CoreKind, config: GatewayConfig) -> Self {
        Service {
            workspace,
            core,
            config,
        }
    }

    pub fn workspace(&self) -> &Workspace {
        &self.workspace
    }

    pub fn upload_ontology(&self, turtle: &str, id: Option<&str>) -> Result<Stored, ApiError> {
        let g = parse_turtle(turtle).map_err(turtle_error)?;
        let id = self.workspace.put(
            Registry::Ontologies,
            id,
            &[(ONTOLOGY_FILE, turtle.as_bytes())],
            BTreeMap::new(),
        )?;
        Ok(Stored {
            triples: Some(g.len()),
            ..Stored::id(id)
        })
    }

    pub fn get_ontology(&self, id: &str) -> Result<String, ApiError> {
        Ok(self
            .workspace
            .read_string(Registry::Ontologies, id, ONTOLOGY_FILE)?)
    }

    fn ontology_graph(&self, id: &str) -> Result<Graph, ApiError> {
        let text = self.get_ontology(id)?;
        parse_turtle(&text).map_err(|e| ApiError::Internal(format!("stored ontology {id}: {e}")))
    }

    pub fn upload_document(&self, json: &str, id: Option<&str>) -> Result<Stored, ApiError> {
        let doc: SourceDocument = parse_json(json, "document")?;
        doc.check()
            .map_err(|e| ApiError::Unprocessable(e.to_string()))?;
        let id = self.workspace.put(
            Registry::Documents,
            id,
            &[(DOCUMENT_FILE, json.as_bytes())],
            BTreeMap::new(),
        )?;
        Ok(Stored {
            sections: Some(doc.sections.len()),
            ..Stored::id(id)
        })
    }

    pub fn get_document(&self, id: &str) -> Result<String, ApiError> {
        Ok(self
            .workspace
            .read_string(Registry::Documents, id, DOCUMENT_FILE)?)
    }

    pub fn upload_network(
        &self,
        upload: &NetworkUpload,
        id: Option<&str>,
    ) -> Result<Stored, ApiError> {
        let net = load_network(&upload.hubs_csv, &upload.segments_csv).map_err(network_error)?;
        let factors = upload
            .factors_csv
            .as_deref()
            .unwrap_or(samples::DEMO_FACTORS);
        let transfer = upload
            .transfer_json
            .as_deref()
            .unwrap_or(samples::DEMO_TRANSFER);
        load_factors(factors, transfer).map_err(network_error)?;
        let id = self.workspace.put(
            Registry::Networks,
            id,
            &[
                (HUBS_FILE, upload.hubs_csv.as_bytes()),
                (SEGMENTS_FILE, upload.segments_csv.as_bytes()),
                (FACTORS_FILE, factors.as_bytes()),
                (TRANSFER_FILE, transfer.as_bytes()),
            ],
            BTreeMap::new(),
        )?;
        Ok(Stored {
            hubs: Some(net.hubs().count()),
            segments: Some(net.segments().count()),
            ..Stored::id(id)
        })
    }

    fn network(&self, id: &str) -> Result<(TransportNetwork, MetricFactors), ApiError> {
        let read = |name| self.workspace.read_string(Registry::Networks, id, name);
        let net = load_network(&read(HUBS_FILE)?, &read(SEGMENTS_FILE)?)
            .map_err(|e| ApiError::Internal(format!("stored network {id}: {e}")))?;
        let factors = load_factors(&read(FACTORS_FILE)?, &read(TRANSFER_FILE)?)
            .map_err(|e| ApiError::Internal(format!("stored network {id}: {e}")))?;
        Ok((net, factors))
    }

    pub fn export_graph(&self, id: &str) -> Result<GraphResponse, ApiError> {
        let (net, _) = self.network(id)?;
        let graph = export_property_graph(&net);
        Ok(GraphResponse {
            network: id.to_string(),
            nodes_csv: graph.nodes_csv(),
            edges_csv: graph.edges_csv(),
            graph,
        })
    }

    pub fn run_query(&self, req: &QueryRequest) -> Result<ResultTable, ApiError> {
        let g = self.ontology_graph(&req.ontology)?;
        let q = parse_query(&req.query).map_err(|e| ApiError::bad(e.to_string()))?;
        evaluate(&q, &g).map_err(|e| ApiError::bad(e.to_string()))
    }

    fn make_core(&self, kind: CoreKind) -> Result<Box<dyn ReasoningCore>, ApiError> {
        match kind {
            CoreKind::Rule => Ok(Box::new(RuleCore::new())),
            CoreKind::Llm => LlmCore::new(self.config.llm.clone())
                .map(|c| Box::new(c) as Box<dyn ReasoningCore>)
                .map_err(|e| ApiError::bad(e.to_string())),
        }
    }

    /// Registers the merged ontology under its content address and each
    /// section module as `<id>-s<index>`.
    pub fn run_pipeline(&self, req: &PipelineRequest) -> Result<PipelineResponse, ApiError> {
        let text = self.get_document(&req.document)?;
        let doc =
            SourceDocument::from_json(&text).map_err(|e| ApiError::Internal(e.to_string()))?;
        let core = self.make_core(req.core.unwrap_or(self.core))?;
        let config = req
            .config
            .clone()
            .unwrap_or_else(|| self.config.pipeline.clone());
        let out = run_pipeline(&doc, core.as_ref(), &config).map_err(pipeline_error)?;
        let merged = out.merged.to_turtle();
        let report = to_json_bytes(&out.report);
        let source: BTreeMap<String, String> =
            [("document".to_string(), req.document.clone())].into();
        let id = self.workspace.put(
            Registry::Ontologies,
            None,
            &[(ONTOLOGY_FILE, merged.as_bytes()), (REPORT_FILE, &report)],
            source.clone(),
        )?;
        let mut modules = Vec::new();
        for (i, m) in out.modules.iter().enumerate() {
            let mid = format!("{id}-s{i}");
            let mut meta = source.clone();
            meta.insert("merged".into(), id.clone());
            self.workspace.put(
                Registry::Ontologies,
                Some(&mid),
                &[(ONTOLOGY_FILE, m.to_turtle().as_bytes())],
                meta,
            )?;
            modules.push(mid);
        }
        Ok(PipelineResponse {
            id,
            modules,
            report: out.report,
        })
    }

    /// Stores the DDL, schema JSON and seed script next to the ontology.
    pub fn derive_schema(&self, req: &SchemaRequest) -> Result<SchemaResponse, ApiError> {
        let snap = extract_ontology_view(&self.ontology_graph(&req.ontology)?);
        let out = derive_schema(&snap).map_err(|e| ApiError::Unprocessable(e.to_string()))?;
        let ddl = emit_ddl(&out.schema);
        let seeds = seed_inserts(&snap, &out.schema);
        let resp = SchemaResponse {
            ontology: req.ontology.clone(),
            ddl,
            schema: out.schema,
            skipped: out.skipped,
            seed_sql: seeds.sql,
            seed_rows: seeds.rows,
        };
        self.workspace.attach(
            Registry::Ontologies,
            &req.ontology,
            &[
                (DDL_FILE, resp.ddl.as_bytes()),
                (SCHEMA_FILE, &to_json_bytes(&resp.schema)),
                (SEED_FILE, resp.seed_sql.as_bytes()),
            ],
        )?;
        Ok(resp)
    }

    pub fn solve_scenario(&self, req: &ScenarioRequest) -> Result<ScenarioResponse, ApiError> {
        let (net, factors) = self.network(&req.network)?;
        let result = solve_scenario(&net, &factors, &req.scenario).map_err(mcda_error)?;
        let spec = to_json_bytes(&req.scenario);
        let meta: BTreeMap<String, String> = [("network".to_string(), req.network.clone())].into();
        let id = scenario_id(&spec, &meta);
        let resp = ScenarioResponse {
            id,
            network: req.network.clone(),
            result,
        };
        self.workspace.put(
            Registry::Scenarios,
            Some(&resp.id),
            &[(SCENARIO_FILE, &spec), (RESULT_FILE, &to_json_bytes(&resp))],
            meta,
        )?;
        Ok(resp)
    }

    /// The stored response, byte for byte.
    pub fn get_scenario(&self, id: &str) -> Result<String, ApiError> {
        Ok(self
            .workspace
            .read_string(Registry::Scenarios, id, RESULT_FILE)?)
    }

    pub fn list(&self, registry: Registry) -> Vec<String> {
        self.workspace
            .index()
            .registry(registry)
            .keys()
            .cloned()
            .collect()
    }
}

/// Scenario ids address the request, not the result, so the id is known
/// before solving.
fn scenario_id(spec: &[u8], meta: &BTreeMap<String, String>) -> String {
    crate::workspace::content_id(&[(SCENARIO_FILE, spec)], meta)
}

fn network_error(e: NetworkError) -> ApiError {
    ApiError::Unprocessable(e.to_string())
}

fn mcda_error(e: McdaError) -> ApiError {
    ApiError::Unprocessable(e.to_string())
}

fn pipeline_error(e: PipelineError) -> ApiError {
    match e {
        PipelineError::Config(_) => ApiError::bad(e.to_string()),
        PipelineError::Document(_) | PipelineError::Cycle(_) => {
            ApiError::Unprocessable(e.to_string())
        }
        PipelineError::Core { .. } => ApiError::BadGateway(e.to_string()),
        PipelineError::Emit { .. } => ApiError::Internal(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn service() -> (tempfile::TempDir, Service) {
        let dir = tempfile::tempdir().unwrap();
        let ws = Workspace::open(dir.path()).unwrap();
        (
            dir,
            Service::new(ws, CoreKind::Rule, GatewayConfig::default()),
        )
    }

    #[test]
    fn ontology_round_trip_and_errors() {
        let (_d, s) = service();
        let empty = s.upload_ontology("", None).unwrap();
        assert_eq!(empty.triples, Some(0));
        let id = s.upload_ontology(samples::PIZZA_TTL, None).unwrap().id;
        assert_eq!(s.get_ontology(&id).unwrap(), samples::PIZZA_TTL);
        let err = s
            .upload_ontology("@prefix x: <http://x/> .\nx:a x:b", None)
            .unwrap_err();
        assert_eq!(err.status(), 400);
        assert!(err.body()["line"].is_number());
        assert_eq!(s.get_ontology("nope").unwrap_err().status(), 404);
    }

    #[test]
    fn query_status_codes() {
        let (_d, s) = service();
        let id = s
            .upload_ontology(samples::PIZZA_TTL, Some("pizza"))
            .unwrap()
            .id;
        let veg = QueryRequest {
            ontology: id.clone(),
            query: samples::query("pizza_vegetable_toppings").unwrap().into(),
        };
        assert_eq!(s.run_query(&veg).unwrap().len(), 4);
        let bad = QueryRequest {
            ontology: id,
            query: "SELECT ?x WHERE { ?x nope:y ?z }".into(),
        };
        assert_eq!(s.run_query(&bad).unwrap_err().status(), 400);
        let missing = QueryRequest {
            ontology: "other".into(),
            query: veg.query,
        };
        assert_eq!(s.run_query(&missing).unwrap_err().status(), 404);
    }

    #[test]
    fn schema_codes() {
        let (_d, s) = service();
        let cyc = s.upload_ontology(samples::CYCLIC_TTL, None).unwrap().id;
        assert_eq!(
            s.derive_schema(&SchemaRequest { ontology: cyc })
                .unwrap_err()
                .status(),
            422
        );
        let empty = s.upload_ontology("", None).unwrap().id;
        let out = s.derive_schema(&SchemaRequest { ontology: empty }).unwrap();
        assert!(out.ddl.trim().is_empty());
    }

    #[test]
    fn pipeline_registers_modules_and_is_stable() {
        let (_d, s) = service();
        let doc = s.upload_document(samples::PIZZA_DOC, None).unwrap().id;
        let req = PipelineRequest {
            document: doc,
            core: None,
            config: None,
        };
        let a = s.run_pipeline(&req).unwrap();
        let b = s.run_pipeline(&req).unwrap();
        assert_eq!(a.id, b.id);
        assert_eq!(
            s.get_ontology(&a.id).unwrap(),
            s.get_ontology(&b.id).unwrap()
        );
        for m in &a.modules {
            assert!(s.get_ontology(m).is_ok());
        }
        let llm = PipelineRequest {
            core: Some(CoreKind::Llm),
            ..req.clone()
        };
        assert_eq!(s.run_pipeline(&llm).unwrap_err().status(), 400);
        let missing = PipelineRequest {
            document: "none".into(),
            ..req
        };
        assert_eq!(s.run_pipeline(&missing).unwrap_err().status(), 404);
    }

    #[test]
    fn scenarios_replay_and_report_unreachable() {
        let (_d, s) = service();
        let hubs =
            "id,name,region,intermodal,lon,lat\nA,A,,false,0,0\nB,B,,false,0,0\nC,C,,false,0,0\n";
        let segs =
            "id,from,to,mode,distance_km,slope,one_way,congestion\nAB,A,B,road,10,,false,1\n";
        let net = s
            .upload_network(
                &NetworkUpload {
                    hubs_csv: hubs.into(),
                    segments_csv: segs.into(),
                    factors_csv: None,
                    transfer_json: None,
                },
                None,
            )
            .unwrap()
            .id;
        let spec: ScenarioSpec =
            serde_json::from_str(r#"{"origin":"A","destination":"B","weights":{"cost":1}}"#)
                .unwrap();
        let r = s
            .solve_scenario(&ScenarioRequest {
                network: net.clone(),
                scenario: spec.clone(),
            })
            .unwrap();
        assert_eq!(r.result.rows.len(), 1);
        let replay: ScenarioResponse =
            serde_json::from_str(&s.get_scenario(&r.id).unwrap()).unwrap();
        assert_eq!(replay.id, r.id);
        assert_eq!(replay.result.best, r.result.best);
        let unreachable = ScenarioSpec {
            destination: "C".into(),
            ..spec.clone()
        };
        let u = s
            .solve_scenario(&ScenarioRequest {
                network: net.clone(),
                scenario: unreachable,
            })
            .unwrap();
        assert!(u.result.rows.is_empty());
        let bad = ScenarioSpec {
            destination: "Z".into(),
            ..spec
        };
        let err = s
            .solve_scenario(&ScenarioRequest {
                network: net,
                scenario: bad,
            })
            .unwrap_err();
        assert_eq!(err.status(), 422);
    }

    #[test]
    fn json_error_classes() {
        let e = parse_json::<ScenarioSpec>("{", "scenario").unwrap_err();
        assert_eq!(e.status(), 400);
        let e =
            parse_json::<ScenarioSpec>(r#"{"origin":"A","destination":"B","bogus":1}"#, "scenario")
                .unwrap_err();
        assert_eq!(e.status(), 422);
    }
}
