use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::Serialize;

use ontoroute_core::query::{render_table, Format};

use crate::service::{
    parse_json, ApiError, CoreKind, GatewayConfig, NetworkUpload, PipelineRequest, QueryRequest,
    ScenarioRequest, SchemaRequest, Service,
};
use crate::workspace::{write_atomic, Workspace};

#[derive(Debug, Parser)]
#[command(
    name = "ontoroute",
    version,
    about = "Ontology and freight route workbench"
)]
pub struct Cli {
    /// Workspace directory, created on first use.
    #[arg(
        long,
        global = true,
        env = "ONTOROUTE_WORKSPACE",
        default_value = "workspace"
    )]
    pub workspace: PathBuf,
    /// Reasoning core for ontology generation.
    #[arg(long, global = true, default_value = "rule")]
    pub core: CoreKind,
    /// JSON file with `pipeline` and `llm` sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, global = true, default_value_t = 8080)]
    pub port: u16,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Store a source document (JSON).
    IngestDoc {
        file: PathBuf,
        #[arg(long)]
        id: Option<String>,
    },
    /// Store an ontology (Turtle).
    IngestOnto {
        file: PathBuf,
        #[arg(long)]
        id: Option<String>,
    },
    /// Generate an ontology from a stored document.
    GenOnto { document: String },
    /// Run a SPARQL query file against a stored ontology.
    Query {
        ontology: String,
        file: PathBuf,
        #[arg(long, default_value = "tsv")]
        format: Format,
    },
    /// Derive the relational schema of a stored ontology.
    DeriveSchema {
        ontology: String,
        /// Print only the DDL script.
        #[arg(long)]
        ddl: bool,
    },
    /// Store a transport network from hub and segment CSV files.
    NetLoad {
        hubs: PathBuf,
        segments: PathBuf,
        #[arg(long)]
        factors: Option<PathBuf>,
        #[arg(long)]
        transfer: Option<PathBuf>,
        #[arg(long)]
        id: Option<String>,
    },
    /// Solve a scenario file on a stored network and print the best key.
    Optimize {
        network: String,
        scenario: PathBuf,
        /// Print the full response instead.
        #[arg(long)]
        json: bool,
    },
    /// Export a stored network as a property graph.
    ExportGraph {
        network: String,
        /// Write nodes.csv and edges.csv here instead of printing JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the HTTP API.
    Serve,
}

fn read(path: &Path) -> Result<String, ApiError> {
    std::fs::read_to_string(path).map_err(|e| ApiError::bad(format!("{}: {e}", path.display())))
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), ApiError> {
    let text =
        serde_json::to_string_pretty(value).map_err(|e| ApiError::Internal(e.to_string()))?;
    writeln!(out, "{text}").map_err(|e| ApiError::Internal(e.to_string()))
}

fn print(out: &mut dyn Write, text: &str) -> Result<(), ApiError> {
    out.write_all(text.as_bytes())
        .map_err(|e| ApiError::Internal(e.to_string()))
}

pub fn load_config(path: Option<&Path>) -> Result<GatewayConfig, ApiError> {
    match path {
        Some(p) => parse_json(&read(p)?, &p.display().to_string()),
        None => Ok(GatewayConfig::default()),
    }
}

pub fn open_service(cli: &Cli) -> Result<Service, ApiError> {
    let config = load_config(cli.config.as_deref())?;
    let ws = Workspace::open(&cli.workspace)?;
    Ok(Service::new(ws, cli.core, config))
}

/// Executes one subcommand, writing its output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), ApiError> {
    let service = open_service(cli)?;
    match &cli.command {
        Command::IngestDoc { file, id } => {
            print_json(out, &service.upload_document(&read(file)?, id.as_deref())?)
        }
        Command::IngestOnto { file, id } => {
            print_json(out, &service.upload_ontology(&read(file)?, id.as_deref())?)
        }
        Command::GenOnto { document } => print_json(
            out,
            &service.run_pipeline(&PipelineRequest {
                document: document.clone(),
                core: None,
                config: None,
            })?,
        ),
        Command::Query {
            ontology,
            file,
            format,
        } => {
            let table = service.run_query(&QueryRequest {
                ontology: ontology.clone(),
                query: read(file)?,
            })?;
            let mut text = render_table(&table, *format);
            if *format == Format::Json {
                text.push('\n');
            }
            print(out, &text)
        }
        Command::DeriveSchema { ontology, ddl } => {
            let resp = service.derive_schema(&SchemaRequest {
                ontology: ontology.clone(),
            })?;
            if *ddl {
                print(out, &resp.ddl)
            } else {
                print_json(out, &resp)
            }
        }
        Command::NetLoad {
            hubs,
            segments,
            factors,
            transfer,
            id,
        } => {
            let upload = NetworkUpload {
                hubs_csv: read(hubs)?,
                segments_csv: read(segments)?,
                factors_csv: factors.as_deref().map(read).transpose()?,
                transfer_json: transfer.as_deref().map(read).transpose()?,
            };
            print_json(out, &service.upload_network(&upload, id.as_deref())?)
        }
        Command::Optimize {
            network,
            scenario,
            json,
        } => {
            let spec = parse_json(&read(scenario)?, &scenario.display().to_string())?;
            let resp = service.solve_scenario(&ScenarioRequest {
                network: network.clone(),
                scenario: spec,
            })?;
            if *json {
                print_json(out, &resp)
            } else {
                let best = resp.result.best.as_deref().unwrap_or("unreachable");
                print(out, &format!("{best}\n"))
            }
        }
        Command::ExportGraph { network, out: dir } => {
            let resp = service.export_graph(network)?;
            match dir {
                Some(dir) => {
                    write_atomic(&dir.join("nodes.csv"), resp.nodes_csv.as_bytes())?;
                    write_atomic(&dir.join("edges.csv"), resp.edges_csv.as_bytes())?;
                    Ok(())
                }
                None => print_json(out, &resp),
            }
        }
        Command::Serve => {
            let rt =
                tokio::runtime::Runtime::new().map_err(|e| ApiError::Internal(e.to_string()))?;
            rt.block_on(crate::http::serve(Arc::new(service), &cli.host, cli.port))
                .map_err(|e| ApiError::Internal(format!("server: {e}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_unknown_core() {
        let cli = Cli::try_parse_from(["ontoroute", "serve"]).unwrap();
        assert_eq!(cli.host, "127.0.0.1");
        assert_eq!(cli.port, 8080);
        assert_eq!(cli.core, CoreKind::Rule);
        assert!(Cli::try_parse_from(["ontoroute", "--core", "magic", "serve"]).is_err());
        let err = Cli::try_parse_from(["ontoroute", "frobnicate"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn query_prints_tsv() {
        let dir = tempfile::tempdir().unwrap();
        let ws = dir.path().join("ws");
        let onto = dir.path().join("p.ttl");
        let q = dir.path().join("q.rq");
        std::fs::write(&onto, ontoroute_core::samples::PIZZA_TTL).unwrap();
        std::fs::write(
            &q,
            ontoroute_core::samples::query("pizza_vegetable_toppings").unwrap(),
        )
        .unwrap();
        let args = |rest: &[&str]| {
            let mut v = vec![
                "ontoroute".to_string(),
                "--workspace".into(),
                ws.display().to_string(),
            ];
            v.extend(rest.iter().map(|s| s.to_string()));
            Cli::try_parse_from(v).unwrap()
        };
        let mut buf = Vec::new();
        run(
            &args(&["ingest-onto", onto.to_str().unwrap(), "--id", "pizza"]),
            &mut buf,
        )
        .unwrap();
        buf.clear();
        run(&args(&["query", "pizza", q.to_str().unwrap()]), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("vegetableTopping"));
    }
}
