use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::service::{
    parse_json, ApiError, NetworkUpload, PipelineRequest, QueryRequest, ScenarioRequest,
    SchemaRequest, Service,
};
use crate::workspace::Registry;

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status =
            StatusCode::from_u16(self.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        if status.is_server_error() {
            tracing::error!("{self}");
        }
        (status, Json(self.body())).into_response()
    }
}

#[derive(Debug, Deserialize)]
struct IdParam {
    id: Option<String>,
}

fn text(body: &Bytes) -> Result<&str, ApiError> {
    std::str::from_utf8(body).map_err(|e| ApiError::bad(format!("body is not UTF-8: {e}")))
}

/// Runs `op` on the blocking pool so long solves never stall the reactor.
async fn blocking<T, F>(service: &Arc<Service>, op: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce(&Service) -> Result<T, ApiError> + Send + 'static,
{
    let s = Arc::clone(service);
    tokio::task::spawn_blocking(move || op(&s))
        .await
        .map_err(|e| ApiError::Internal(format!("worker failed: {e}")))?
}

async fn json<T, F>(service: &Arc<Service>, op: F) -> Response
where
    T: Serialize + Send + 'static,
    F: FnOnce(&Service) -> Result<T, ApiError> + Send + 'static,
{
    match blocking(service, op).await {
        Ok(v) => Json(v).into_response(),
        Err(e) => e.into_response(),
    }
}

fn with_type(content_type: &'static str, body: String) -> Response {
    ([(header::CONTENT_TYPE, content_type)], body).into_response()
}

async fn health() -> &'static str {
    "ok"
}

async fn list(State(s): State<Arc<Service>>, Path(registry): Path<String>) -> Response {
    let r = match Registry::ALL.into_iter().find(|r| r.dir() == registry) {
        Some(r) => r,
        None => return ApiError::NotFound(format!("no registry '{registry}'")).into_response(),
    };
    Json(s.list(r)).into_response()
}

async fn post_ontology(
    State(s): State<Arc<Service>>,
    Query(p): Query<IdParam>,
    body: Bytes,
) -> Response {
    json(&s, move |s| {
        s.upload_ontology(text(&body)?, p.id.as_deref())
    })
    .await
}

async fn get_ontology(State(s): State<Arc<Service>>, Path(id): Path<String>) -> Response {
    match blocking(&s, move |s| s.get_ontology(&id)).await {
        Ok(t) => with_type("text/turtle; charset=utf-8", t),
        Err(e) => e.into_response(),
    }
}

async fn post_document(
    State(s): State<Arc<Service>>,
    Query(p): Query<IdParam>,
    body: Bytes,
) -> Response {
    json(&s, move |s| {
        s.upload_document(text(&body)?, p.id.as_deref())
    })
    .await
}

async fn get_document(State(s): State<Arc<Service>>, Path(id): Path<String>) -> Response {
    match blocking(&s, move |s| s.get_document(&id)).await {
        Ok(t) => with_type("application/json", t),
        Err(e) => e.into_response(),
    }
}

async fn post_network(
    State(s): State<Arc<Service>>,
    Query(p): Query<IdParam>,
    body: Bytes,
) -> Response {
    json(&s, move |s| {
        let upload: NetworkUpload = parse_json(text(&body)?, "network upload")?;
        s.upload_network(&upload, p.id.as_deref())
    })
    .await
}

async fn get_graph(State(s): State<Arc<Service>>, Path(id): Path<String>) -> Response {
    json(&s, move |s| s.export_graph(&id)).await
}

async fn post_query(State(s): State<Arc<Service>>, body: Bytes) -> Response {
    json(&s, move |s| {
        s.run_query(&parse_json::<QueryRequest>(text(&body)?, "query request")?)
    })
    .await
}

async fn post_pipeline(State(s): State<Arc<Service>>, body: Bytes) -> Response {
    json(&s, move |s| {
        s.run_pipeline(&parse_json::<PipelineRequest>(
            text(&body)?,
            "pipeline request",
        )?)
    })
    .await
}

async fn post_schema(State(s): State<Arc<Service>>, body: Bytes) -> Response {
    json(&s, move |s| {
        s.derive_schema(&parse_json::<SchemaRequest>(
            text(&body)?,
            "schema request",
        )?)
    })
    .await
}

async fn post_scenario(State(s): State<Arc<Service>>, body: Bytes) -> Response {
    json(&s, move |s| {
        s.solve_scenario(&parse_json::<ScenarioRequest>(
            text(&body)?,
            "scenario request",
        )?)
    })
    .await
}

async fn get_scenario(State(s): State<Arc<Service>>, Path(id): Path<String>) -> Response {
    match blocking(&s, move |s| s.get_scenario(&id)).await {
        Ok(t) => with_type("application/json", t),
        Err(e) => e.into_response(),
    }
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/registries/{registry}", get(list))
        .route("/ontologies", post(post_ontology))
        .route("/ontologies/{id}", get(get_ontology))
        .route("/documents", post(post_document))
        .route("/documents/{id}", get(get_document))
        .route("/networks", post(post_network))
        .route("/networks/{id}/graph", get(get_graph))
        .route("/query", post(post_query))
        .route("/pipeline/run", post(post_pipeline))
        .route("/schema/derive", post(post_schema))
        .route("/scenarios", post(post_scenario))
        .route("/scenarios/{id}", get(get_scenario))
        .with_state(service)
}

pub async fn serve(service: Arc<Service>, host: &str, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind((host, port)).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
