//! HTTP service, CLI and file-backed workspace over the ontoroute engines.

pub mod cli;
pub mod http;
pub mod service;
pub mod workspace;

pub use service::{ApiError, CoreKind, GatewayConfig, Service};
pub use workspace::{Registry, Workspace, WorkspaceError};
