//! Federated query processing: pick the sources able to answer each triple pattern,
//! split the query into per-source subqueries, run them through query clients and
//! join the returned bindings.

mod catalog;
mod clients;
mod exec;
mod plan;

use thiserror::Error;

pub use catalog::{parse_catalog, FederationCatalog, SourceDescription};
pub use clients::{ClientFactory, ClientRegistry, LocalGraphClient, LocalGraphFactory, QueryClient};
pub use exec::{execute_federated, hash_join, Relation};
pub use plan::{decompose, select_sources, DecomposedQuery, JoinEdge, SourceSelection, Subquery};

use crate::sparql::{parse_query, SolutionSequence};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FederationError {
    #[error("catalog: {0}")]
    Catalog(String),
    #[error("no source can answer pattern {index}: {pattern}")]
    Unanswerable { index: usize, pattern: String },
    #[error("source {source_id:?} failed: {message}")]
    Source { source_id: String, message: String },
    #[error("no query client for source {0:?}")]
    MissingClient(String),
}

/// Parse, select, decompose and execute in one call, connecting clients through `registry`.
pub fn federated_query(
    text: &str,
    catalog: &FederationCatalog,
    registry: &ClientRegistry,
) -> crate::Result<SolutionSequence> {
    let query = parse_query(text)?;
    let selection = select_sources(&query, catalog)?;
    let plan = decompose(&query, &selection);
    let clients = registry.connect_all(catalog, &plan)?;
    Ok(execute_federated(&plan, &clients)?)
}
