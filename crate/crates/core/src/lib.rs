//! Energy data ecosystem nodes.
//!
//! Each node builds an RDF knowledge graph from raw energy data through declarative
//! mappings, validates it against shapes, and serves it through a contract-governed
//! connector. Federated queries are answered by source selection, decomposition into
//! per-source subqueries and hash joins over the returned bindings.

pub mod connector;
pub mod domain;
pub mod federation;
pub mod mapping;
pub mod pipeline;
pub mod rdf;
pub mod shapes;
pub mod sparql;
pub mod util;

use std::path::{Path, PathBuf};

use thiserror::Error;

/// Crate-level error for operations that touch files or cross module boundaries.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Rdf {
        context: String,
        #[source]
        source: rdf::RdfError,
    },
    #[error(transparent)]
    Sparql(#[from] sparql::SparqlError),
    #[error(transparent)]
    Mapping(#[from] mapping::MappingError),
    #[error(transparent)]
    Shapes(#[from] shapes::ShapesError),
    #[error(transparent)]
    Federation(#[from] federation::FederationError),
    #[error(transparent)]
    Connector(#[from] connector::ConnectorError),
    #[error(transparent)]
    Pipeline(#[from] pipeline::PipelineError),
    #[error("{0}")]
    Config(String),
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
