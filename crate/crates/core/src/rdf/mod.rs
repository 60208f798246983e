//! RDF terms, triples and the indexed in-memory graph.

mod graph;
mod ntriples;
mod term;
pub mod vocab;

use thiserror::Error;

pub use graph::{Graph, SharedGraph};
pub use ntriples::{parse_ntriples, serialize_ntriples};
pub use term::{BlankNode, Iri, Literal, Term, Triple};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RdfError {
    #[error("invalid IRI {0:?}: {1}")]
    InvalidIri(String, String),
    #[error("invalid literal: {0}")]
    InvalidLiteral(String),
    #[error("invalid blank node label {0:?}")]
    InvalidBlankNode(String),
    #[error("invalid triple: {0}")]
    InvalidTriple(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// Reads an N-Triples file.
pub fn load_graph(path: &std::path::Path) -> Result<Graph, crate::Error> {
    let text = std::fs::read_to_string(path).map_err(|e| crate::Error::io(path, e))?;
    parse_ntriples(&text).map_err(|e| crate::Error::Rdf {
        context: path.display().to_string(),
        source: e,
    })
}
