use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use super::catalog::{FederationCatalog, SourceDescription};
use super::plan::DecomposedQuery;
use super::FederationError;
use crate::rdf::SharedGraph;
use crate::sparql::{evaluate, Query, SolutionSequence};

/// Runs one subquery against one federation member.
pub trait QueryClient: Send + Sync {
    fn execute(&self, query: &Query) -> Result<SolutionSequence, String>;
}

/// Evaluates against an in-process graph.
pub struct LocalGraphClient {
    graph: SharedGraph,
}

impl LocalGraphClient {
    pub fn new(graph: SharedGraph) -> Self {
        LocalGraphClient { graph }
    }
}

impl QueryClient for LocalGraphClient {
    fn execute(&self, query: &Query) -> Result<SolutionSequence, String> {
        Ok(evaluate(query, &self.graph.read()))
    }
}

/// Builds clients for endpoints of one URI scheme.
pub trait ClientFactory: Send + Sync {
    fn scheme(&self) -> &'static str;
    fn connect(&self, source: &SourceDescription, consumer: &str) -> Result<Arc<dyn QueryClient>, FederationError>;
}

/// `file:<path>`: loads an N-Triples file and answers locally, without contracts.
pub struct LocalGraphFactory;

impl ClientFactory for LocalGraphFactory {
    fn scheme(&self) -> &'static str {
        "file"
    }

    fn connect(&self, source: &SourceDescription, _consumer: &str) -> Result<Arc<dyn QueryClient>, FederationError> {
        let path = source.endpoint.strip_prefix("file:").unwrap_or(&source.endpoint);
        let graph = crate::rdf::load_graph(Path::new(path)).map_err(|e| FederationError::Source {
            source_id: source.id.clone(),
            message: e.to_string(),
        })?;
        Ok(Arc::new(LocalGraphClient::new(graph.into_shared())))
    }
}

/// Client factories keyed by endpoint scheme.
#[derive(Clone)]
pub struct ClientRegistry {
    factories: BTreeMap<&'static str, Arc<dyn ClientFactory>>,
}

impl Default for ClientRegistry {
    fn default() -> Self {
        let mut r = ClientRegistry::empty();
        r.register(Arc::new(LocalGraphFactory));
        r.register(Arc::new(crate::connector::TcpClientFactory::default()));
        r
    }
}

impl ClientRegistry {
    pub fn empty() -> Self {
        ClientRegistry {
            factories: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, factory: Arc<dyn ClientFactory>) {
        self.factories.insert(factory.scheme(), factory);
    }

    pub fn schemes(&self) -> Vec<&'static str> {
        self.factories.keys().copied().collect()
    }

    pub fn connect(&self, source: &SourceDescription, consumer: &str) -> Result<Arc<dyn QueryClient>, FederationError> {
        let scheme = source.endpoint.split_once(':').map(|(s, _)| s).unwrap_or("");
        let factory = self.factories.get(scheme).ok_or_else(|| FederationError::Source {
            source_id: source.id.clone(),
            message: format!(
                "unsupported endpoint scheme {scheme:?} (known: {})",
                self.schemes().join(", ")
            ),
        })?;
        factory.connect(source, consumer)
    }

    /// One client per source the plan touches.
    pub fn connect_all(
        &self,
        catalog: &FederationCatalog,
        plan: &DecomposedQuery,
    ) -> Result<BTreeMap<String, Arc<dyn QueryClient>>, FederationError> {
        let mut out = BTreeMap::new();
        for id in plan.subqueries.iter().flat_map(|s| &s.sources) {
            if out.contains_key(id) {
                continue;
            }
            let source = catalog
                .source(id)
                .ok_or_else(|| FederationError::MissingClient(id.clone()))?;
            out.insert(id.clone(), self.connect(source, &catalog.consumer)?);
        }
        Ok(out)
    }
}
