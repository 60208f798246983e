use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::Deserialize;

use super::contract::{authorize, ContractStore, NodeIdentity, Operation};
use super::message::{Body, Message, RejectionReason};
use super::provenance::{ActivityKind, PendingRecord, ProvenanceLog, ProvenanceRecord};
use crate::federation::SourceDescription;
use crate::mapping::{materialize, MappingDocument, ReaderRegistry};
use crate::rdf::vocab::RDF_TYPE;
use crate::rdf::{Graph, SharedGraph, Term};
use crate::sparql::{evaluate, parse_query};
use crate::util::canonical_digest;

/// A node's YAML configuration. Relative paths resolve against the config file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeConfig {
    pub id: String,
    pub resource: String,
    #[serde(default = "default_listen")]
    pub listen: String,
    #[serde(default)]
    pub graphs: Vec<PathBuf>,
    #[serde(default)]
    pub mappings: Vec<PathBuf>,
    pub contracts: PathBuf,
    pub provenance_log: Option<PathBuf>,
}

fn default_listen() -> String {
    "127.0.0.1:0".into()
}

impl NodeConfig {
    pub fn parse(text: &str) -> Result<Self, super::ConnectorError> {
        serde_yaml::from_str(text).map_err(|e| super::ConnectorError::Config(format!("node config: {e}")))
    }

    pub fn load(path: &Path) -> crate::Result<Self> {
        let mut cfg = Self::parse(&crate::util::read_text(path)?)?;
        let resolve = |p: &Path| crate::util::resolve_relative(path, p);
        cfg.graphs = cfg.graphs.iter().map(|p| resolve(p)).collect();
        cfg.mappings = cfg.mappings.iter().map(|p| resolve(p)).collect();
        cfg.contracts = resolve(&cfg.contracts);
        cfg.provenance_log = cfg.provenance_log.as_deref().map(resolve);
        Ok(cfg)
    }
}

/// Everything a connector needs to answer requests.
pub struct NodeState {
    pub identity: NodeIdentity,
    /// Advertised in catalog responses.
    pub endpoint: String,
    pub graph: SharedGraph,
    pub contracts: ContractStore,
    pub log: ProvenanceLog,
}

impl NodeState {
    pub fn new(identity: NodeIdentity, graph: Graph, contracts: ContractStore, log: ProvenanceLog) -> Self {
        NodeState {
            identity,
            endpoint: String::new(),
            graph: graph.into_shared(),
            contracts,
            log,
        }
    }

    /// Loads graphs, materializes mappings eagerly and opens the provenance log.
    /// Returns the state and the number of records the mappings could not map.
    pub fn from_config(cfg: &NodeConfig) -> crate::Result<(Self, usize)> {
        let mut graph = Graph::new();
        for path in &cfg.graphs {
            graph.union_with(&crate::rdf::load_graph(path)?);
        }
        let readers = ReaderRegistry::default();
        let mut record_errors = 0;
        for path in &cfg.mappings {
            let doc = MappingDocument::load(path)?;
            let out = materialize(&doc, &readers)?;
            record_errors += out.errors.len();
            graph.union_with(&out.graph);
        }
        let contracts = ContractStore::load(&cfg.contracts)?;
        let log = match &cfg.provenance_log {
            Some(p) => ProvenanceLog::open(p)?,
            None => ProvenanceLog::in_memory(),
        };
        let identity = NodeIdentity {
            id: cfg.id.clone(),
            resource: cfg.resource.clone(),
        };
        Ok((NodeState::new(identity, graph, contracts, log), record_errors))
    }

    /// Capabilities derived from the current graph: typed classes and used predicates.
    pub fn description(&self) -> SourceDescription {
        let graph = self.graph.read();
        let rdf_type = Term::Iri(crate::rdf::Iri::from_static(RDF_TYPE));
        let mut predicates = BTreeSet::new();
        let mut classes = BTreeSet::new();
        for t in graph.iter() {
            if let Term::Iri(p) = t.predicate() {
                predicates.insert(p.as_str().to_owned());
            }
            if t.predicate() == &rdf_type {
                if let Term::Iri(c) = t.object() {
                    classes.insert(c.as_str().to_owned());
                }
            }
        }
        SourceDescription {
            id: self.identity.id.clone(),
            endpoint: self.endpoint.clone(),
            contract: None,
            classes: classes.into_iter().collect(),
            predicates: predicates.into_iter().collect(),
        }
    }

    /// Adds triples to the node's own graph.
    pub fn publish(&self, triples: Graph) -> usize {
        let mut g = self.graph.write();
        g.union_with(&triples);
        g.len()
    }
}

fn reply(state: &NodeState, request: &Message, now: DateTime<Utc>, body: Body) -> Message {
    Message::new(state.identity.id.clone(), request.correlation_id.clone(), now, body)
}

/// Answers one decoded message. Every catalog or query request leaves exactly one
/// provenance record, written before the response is returned.
pub fn handle(request: &Message, state: &NodeState, now: DateTime<Utc>) -> Message {
    let (op, contract_id) = match &request.body {
        Body::CatalogRequest { contract_id } => (Operation::Catalog, contract_id),
        Body::QueryRequest { contract_id, .. } => (Operation::Query, contract_id),
        other => {
            return reply(
                state,
                request,
                now,
                Body::Rejection {
                    reason: RejectionReason::Malformed,
                    message: format!("{} is not a request", other.type_name()),
                    provenance_record_id: None,
                },
            )
        }
    };
    let rejected = |reason: RejectionReason, message: String| Body::Rejection {
        reason,
        message,
        provenance_record_id: None,
    };
    let body = match authorize(&state.contracts, &state.identity, &request.sender, contract_id, op, now) {
        Err(reason) => rejected(
            reason,
            format!(
                "contract {contract_id:?} does not allow {} by {:?}",
                op.as_str(),
                request.sender
            ),
        ),
        Ok(_) => match &request.body {
            Body::CatalogRequest { .. } => Body::CatalogResponse {
                source: state.description(),
                provenance_record_id: 0,
            },
            Body::QueryRequest { query, .. } => match parse_query(query) {
                Err(e) => rejected(RejectionReason::Malformed, format!("query: {e}")),
                Ok(q) => {
                    let solutions = evaluate(&q, &state.graph.read());
                    Body::QueryResult {
                        results: solutions.to_json(),
                        provenance_record_id: 0,
                    }
                }
            },
            _ => unreachable!("request kinds matched above"),
        },
    };

    let served = !matches!(body, Body::Rejection { .. });
    let activity = match (op, served) {
        (Operation::Query, true) => ActivityKind::QueryServed,
        (Operation::Query, false) => ActivityKind::QueryRejected,
        (Operation::Catalog, true) => ActivityKind::CatalogServed,
        (Operation::Catalog, false) => ActivityKind::CatalogRejected,
    };
    let rejection = match &body {
        Body::Rejection { reason, .. } => Some(reason.as_str().to_owned()),
        _ => None,
    };
    let pending = PendingRecord {
        activity,
        consumer: request.sender.clone(),
        contract_id: Some(contract_id.clone()),
        rejection,
        correlation_id: request.correlation_id.clone(),
        request_digest: canonical_digest(&request.body.to_json()),
        result_digest: canonical_digest(&body.audit_json()),
        timestamp: now,
    };
    let record_id = match state.log.append(pending) {
        Ok(r) => r.id,
        Err(e) => return reply(state, request, now, rejected(RejectionReason::Internal, e.to_string())),
    };
    let body = match body {
        Body::CatalogResponse { source, .. } => Body::CatalogResponse {
            source,
            provenance_record_id: record_id,
        },
        Body::QueryResult { results, .. } => Body::QueryResult {
            results,
            provenance_record_id: record_id,
        },
        Body::Rejection { reason, message, .. } => Body::Rejection {
            reason,
            message,
            provenance_record_id: Some(record_id),
        },
        other => other,
    };
    reply(state, request, now, body)
}

/// Decodes a raw frame and answers it. `None` means the payload was beyond recovery
/// (no correlation id) and the connection should be closed. Undecodable payloads are
/// not requests and leave no provenance record.
pub fn handle_payload(payload: &[u8], state: &NodeState, now: DateTime<Utc>) -> Option<Message> {
    match Message::decode(payload) {
        Ok(request) => Some(handle(&request, state, now)),
        Err(e) => e.correlation_id.map(|cid| {
            Message::new(
                state.identity.id.clone(),
                cid,
                now,
                Body::Rejection {
                    reason: RejectionReason::Malformed,
                    message: e.message,
                    provenance_record_id: None,
                },
            )
        }),
    }
}

/// Replays served records against the contract store: each must have been authorized
/// at its own timestamp. Returns one message per offending record.
pub fn audit_log(records: &[ProvenanceRecord], contracts: &ContractStore, identity: &NodeIdentity) -> Vec<String> {
    let mut findings = Vec::new();
    let mut prev = 0;
    for r in records {
        if r.id <= prev {
            findings.push(format!("record {}: id does not increase", r.id));
        }
        prev = r.id;
        if !r.activity.is_served() {
            continue;
        }
        let op = match r.activity {
            ActivityKind::QueryServed => Operation::Query,
            _ => Operation::Catalog,
        };
        let Some(cid) = &r.contract_id else {
            findings.push(format!("record {}: served without a contract", r.id));
            continue;
        };
        if let Err(reason) = authorize(contracts, identity, &r.consumer, cid, op, r.timestamp) {
            findings.push(format!("record {}: served although authorization gives {reason}", r.id));
        }
    }
    findings
}
