use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use parking_lot::Mutex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::vocab;
use crate::connector::{audit_log, fixed_clock, Body, Clock, ConnectorClient, NodeConfig, NodeServer, NodeState};
use crate::federation::{
    decompose, execute_federated, select_sources, FederationCatalog, LocalGraphClient, QueryClient,
};
use crate::rdf::vocab::{RDF_TYPE, XSD_DECIMAL, XSD_INTEGER};
use crate::rdf::{Graph, Iri, Literal, Term, Triple};
use crate::sparql::{parse_query, Query, SolutionSequence};
use crate::util::sha256_hex;

pub const REQUIRED_TAGS: [&str; 8] = ["RQ-1", "RQ-2", "RQ-3", "RQ-4", "RQ-5", "RQ-6", "RQ-7", "RQ-8"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Catalog,
    Query,
    /// The sender plans and runs a federated query; its own data is read in-process.
    Federated,
    /// The sender inserts a synthetic forecast into its own graph.
    Publish,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FederatedSource {
    pub node: String,
    #[serde(default)]
    pub contract: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecastPayload {
    #[serde(default = "default_horizons")]
    pub horizons: Vec<String>,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_horizons() -> Vec<String> {
    ["short", "medium", "long"].map(String::from).to_vec()
}

fn default_points() -> usize {
    24
}

fn default_expect() -> String {
    "served".into()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioStep {
    pub tag: String,
    #[serde(default)]
    pub description: String,
    pub sender: String,
    #[serde(default)]
    pub receiver: Option<String>,
    pub kind: StepKind,
    #[serde(default)]
    pub contract: Option<String>,
    #[serde(default)]
    pub query: Option<String>,
    #[serde(default)]
    pub sources: Vec<FederatedSource>,
    #[serde(default)]
    pub payload: Option<ForecastPayload>,
    /// `served`, or the rejection reason a negative step must receive.
    #[serde(default = "default_expect")]
    pub expect: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioScript {
    /// Every node answers as if it were this instant.
    pub clock: DateTime<Utc>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub steps: Vec<ScenarioStep>,
}

impl ScenarioScript {
    /// Requirement tags that no step exercises.
    pub fn missing_tags(&self) -> Vec<&'static str> {
        REQUIRED_TAGS
            .iter()
            .copied()
            .filter(|t| !self.steps.iter().any(|s| s.tag == *t))
            .collect()
    }

    pub fn load(path: &Path) -> crate::Result<Self> {
        parse_script(&crate::util::read_text(path)?)
    }
}

pub fn parse_script(text: &str) -> crate::Result<ScenarioScript> {
    let script: ScenarioScript =
        serde_yaml::from_str(text).map_err(|e| crate::Error::Config(format!("scenario script: {e}")))?;
    for (i, step) in script.steps.iter().enumerate() {
        let bad = |m: &str| crate::Error::Config(format!("scenario step {} ({}): {m}", i + 1, step.tag));
        if !REQUIRED_TAGS.contains(&step.tag.as_str()) {
            return Err(bad("tag must be one of RQ-1 to RQ-8"));
        }
        match step.kind {
            StepKind::Catalog | StepKind::Query => {
                if step.receiver.is_none() || step.contract.is_none() {
                    return Err(bad("receiver and contract are required"));
                }
                if step.kind == StepKind::Query && step.query.is_none() {
                    return Err(bad("query is required"));
                }
            }
            StepKind::Federated => {
                if step.query.is_none() || step.sources.is_empty() {
                    return Err(bad("query and sources are required"));
                }
                if let Some(s) = step
                    .sources
                    .iter()
                    .find(|s| s.node != step.sender && s.contract.is_none())
                {
                    return Err(bad(&format!("remote source {:?} needs a contract", s.node)));
                }
            }
            StepKind::Publish => {
                if step.receiver.as_ref().is_some_and(|r| r != &step.sender) {
                    return Err(bad("forecasts are published on the sender"));
                }
            }
        }
        if let Some(q) = &step.query {
            parse_query(q).map_err(|e| bad(&e.to_string()))?;
        }
        if step.expect != "served" && reason_code(&step.expect).is_none() {
            return Err(bad(&format!("unknown expectation {:?}", step.expect)));
        }
    }
    Ok(script)
}

fn reason_code(text: &str) -> Option<crate::connector::RejectionReason> {
    serde_json::from_value(serde_json::Value::String(text.to_owned())).ok()
}

/// Running connectors keyed by node id.
pub struct NodeSet {
    servers: BTreeMap<String, NodeServer>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeList {
    nodes: Vec<std::path::PathBuf>,
}

/// Starts every node listed in a `nodes:` file on an ephemeral local port.
pub fn start_nodes(nodes_file: &Path, clock: Clock) -> crate::Result<NodeSet> {
    let list: NodeList = serde_yaml::from_str(&crate::util::read_text(nodes_file)?)
        .map_err(|e| crate::Error::Config(format!("{}: {e}", nodes_file.display())))?;
    let mut configs = Vec::new();
    for p in &list.nodes {
        configs.push(NodeConfig::load(&crate::util::resolve_relative(nodes_file, p))?);
    }
    NodeSet::start(configs, clock)
}

impl NodeSet {
    pub fn start(configs: Vec<NodeConfig>, clock: Clock) -> crate::Result<Self> {
        let mut servers = BTreeMap::new();
        for cfg in configs {
            if servers.contains_key(&cfg.id) {
                return Err(crate::Error::Config(format!("node {:?} is listed twice", cfg.id)));
            }
            let (state, _) = NodeState::from_config(&cfg)?;
            let server = NodeServer::start(state, "127.0.0.1:0", Arc::clone(&clock))?;
            servers.insert(cfg.id, server);
        }
        Ok(NodeSet { servers })
    }

    pub fn ids(&self) -> Vec<&str> {
        self.servers.keys().map(String::as_str).collect()
    }

    pub fn server(&self, id: &str) -> Option<&NodeServer> {
        self.servers.get(id)
    }

    pub fn state(&self, id: &str) -> Option<&Arc<NodeState>> {
        self.servers.get(id).map(NodeServer::state)
    }

    fn addr(&self, id: &str) -> Result<String, String> {
        self.servers
            .get(id)
            .map(|s| s.addr().to_string())
            .ok_or_else(|| format!("node {id:?} is not running"))
    }
}

/// One request/response pair on the wire.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Exchange {
    pub node: String,
    pub request: String,
    pub response: String,
    pub correlation_id: String,
    pub provenance_record_id: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TranscriptEntry {
    pub step: usize,
    pub tag: String,
    pub kind: StepKind,
    pub sender: String,
    pub receiver: String,
    pub exchanges: Vec<Exchange>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triples: Option<usize>,
    pub expected: String,
    pub outcome: String,
    pub ok: bool,
}

#[derive(Clone, Debug, Default)]
pub struct ScenarioOutcome {
    pub transcript: Vec<TranscriptEntry>,
    /// Set when a step did not meet its expectation; the run stops there.
    pub failure: Option<String>,
    /// Responses without a matching provenance record, and audit findings.
    pub cross_check: Vec<String>,
}

impl ScenarioOutcome {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none() && self.cross_check.is_empty()
    }

    pub fn to_jsonl(&self) -> String {
        self.transcript
            .iter()
            .map(|e| serde_json::to_string(e).expect("transcript serializes") + "\n")
            .collect()
    }

    /// Rejections with `reason` across the transcript, as (step, tag).
    pub fn rejections(&self, reason: &str) -> Vec<(usize, String)> {
        self.transcript
            .iter()
            .flat_map(|e| {
                e.exchanges
                    .iter()
                    .filter(|x| x.reason.as_deref() == Some(reason))
                    .map(|_| (e.step, e.tag.clone()))
            })
            .collect()
    }

    pub fn tags(&self) -> std::collections::BTreeSet<&str> {
        self.transcript.iter().map(|e| e.tag.as_str()).collect()
    }
}

fn record(node: &str, request: &Body, cid: &str, reply: &Body) -> Exchange {
    let reason = match reply {
        Body::Rejection { reason, .. } => Some(reason.as_str().to_owned()),
        _ => None,
    };
    Exchange {
        node: node.to_owned(),
        request: request.type_name().to_owned(),
        response: reply.type_name().to_owned(),
        correlation_id: cid.to_owned(),
        provenance_record_id: reply.provenance_record_id(),
        reason,
    }
}

/// Wraps a connector client so each federated subquery leaves a transcript exchange.
struct RecordingClient {
    client: ConnectorClient,
    node: String,
    prefix: String,
    issued: DateTime<Utc>,
    log: Arc<Mutex<Vec<Exchange>>>,
}

impl QueryClient for RecordingClient {
    fn execute(&self, query: &Query) -> Result<SolutionSequence, String> {
        let text = query.to_string();
        let cid = format!("{}-{}-{}", self.prefix, self.node, &sha256_hex(text.as_bytes())[..12]);
        let body = Body::QueryRequest {
            contract_id: self.client.contract_id.clone(),
            query: text,
        };
        let reply = self
            .client
            .request_as(cid.clone(), self.issued, body.clone())
            .map_err(|e| e.to_string())?;
        self.log.lock().push(record(&self.node, &body, &cid, &reply.body));
        match reply.body {
            Body::QueryResult { results, .. } => SolutionSequence::from_json(&results).map_err(|e| e.to_string()),
            Body::Rejection { reason, message, .. } => Err(format!("rejected with {reason}: {message}")),
            other => Err(format!("unexpected {} reply", other.type_name())),
        }
    }
}

struct StepResult {
    exchanges: Vec<Exchange>,
    rows: Option<usize>,
    triples: Option<usize>,
    outcome: String,
}

impl StepResult {
    fn from_exchanges(exchanges: Vec<Exchange>) -> Self {
        let outcome = exchanges
            .iter()
            .find_map(|x| x.reason.clone())
            .unwrap_or_else(|| "served".to_owned());
        StepResult {
            exchanges,
            rows: None,
            triples: None,
            outcome,
        }
    }
}

/// Runs the steps in order. The first step whose outcome differs from its expectation
/// ends the run and names its requirement tag; afterwards every response is matched
/// against the serving node's provenance log.
pub fn run_scenario(script: &ScenarioScript, nodes: &NodeSet) -> ScenarioOutcome {
    let mut outcome = ScenarioOutcome::default();
    for (i, step) in script.steps.iter().enumerate() {
        let n = i + 1;
        let result = run_step(script, n, step, nodes).unwrap_or_else(|message| StepResult {
            exchanges: Vec::new(),
            rows: None,
            triples: None,
            outcome: format!("error: {message}"),
        });
        let expected = match step.kind {
            StepKind::Publish => "published".to_owned(),
            _ => step.expect.clone(),
        };
        let ok = result.outcome == expected;
        outcome.transcript.push(TranscriptEntry {
            step: n,
            tag: step.tag.clone(),
            kind: step.kind,
            sender: step.sender.clone(),
            receiver: step.receiver.clone().unwrap_or_else(|| step.sender.clone()),
            exchanges: result.exchanges,
            rows: result.rows,
            triples: result.triples,
            expected: expected.clone(),
            outcome: result.outcome.clone(),
            ok,
        });
        if !ok {
            outcome.failure = Some(format!(
                "{} (step {n}): expected {expected}, got {}",
                step.tag, result.outcome
            ));
            break;
        }
    }
    outcome.cross_check = cross_check(&outcome.transcript, nodes);
    outcome
}

fn run_step(script: &ScenarioScript, n: usize, step: &ScenarioStep, nodes: &NodeSet) -> Result<StepResult, String> {
    let prefix = format!("{}-step{n}", step.sender);
    match step.kind {
        StepKind::Catalog | StepKind::Query => {
            let receiver = step.receiver.as_deref().expect("checked at parse");
            let contract = step.contract.clone().expect("checked at parse");
            let client = ConnectorClient::new(nodes.addr(receiver)?, step.sender.clone(), contract.clone());
            let body = match step.kind {
                StepKind::Catalog => Body::CatalogRequest { contract_id: contract },
                _ => Body::QueryRequest {
                    contract_id: contract,
                    query: step.query.clone().expect("checked at parse"),
                },
            };
            let cid = format!("{prefix}-1");
            let reply = client
                .request_as(cid.clone(), script.clock, body.clone())
                .map_err(|e| e.to_string())?;
            let mut result = StepResult::from_exchanges(vec![record(receiver, &body, &cid, &reply.body)]);
            if let Body::QueryResult { results, .. } = &reply.body {
                result.rows = Some(SolutionSequence::from_json(results).map_err(|e| e.to_string())?.len());
            }
            Ok(result)
        }
        StepKind::Federated => run_federated(script, &prefix, step, nodes),
        StepKind::Publish => {
            let state = nodes
                .state(&step.sender)
                .ok_or_else(|| format!("node {:?} is not running", step.sender))?;
            let payload = step.payload.clone().unwrap_or(ForecastPayload {
                horizons: default_horizons(),
                points: default_points(),
            });
            let forecast = forecast_graph(
                &step.sender,
                &payload,
                script.seed ^ (n as u64).wrapping_mul(0x9E37_79B9),
            );
            let inserted = forecast.len();
            state.publish(forecast);
            Ok(StepResult {
                exchanges: Vec::new(),
                rows: None,
                triples: Some(inserted),
                outcome: "published".into(),
            })
        }
    }
}

fn run_federated(
    script: &ScenarioScript,
    prefix: &str,
    step: &ScenarioStep,
    nodes: &NodeSet,
) -> Result<StepResult, String> {
    let log = Arc::new(Mutex::new(Vec::new()));
    let mut descriptions = Vec::new();
    let mut clients: BTreeMap<String, Arc<dyn QueryClient>> = BTreeMap::new();
    for source in &step.sources {
        if source.node == step.sender {
            let state = nodes
                .state(&source.node)
                .ok_or_else(|| format!("node {:?} is not running", source.node))?;
            descriptions.push(state.description());
            clients.insert(
                source.node.clone(),
                Arc::new(LocalGraphClient::new(Arc::clone(&state.graph))),
            );
            continue;
        }
        let contract = source.contract.clone().expect("checked at parse");
        let client = ConnectorClient::new(nodes.addr(&source.node)?, step.sender.clone(), contract.clone());
        let body = Body::CatalogRequest { contract_id: contract };
        let cid = format!("{prefix}-{}-catalog", source.node);
        let reply = client
            .request_as(cid.clone(), script.clock, body.clone())
            .map_err(|e| e.to_string())?;
        log.lock().push(record(&source.node, &body, &cid, &reply.body));
        match reply.body {
            Body::CatalogResponse { source: desc, .. } => descriptions.push(desc),
            _ => return Ok(StepResult::from_exchanges(log.lock().clone())),
        }
        clients.insert(
            source.node.clone(),
            Arc::new(RecordingClient {
                client,
                node: source.node.clone(),
                prefix: prefix.to_owned(),
                issued: script.clock,
                log: Arc::clone(&log),
            }),
        );
    }
    let catalog = FederationCatalog::new(step.sender.clone(), descriptions).map_err(|e| e.to_string())?;
    let query = parse_query(step.query.as_deref().expect("checked at parse")).map_err(|e| e.to_string())?;
    let plan = decompose(&query, &select_sources(&query, &catalog).map_err(|e| e.to_string())?);
    let answer = execute_federated(&plan, &clients);
    let mut exchanges = log.lock().clone();
    exchanges.sort_by(|a, b| {
        (a.request != "CatalogRequest", &a.correlation_id).cmp(&(b.request != "CatalogRequest", &b.correlation_id))
    });
    let mut result = StepResult::from_exchanges(exchanges);
    match answer {
        Ok(solutions) => result.rows = Some(solutions.len()),
        Err(e) if result.outcome == "served" => return Err(e.to_string()),
        Err(_) => {}
    }
    Ok(result)
}

/// A seeded random walk per horizon, typed `energy:Forecast`.
fn forecast_graph(node: &str, payload: &ForecastPayload, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let iri = |s: String| Term::Iri(Iri::new(s).expect("generated IRI is valid"));
    let p = |local: &str| iri(format!("{}{local}", vocab::ENERGY));
    let mut g = Graph::new();
    let mut add = |s: &Term, pred: Term, o: Term| g.insert(Triple::new(s.clone(), pred, o).expect("valid triple"));
    for horizon in &payload.horizons {
        let mut level: i64 = rng.gen_range(2000..8000);
        for hour in 0..payload.points {
            level = (level + rng.gen_range(-300..=300)).max(0);
            let subject = iri(format!("{}forecast/{node}/{horizon}/{hour}", vocab::ENERGY));
            add(&subject, Term::Iri(Iri::from_static(RDF_TYPE)), p("Forecast"));
            add(&subject, p("issuedBy"), iri(format!("{}party/{node}", vocab::ENERGY)));
            add(&subject, p("horizon"), Term::string(horizon.clone()));
            add(
                &subject,
                p("hour"),
                Term::Literal(Literal::typed(hour.to_string(), Iri::from_static(XSD_INTEGER))),
            );
            add(
                &subject,
                p("measure"),
                Term::Literal(Literal::typed(
                    Decimal::new(level, 1).to_string(),
                    Iri::from_static(XSD_DECIMAL),
                )),
            );
        }
    }
    g
}

fn cross_check(transcript: &[TranscriptEntry], nodes: &NodeSet) -> Vec<String> {
    let mut problems = Vec::new();
    let mut logs = BTreeMap::new();
    for entry in transcript {
        for x in &entry.exchanges {
            let records = logs
                .entry(x.node.clone())
                .or_insert_with(|| nodes.state(&x.node).map(|s| s.log.records()).unwrap_or_default());
            let Some(id) = x.provenance_record_id else {
                problems.push(format!(
                    "step {}: {} reply from {} carries no provenance record",
                    entry.step, x.response, x.node
                ));
                continue;
            };
            match records.iter().find(|r| r.id == id) {
                None => problems.push(format!("step {}: {} has no provenance record {id}", entry.step, x.node)),
                Some(r) if r.correlation_id != x.correlation_id => problems.push(format!(
                    "step {}: record {id} on {} belongs to {:?}",
                    entry.step, x.node, r.correlation_id
                )),
                Some(r) if r.activity.is_served() != x.reason.is_none() => problems.push(format!(
                    "step {}: record {id} on {} disagrees with the {} reply",
                    entry.step, x.node, x.response
                )),
                Some(_) => {}
            }
        }
    }
    for id in nodes.ids() {
        let state = nodes.state(id).expect("listed");
        for finding in audit_log(&state.log.records(), &state.contracts, &state.identity) {
            problems.push(format!("{id}: {finding}"));
        }
    }
    problems
}

/// Starts fixture nodes with the script's clock and runs it.
pub fn run_script_file(script_path: &Path, nodes_file: &Path) -> crate::Result<ScenarioOutcome> {
    let script = ScenarioScript::load(script_path)?;
    let nodes = start_nodes(nodes_file, fixed_clock(script.clock))?;
    Ok(run_scenario(&script, &nodes))
}

pub(super) const DEFAULT_SCRIPT: &str = r#"clock: "2020-06-15T12:00:00Z"
seed: 1
steps:
  - tag: RQ-1
    description: TSO reads the balancing agreements it holds with the supplier's providers
    sender: tso
    receiver: supplier
    kind: query
    contract: tso-supplier-2020
    query: |
      PREFIX cim: <urn:ede:cim:>
      PREFIX energy: <http://w3id.org/energy/>
      SELECT ?agreement ?party ?reserve
      WHERE { ?agreement a cim:Agreement ; energy:party ?party ; energy:reserveMW ?reserve . }
  - tag: RQ-2
    description: TSO receives balancing bids from the supplier
    sender: tso
    receiver: supplier
    kind: query
    contract: tso-supplier-2020
    query: |
      PREFIX cim: <urn:ede:cim:>
      PREFIX energy: <http://w3id.org/energy/>
      SELECT ?bid ?area ?direction ?quantity ?provider
      WHERE { ?bid a cim:ReserveReq ; energy:area ?area ; energy:direction ?direction ;
                   energy:quantity ?quantity ; energy:offeredBy ?provider .
              ?provider a cim:BalanceSupplier . }
  - tag: RQ-2
    description: A bid request under last year's contract is refused
    sender: tso
    receiver: supplier
    kind: query
    contract: tso-supplier-2019
    expect: CONTRACT_EXPIRED
    query: |
      PREFIX cim: <urn:ede:cim:>
      SELECT ?bid WHERE { ?bid a cim:ReserveReq . }
  - tag: RQ-3
    description: TSO collects metered output at the producer's connection points
    sender: tso
    receiver: producer
    kind: query
    contract: tso-producer-2020
    query: |
      PREFIX cim: <urn:ede:cim:>
      PREFIX energy: <http://w3id.org/energy/>
      SELECT ?reading ?plant ?hour ?measure
      WHERE { ?reading a cim:ActivePower ; energy:plant ?plant ; energy:hour ?hour ; energy:measure ?measure . }
  - tag: RQ-4
    description: TSO joins its own load with the supplier's bids per control area
    sender: tso
    kind: federated
    sources:
      - { node: tso }
      - { node: supplier, contract: tso-supplier-2020 }
    query: |
      PREFIX cim: <urn:ede:cim:>
      PREFIX energy: <http://w3id.org/energy/>
      SELECT ?point ?load ?bid ?quantity
      WHERE { ?reading a cim:ActivePower ; energy:point ?point ; energy:area ?area ;
                       energy:hour ?hour ; energy:measure ?load .
              ?bid a cim:ReserveReq ; energy:area ?area ; energy:quantity ?quantity .
              FILTER(?hour = 18) }
  - tag: RQ-4
    description: The producer fetches the TSO's balancing plans
    sender: producer
    receiver: tso
    kind: query
    contract: producer-tso-2020
    query: |
      PREFIX cim: <urn:ede:cim:>
      PREFIX energy: <http://w3id.org/energy/>
      SELECT ?plan ?area ?hour ?measure
      WHERE { ?plan a cim:Agreement ; energy:area ?area ; energy:hour ?hour ; energy:measure ?measure . }
  - tag: RQ-5
    description: The supplier receives expected realization from the producer
    sender: supplier
    receiver: producer
    kind: query
    contract: supplier-producer-2020
    query: |
      PREFIX cim: <urn:ede:cim:>
      PREFIX energy: <http://w3id.org/energy/>
      SELECT ?plant ?horizon ?measure
      WHERE { ?s a cim:RegisteredResource ; energy:plant ?plant ; energy:horizon ?horizon ; energy:measure ?measure . }
  - tag: RQ-6
    description: The supplier collects meteorological observations
    sender: supplier
    receiver: meteo
    kind: query
    contract: supplier-meteo-2020
    query: |
      PREFIX energy: <http://w3id.org/energy/>
      SELECT ?station ?hour ?windSpeed
      WHERE { ?o a energy:WeatherObservation ; energy:station ?station ; energy:hour ?hour ; energy:windSpeed ?windSpeed . }
  - tag: RQ-7
    description: The producer publishes its forecasts
    sender: producer
    kind: publish
    payload: { horizons: [short, medium, long], points: 24 }
  - tag: RQ-7
    description: TSO reads the producer's forecasts
    sender: tso
    receiver: producer
    kind: query
    contract: tso-producer-2020
    query: |
      PREFIX energy: <http://w3id.org/energy/>
      SELECT ?f ?horizon ?hour ?measure
      WHERE { ?f a energy:Forecast ; energy:horizon ?horizon ; energy:hour ?hour ; energy:measure ?measure . }
  - tag: RQ-7
    description: The supplier publishes its forecasts
    sender: supplier
    kind: publish
    payload: { horizons: [short, medium, long], points: 24 }
  - tag: RQ-7
    description: TSO reads the supplier's forecasts
    sender: tso
    receiver: supplier
    kind: query
    contract: tso-supplier-2020
    query: |
      PREFIX energy: <http://w3id.org/energy/>
      SELECT ?f ?horizon ?hour ?measure
      WHERE { ?f a energy:Forecast ; energy:horizon ?horizon ; energy:hour ?hour ; energy:measure ?measure . }
  - tag: RQ-8
    description: TSO collects infrastructure health from the producer
    sender: tso
    receiver: producer
    kind: query
    contract: tso-producer-2020
    query: |
      PREFIX cim: <urn:ede:cim:>
      PREFIX energy: <http://w3id.org/energy/>
      SELECT ?asset ?status ?temperature
      WHERE { ?asset a cim:PowerSystemResource ; energy:status ?status ; energy:temperature ?temperature . }
  - tag: RQ-8
    description: TSO collects infrastructure health from the supplier
    sender: tso
    receiver: supplier
    kind: query
    contract: tso-supplier-2020
    query: |
      PREFIX cim: <urn:ede:cim:>
      PREFIX energy: <http://w3id.org/energy/>
      SELECT ?asset ?status ?temperature
      WHERE { ?asset a cim:PowerSystemResource ; energy:status ?status ; energy:temperature ?temperature . }
"#;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::generate_fixtures;

    fn fixture_nodes(seed: u64) -> (tempfile::TempDir, NodeSet, ScenarioScript) {
        let dir = tempfile::tempdir().unwrap();
        generate_fixtures(seed).write_to(dir.path()).unwrap();
        let script = ScenarioScript::load(&dir.path().join("scenario/script.yaml")).unwrap();
        let nodes = start_nodes(&dir.path().join("nodes.yaml"), fixed_clock(script.clock)).unwrap();
        (dir, nodes, script)
    }

    #[test]
    fn full_script_covers_every_requirement() {
        let (_dir, nodes, script) = fixture_nodes(1);
        assert!(script.missing_tags().is_empty());
        let out = run_scenario(&script, &nodes);
        assert_eq!(out.failure, None, "{}", out.to_jsonl());
        assert!(out.cross_check.is_empty(), "{:?}", out.cross_check);
        assert!(out.transcript.len() >= 8);
        assert!(REQUIRED_TAGS.iter().all(|t| out.tags().contains(t)));
        assert_eq!(out.rejections("CONTRACT_EXPIRED"), vec![(3, "RQ-2".to_owned())]);
        let unexpected = out
            .transcript
            .iter()
            .filter(|e| e.expected == "served" && e.outcome != "served")
            .count();
        assert_eq!(unexpected, 0);

        let rq4 = &out.transcript[4];
        assert_eq!(rq4.kind, StepKind::Federated);
        assert!(rq4.rows.unwrap() > 0);
        assert!(rq4.exchanges.iter().all(|x| x.node == "supplier"));
        // 72 forecast points published, then read back.
        assert_eq!(out.transcript[8].triples, Some(72 * 5));
        assert_eq!(out.transcript[9].rows, Some(72));
    }

    #[test]
    fn empty_script_gives_empty_transcript() {
        let (_dir, nodes, mut script) = fixture_nodes(1);
        script.steps.clear();
        let out = run_scenario(&script, &nodes);
        assert!(out.transcript.is_empty() && out.succeeded());
        assert_eq!(out.to_jsonl(), "");
    }

    #[test]
    fn unexpected_rejection_fails_with_the_tag() {
        let (_dir, nodes, mut script) = fixture_nodes(1);
        script.steps.retain(|s| s.expect != "served");
        script.steps[0].expect = "served".into();
        let out = run_scenario(&script, &nodes);
        let failure = out.failure.expect("step must fail");
        assert!(failure.starts_with("RQ-2"), "{failure}");
        assert_eq!(out.transcript.len(), 1);
        // The rejection itself is still recorded and matched.
        assert!(out.cross_check.is_empty(), "{:?}", out.cross_check);
    }

    #[test]
    fn script_validation() {
        let base = "clock: \"2020-06-15T12:00:00Z\"\nsteps:\n";
        assert!(parse_script(base).unwrap().steps.is_empty());
        let bad_tag = format!("{base}  - {{ tag: RQ-9, sender: a, receiver: b, kind: catalog, contract: c }}\n");
        assert!(parse_script(&bad_tag).is_err());
        let no_contract = format!("{base}  - {{ tag: RQ-1, sender: a, receiver: b, kind: catalog }}\n");
        assert!(parse_script(&no_contract).is_err());
        let bad_expect =
            format!("{base}  - {{ tag: RQ-1, sender: a, receiver: b, kind: catalog, contract: c, expect: NOPE }}\n");
        assert!(parse_script(&bad_expect).is_err());
        let ok = format!(
            "{base}  - {{ tag: RQ-1, sender: a, receiver: b, kind: catalog, contract: c, expect: CONTRACT_EXPIRED }}\n"
        );
        assert_eq!(parse_script(&ok).unwrap().missing_tags().len(), 7);
    }

    #[test]
    fn forecasts_are_seeded() {
        let p = ForecastPayload {
            horizons: default_horizons(),
            points: 24,
        };
        assert_eq!(forecast_graph("producer", &p, 5), forecast_graph("producer", &p, 5));
        assert_ne!(forecast_graph("producer", &p, 5), forecast_graph("producer", &p, 6));
        assert_eq!(forecast_graph("producer", &p, 5).len(), 3 * 24 * 5);
    }
}
