use std::io::{BufReader, BufWriter};
use std::net::{TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use chrono::{DateTime, Utc};

use super::message::{read_frame, write_frame, Body, Message};
use super::ConnectorError;
use crate::federation::{ClientFactory, FederationError, QueryClient, SourceDescription};
use crate::sparql::{Query, SolutionSequence};

static NEXT_CORRELATION: AtomicU64 = AtomicU64::new(1);

/// A fresh correlation id, unique within this process.
pub fn correlation_id(sender: &str) -> String {
    format!(
        "{sender}-{}-{}",
        std::process::id(),
        NEXT_CORRELATION.fetch_add(1, Ordering::Relaxed)
    )
}

/// Sends one message over a new connection and waits for the reply.
pub fn exchange(addr: &str, request: &Message, timeout: Duration) -> Result<Message, ConnectorError> {
    let io = |e: std::io::Error| ConnectorError::Io(format!("{addr}: {e}"));
    let sock = addr
        .to_socket_addrs()
        .map_err(io)?
        .next()
        .ok_or_else(|| ConnectorError::Io(format!("{addr}: no address")))?;
    let stream = TcpStream::connect_timeout(&sock, timeout).map_err(io)?;
    stream.set_read_timeout(Some(timeout)).map_err(io)?;
    stream.set_nodelay(true).map_err(io)?;
    let mut writer = BufWriter::new(stream.try_clone().map_err(io)?);
    write_frame(&mut writer, &request.encode()).map_err(io)?;
    let payload = read_frame(&mut BufReader::new(stream))
        .map_err(io)?
        .ok_or_else(|| ConnectorError::Io(format!("{addr}: connection closed without a reply")))?;
    let reply = Message::decode(&payload).map_err(|e| ConnectorError::Decode(e.message))?;
    if reply.correlation_id != request.correlation_id {
        return Err(ConnectorError::Decode(format!(
            "reply correlation id {:?} does not match {:?}",
            reply.correlation_id, request.correlation_id
        )));
    }
    Ok(reply)
}

/// Queries a remote connector under one contract.
#[derive(Clone, Debug)]
pub struct ConnectorClient {
    pub addr: String,
    pub sender: String,
    pub contract_id: String,
    pub timeout: Duration,
}

impl ConnectorClient {
    pub fn new(addr: impl Into<String>, sender: impl Into<String>, contract_id: impl Into<String>) -> Self {
        ConnectorClient {
            addr: addr.into(),
            sender: sender.into(),
            contract_id: contract_id.into(),
            timeout: Duration::from_secs(10),
        }
    }

    pub fn request(&self, body: Body) -> Result<Message, ConnectorError> {
        self.request_as(correlation_id(&self.sender), Utc::now(), body)
    }

    /// Sends with a caller-chosen correlation id and issue time.
    pub fn request_as(
        &self,
        correlation_id: impl Into<String>,
        issued: DateTime<Utc>,
        body: Body,
    ) -> Result<Message, ConnectorError> {
        let msg = Message::new(self.sender.clone(), correlation_id, issued, body);
        exchange(&self.addr, &msg, self.timeout)
    }

    pub fn query_text(&self, query: &str) -> Result<Message, ConnectorError> {
        self.request(Body::QueryRequest {
            contract_id: self.contract_id.clone(),
            query: query.to_owned(),
        })
    }

    pub fn catalog(&self) -> Result<Message, ConnectorError> {
        self.request(Body::CatalogRequest {
            contract_id: self.contract_id.clone(),
        })
    }
}

impl QueryClient for ConnectorClient {
    fn execute(&self, query: &Query) -> Result<SolutionSequence, String> {
        let reply = self.query_text(&query.to_string()).map_err(|e| e.to_string())?;
        match reply.body {
            Body::QueryResult { results, .. } => SolutionSequence::from_json(&results).map_err(|e| e.to_string()),
            Body::Rejection { reason, message, .. } => Err(format!("rejected with {reason}: {message}")),
            other => Err(format!("unexpected {} reply", other.type_name())),
        }
    }
}

/// `tcp://host:port` endpoints; the source's contract id is presented with every query.
#[derive(Clone, Debug)]
pub struct TcpClientFactory {
    pub timeout: Duration,
}

impl Default for TcpClientFactory {
    fn default() -> Self {
        TcpClientFactory {
            timeout: Duration::from_secs(10),
        }
    }
}

impl ClientFactory for TcpClientFactory {
    fn scheme(&self) -> &'static str {
        "tcp"
    }

    fn connect(&self, source: &SourceDescription, consumer: &str) -> Result<Arc<dyn QueryClient>, FederationError> {
        let addr = source.endpoint.strip_prefix("tcp://").unwrap_or(&source.endpoint);
        let contract = source.contract.clone().ok_or_else(|| FederationError::Source {
            source_id: source.id.clone(),
            message: "tcp sources need a contract id".into(),
        })?;
        let mut client = ConnectorClient::new(addr, consumer, contract);
        client.timeout = self.timeout;
        Ok(Arc::new(client))
    }
}
