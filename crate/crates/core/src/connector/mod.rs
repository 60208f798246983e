//! The data-space connector: contract-governed catalog and query endpoints over a
//! length-prefixed JSON protocol, with every request recorded in an append-only log.

mod client;
mod contract;
mod message;
mod node;
mod provenance;
mod server;

use thiserror::Error;

pub use client::{correlation_id, exchange, ConnectorClient, TcpClientFactory};
pub use contract::{authorize, Contract, ContractStore, NodeIdentity, Operation};
pub use message::{read_frame, write_frame, Body, DecodeError, Message, RejectionReason, MAX_FRAME_LEN};
pub use node::{audit_log, handle, handle_payload, NodeConfig, NodeState};
pub use provenance::{read_log, ActivityKind, PendingRecord, ProvenanceLog, ProvenanceRecord};
pub use server::{fixed_clock, system_clock, Clock, NodeServer};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConnectorError {
    #[error("{0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("undecodable message: {0}")]
    Decode(String),
}
