//! The connector's append-only audit trail, one JSON object per line.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use super::ConnectorError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActivityKind {
    QueryServed,
    QueryRejected,
    CatalogServed,
    CatalogRejected,
}

impl ActivityKind {
    pub fn is_served(self) -> bool {
        matches!(self, ActivityKind::QueryServed | ActivityKind::CatalogServed)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProvenanceRecord {
    pub id: u64,
    pub activity: ActivityKind,
    pub consumer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contract_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejection: Option<String>,
    pub correlation_id: String,
    pub request_digest: String,
    pub result_digest: String,
    pub timestamp: DateTime<Utc>,
}

/// Fields of a record before the log assigns its id.
#[derive(Clone, Debug)]
pub struct PendingRecord {
    pub activity: ActivityKind,
    pub consumer: String,
    pub contract_id: Option<String>,
    pub rejection: Option<String>,
    pub correlation_id: String,
    pub request_digest: String,
    pub result_digest: String,
    pub timestamp: DateTime<Utc>,
}

struct LogInner {
    file: Option<File>,
    next_id: u64,
    records: Vec<ProvenanceRecord>,
}

/// Appends are serialized by one lock, so ids are strictly increasing in file order.
pub struct ProvenanceLog {
    path: Option<PathBuf>,
    inner: Mutex<LogInner>,
}

impl ProvenanceLog {
    pub fn in_memory() -> Self {
        ProvenanceLog {
            path: None,
            inner: Mutex::new(LogInner {
                file: None,
                next_id: 1,
                records: Vec::new(),
            }),
        }
    }

    /// Opens (or creates) a log file; numbering continues after the last existing record.
    pub fn open(path: &Path) -> crate::Result<Self> {
        let records = if path.exists() { read_log(path)? } else { Vec::new() };
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| crate::Error::io(parent, e))?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| crate::Error::io(path, e))?;
        let next_id = records.last().map_or(1, |r| r.id + 1);
        Ok(ProvenanceLog {
            path: Some(path.to_path_buf()),
            inner: Mutex::new(LogInner {
                file: Some(file),
                next_id,
                records,
            }),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn append(&self, pending: PendingRecord) -> Result<ProvenanceRecord, ConnectorError> {
        let mut inner = self.inner.lock();
        let record = ProvenanceRecord {
            id: inner.next_id,
            activity: pending.activity,
            consumer: pending.consumer,
            contract_id: pending.contract_id,
            rejection: pending.rejection,
            correlation_id: pending.correlation_id,
            request_digest: pending.request_digest,
            result_digest: pending.result_digest,
            timestamp: pending.timestamp,
        };
        if let Some(file) = inner.file.as_mut() {
            let mut line = serde_json::to_string(&record).expect("record serializes");
            line.push('\n');
            file.write_all(line.as_bytes())
                .and_then(|()| file.flush())
                .map_err(|e| ConnectorError::Io(format!("provenance log: {e}")))?;
        }
        inner.next_id += 1;
        inner.records.push(record.clone());
        Ok(record)
    }

    pub fn records(&self) -> Vec<ProvenanceRecord> {
        self.inner.lock().records.clone()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Reads a log file, checking that ids strictly increase.
pub fn read_log(path: &Path) -> crate::Result<Vec<ProvenanceRecord>> {
    let file = File::open(path).map_err(|e| crate::Error::io(path, e))?;
    let mut out: Vec<ProvenanceRecord> = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| crate::Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ProvenanceRecord = serde_json::from_str(&line)
            .map_err(|e| ConnectorError::Config(format!("{}: line {}: {e}", path.display(), i + 1)))?;
        if let Some(prev) = out.last() {
            if record.id <= prev.id {
                return Err(ConnectorError::Config(format!(
                    "{}: line {}: record id {} does not follow {}",
                    path.display(),
                    i + 1,
                    record.id,
                    prev.id
                ))
                .into());
            }
        }
        out.push(record);
    }
    Ok(out)
}
