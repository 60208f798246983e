//! Message envelopes and the length-prefixed frame codec.
//!
//! A frame is a 4-byte big-endian payload length followed by that many bytes of UTF-8
//! JSON: `{"type", "sender", "correlationId", "issued", "body"}`.

use std::fmt;
use std::io::{self, Read, Write};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::federation::SourceDescription;

/// Frames larger than this are refused without reading the payload.
pub const MAX_FRAME_LEN: usize = 16 * 1024 * 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RejectionReason {
    NotAuthorized,
    ContractExpired,
    ContractNotYetValid,
    UnknownContract,
    OperationNotPermitted,
    Malformed,
    Internal,
}

impl RejectionReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectionReason::NotAuthorized => "NOT_AUTHORIZED",
            RejectionReason::ContractExpired => "CONTRACT_EXPIRED",
            RejectionReason::ContractNotYetValid => "CONTRACT_NOT_YET_VALID",
            RejectionReason::UnknownContract => "UNKNOWN_CONTRACT",
            RejectionReason::OperationNotPermitted => "OPERATION_NOT_PERMITTED",
            RejectionReason::Malformed => "MALFORMED",
            RejectionReason::Internal => "INTERNAL",
        }
    }
}

impl fmt::Display for RejectionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Body {
    CatalogRequest {
        contract_id: String,
    },
    CatalogResponse {
        source: SourceDescription,
        provenance_record_id: u64,
    },
    QueryRequest {
        contract_id: String,
        query: String,
    },
    QueryResult {
        results: Value,
        provenance_record_id: u64,
    },
    Rejection {
        reason: RejectionReason,
        message: String,
        provenance_record_id: Option<u64>,
    },
}

impl Body {
    pub fn type_name(&self) -> &'static str {
        match self {
            Body::CatalogRequest { .. } => "CatalogRequest",
            Body::CatalogResponse { .. } => "CatalogResponse",
            Body::QueryRequest { .. } => "QueryRequest",
            Body::QueryResult { .. } => "QueryResult",
            Body::Rejection { .. } => "Rejection",
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Body::CatalogRequest { contract_id } => json!({ "contractId": contract_id }),
            Body::CatalogResponse {
                source,
                provenance_record_id,
            } => json!({ "source": source, "provenanceRecordId": provenance_record_id }),
            Body::QueryRequest { contract_id, query } => json!({ "contractId": contract_id, "query": query }),
            Body::QueryResult {
                results,
                provenance_record_id,
            } => json!({ "results": results, "provenanceRecordId": provenance_record_id }),
            Body::Rejection {
                reason,
                message,
                provenance_record_id,
            } => {
                let mut v = json!({ "reason": reason, "message": message });
                if let Some(id) = provenance_record_id {
                    v["provenanceRecordId"] = json!(id);
                }
                v
            }
        }
    }

    /// The body as audited: everything except the provenance record id it will carry.
    pub fn audit_json(&self) -> Value {
        let mut v = self.to_json();
        if let Some(obj) = v.as_object_mut() {
            obj.remove("provenanceRecordId");
        }
        v
    }

    pub fn provenance_record_id(&self) -> Option<u64> {
        match self {
            Body::CatalogResponse {
                provenance_record_id, ..
            }
            | Body::QueryResult {
                provenance_record_id, ..
            } => Some(*provenance_record_id),
            Body::Rejection {
                provenance_record_id, ..
            } => *provenance_record_id,
            _ => None,
        }
    }

    fn from_json(kind: &str, body: Value) -> Result<Body, String> {
        let field = |name: &str| -> Result<&Value, String> {
            body.get(name).ok_or_else(|| format!("{kind} body lacks {name:?}"))
        };
        let string = |name: &str| -> Result<String, String> {
            field(name)?
                .as_str()
                .map(str::to_owned)
                .ok_or_else(|| format!("{kind} body field {name:?} must be a string"))
        };
        let record_id = |required: bool| -> Result<Option<u64>, String> {
            match body.get("provenanceRecordId") {
                Some(v) => v
                    .as_u64()
                    .map(Some)
                    .ok_or_else(|| "provenanceRecordId must be a non-negative integer".to_owned()),
                None if required => Err(format!("{kind} body lacks \"provenanceRecordId\"")),
                None => Ok(None),
            }
        };
        if !body.is_object() {
            return Err("body must be an object".into());
        }
        Ok(match kind {
            "CatalogRequest" => Body::CatalogRequest {
                contract_id: string("contractId")?,
            },
            "QueryRequest" => Body::QueryRequest {
                contract_id: string("contractId")?,
                query: string("query")?,
            },
            "CatalogResponse" => Body::CatalogResponse {
                source: serde_json::from_value(field("source")?.clone()).map_err(|e| e.to_string())?,
                provenance_record_id: record_id(true)?.expect("required"),
            },
            "QueryResult" => Body::QueryResult {
                results: field("results")?.clone(),
                provenance_record_id: record_id(true)?.expect("required"),
            },
            "Rejection" => Body::Rejection {
                reason: serde_json::from_value(field("reason")?.clone()).map_err(|e| e.to_string())?,
                message: string("message")?,
                provenance_record_id: record_id(false)?,
            },
            other => return Err(format!("unknown message type {other:?}")),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Message {
    pub sender: String,
    pub correlation_id: String,
    pub issued: DateTime<Utc>,
    pub body: Body,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct Envelope {
    #[serde(rename = "type")]
    kind: String,
    sender: String,
    correlation_id: String,
    issued: String,
    body: Value,
}

/// A payload that could not be decoded into a [`Message`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeError {
    /// Present when the payload was JSON carrying a string `correlationId`.
    pub correlation_id: Option<String>,
    pub message: String,
}

impl Message {
    pub fn new(
        sender: impl Into<String>,
        correlation_id: impl Into<String>,
        issued: DateTime<Utc>,
        body: Body,
    ) -> Self {
        Message {
            sender: sender.into(),
            correlation_id: correlation_id.into(),
            issued,
            body,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "type": self.body.type_name(),
            "sender": self.sender,
            "correlationId": self.correlation_id,
            "issued": self.issued.to_rfc3339_opts(SecondsFormat::Millis, true),
            "body": self.body.to_json(),
        })
    }

    pub fn encode(&self) -> Vec<u8> {
        crate::util::canonical_json(&self.to_json()).into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Message, DecodeError> {
        let value: Value = serde_json::from_slice(bytes).map_err(|e| DecodeError {
            correlation_id: None,
            message: format!("invalid JSON: {e}"),
        })?;
        let correlation_id = value.get("correlationId").and_then(Value::as_str).map(str::to_owned);
        let fail = |message: String| DecodeError {
            correlation_id: correlation_id.clone(),
            message,
        };
        let env: Envelope = serde_json::from_value(value.clone()).map_err(|e| fail(format!("envelope: {e}")))?;
        let issued = DateTime::parse_from_rfc3339(&env.issued)
            .map_err(|e| fail(format!("issued: {e}")))?
            .with_timezone(&Utc);
        let body = Body::from_json(&env.kind, env.body).map_err(fail)?;
        Ok(Message {
            sender: env.sender,
            correlation_id: env.correlation_id,
            issued,
            body,
        })
    }

    pub fn is_request(&self) -> bool {
        matches!(self.body, Body::CatalogRequest { .. } | Body::QueryRequest { .. })
    }
}

pub fn write_frame(w: &mut impl Write, payload: &[u8]) -> io::Result<()> {
    let len = u32::try_from(payload.len())
        .ok()
        .filter(|&n| n as usize <= MAX_FRAME_LEN)
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "frame too large"))?;
    w.write_all(&len.to_be_bytes())?;
    w.write_all(payload)?;
    w.flush()
}

/// Reads one frame; `Ok(None)` on a clean end of stream before the length prefix.
pub fn read_frame(r: &mut impl Read) -> io::Result<Option<Vec<u8>>> {
    let mut len = [0u8; 4];
    let mut filled = 0;
    while filled < 4 {
        match r.read(&mut len[filled..])? {
            0 if filled == 0 => return Ok(None),
            0 => return Err(io::ErrorKind::UnexpectedEof.into()),
            n => filled += n,
        }
    }
    let len = u32::from_be_bytes(len) as usize;
    if len > MAX_FRAME_LEN {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("frame of {len} bytes exceeds limit"),
        ));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    Ok(Some(buf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn now() -> DateTime<Utc> {
        "2020-06-01T12:00:00.250Z".parse().unwrap()
    }

    #[test]
    fn envelope_round_trip() {
        let m = Message::new(
            "tso",
            "c-1",
            now(),
            Body::QueryRequest {
                contract_id: "k".into(),
                query: "SELECT * WHERE { ?s ?p ?o }".into(),
            },
        );
        let bytes = m.encode();
        let text = std::str::from_utf8(&bytes).unwrap();
        assert!(text.starts_with(r#"{"body":{"contractId":"k""#), "{text}");
        assert!(text.contains(r#""type":"QueryRequest""#));
        assert_eq!(Message::decode(&bytes).unwrap(), m);
    }

    #[test]
    fn rejection_reason_wire_names() {
        let v = serde_json::to_value(RejectionReason::ContractNotYetValid).unwrap();
        assert_eq!(v, "CONTRACT_NOT_YET_VALID");
        assert_eq!(RejectionReason::Malformed.to_string(), "MALFORMED");
    }

    #[test]
    fn decode_errors_keep_correlation_when_possible() {
        let e = Message::decode(b"{not json").unwrap_err();
        assert_eq!(e.correlation_id, None);
        let e = Message::decode(
            br#"{"type":"QueryRequest","correlationId":"c9","sender":"x","issued":"2020-01-01T00:00:00Z","body":{}}"#,
        )
        .unwrap_err();
        assert_eq!(e.correlation_id.as_deref(), Some("c9"));
        let e = Message::decode(
            br#"{"type":"Bogus","correlationId":"c9","sender":"x","issued":"2020-01-01T00:00:00Z","body":{}}"#,
        )
        .unwrap_err();
        assert!(e.message.contains("Bogus"));
    }

    #[test]
    fn frames_round_trip_and_limits() {
        let mut buf = Vec::new();
        write_frame(&mut buf, b"hello").unwrap();
        write_frame(&mut buf, b"").unwrap();
        assert_eq!(&buf[..4], &[0, 0, 0, 5]);
        let mut r = &buf[..];
        assert_eq!(read_frame(&mut r).unwrap().unwrap(), b"hello");
        assert_eq!(read_frame(&mut r).unwrap().unwrap(), b"");
        assert_eq!(read_frame(&mut r).unwrap(), None);

        let mut big = &(u32::MAX.to_be_bytes())[..];
        assert!(read_frame(&mut big).is_err());
        let mut truncated = &[0u8, 0, 0, 9, b'x'][..];
        assert!(read_frame(&mut truncated).is_err());
        let mut partial_len = &[0u8, 0][..];
        assert!(read_frame(&mut partial_len).is_err());
    }

    proptest! {
        #[test]
        fn arbitrary_bytes_never_panic_the_decoder(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
            let _ = Message::decode(&bytes);
            let mut r = &bytes[..];
            let _ = read_frame(&mut r);
        }
    }
}
