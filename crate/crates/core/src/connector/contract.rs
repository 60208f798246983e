use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::message::RejectionReason;
use super::ConnectorError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operation {
    Catalog,
    Query,
}

impl Operation {
    pub fn as_str(self) -> &'static str {
        match self {
            Operation::Catalog => "catalog",
            Operation::Query => "query",
        }
    }
}

/// A time-windowed grant from `provider` to `consumer` over one resource.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Contract {
    pub id: String,
    pub provider: String,
    pub consumer: String,
    pub resource: String,
    pub operations: Vec<Operation>,
    pub not_before: DateTime<Utc>,
    pub expiry: DateTime<Utc>,
    #[serde(default)]
    pub purpose: String,
}

impl Contract {
    fn check(&self) -> Result<(), String> {
        for (name, value) in [
            ("id", &self.id),
            ("provider", &self.provider),
            ("consumer", &self.consumer),
            ("resource", &self.resource),
        ] {
            if value.is_empty() {
                return Err(format!("contract {:?}: {name} must be non-empty", self.id));
            }
        }
        if self.not_before >= self.expiry {
            return Err(format!("contract {:?}: not_before must precede expiry", self.id));
        }
        Ok(())
    }

    pub fn permits(&self, op: Operation) -> bool {
        self.operations.contains(&op)
    }
}

/// The identity a connector presents: its node id and the graph resource it serves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeIdentity {
    pub id: String,
    pub resource: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ContractStore {
    contracts: BTreeMap<String, Contract>,
}

impl ContractStore {
    pub fn new(contracts: Vec<Contract>) -> Result<Self, ConnectorError> {
        let mut map = BTreeMap::new();
        for c in contracts {
            c.check().map_err(ConnectorError::Config)?;
            let id = c.id.clone();
            if map.insert(id.clone(), c).is_some() {
                return Err(ConnectorError::Config(format!("duplicate contract id {id:?}")));
            }
        }
        Ok(ContractStore { contracts: map })
    }

    /// A YAML list of contracts.
    pub fn parse(text: &str) -> Result<Self, ConnectorError> {
        let list: Vec<Contract> =
            serde_yaml::from_str(text).map_err(|e| ConnectorError::Config(format!("contracts: {e}")))?;
        Self::new(list)
    }

    pub fn load(path: &Path) -> crate::Result<Self> {
        Ok(Self::parse(&crate::util::read_text(path)?)?)
    }

    pub fn get(&self, id: &str) -> Option<&Contract> {
        self.contracts.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Contract> {
        self.contracts.values()
    }

    pub fn len(&self) -> usize {
        self.contracts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contracts.is_empty()
    }
}

/// Checks, in order: the contract exists; it names `sender` as consumer and this node as
/// provider of its resource; `now` lies in `[not_before, expiry)`; the operation is granted.
pub fn authorize<'a>(
    contracts: &'a ContractStore,
    node: &NodeIdentity,
    sender: &str,
    contract_id: &str,
    op: Operation,
    now: DateTime<Utc>,
) -> Result<&'a Contract, RejectionReason> {
    let c = contracts.get(contract_id).ok_or(RejectionReason::UnknownContract)?;
    if c.consumer != sender || c.provider != node.id || c.resource != node.resource {
        return Err(RejectionReason::NotAuthorized);
    }
    if now < c.not_before {
        return Err(RejectionReason::ContractNotYetValid);
    }
    if now >= c.expiry {
        return Err(RejectionReason::ContractExpired);
    }
    if !c.permits(op) {
        return Err(RejectionReason::OperationNotPermitted);
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONTRACTS: &str = r#"
- id: tso-supplier-2020
  provider: supplier
  consumer: tso
  resource: supplier-graph
  operations: [catalog, query]
  not_before: 2020-01-01T00:00:00Z
  expiry: 2021-01-01T00:00:00Z
  purpose: balancing
- id: catalog-only
  provider: supplier
  consumer: tso
  resource: supplier-graph
  operations: [catalog]
  not_before: 2020-01-01T00:00:00Z
  expiry: 2021-01-01T00:00:00Z
"#;

    fn t(s: &str) -> DateTime<Utc> {
        s.parse().unwrap()
    }

    fn node() -> NodeIdentity {
        NodeIdentity {
            id: "supplier".into(),
            resource: "supplier-graph".into(),
        }
    }

    #[test]
    fn decisions_follow_the_check_order() {
        let store = ContractStore::parse(CONTRACTS).unwrap();
        let now = t("2020-06-01T00:00:00Z");
        let auth =
            |sender: &str, id: &str, op, now| authorize(&store, &node(), sender, id, op, now).map(|c| c.id.clone());
        assert_eq!(
            auth("tso", "tso-supplier-2020", Operation::Query, now),
            Ok("tso-supplier-2020".into())
        );
        assert_eq!(
            auth("tso", "nope", Operation::Query, now),
            Err(RejectionReason::UnknownContract)
        );
        assert_eq!(
            auth("brp", "tso-supplier-2020", Operation::Query, now),
            Err(RejectionReason::NotAuthorized)
        );
        assert_eq!(
            auth("tso", "tso-supplier-2020", Operation::Query, t("2021-01-01T00:00:00Z")),
            Err(RejectionReason::ContractExpired)
        );
        assert_eq!(
            auth("tso", "tso-supplier-2020", Operation::Query, t("2019-12-31T23:59:59Z")),
            Err(RejectionReason::ContractNotYetValid)
        );
        assert_eq!(
            auth("tso", "catalog-only", Operation::Query, now),
            Err(RejectionReason::OperationNotPermitted)
        );
        // Consumer mismatch outranks the window.
        assert_eq!(
            auth("brp", "tso-supplier-2020", Operation::Query, t("2030-01-01T00:00:00Z")),
            Err(RejectionReason::NotAuthorized)
        );
        // not_before itself is inside the window.
        assert!(auth("tso", "tso-supplier-2020", Operation::Query, t("2020-01-01T00:00:00Z")).is_ok());
    }

    #[test]
    fn invalid_contracts_are_rejected() {
        let inverted = CONTRACTS.replacen("expiry: 2021-01-01T00:00:00Z", "expiry: 2019-01-01T00:00:00Z", 1);
        assert!(ContractStore::parse(&inverted).is_err());
        let dup = CONTRACTS.replace("id: catalog-only", "id: tso-supplier-2020");
        assert!(ContractStore::parse(&dup).is_err());
        assert!(ContractStore::parse("- id: x\n  bogus: 1\n").is_err());
    }
}
