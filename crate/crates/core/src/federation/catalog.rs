use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::FederationError;
use crate::rdf::Iri;
use crate::util::yaml::{self, Node, Prefixes};

/// What one federation member can answer.
///
/// `classes` and `predicates` hold full IRIs. An entry ending in `*` matches every IRI
/// with that prefix; a lone `*` matches everything.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceDescription {
    pub id: String,
    pub endpoint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contract: Option<String>,
    #[serde(default)]
    pub classes: Vec<String>,
    pub predicates: Vec<String>,
}

fn capability_matches(entries: &[String], iri: &str) -> bool {
    entries.iter().any(|e| match e.strip_suffix('*') {
        Some(prefix) => iri.starts_with(prefix),
        None => e == iri,
    })
}

impl SourceDescription {
    pub fn answers_predicate(&self, predicate: &Iri) -> bool {
        capability_matches(&self.predicates, predicate.as_str())
    }

    pub fn answers_class(&self, class: &Iri) -> bool {
        capability_matches(&self.classes, class.as_str())
    }

    pub fn has_classes(&self) -> bool {
        !self.classes.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FederationCatalog {
    /// The node id presented to every source as the request sender.
    pub consumer: String,
    pub sources: Vec<SourceDescription>,
}

impl FederationCatalog {
    pub fn new(consumer: impl Into<String>, sources: Vec<SourceDescription>) -> Result<Self, FederationError> {
        if sources.is_empty() {
            return Err(FederationError::Catalog("at least one source is required".into()));
        }
        let mut ids = BTreeSet::new();
        for s in &sources {
            if s.id.is_empty() {
                return Err(FederationError::Catalog("source id must be non-empty".into()));
            }
            if !ids.insert(s.id.as_str()) {
                return Err(FederationError::Catalog(format!("duplicate source id {:?}", s.id)));
            }
            if s.predicates.is_empty() {
                return Err(FederationError::Catalog(format!(
                    "source {:?} lists no predicates",
                    s.id
                )));
            }
        }
        Ok(FederationCatalog {
            consumer: consumer.into(),
            sources,
        })
    }

    pub fn source(&self, id: &str) -> Option<&SourceDescription> {
        self.sources.iter().find(|s| s.id == id)
    }

    /// Loads a catalog file; relative `file:` endpoints resolve against its directory.
    pub fn load(path: &Path) -> crate::Result<Self> {
        let mut catalog = parse_catalog(&crate::util::read_text(path)?)?;
        for s in &mut catalog.sources {
            if let Some(rest) = s.endpoint.strip_prefix("file:") {
                let resolved = crate::util::resolve_relative(path, Path::new(rest));
                s.endpoint = format!("file:{}", resolved.display());
            }
        }
        Ok(catalog)
    }
}

/// ```yaml
/// consumer: tso
/// prefixes: { energy: "http://w3id.org/energy/" }
/// sources:
///   - { id: local, endpoint: "tcp://127.0.0.1:7001", contract: c1,
///       classes: [energy:GenerationCapacity], predicates: ["energy:*"] }
/// ```
pub fn parse_catalog(text: &str) -> Result<FederationCatalog, FederationError> {
    let value = yaml::parse_document(text).map_err(FederationError::Catalog)?;
    let root = yaml::root(&value);
    let (consumer, sources) = (|| {
        root.check_keys(&["consumer", "prefixes", "sources"])?;
        let prefixes = Prefixes::from_node(root)?;
        let consumer = root.require("consumer")?.node().string()?;
        let mut sources = Vec::new();
        for item in root.require("sources")?.node().items()? {
            sources.push(parse_source(item.node(), &prefixes)?);
        }
        Ok::<_, String>((consumer, sources))
    })()
    .map_err(FederationError::Catalog)?;
    FederationCatalog::new(consumer, sources)
}

fn parse_source(node: Node<'_>, prefixes: &Prefixes) -> Result<SourceDescription, String> {
    node.check_keys(&["id", "endpoint", "contract", "classes", "predicates"])?;
    let expand_all = |key: &str| -> Result<Vec<String>, String> {
        let Some(list) = node.get(key)? else {
            return Ok(Vec::new());
        };
        list.node()
            .items()?
            .iter()
            .map(|item| {
                let raw = item.node().string()?;
                expand_capability(&raw, prefixes).map_err(|e| item.node().err(e))
            })
            .collect()
    };
    Ok(SourceDescription {
        id: node.require("id")?.node().string()?,
        endpoint: node.require("endpoint")?.node().string()?,
        contract: node.get("contract")?.map(|c| c.node().string()).transpose()?,
        classes: expand_all("classes")?,
        predicates: expand_all("predicates")?,
    })
}

fn expand_capability(raw: &str, prefixes: &Prefixes) -> Result<String, String> {
    if raw == "*" {
        return Ok(raw.to_owned());
    }
    match raw.strip_suffix('*') {
        // Expand against a probe local name, then drop it again.
        Some(prefix) => {
            let probe = prefixes.expand(&format!("{prefix}x"))?;
            Ok(format!("{}*", &probe.as_str()[..probe.as_str().len() - 1]))
        }
        None => Ok(prefixes.expand(raw)?.into_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CATALOG: &str = r#"
consumer: tso
prefixes: { energy: "http://w3id.org/energy/", wdt: "http://www.wikidata.org/prop/direct/" }
sources:
  - { id: local, endpoint: "tcp://127.0.0.1:1", classes: [energy:GenerationCapacity], predicates: ["energy:*"] }
  - { id: wiki, endpoint: "file:wiki.nt", predicates: [wdt:P279] }
"#;

    #[test]
    fn wildcards_expand_against_prefixes() {
        let c = parse_catalog(CATALOG).unwrap();
        assert_eq!(c.sources[0].predicates, vec!["http://w3id.org/energy/*"]);
        let measure = Iri::new("http://w3id.org/energy/measure").unwrap();
        assert!(c.sources[0].answers_predicate(&measure));
        assert!(!c.sources[1].answers_predicate(&measure));
        assert!(!c.sources[1].has_classes());
    }

    #[test]
    fn duplicate_ids_and_empty_predicates_are_rejected() {
        let dup = CATALOG.replace("id: wiki", "id: local");
        assert!(matches!(parse_catalog(&dup), Err(FederationError::Catalog(m)) if m.contains("duplicate")));
        let empty = CATALOG.replace("predicates: [wdt:P279]", "predicates: []");
        assert!(parse_catalog(&empty).is_err());
        assert!(parse_catalog("consumer: x\nsources: []\n").is_err());
    }
}
