//! Path-tracking access to parsed YAML, so config errors can name `maps[2].po[0].field`.

use std::collections::BTreeMap;

use serde_yaml::Value;

use crate::rdf::vocab;
use crate::rdf::Iri;

#[derive(Clone, Copy, Debug)]
pub struct Node<'a> {
    value: &'a Value,
    path: &'a str,
}

/// A node paired with an owned path; borrow it with [`Located::node`].
#[derive(Debug)]
pub struct Located<'a> {
    value: &'a Value,
    path: String,
}

impl<'a> Located<'a> {
    pub fn node(&self) -> Node<'_> {
        Node {
            value: self.value,
            path: &self.path,
        }
    }
}

pub fn parse_document(text: &str) -> Result<Value, String> {
    serde_yaml::from_str(text).map_err(|e| format!("invalid YAML: {e}"))
}

pub fn root(value: &Value) -> Node<'_> {
    Node { value, path: "" }
}

impl<'a> Node<'a> {
    pub fn path(&self) -> &str {
        if self.path.is_empty() {
            "<root>"
        } else {
            self.path
        }
    }

    pub fn err(&self, message: impl std::fmt::Display) -> String {
        format!("{}: {message}", self.path())
    }

    fn child_path(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_owned()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    pub fn mapping(&self) -> Result<&'a serde_yaml::Mapping, String> {
        self.value.as_mapping().ok_or_else(|| self.err("expected a mapping"))
    }

    /// Fails on any key outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), String> {
        for key in self.mapping()?.keys() {
            let name = key.as_str().ok_or_else(|| self.err("non-string key"))?;
            if !allowed.contains(&name) {
                return Err(self.err(format!("unknown key {name:?} (allowed: {})", allowed.join(", "))));
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Result<Option<Located<'a>>, String> {
        let value = self.mapping()?.get(key);
        Ok(value.filter(|v| !v.is_null()).map(|value| Located {
            value,
            path: self.child_path(key),
        }))
    }

    pub fn require(&self, key: &str) -> Result<Located<'a>, String> {
        self.get(key)?
            .ok_or_else(|| self.err(format!("missing required key {key:?}")))
    }

    pub fn items(&self) -> Result<Vec<Located<'a>>, String> {
        let seq = self.value.as_sequence().ok_or_else(|| self.err("expected a list"))?;
        Ok(seq
            .iter()
            .enumerate()
            .map(|(i, value)| Located {
                value,
                path: format!("{}[{i}]", self.path),
            })
            .collect())
    }

    /// A scalar rendered as a string; numbers and booleans are accepted.
    pub fn string(&self) -> Result<String, String> {
        match self.value {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            Value::Bool(b) => Ok(b.to_string()),
            _ => Err(self.err("expected a scalar")),
        }
    }

    pub fn u64(&self) -> Result<u64, String> {
        self.value
            .as_u64()
            .ok_or_else(|| self.err("expected a non-negative integer"))
    }

    pub fn strings(&self) -> Result<Vec<String>, String> {
        self.items()?.iter().map(|l| l.node().string()).collect()
    }

    pub fn string_map(&self) -> Result<BTreeMap<String, String>, String> {
        let mut out = BTreeMap::new();
        for (k, v) in self.mapping()? {
            let k = k.as_str().ok_or_else(|| self.err("non-string key"))?;
            let child = self.child_path(k);
            let node = Node { value: v, path: &child };
            out.insert(k.to_owned(), node.string()?);
        }
        Ok(out)
    }
}

/// Prefix table for compact IRIs (`energy:measure`) in config files.
#[derive(Clone, Debug)]
pub struct Prefixes(BTreeMap<String, String>);

impl Default for Prefixes {
    fn default() -> Self {
        let mut m = BTreeMap::new();
        m.insert("rdf".into(), "http://www.w3.org/1999/02/22-rdf-syntax-ns#".into());
        m.insert("rdfs".into(), "http://www.w3.org/2000/01/rdf-schema#".into());
        m.insert("xsd".into(), vocab::XSD.into());
        m.insert("owl".into(), "http://www.w3.org/2002/07/owl#".into());
        m.insert("prov".into(), vocab::PROV.into());
        Prefixes(m)
    }
}

impl Prefixes {
    /// Built-in prefixes plus an optional `prefixes:` mapping under `node`.
    pub fn from_node(node: Node<'_>) -> Result<Self, String> {
        let mut p = Prefixes::default();
        if let Some(decl) = node.get("prefixes")? {
            for (k, v) in decl.node().string_map()? {
                p.0.insert(k, v);
            }
        }
        Ok(p)
    }

    pub fn insert(&mut self, label: impl Into<String>, base: impl Into<String>) {
        self.0.insert(label.into(), base.into());
    }

    pub fn expand(&self, value: &str) -> Result<Iri, String> {
        if let Some((label, local)) = value.split_once(':') {
            if !local.starts_with("//") {
                if let Some(base) = self.0.get(label) {
                    return Iri::new(format!("{base}{local}")).map_err(|e| e.to_string());
                }
            }
        }
        Iri::new(value).map_err(|e| e.to_string())
    }

    pub fn expand_node(&self, node: Node<'_>) -> Result<Iri, String> {
        let s = node.string()?;
        self.expand(&s).map_err(|e| node.err(e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_name_list_index_and_key() {
        let v = parse_document("maps:\n  - source: {path: a}\n    bogus: 1\n").unwrap();
        let r = root(&v);
        let maps = r.require("maps").unwrap();
        let items = maps.node().items().unwrap();
        let err = items[0].node().check_keys(&["source"]).unwrap_err();
        assert!(err.starts_with("maps[0]: unknown key \"bogus\""), "{err}");
        let src = items[0].node().require("source").unwrap();
        let err = src.node().require("format").unwrap_err();
        assert!(err.starts_with("maps[0].source: missing"), "{err}");
    }

    #[test]
    fn prefixes_expand_compact_iris() {
        let mut p = Prefixes::default();
        p.insert("energy", "http://w3id.org/energy/");
        assert_eq!(
            p.expand("energy:measure").unwrap().as_str(),
            "http://w3id.org/energy/measure"
        );
        assert_eq!(p.expand("http://x/y").unwrap().as_str(), "http://x/y");
        assert_eq!(p.expand("urn:a:b").unwrap().as_str(), "urn:a:b");
        assert!(p.expand("nocolon").is_err());
    }
}
