//! Declarative mappings from raw records to RDF triples.
//!
//! A mapping document is YAML:
//!
//! ```yaml
//! prefixes: { energy: "http://w3id.org/energy/" }
//! maps:
//!   - name: capacity
//!     source: { path: capacity.csv, format: csv, fields: [country, type, measure, year],
//!               filter: { field: year, equals: "2020" } }
//!     subject: { template: "http://w3id.org/energy/capacity/{country}/{type}/{year}",
//!                class: energy:GenerationCapacity }
//!     po:
//!       - { predicate: energy:country, field: country }
//!       - { predicate: energy:measure, field: measure, datatype: xsd:decimal }
//!       - { predicate: energy:productionType, template: "http://w3id.org/energy/productionType/{type}" }
//!       - { predicate: prov:wasDerivedFrom, constant: "http://w3id.org/energy/source/entsoe" }
//! ```
//!
//! A `constant` is an IRI unless `datatype` or `language` is given, in which case it is a literal.

mod apply;
mod sources;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::rdf::vocab::XSD_STRING;
use crate::rdf::{Iri, Literal, Term};
use crate::util::yaml::{self, Node, Prefixes};

pub use apply::{apply_mapping, apply_mapping_sources, materialize, MappingOutput, RecordError};
pub use sources::{CsvReader, JsonLinesReader, RawRecord, ReaderRegistry, RecordReader, RecordSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MappingError {
    #[error("mapping document: {0}")]
    Document(String),
    #[error("source data: {0}")]
    Source(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MappingDocument {
    pub maps: Vec<TripleMap>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleMap {
    pub name: Option<String>,
    pub source: LogicalSource,
    pub subject: SubjectMap,
    pub predicate_objects: Vec<PredicateObjectMap>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogicalSource {
    /// As written in the document; see [`MappingDocument::resolve_paths`].
    pub path: PathBuf,
    pub format: String,
    /// Declared header/schema; every template placeholder and field reference must be here.
    pub fields: Vec<String>,
    pub filter: Option<RecordFilter>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecordFilter {
    pub field: String,
    pub equals: String,
}

impl RecordFilter {
    pub fn accepts(&self, record: &RawRecord) -> bool {
        record.get(&self.field) == Some(self.equals.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubjectMap {
    pub template: Template,
    pub class: Option<Iri>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateObjectMap {
    pub predicate: Iri,
    pub object: ObjectSpec,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ObjectSpec {
    /// Literal from a field value, typed by `datatype` (default `xsd:string`) or tagged with `language`.
    Field {
        field: String,
        datatype: Iri,
        language: Option<String>,
    },
    Constant(Term),
    /// IRI rendered from a template.
    Template(Template),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum TemplatePart {
    Text(String),
    Field(String),
}

/// A string with `{field}` placeholders; rendered values are percent-encoded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    source: String,
    parts: Vec<TemplatePart>,
}

impl Template {
    pub fn parse(source: &str) -> Result<Self, String> {
        let mut parts = Vec::new();
        let mut rest = source;
        while let Some(open) = rest.find(['{', '}']) {
            if rest[open..].starts_with('}') {
                return Err(format!("unbalanced '}}' in template {source:?}"));
            }
            if open > 0 {
                parts.push(TemplatePart::Text(rest[..open].to_owned()));
            }
            let close = rest[open..]
                .find('}')
                .ok_or_else(|| format!("unclosed '{{' in template {source:?}"))?;
            let name = &rest[open + 1..open + close];
            if name.is_empty() || name.contains('{') {
                return Err(format!("malformed placeholder in template {source:?}"));
            }
            parts.push(TemplatePart::Field(name.to_owned()));
            rest = &rest[open + close + 1..];
        }
        if !rest.is_empty() {
            parts.push(TemplatePart::Text(rest.to_owned()));
        }
        Ok(Template {
            source: source.to_owned(),
            parts,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.source
    }

    pub fn fields(&self) -> impl Iterator<Item = &str> {
        self.parts.iter().filter_map(|p| match p {
            TemplatePart::Field(f) => Some(f.as_str()),
            TemplatePart::Text(_) => None,
        })
    }

    /// Renders with percent-encoded values; `None` when a referenced value is missing.
    pub fn render(&self, record: &RawRecord) -> Option<String> {
        let mut out = String::new();
        for p in &self.parts {
            match p {
                TemplatePart::Text(t) => out.push_str(t),
                TemplatePart::Field(f) => percent_encode_into(record.get(f)?, &mut out),
            }
        }
        Some(out)
    }

    pub fn render_iri(&self, record: &RawRecord) -> Option<Result<Iri, String>> {
        self.render(record).map(|s| Iri::new(s).map_err(|e| e.to_string()))
    }

    fn starts_with_text(&self) -> bool {
        matches!(self.parts.first(), Some(TemplatePart::Text(_)))
    }
}

fn percent_encode_into(value: &str, out: &mut String) {
    for b in value.bytes() {
        if b.is_ascii_alphanumeric() || matches!(b, b'-' | b'.' | b'_' | b'~') {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
}

impl MappingDocument {
    /// Resolves relative source paths against the directory of `mapping_file`.
    pub fn resolve_paths(&mut self, mapping_file: &Path) {
        for m in &mut self.maps {
            m.source.path = crate::util::resolve_relative(mapping_file, &m.source.path);
        }
    }

    pub fn load(path: &Path) -> crate::Result<Self> {
        let text = crate::util::read_text(path)?;
        let mut doc = parse_mapping(&text)?;
        doc.resolve_paths(path);
        Ok(doc)
    }

    /// Distinct logical sources (by path) in declaration order.
    pub fn sources(&self) -> Vec<&LogicalSource> {
        let mut seen = BTreeSet::new();
        self.maps
            .iter()
            .map(|m| &m.source)
            .filter(|s| seen.insert(s.path.clone()))
            .collect()
    }
}

pub fn parse_mapping(text: &str) -> Result<MappingDocument, MappingError> {
    let value = yaml::parse_document(text).map_err(MappingError::Document)?;
    let root = yaml::root(&value);
    let doc = (|| {
        root.check_keys(&["prefixes", "maps"])?;
        let prefixes = Prefixes::from_node(root)?;
        let maps = root.require("maps")?;
        let mut out = Vec::new();
        for item in maps.node().items()? {
            out.push(parse_triple_map(item.node(), &prefixes)?);
        }
        Ok::<_, String>(MappingDocument { maps: out })
    })();
    doc.map_err(MappingError::Document)
}

fn parse_triple_map(node: Node<'_>, prefixes: &Prefixes) -> Result<TripleMap, String> {
    node.check_keys(&["name", "source", "subject", "po"])?;
    let name = node.get("name")?.map(|n| n.node().string()).transpose()?;

    let src = node.require("source")?;
    let src = src.node();
    src.check_keys(&["path", "format", "fields", "filter"])?;
    let fields = src.require("fields")?.node().strings()?;
    if fields.is_empty() {
        return Err(src.err("fields must list at least one field"));
    }
    let filter = match src.get("filter")? {
        None => None,
        Some(f) => {
            let f = f.node();
            f.check_keys(&["field", "equals"])?;
            let field = f.require("field")?.node().string()?;
            check_field(f, &field, &fields)?;
            Some(RecordFilter {
                field,
                equals: f.require("equals")?.node().string()?,
            })
        }
    };
    let source = LogicalSource {
        path: PathBuf::from(src.require("path")?.node().string()?),
        format: src.require("format")?.node().string()?,
        fields,
        filter,
    };

    let subj = node.require("subject")?;
    let subj = subj.node();
    subj.check_keys(&["template", "class"])?;
    let template = parse_template(subj.require("template")?.node(), &source.fields)?;
    let class = subj.get("class")?.map(|c| prefixes.expand_node(c.node())).transpose()?;

    let mut predicate_objects = Vec::new();
    if let Some(po) = node.get("po")? {
        for item in po.node().items()? {
            predicate_objects.push(parse_po(item.node(), prefixes, &source.fields)?);
        }
    }
    Ok(TripleMap {
        name,
        source,
        subject: SubjectMap { template, class },
        predicate_objects,
    })
}

fn parse_po(node: Node<'_>, prefixes: &Prefixes, fields: &[String]) -> Result<PredicateObjectMap, String> {
    node.check_keys(&["predicate", "field", "constant", "template", "datatype", "language"])?;
    let predicate = prefixes.expand_node(node.require("predicate")?.node())?;
    let datatype = node
        .get("datatype")?
        .map(|d| prefixes.expand_node(d.node()))
        .transpose()?;
    let language = node.get("language")?.map(|l| l.node().string()).transpose()?;
    let field = node.get("field")?;
    let constant = node.get("constant")?;
    let template = node.get("template")?;
    let given = [field.is_some(), constant.is_some(), template.is_some()]
        .iter()
        .filter(|b| **b)
        .count();
    if given != 1 {
        return Err(node.err("exactly one of field, constant or template is required"));
    }
    if datatype.is_some() && language.is_some() {
        return Err(node.err("datatype and language are mutually exclusive"));
    }
    let object = if let Some(f) = field {
        let name = f.node().string()?;
        check_field(f.node(), &name, fields)?;
        if let Some(lang) = &language {
            Literal::lang("", lang.clone()).map_err(|e| node.err(e))?;
        }
        ObjectSpec::Field {
            field: name,
            datatype: datatype.unwrap_or_else(|| Iri::from_static(XSD_STRING)),
            language,
        }
    } else if let Some(c) = constant {
        let value = c.node().string()?;
        let term = if let Some(dt) = datatype {
            Term::Literal(Literal::typed(value, dt))
        } else if let Some(lang) = language {
            Term::Literal(Literal::lang(value, lang).map_err(|e| node.err(e))?)
        } else {
            Term::Iri(prefixes.expand(&value).map_err(|e| c.node().err(e))?)
        };
        ObjectSpec::Constant(term)
    } else {
        if datatype.is_some() || language.is_some() {
            return Err(node.err("template objects are IRIs and take no datatype or language"));
        }
        let t = template.expect("one object form is present");
        ObjectSpec::Template(parse_template(t.node(), fields)?)
    };
    Ok(PredicateObjectMap { predicate, object })
}

fn check_field(node: Node<'_>, field: &str, fields: &[String]) -> Result<(), String> {
    if fields.iter().any(|f| f == field) {
        Ok(())
    } else {
        Err(node.err(format!("field {field:?} is not declared in source fields")))
    }
}

fn parse_template(node: Node<'_>, fields: &[String]) -> Result<Template, String> {
    let t = Template::parse(&node.string()?).map_err(|e| node.err(e))?;
    for f in t.fields() {
        check_field(node, f, fields)?;
    }
    if t.starts_with_text() {
        let probe = RawRecord::from_pairs(t.fields().map(|f| (f.to_owned(), "x".to_owned())));
        if let Some(Err(e)) = t.render_iri(&probe) {
            return Err(node.err(format!("template does not produce an IRI: {e}")));
        }
    }
    Ok(t)
}
