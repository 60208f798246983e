//! Integrity constraints over a graph: node shapes targeting a class, with property
//! constraints for cardinality, datatype, node kind, value class and allowed values.
//!
//! Shapes are read from YAML:
//!
//! ```yaml
//! prefixes: { energy: "http://w3id.org/energy/" }
//! shapes:
//!   - id: GenerationCapacityShape
//!     target_class: energy:GenerationCapacity
//!     properties:
//!       - { path: energy:measure, min_count: 1, max_count: 1, datatype: xsd:decimal }
//!       - { path: energy:productionType, node_kind: IRI, class: energy:ProductionType }
//!       - { path: energy:country, in: ["RS", "HU"] }
//! ```
//!
//! `in` values are plain string literals unless written as `<iri>`.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::rdf::vocab::RDF_TYPE;
use crate::rdf::{Graph, Iri, Term};
use crate::util::yaml::{self, Node, Prefixes};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("shapes document: {0}")]
pub struct ShapesError(pub String);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NodeKind {
    #[serde(rename = "IRI")]
    Iri,
    Literal,
}

impl NodeKind {
    fn matches(self, term: &Term) -> bool {
        match self {
            NodeKind::Iri => term.is_iri(),
            NodeKind::Literal => term.is_literal(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyConstraint {
    pub path: Iri,
    pub min_count: Option<u64>,
    pub max_count: Option<u64>,
    pub datatype: Option<Iri>,
    pub node_kind: Option<NodeKind>,
    pub class: Option<Iri>,
    pub in_values: Option<Vec<Term>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shape {
    pub id: String,
    pub target_class: Iri,
    pub constraints: Vec<PropertyConstraint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintKind {
    MinCount,
    MaxCount,
    Datatype,
    NodeKind,
    Class,
    In,
}

impl ConstraintKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstraintKind::MinCount => "min-count",
            ConstraintKind::MaxCount => "max-count",
            ConstraintKind::Datatype => "datatype",
            ConstraintKind::NodeKind => "node-kind",
            ConstraintKind::Class => "class",
            ConstraintKind::In => "in",
        }
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    #[serde(rename = "focusNode", serialize_with = "ser_display")]
    pub focus_node: Term,
    #[serde(rename = "shape")]
    pub shape_id: String,
    #[serde(rename = "constraint")]
    pub kind: ConstraintKind,
    #[serde(serialize_with = "ser_iri")]
    pub path: Iri,
    pub message: String,
}

fn ser_display<S: serde::Serializer>(t: &Term, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&t.to_string())
}

fn ser_iri<S: serde::Serializer>(t: &Iri, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(t.as_str())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub conforms: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn count(&self, kind: ConstraintKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

pub fn parse_shapes(text: &str) -> Result<Vec<Shape>, ShapesError> {
    let value = yaml::parse_document(text).map_err(ShapesError)?;
    let root = yaml::root(&value);
    (|| {
        root.check_keys(&["prefixes", "shapes"])?;
        let prefixes = Prefixes::from_node(root)?;
        let mut out = Vec::new();
        for (i, item) in root.require("shapes")?.node().items()?.into_iter().enumerate() {
            out.push(parse_shape(i, item.node(), &prefixes)?);
        }
        Ok(out)
    })()
    .map_err(ShapesError)
}

pub fn load_shapes(path: &std::path::Path) -> crate::Result<Vec<Shape>> {
    Ok(parse_shapes(&crate::util::read_text(path)?)?)
}

fn parse_shape(index: usize, node: Node<'_>, prefixes: &Prefixes) -> Result<Shape, String> {
    node.check_keys(&["id", "target_class", "properties"])?;
    let id = match node.get("id")? {
        Some(id) => id.node().string()?,
        None => format!("shape-{index}"),
    };
    let target_class = prefixes.expand_node(node.require("target_class")?.node())?;
    let mut constraints = Vec::new();
    if let Some(props) = node.get("properties")? {
        for item in props.node().items()? {
            constraints.push(parse_property(item.node(), prefixes)?);
        }
    }
    Ok(Shape {
        id,
        target_class,
        constraints,
    })
}

fn parse_property(node: Node<'_>, prefixes: &Prefixes) -> Result<PropertyConstraint, String> {
    node.check_keys(&["path", "min_count", "max_count", "datatype", "node_kind", "class", "in"])?;
    let path = prefixes.expand_node(node.require("path")?.node())?;
    let min_count = node.get("min_count")?.map(|n| n.node().u64()).transpose()?;
    let max_count = node.get("max_count")?.map(|n| n.node().u64()).transpose()?;
    if let (Some(lo), Some(hi)) = (min_count, max_count) {
        if lo > hi {
            return Err(node.err(format!("min_count {lo} exceeds max_count {hi}")));
        }
    }
    let datatype = node
        .get("datatype")?
        .map(|n| prefixes.expand_node(n.node()))
        .transpose()?;
    let node_kind = match node.get("node_kind")? {
        None => None,
        Some(k) => Some(match k.node().string()?.as_str() {
            "IRI" => NodeKind::Iri,
            "Literal" => NodeKind::Literal,
            other => return Err(k.node().err(format!("node_kind must be IRI or Literal, got {other:?}"))),
        }),
    };
    let class = node.get("class")?.map(|n| prefixes.expand_node(n.node())).transpose()?;
    let in_values = match node.get("in")? {
        None => None,
        Some(list) => {
            let mut vals = Vec::new();
            for item in list.node().items()? {
                let s = item.node().string()?;
                let term = match s.strip_prefix('<').and_then(|r| r.strip_suffix('>')) {
                    Some(iri) => Term::iri(iri).map_err(|e| item.node().err(e))?,
                    None => Term::string(s),
                };
                vals.push(term);
            }
            Some(vals)
        }
    };
    Ok(PropertyConstraint {
        path,
        min_count,
        max_count,
        datatype,
        node_kind,
        class,
        in_values,
    })
}

/// Validates every focus node (subjects typed with a shape's target class).
///
/// Emits at most one violation per (focus node, property constraint, constraint kind),
/// sorted by focus node, then path. Constraints are checked in declared order.
pub fn validate(graph: &Graph, shapes: &[Shape]) -> ValidationReport {
    let rdf_type = Term::Iri(Iri::from_static(RDF_TYPE));
    let mut violations = Vec::new();
    for shape in shapes {
        let class = Term::Iri(shape.target_class.clone());
        let mut focus: Vec<&Term> = graph
            .matching(None, Some(&rdf_type), Some(&class))
            .map(|t| t.subject())
            .collect();
        focus.sort();
        focus.dedup();
        for node in focus {
            for c in &shape.constraints {
                check_property(graph, shape, node, c, &rdf_type, &mut violations);
            }
        }
    }
    violations.sort_by(|a, b| {
        (&a.focus_node, &a.path, &a.shape_id, a.kind).cmp(&(&b.focus_node, &b.path, &b.shape_id, b.kind))
    });
    ValidationReport {
        conforms: violations.is_empty(),
        violations,
    }
}

fn check_property(
    graph: &Graph,
    shape: &Shape,
    node: &Term,
    c: &PropertyConstraint,
    rdf_type: &Term,
    out: &mut Vec<Violation>,
) {
    let path = Term::Iri(c.path.clone());
    let values: Vec<&Term> = graph
        .matching(Some(node), Some(&path), None)
        .map(|t| t.object())
        .collect();
    let count = values.len() as u64;
    let mut push = |kind: ConstraintKind, message: String| {
        out.push(Violation {
            focus_node: node.clone(),
            shape_id: shape.id.clone(),
            kind,
            path: c.path.clone(),
            message,
        });
    };
    if let Some(min) = c.min_count {
        if count < min {
            push(
                ConstraintKind::MinCount,
                format!("{count} value(s), at least {min} required"),
            );
        }
    }
    if let Some(max) = c.max_count {
        if count > max {
            push(
                ConstraintKind::MaxCount,
                format!("{count} value(s), at most {max} allowed"),
            );
        }
    }
    if let Some(dt) = &c.datatype {
        if let Some(bad) = values
            .iter()
            .find(|v| v.as_literal().is_none_or(|l| l.datatype() != dt))
        {
            push(ConstraintKind::Datatype, format!("value {bad} is not of datatype {dt}"));
        }
    }
    if let Some(kind) = c.node_kind {
        if let Some(bad) = values.iter().find(|v| !kind.matches(v)) {
            push(
                ConstraintKind::NodeKind,
                format!("value {bad} is not of node kind {kind:?}"),
            );
        }
    }
    if let Some(class) = &c.class {
        let class_term = Term::Iri(class.clone());
        if let Some(bad) = values.iter().find(|v| {
            graph
                .matching(Some(v), Some(rdf_type), Some(&class_term))
                .next()
                .is_none()
        }) {
            push(ConstraintKind::Class, format!("value {bad} is not typed {class}"));
        }
    }
    if let Some(allowed) = &c.in_values {
        if let Some(bad) = values.iter().find(|v| !allowed.contains(v)) {
            push(ConstraintKind::In, format!("value {bad} is not in the allowed list"));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_ntriples;
    use proptest::prelude::*;

    const SHAPES: &str = r#"
prefixes: { e: "http://e/" }
shapes:
  - id: S
    target_class: e:Cap
    properties:
      - { path: e:country, min_count: 1, max_count: 1, in: ["RS", "HU"] }
      - { path: e:measure, max_count: 1, datatype: xsd:decimal }
      - { path: e:type, node_kind: IRI, class: e:Type }
"#;

    fn g(text: &str) -> Graph {
        parse_ntriples(text).unwrap()
    }

    #[test]
    fn parse_one_shape_and_reject_inverted_counts() {
        let shapes = parse_shapes(
            "shapes:\n  - target_class: http://e/C\n    properties:\n      - {path: http://e/p, min_count: 1}\n",
        )
        .unwrap();
        assert_eq!(shapes.len(), 1);
        assert_eq!(shapes[0].id, "shape-0");
        let err = parse_shapes("shapes:\n  - target_class: http://e/C\n    properties:\n      - {path: http://e/p, min_count: 2, max_count: 1}\n").unwrap_err();
        assert!(err.0.contains("shapes[0].properties[0]"), "{err}");
    }

    #[test]
    fn missing_property_is_min_count() {
        let shapes = parse_shapes(SHAPES).unwrap();
        let r = validate(
            &g("<http://e/c1> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://e/Cap> .\n"),
            &shapes,
        );
        assert!(!r.conforms);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].kind, ConstraintKind::MinCount);
    }

    #[test]
    fn each_kind_fires_once_per_focus_node() {
        let shapes = parse_shapes(SHAPES).unwrap();
        let text = r#"<http://e/c1> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://e/Cap> .
<http://e/c1> <http://e/country> "XX" .
<http://e/c1> <http://e/country> "RS" .
<http://e/c1> <http://e/measure> "1" .
<http://e/c1> <http://e/type> "lit" .
<http://e/c1> <http://e/type> <http://e/untyped> .
"#;
        let r = validate(&g(text), &shapes);
        let kinds: Vec<_> = r.violations.iter().map(|v| v.kind.as_str()).collect();
        assert_eq!(kinds, vec!["max-count", "in", "datatype", "node-kind", "class"]);
    }

    #[test]
    fn conforming_graph() {
        let shapes = parse_shapes(SHAPES).unwrap();
        let text = r#"<http://e/c1> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://e/Cap> .
<http://e/c1> <http://e/country> "RS" .
<http://e/c1> <http://e/measure> "1.5"^^<http://www.w3.org/2001/XMLSchema#decimal> .
<http://e/c1> <http://e/type> <http://e/Wind> .
<http://e/Wind> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://e/Type> .
"#;
        let r = validate(&g(text), &shapes);
        assert!(r.conforms, "{:?}", r.violations);
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["conforms"], true);
    }

    proptest! {
        #[test]
        fn trivial_inputs_conform(n in 0usize..20) {
            let mut text = String::new();
            for i in 0..n {
                text.push_str(&format!("<http://e/s{i}> <http://e/p> \"{i}\" .\n"));
            }
            let shapes = parse_shapes(SHAPES).unwrap();
            prop_assert!(validate(&g(&text), &[]).conforms);
            prop_assert!(validate(&Graph::new(), &shapes).conforms);
            // No subject is typed e:Cap, so nothing is targeted.
            prop_assert!(validate(&g(&text), &shapes).conforms);
        }
    }
}
