//! Solution sequences and the SPARQL JSON results format.

use std::collections::BTreeSet;

use serde_json::{json, Map, Value};

use super::ast::Variable;
use super::SparqlError;
use crate::rdf::vocab::XSD_STRING;
use crate::rdf::{BlankNode, Iri, Literal, Term};

/// A header of variables and rows aligned to it; `None` marks an unbound cell.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolutionSequence {
    variables: Vec<Variable>,
    rows: Vec<Vec<Option<Term>>>,
}

impl SolutionSequence {
    pub fn new(variables: Vec<Variable>, rows: Vec<Vec<Option<Term>>>) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == variables.len()));
        SolutionSequence { variables, rows }
    }

    pub fn empty(variables: Vec<Variable>) -> Self {
        SolutionSequence {
            variables,
            rows: Vec::new(),
        }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn rows(&self) -> &[Vec<Option<Term>>] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Vec<Option<Term>>> {
        self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, var: &Variable) -> Option<usize> {
        self.variables.iter().position(|v| v == var)
    }

    /// Values bound to `var` across all rows.
    pub fn values<'a>(&'a self, var: &Variable) -> impl Iterator<Item = &'a Term> + 'a {
        let col = self.column(var);
        self.rows.iter().filter_map(move |r| col.and_then(|c| r[c].as_ref()))
    }

    /// Rows projected onto `vars` (missing columns read as unbound), as a set.
    pub fn tuple_set(&self, vars: &[Variable]) -> BTreeSet<Vec<Option<Term>>> {
        let cols: Vec<Option<usize>> = vars.iter().map(|v| self.column(v)).collect();
        self.rows
            .iter()
            .map(|r| cols.iter().map(|c| c.and_then(|c| r[c].clone())).collect())
            .collect()
    }

    pub fn sorted_rows(&self) -> Vec<Vec<Option<Term>>> {
        let mut rows = self.rows.clone();
        rows.sort();
        rows
    }

    pub fn to_json(&self) -> Value {
        let bindings: Vec<Value> = self
            .sorted_rows()
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (var, cell) in self.variables.iter().zip(row) {
                    if let Some(term) = cell {
                        obj.insert(var.name().to_owned(), term_to_json(term));
                    }
                }
                Value::Object(obj)
            })
            .collect();
        let vars: Vec<&str> = self.variables.iter().map(Variable::name).collect();
        json!({
            "head": { "vars": vars },
            "results": { "bindings": bindings },
        })
    }

    pub fn from_json(value: &Value) -> Result<Self, SparqlError> {
        let bad = |m: &str| SparqlError::Results(m.to_owned());
        let vars = value
            .pointer("/head/vars")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing head.vars"))?;
        let variables: Vec<Variable> = vars
            .iter()
            .map(|v| v.as_str().map(Variable::new).ok_or_else(|| bad("non-string variable")))
            .collect::<Result<_, _>>()?;
        let bindings = value
            .pointer("/results/bindings")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing results.bindings"))?;
        let mut rows = Vec::with_capacity(bindings.len());
        for b in bindings {
            let obj = b.as_object().ok_or_else(|| bad("binding is not an object"))?;
            let mut row = vec![None; variables.len()];
            for (name, term) in obj {
                let col = variables
                    .iter()
                    .position(|v| v.name() == name)
                    .ok_or_else(|| bad(&format!("binding for undeclared variable {name}")))?;
                row[col] = Some(term_from_json(term)?);
            }
            rows.push(row);
        }
        Ok(SolutionSequence { variables, rows })
    }
}

fn term_to_json(term: &Term) -> Value {
    match term {
        Term::Iri(iri) => json!({ "type": "uri", "value": iri.as_str() }),
        Term::BlankNode(b) => json!({ "type": "bnode", "value": b.label() }),
        Term::Literal(lit) => {
            let mut obj = Map::new();
            obj.insert("type".into(), "literal".into());
            obj.insert("value".into(), lit.lexical().into());
            if let Some(lang) = lit.language() {
                obj.insert("xml:lang".into(), lang.into());
            } else if lit.datatype().as_str() != XSD_STRING {
                obj.insert("datatype".into(), lit.datatype().as_str().into());
            }
            Value::Object(obj)
        }
    }
}

fn term_from_json(value: &Value) -> Result<Term, SparqlError> {
    let bad = |m: String| SparqlError::Results(m);
    let kind = value
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("term without type".into()))?;
    let lexical = value
        .get("value")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("term without value".into()))?;
    match kind {
        "uri" => Iri::new(lexical).map(Term::Iri).map_err(|e| bad(e.to_string())),
        "bnode" => BlankNode::new(lexical)
            .map(Term::BlankNode)
            .map_err(|e| bad(e.to_string())),
        "literal" | "typed-literal" => {
            if let Some(lang) = value.get("xml:lang").and_then(Value::as_str) {
                Literal::lang(lexical, lang)
                    .map(Term::Literal)
                    .map_err(|e| bad(e.to_string()))
            } else if let Some(dt) = value.get("datatype").and_then(Value::as_str) {
                let dt = Iri::new(dt).map_err(|e| bad(e.to_string()))?;
                Ok(Term::Literal(Literal::typed(lexical, dt)))
            } else {
                Ok(Term::string(lexical))
            }
        }
        other => Err(bad(format!("unknown term type {other:?}"))),
    }
}

/// Pretty-printed SPARQL JSON with rows in sorted order.
pub fn serialize_results(solutions: &SolutionSequence) -> String {
    let mut s = serde_json::to_string_pretty(&solutions.to_json()).expect("JSON values always serialize");
    s.push('\n');
    s
}
