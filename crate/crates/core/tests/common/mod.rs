//! Random graphs, random BGP queries and a brute-force evaluator used as an oracle.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use ede_core::rdf::vocab::{RDF_TYPE, XSD_INTEGER};
use ede_core::rdf::{Graph, Iri, Literal, Term, Triple};
use ede_core::sparql::{Query, TermPattern, Variable};
use rand::seq::SliceRandom;
use rand::Rng;

pub type Tuple = Vec<Option<Term>>;

pub fn iri(s: &str) -> Term {
    Term::Iri(Iri::new(s).unwrap())
}

fn node(i: usize) -> String {
    format!("<http://t/n{i}>")
}

fn predicate(i: usize) -> String {
    format!("<http://t/p{i}>")
}

fn class(i: usize) -> String {
    format!("<http://t/C{i}>")
}

/// Sizes of the random vocabulary.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub nodes: usize,
    pub predicates: usize,
    pub classes: usize,
    pub literals: usize,
}

pub const SMALL: Shape = Shape {
    nodes: 12,
    predicates: 5,
    classes: 3,
    literals: 6,
};

fn random_object(rng: &mut impl Rng, shape: Shape) -> Term {
    if rng.gen_bool(0.6) {
        iri(&format!("http://t/n{}", rng.gen_range(0..shape.nodes)))
    } else if rng.gen_bool(0.5) {
        Term::string(format!("v{}", rng.gen_range(0..shape.literals)))
    } else {
        Term::Literal(Literal::typed(
            rng.gen_range(0..shape.literals as i64).to_string(),
            Iri::from_static(XSD_INTEGER),
        ))
    }
}

/// Up to `triples` distinct triples; about one in six is an rdf:type statement.
pub fn random_graph(rng: &mut impl Rng, triples: usize, shape: Shape) -> Graph {
    let mut g = Graph::new();
    for _ in 0..triples {
        let s = iri(&format!("http://t/n{}", rng.gen_range(0..shape.nodes)));
        let t = if rng.gen_ratio(1, 6) {
            Triple::new(
                s,
                iri(RDF_TYPE),
                iri(&format!("http://t/C{}", rng.gen_range(0..shape.classes))),
            )
        } else {
            Triple::new(
                s,
                iri(&format!("http://t/p{}", rng.gen_range(0..shape.predicates))),
                random_object(rng, shape),
            )
        };
        g.insert(t.unwrap());
    }
    g
}

fn object_text(rng: &mut impl Rng, shape: Shape) -> String {
    match random_object(rng, shape) {
        Term::Iri(i) => format!("<{}>", i.as_str()),
        Term::Literal(l) if l.datatype().as_str() == XSD_INTEGER => l.lexical().to_owned(),
        Term::Literal(l) => format!("\"{}\"", l.lexical()),
        Term::BlankNode(_) => unreachable!("generator emits no blank nodes"),
    }
}

/// A SELECT query with 1..=`max_patterns` patterns over a four-variable pool, so
/// patterns frequently share variables.
pub fn random_query(rng: &mut impl Rng, max_patterns: usize, shape: Shape) -> String {
    let pool = ["?a", "?b", "?c", "?d"];
    let n = rng.gen_range(1..=max_patterns);
    let mut patterns = Vec::new();
    let mut used: Vec<&str> = Vec::new();
    for i in 0..n {
        let mut var = |rng: &mut dyn rand::RngCore| {
            let v = *pool.choose(rng).unwrap();
            used.push(v);
            v.to_owned()
        };
        let s = if i == 0 || rng.gen_bool(0.85) {
            var(rng)
        } else {
            node(rng.gen_range(0..shape.nodes))
        };
        let (p, o) = match rng.gen_range(0..10) {
            0 => (var(rng), var(rng)),
            1 | 2 => (
                "a".to_owned(),
                if rng.gen_bool(0.7) {
                    class(rng.gen_range(0..shape.classes))
                } else {
                    var(rng)
                },
            ),
            _ => (
                predicate(rng.gen_range(0..shape.predicates)),
                if rng.gen_bool(0.75) {
                    var(rng)
                } else {
                    object_text(rng, shape)
                },
            ),
        };
        patterns.push(format!("{s} {p} {o} ."));
    }
    used.sort();
    used.dedup();
    if rng.gen_bool(0.2) {
        let v = used.choose(rng).unwrap();
        let op = ["=", "!=", "<", ">="].choose(rng).unwrap();
        let value = rng.gen_range(0..shape.literals);
        patterns.push(format!("FILTER({v} {op} {value})"));
    }
    let projection = if rng.gen_bool(0.2) {
        "*".to_owned()
    } else {
        let k = rng.gen_range(1..=used.len());
        let mut chosen: Vec<&str> = used.choose_multiple(rng, k).copied().collect();
        chosen.sort();
        chosen.join(" ")
    };
    let distinct = if rng.gen_bool(0.5) { "DISTINCT " } else { "" };
    format!("SELECT {distinct}{projection} WHERE {{ {} }}", patterns.join(" "))
}

/// Every combination of triples, one per pattern, kept when constants match,
/// shared variables agree and every filter accepts.
pub fn nested_loop(query: &Query, graph: &Graph) -> BTreeSet<Tuple> {
    let triples: Vec<&Triple> = graph.iter().collect();
    let mut out = BTreeSet::new();
    let mut binding: BTreeMap<Variable, Term> = BTreeMap::new();
    search(query, &triples, 0, &mut binding, &mut out);
    out
}

fn unify(p: &TermPattern, t: &Term, binding: &mut BTreeMap<Variable, Term>, added: &mut Vec<Variable>) -> bool {
    match p {
        TermPattern::Term(c) => c == t,
        TermPattern::Variable(v) => match binding.get(v) {
            Some(bound) => bound == t,
            None => {
                binding.insert(v.clone(), t.clone());
                added.push(v.clone());
                true
            }
        },
    }
}

fn search(
    query: &Query,
    triples: &[&Triple],
    depth: usize,
    binding: &mut BTreeMap<Variable, Term>,
    out: &mut BTreeSet<Tuple>,
) {
    if depth == query.patterns.len() {
        let pass = query.filters.iter().all(|f| {
            binding
                .get(&f.variable)
                .is_some_and(|t| filter_holds(f.op.symbol(), t, &f.value))
        });
        if pass {
            out.insert(query.projection.iter().map(|v| binding.get(v).cloned()).collect());
        }
        return;
    }
    let pattern = &query.patterns[depth];
    for t in triples {
        let mut added = Vec::new();
        let ok = unify(&pattern.subject, t.subject(), binding, &mut added)
            && unify(&pattern.predicate, t.predicate(), binding, &mut added)
            && unify(&pattern.object, t.object(), binding, &mut added);
        if ok {
            search(query, triples, depth + 1, binding, out);
        }
        for v in added {
            binding.remove(&v);
        }
    }
}

fn integer(t: &Term) -> Option<i64> {
    match t {
        Term::Literal(l) if l.datatype().as_str() == XSD_INTEGER => l.lexical().parse().ok(),
        _ => None,
    }
}

/// Numbers compare numerically; otherwise `=`/`!=` are term (in)equality and the
/// orderings apply only to literals sharing datatype and language.
pub fn filter_holds(op: &str, bound: &Term, constant: &Term) -> bool {
    use std::cmp::Ordering::*;
    let ord = match (integer(bound), integer(constant)) {
        (Some(a), Some(b)) => Some(a.cmp(&b)),
        _ => match op {
            "=" => return bound == constant,
            "!=" => return bound != constant,
            _ => match (bound, constant) {
                (Term::Literal(a), Term::Literal(b))
                    if a.datatype() == b.datatype() && a.language() == b.language() =>
                {
                    Some(a.lexical().cmp(b.lexical()))
                }
                _ => None,
            },
        },
    };
    let Some(ord) = ord else { return false };
    match op {
        "=" => ord == Equal,
        "!=" => ord != Equal,
        "<" => ord == Less,
        "<=" => ord != Greater,
        ">" => ord == Greater,
        ">=" => ord != Less,
        other => panic!("unknown operator {other}"),
    }
}

/// Splits a graph into `k` non-empty parts; about a tenth of the triples land in two parts.
pub fn partition(rng: &mut impl Rng, graph: &Graph, k: usize) -> Vec<Graph> {
    let mut parts = vec![Graph::new(); k];
    let triples: Vec<&Triple> = graph.sorted();
    for (i, t) in triples.iter().enumerate() {
        let home = if i < k { i } else { rng.gen_range(0..k) };
        parts[home].insert((*t).clone());
        if rng.gen_ratio(1, 10) {
            parts[rng.gen_range(0..k)].insert((*t).clone());
        }
    }
    parts
}
