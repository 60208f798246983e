//! Basic graph pattern evaluation over an in-memory [`Graph`].

use std::collections::{HashMap, HashSet};

use super::ast::{Query, TermPattern, TriplePattern, Variable};
use super::results::SolutionSequence;
use crate::rdf::{Graph, Term};

type Row = Vec<Option<Term>>;

pub fn evaluate(query: &Query, graph: &Graph) -> SolutionSequence {
    let mut slots: HashMap<&Variable, usize> = HashMap::new();
    let vars = query
        .patterns
        .iter()
        .flat_map(TriplePattern::variables)
        .chain(query.filters.iter().map(|f| &f.variable))
        .chain(query.projection.iter());
    for v in vars {
        let next = slots.len();
        slots.entry(v).or_insert(next);
    }

    let order = join_order(&query.patterns, graph);
    let mut bound: HashSet<&Variable> = HashSet::new();
    let mut pending_filters: Vec<usize> = (0..query.filters.len()).collect();
    let mut rows: Vec<Row> = vec![vec![None; slots.len()]];

    for idx in order {
        let pattern = &query.patterns[idx];
        let mut next_rows = Vec::new();
        for row in &rows {
            extend_row(pattern, row, &slots, graph, &mut next_rows);
        }
        rows = next_rows;
        bound.extend(pattern.variables());

        // Apply filters as soon as their variable is bound.
        pending_filters.retain(|&fi| {
            let f = &query.filters[fi];
            if !bound.contains(&f.variable) {
                return true;
            }
            let slot = slots[&f.variable];
            rows.retain(|r| r[slot].as_ref().is_some_and(|t| f.accepts(t)));
            false
        });
        if rows.is_empty() {
            break;
        }
    }
    // A filter over a variable that no pattern binds rejects every row.
    if !pending_filters.is_empty() {
        rows.clear();
    }

    let proj: Vec<usize> = query.projection.iter().map(|v| slots[v]).collect();
    let mut projected: Vec<Row> = rows
        .into_iter()
        .map(|r| proj.iter().map(|&i| r[i].clone()).collect())
        .collect();
    if query.distinct {
        let mut seen = HashSet::new();
        projected.retain(|r| seen.insert(r.clone()));
    }
    if let Some(limit) = query.limit {
        projected.sort();
        projected.truncate(limit);
    }
    SolutionSequence::new(query.projection.clone(), projected)
}

/// Greedy order: most bound positions first, then the smaller index estimate.
fn join_order(patterns: &[TriplePattern], graph: &Graph) -> Vec<usize> {
    let mut remaining: Vec<usize> = (0..patterns.len()).collect();
    let mut bound: HashSet<&Variable> = HashSet::new();
    let mut order = Vec::with_capacity(patterns.len());
    while !remaining.is_empty() {
        let (pick_pos, _) = remaining
            .iter()
            .enumerate()
            .map(|(pos, &i)| {
                let p = &patterns[i];
                let bound_count = p
                    .positions()
                    .iter()
                    .filter(|tp| match tp {
                        TermPattern::Term(_) => true,
                        TermPattern::Variable(v) => bound.contains(v),
                    })
                    .count();
                let estimate = graph.estimate(p.subject.as_term(), p.predicate.as_term(), p.object.as_term());
                (pos, (std::cmp::Reverse(bound_count), estimate, i))
            })
            .min_by(|a, b| a.1.cmp(&b.1))
            .expect("remaining is non-empty");
        let chosen = remaining.remove(pick_pos);
        bound.extend(patterns[chosen].variables());
        order.push(chosen);
    }
    order
}

fn extend_row(
    pattern: &TriplePattern,
    row: &Row,
    slots: &HashMap<&Variable, usize>,
    graph: &Graph,
    out: &mut Vec<Row>,
) {
    let resolve = |tp: &TermPattern| -> Option<Term> {
        match tp {
            TermPattern::Term(t) => Some(t.clone()),
            TermPattern::Variable(v) => row[slots[v]].clone(),
        }
    };
    let s = resolve(&pattern.subject);
    let p = resolve(&pattern.predicate);
    let o = resolve(&pattern.object);
    'triples: for triple in graph.matching(s.as_ref(), p.as_ref(), o.as_ref()) {
        let mut new_row = row.clone();
        for (tp, value) in [
            (&pattern.subject, triple.subject()),
            (&pattern.predicate, triple.predicate()),
            (&pattern.object, triple.object()),
        ] {
            if let TermPattern::Variable(v) = tp {
                let slot = slots[v];
                match &new_row[slot] {
                    // Same variable twice in one pattern must bind the same term.
                    Some(existing) if existing != value => continue 'triples,
                    Some(_) => {}
                    None => new_row[slot] = Some(value.clone()),
                }
            }
        }
        out.push(new_row);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::{parse_ntriples, Triple};
    use crate::sparql::parse_query;

    fn graph(text: &str) -> Graph {
        parse_ntriples(text).unwrap()
    }

    #[test]
    fn empty_graph_gives_no_rows() {
        let q = parse_query("SELECT ?s WHERE { ?s ?p ?o }").unwrap();
        assert!(evaluate(&q, &Graph::new()).is_empty());
    }

    #[test]
    fn repeated_variable_in_pattern_must_agree() {
        let g = graph("<http://e/a> <http://e/p> <http://e/a> .\n<http://e/a> <http://e/p> <http://e/b> .\n");
        let q = parse_query("SELECT ?x WHERE { ?x <http://e/p> ?x }").unwrap();
        let r = evaluate(&q, &g);
        assert_eq!(r.len(), 1);
    }

    #[test]
    fn distinct_and_limit() {
        let g = graph(
            "<http://e/a> <http://e/p> \"1\" .\n<http://e/b> <http://e/p> \"1\" .\n<http://e/c> <http://e/p> \"2\" .\n",
        );
        let q = parse_query("SELECT DISTINCT ?v WHERE { ?s <http://e/p> ?v }").unwrap();
        assert_eq!(evaluate(&q, &g).len(), 2);
        let q = parse_query("SELECT ?v WHERE { ?s <http://e/p> ?v }").unwrap();
        assert_eq!(evaluate(&q, &g).len(), 3);
        let q = parse_query("SELECT DISTINCT ?v WHERE { ?s <http://e/p> ?v } LIMIT 1").unwrap();
        let r = evaluate(&q, &g);
        assert_eq!(r.len(), 1);
        assert_eq!(r.rows()[0][0], Some(Term::string("1")));
    }

    #[test]
    fn filter_on_unbound_variable_rejects() {
        let g = graph("<http://e/a> <http://e/p> \"1\" .\n");
        let q = parse_query("SELECT ?s WHERE { ?s <http://e/p> ?v FILTER(?zz = 1) }").unwrap();
        assert!(evaluate(&q, &g).is_empty());
    }

    #[test]
    fn unbound_projection_is_left_empty() {
        let g = graph("<http://e/a> <http://e/p> \"1\" .\n");
        let q = parse_query("SELECT ?s ?missing WHERE { ?s <http://e/p> ?v }").unwrap();
        let r = evaluate(&q, &g);
        assert_eq!(r.rows(), &[vec![Some(Term::iri("http://e/a").unwrap()), None]]);
    }

    #[test]
    fn no_variable_pattern_acts_as_ask() {
        let mut g = Graph::new();
        let a = Term::iri("http://e/a").unwrap();
        let p = Term::iri("http://e/p").unwrap();
        g.insert(Triple::new(a.clone(), p.clone(), a.clone()).unwrap());
        let q = parse_query("SELECT * WHERE { <http://e/a> <http://e/p> <http://e/a> }").unwrap();
        assert_eq!(evaluate(&q, &g).len(), 1);
        let q = parse_query("SELECT * WHERE { <http://e/a> <http://e/p> <http://e/b> }").unwrap();
        assert_eq!(evaluate(&q, &g).len(), 0);
    }
}
