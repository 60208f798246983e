use std::collections::{BTreeMap, HashMap};

use crate::rdf::vocab::OWL_SAME_AS;
use crate::rdf::{Graph, Iri, Term, Triple};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinkOutcome {
    pub graph: Graph,
    /// Added `(local, owl:sameAs, reference)` pairs, sorted.
    pub links: Vec<(Term, Term)>,
    /// Local nodes linked to more than one reference node.
    pub ambiguous: Vec<Term>,
}

/// Adds `owl:sameAs` from every local node to every reference node carrying a label with
/// the same lexical form (case-sensitive). Original triples are kept as they are.
pub fn link_entities(graph: &Graph, reference: &Graph, label_predicate: &Iri) -> LinkOutcome {
    let label = Term::Iri(label_predicate.clone());
    let mut by_label: HashMap<&str, Vec<&Term>> = HashMap::new();
    for t in reference.matching(None, Some(&label), None) {
        if let Some(lit) = t.object().as_literal() {
            by_label.entry(lit.lexical()).or_default().push(t.subject());
        }
    }

    let same_as = Term::Iri(Iri::from_static(OWL_SAME_AS));
    let mut out = graph.clone();
    let mut per_node: BTreeMap<Term, Vec<Term>> = BTreeMap::new();
    for t in graph.matching(None, Some(&label), None) {
        let Some(lit) = t.object().as_literal() else { continue };
        for m in by_label.get(lit.lexical()).into_iter().flatten() {
            let targets = per_node.entry(t.subject().clone()).or_default();
            if !targets.contains(m) {
                targets.push((*m).clone());
            }
        }
    }
    let mut links = Vec::new();
    let mut ambiguous = Vec::new();
    for (node, mut targets) in per_node {
        targets.sort();
        if targets.len() > 1 {
            ambiguous.push(node.clone());
        }
        for m in targets {
            out.insert(Triple::new(node.clone(), same_as.clone(), m.clone()).expect("IRI predicate"));
            links.push((node.clone(), m));
        }
    }
    LinkOutcome {
        graph: out,
        links,
        ambiguous,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_ntriples;
    use crate::rdf::vocab::RDFS_LABEL;

    fn label() -> Iri {
        Iri::from_static(RDFS_LABEL)
    }

    fn g(text: &str) -> Graph {
        parse_ntriples(text).unwrap()
    }

    const L: &str = "<http://www.w3.org/2000/01/rdf-schema#label>";

    #[test]
    fn exact_label_links_once() {
        let local = g(&format!(
            "<http://l/wind> {L} \"WindPower\" .\n<http://l/coal> {L} \"Coal\" .\n"
        ));
        let reference = g(&format!(
            "<http://r/Q1> {L} \"WindPower\" .\n<http://r/Q2> {L} \"windpower\" .\n"
        ));
        let out = link_entities(&local, &reference, &label());
        assert_eq!(out.links.len(), 1);
        assert_eq!(out.graph.len(), local.len() + 1);
        assert!(out.ambiguous.is_empty());
        for t in local.iter() {
            assert!(out.graph.contains(t));
        }
    }

    #[test]
    fn no_overlap_leaves_graph_unchanged() {
        let local = g(&format!("<http://l/a> {L} \"A\" .\n"));
        let reference = g(&format!("<http://r/b> {L} \"B\" .\n"));
        let out = link_entities(&local, &reference, &label());
        assert_eq!(out.graph, local);
        assert!(out.links.is_empty());
    }

    #[test]
    fn shared_reference_label_gives_two_links_and_is_reported() {
        let local = g(&format!("<http://l/a> {L} \"A\" .\n"));
        let reference = g(&format!("<http://r/1> {L} \"A\" .\n<http://r/2> {L} \"A\" .\n"));
        let out = link_entities(&local, &reference, &label());
        assert_eq!(out.links.len(), 2);
        assert_eq!(out.ambiguous.len(), 1);
    }
}
