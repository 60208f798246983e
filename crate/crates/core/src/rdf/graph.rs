use std::collections::HashMap;
use std::sync::Arc;

use indexmap::IndexSet;
use parking_lot::RwLock;

use super::term::{Term, Triple};

/// A graph shared between a node's request handlers.
///
/// Readers hold the read guard for the whole evaluation so they see a stable snapshot.
pub type SharedGraph = Arc<RwLock<Graph>>;

/// In-memory triple set with subject, predicate and object indexes.
///
/// Triples are never removed, so index entries are positions into the insertion-ordered set.
#[derive(Clone, Debug, Default)]
pub struct Graph {
    triples: IndexSet<Triple>,
    by_subject: HashMap<Term, Vec<usize>>,
    by_predicate: HashMap<Term, Vec<usize>>,
    by_object: HashMap<Term, Vec<usize>>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn into_shared(self) -> SharedGraph {
        Arc::new(RwLock::new(self))
    }

    /// Inserts a triple, returning the graph size afterwards.
    pub fn insert(&mut self, triple: Triple) -> usize {
        let (pos, added) = self.triples.insert_full(triple);
        if added {
            let t = &self.triples[pos];
            self.by_subject.entry(t.subject().clone()).or_default().push(pos);
            self.by_predicate.entry(t.predicate().clone()).or_default().push(pos);
            self.by_object.entry(t.object().clone()).or_default().push(pos);
        }
        self.triples.len()
    }

    pub fn extend<I: IntoIterator<Item = Triple>>(&mut self, triples: I) {
        for t in triples {
            self.insert(t);
        }
    }

    pub fn union_with(&mut self, other: &Graph) {
        self.extend(other.iter().cloned());
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> + '_ {
        self.triples.iter()
    }

    /// All triples in ascending order.
    pub fn sorted(&self) -> Vec<&Triple> {
        let mut v: Vec<&Triple> = self.triples.iter().collect();
        v.sort();
        v
    }

    /// Triples matching every bound position.
    pub fn matching<'a>(
        &'a self,
        subject: Option<&'a Term>,
        predicate: Option<&'a Term>,
        object: Option<&'a Term>,
    ) -> Box<dyn Iterator<Item = &'a Triple> + 'a> {
        let candidates = [
            subject.map(|s| self.by_subject.get(s)),
            predicate.map(|p| self.by_predicate.get(p)),
            object.map(|o| self.by_object.get(o)),
        ];
        let mut best: Option<&Vec<usize>> = None;
        for c in candidates.into_iter().flatten() {
            match c {
                // A bound term with no index entry means nothing matches.
                None => return Box::new(std::iter::empty()),
                Some(list) => {
                    if best.is_none_or(|b| list.len() < b.len()) {
                        best = Some(list);
                    }
                }
            }
        }
        let filter = move |t: &&Triple| {
            subject.is_none_or(|s| t.subject() == s)
                && predicate.is_none_or(|p| t.predicate() == p)
                && object.is_none_or(|o| t.object() == o)
        };
        match best {
            None => Box::new(self.triples.iter()),
            Some(list) => Box::new(list.iter().map(move |&i| &self.triples[i]).filter(filter)),
        }
    }

    /// Upper bound on the number of matches, read from the smallest bound index.
    pub fn estimate(&self, subject: Option<&Term>, predicate: Option<&Term>, object: Option<&Term>) -> usize {
        let sizes = [
            subject.map(|s| self.by_subject.get(s).map_or(0, Vec::len)),
            predicate.map(|p| self.by_predicate.get(p).map_or(0, Vec::len)),
            object.map(|o| self.by_object.get(o).map_or(0, Vec::len)),
        ];
        sizes.into_iter().flatten().min().unwrap_or(self.triples.len())
    }

    /// Distinct predicates in the graph.
    pub fn predicates(&self) -> impl Iterator<Item = &Term> + '_ {
        self.by_predicate.keys()
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.triples.iter().all(|t| other.contains(t))
    }
}

impl Eq for Graph {}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut g = Graph::new();
        g.extend(iter);
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iri(s: &str) -> Term {
        Term::iri(format!("http://e/{s}")).unwrap()
    }

    fn t(s: &str, p: &str, o: &str) -> Triple {
        Triple::new(iri(s), iri(p), iri(o)).unwrap()
    }

    #[test]
    fn insert_is_idempotent() {
        let mut g = Graph::new();
        assert_eq!(g.insert(t("a", "p", "b")), 1);
        assert_eq!(g.insert(t("a", "p", "b")), 1);
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn match_fully_bound_absent_is_empty() {
        let mut g = Graph::new();
        g.insert(t("a", "p", "b"));
        let (s, p, o) = (iri("a"), iri("p"), iri("c"));
        assert_eq!(g.matching(Some(&s), Some(&p), Some(&o)).count(), 0);
        assert_eq!(g.matching(None, None, None).count(), 1);
    }

    fn arb_triple() -> impl Strategy<Value = Triple> {
        (0u8..6, 0u8..4, 0u8..8).prop_map(|(s, p, o)| t(&format!("s{s}"), &format!("p{p}"), &format!("o{}", o % 6)))
    }

    proptest! {
        #[test]
        fn index_match_equals_scan(
            triples in proptest::collection::vec(arb_triple(), 0..120),
            sb in proptest::option::of(0u8..7),
            pb in proptest::option::of(0u8..5),
            ob in proptest::option::of(0u8..7),
        ) {
            let g: Graph = triples.iter().cloned().collect();
            let s = sb.map(|i| iri(&format!("s{i}")));
            let p = pb.map(|i| iri(&format!("p{i}")));
            let o = ob.map(|i| iri(&format!("o{i}")));
            let mut via_index: Vec<_> = g.matching(s.as_ref(), p.as_ref(), o.as_ref()).cloned().collect();
            let mut via_scan: Vec<_> = g.iter().filter(|t| {
                s.as_ref().is_none_or(|x| t.subject() == x)
                    && p.as_ref().is_none_or(|x| t.predicate() == x)
                    && o.as_ref().is_none_or(|x| t.object() == x)
            }).cloned().collect();
            via_index.sort();
            via_scan.sort();
            prop_assert_eq!(via_index, via_scan);
            let distinct: std::collections::HashSet<_> = triples.iter().collect();
            prop_assert_eq!(g.len(), distinct.len());
        }
    }
}
