use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};

use super::catalog::FederationCatalog;
use super::FederationError;
use crate::rdf::vocab::RDF_TYPE;
use crate::rdf::Term;
use crate::sparql::{Filter, Query, TriplePattern, Variable};

/// Relevant source ids for each pattern, indexed like `Query::patterns`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceSelection(pub Vec<BTreeSet<String>>);

impl SourceSelection {
    pub fn for_pattern(&self, index: usize) -> &BTreeSet<String> {
        &self.0[index]
    }
}

fn relevant(pattern: &TriplePattern, source: &super::SourceDescription) -> bool {
    let Some(pred) = pattern.predicate.as_term() else {
        return true;
    };
    let Some(pred) = pred.as_iri() else {
        return false;
    };
    if pred.as_str() == RDF_TYPE {
        return match pattern.object.as_term() {
            Some(Term::Iri(class)) => source.answers_class(class),
            Some(_) => false,
            None => source.has_classes(),
        };
    }
    source.answers_predicate(pred)
}

pub fn select_sources(query: &Query, catalog: &FederationCatalog) -> Result<SourceSelection, FederationError> {
    let mut out = Vec::with_capacity(query.patterns.len());
    for (index, pattern) in query.patterns.iter().enumerate() {
        let ids: BTreeSet<String> = catalog
            .sources
            .iter()
            .filter(|s| relevant(pattern, s))
            .map(|s| s.id.clone())
            .collect();
        if ids.is_empty() {
            return Err(FederationError::Unanswerable {
                index,
                pattern: pattern.to_string(),
            });
        }
        out.push(ids);
    }
    Ok(SourceSelection(out))
}

/// One unit of remote work. Sent to every listed source; the answers are unioned.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subquery {
    pub sources: Vec<String>,
    /// Indexes into the federated query's patterns.
    pub patterns: Vec<usize>,
    pub query: Query,
}

impl Subquery {
    pub fn variables(&self) -> BTreeSet<Variable> {
        self.query
            .patterns
            .iter()
            .flat_map(TriplePattern::variables)
            .cloned()
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinEdge {
    pub left: usize,
    pub right: usize,
    /// Empty when the edge only links otherwise disconnected parts (a Cartesian product).
    pub shared: BTreeSet<Variable>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecomposedQuery {
    pub original: Query,
    pub subqueries: Vec<Subquery>,
    pub joins: Vec<JoinEdge>,
    /// Filters evaluated after the join because no single subquery covers them.
    pub residual_filters: Vec<Filter>,
}

impl DecomposedQuery {
    /// Output variables of the federated query, with `SELECT *` expanded.
    pub fn projection(&self) -> Vec<Variable> {
        if self.original.projection.is_empty() {
            self.original.pattern_variables()
        } else {
            self.original.projection.clone()
        }
    }

    pub fn has_cartesian_product(&self) -> bool {
        self.joins.iter().any(|e| e.shared.is_empty())
    }

    pub fn to_json(&self) -> Value {
        let vars = |set: &mut dyn Iterator<Item = &Variable>| -> Vec<String> { set.map(|v| v.to_string()).collect() };
        json!({
            "projection": vars(&mut self.projection().iter()),
            "distinct": self.original.distinct,
            "limit": self.original.limit,
            "subqueries": self.subqueries.iter().map(|s| json!({
                "sources": s.sources,
                "patterns": s.patterns,
                "projection": vars(&mut s.query.projection.iter()),
                "query": s.query.to_string(),
            })).collect::<Vec<_>>(),
            "joins": self.joins.iter().map(|e| json!({
                "left": e.left,
                "right": e.right,
                "variables": vars(&mut e.shared.iter()),
                "cartesian": e.shared.is_empty(),
            })).collect::<Vec<_>>(),
            "residualFilters": self.residual_filters.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
        })
    }
}

/// Groups single-source patterns into one subquery per source, in order of first
/// appearance. A pattern with several relevant sources becomes its own subquery sent
/// to all of them, because grouping it with others would lose cross-source joins.
pub fn decompose(query: &Query, selection: &SourceSelection) -> DecomposedQuery {
    let mut groups: Vec<(Vec<String>, Vec<usize>)> = Vec::new();
    let mut by_source: BTreeMap<String, usize> = BTreeMap::new();
    for (i, ids) in selection.0.iter().enumerate() {
        if ids.len() == 1 {
            let id = ids.iter().next().expect("one element").clone();
            match by_source.get(&id) {
                Some(&g) => groups[g].1.push(i),
                None => {
                    by_source.insert(id.clone(), groups.len());
                    groups.push((vec![id], vec![i]));
                }
            }
        } else {
            groups.push((ids.iter().cloned().collect(), vec![i]));
        }
    }

    let group_vars: Vec<BTreeSet<Variable>> = groups
        .iter()
        .map(|(_, pats)| {
            pats.iter()
                .flat_map(|&i| query.patterns[i].variables())
                .cloned()
                .collect()
        })
        .collect();
    let mut occurrences: BTreeMap<&Variable, usize> = BTreeMap::new();
    for vars in &group_vars {
        for v in vars {
            *occurrences.entry(v).or_default() += 1;
        }
    }
    let join_vars: BTreeSet<&Variable> = occurrences.iter().filter(|(_, &n)| n > 1).map(|(v, _)| *v).collect();

    let mut pushed: Vec<Vec<Filter>> = vec![Vec::new(); groups.len()];
    let mut residual_filters = Vec::new();
    for f in &query.filters {
        let owners: Vec<usize> = (0..groups.len())
            .filter(|&g| group_vars[g].contains(&f.variable))
            .collect();
        match owners.as_slice() {
            [only] => pushed[*only].push(f.clone()),
            _ => residual_filters.push(f.clone()),
        }
    }

    let out_vars: BTreeSet<Variable> = if query.projection.is_empty() {
        query.pattern_variables().into_iter().collect()
    } else {
        query.projection.iter().cloned().collect()
    };
    let residual_vars: BTreeSet<&Variable> = residual_filters.iter().map(|f| &f.variable).collect();

    let subqueries: Vec<Subquery> = groups
        .into_iter()
        .zip(pushed)
        .zip(&group_vars)
        .map(|(((sources, pats), filters), vars)| {
            let patterns: Vec<TriplePattern> = pats.iter().map(|&i| query.patterns[i].clone()).collect();
            let sub = Query {
                prefixes: Vec::new(),
                projection: Vec::new(),
                distinct: query.distinct,
                patterns,
                filters,
                limit: None,
            };
            // Keep first-appearance order for readability of the printed subquery.
            let mut projection: Vec<Variable> = sub
                .pattern_variables()
                .into_iter()
                .filter(|v| out_vars.contains(v) || join_vars.contains(v) || residual_vars.contains(v))
                .collect();
            if projection.is_empty() {
                projection = vars.iter().cloned().collect();
            }
            Subquery {
                sources,
                patterns: pats,
                query: Query { projection, ..sub },
            }
        })
        .collect();

    let joins = join_graph(&subqueries);
    DecomposedQuery {
        original: query.clone(),
        subqueries,
        joins,
        residual_filters,
    }
}

fn join_graph(subqueries: &[Subquery]) -> Vec<JoinEdge> {
    let projected: Vec<BTreeSet<&Variable>> = subqueries.iter().map(|s| s.query.projection.iter().collect()).collect();
    let mut edges = Vec::new();
    let mut component: Vec<usize> = (0..subqueries.len()).collect();
    fn find(c: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while c[r] != r {
            r = c[r];
        }
        c[i] = r;
        r
    }
    for i in 0..subqueries.len() {
        for j in i + 1..subqueries.len() {
            let shared: BTreeSet<Variable> = projected[i].intersection(&projected[j]).map(|v| (*v).clone()).collect();
            if !shared.is_empty() {
                let (a, b) = (find(&mut component, i), find(&mut component, j));
                component[a] = b;
                edges.push(JoinEdge {
                    left: i,
                    right: j,
                    shared,
                });
            }
        }
    }
    for i in 1..subqueries.len() {
        let (a, b) = (find(&mut component, 0), find(&mut component, i));
        if a != b {
            component[b] = a;
            edges.push(JoinEdge {
                left: 0,
                right: i,
                shared: BTreeSet::new(),
            });
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::federation::parse_catalog;
    use crate::sparql::parse_query;

    pub(crate) const WORKED_EXAMPLE_TEXT: &str = r#"PREFIX wd:     <http://www.wikidata.org/entity/>
PREFIX wdt:    <http://www.wikidata.org/prop/direct/>
PREFIX energy: <http://w3id.org/energy/>

SELECT DISTINCT ?country ?productionType ?measure
WHERE {
?genCapacity    a  energy:GenerationCapacity .
?genCapacity    energy:productionType ?productionType .
?genCapacity    energy:country        ?country .
?genCapacity    energy:measure        ?measure .
?genCapacity    energy:agg_year       "2020" .
?productionType wdt:P279              wd:Q12705 .
}
"#;

    const CATALOG: &str = r#"
consumer: tso
prefixes: { energy: "http://w3id.org/energy/", wdt: "http://www.wikidata.org/prop/direct/" }
sources:
  - { id: local, endpoint: "tcp://127.0.0.1:1", classes: [energy:GenerationCapacity], predicates: ["energy:*"] }
  - { id: wiki, endpoint: "tcp://127.0.0.1:2", predicates: [wdt:P279] }
"#;

    fn names(vars: &[Variable]) -> Vec<&str> {
        vars.iter().map(Variable::name).collect()
    }

    #[test]
    fn worked_example_selection_and_decomposition() {
        let q = parse_query(WORKED_EXAMPLE_TEXT).unwrap();
        let catalog = parse_catalog(CATALOG).unwrap();
        let sel = select_sources(&q, &catalog).unwrap();
        for i in 0..5 {
            assert_eq!(sel.for_pattern(i).iter().collect::<Vec<_>>(), vec!["local"]);
        }
        assert_eq!(sel.for_pattern(5).iter().collect::<Vec<_>>(), vec!["wiki"]);

        let plan = decompose(&q, &sel);
        assert_eq!(plan.subqueries.len(), 2);
        let (sq1, sq2) = (&plan.subqueries[0], &plan.subqueries[1]);
        assert_eq!(sq1.query.patterns.len(), 5);
        assert_eq!(sq2.query.patterns.len(), 1);
        let mut p1 = names(&sq1.query.projection);
        p1.sort();
        assert_eq!(p1, vec!["country", "measure", "productionType"]);
        assert_eq!(names(&sq2.query.projection), vec!["productionType"]);
        assert_eq!(plan.joins.len(), 1);
        assert_eq!(
            names(&plan.joins[0].shared.iter().cloned().collect::<Vec<_>>()),
            vec!["productionType"]
        );
        assert!(sq1.query.distinct && sq2.query.distinct);
    }

    #[test]
    fn variable_predicate_goes_everywhere_and_unknown_predicate_fails() {
        let catalog = parse_catalog(CATALOG).unwrap();
        let q = parse_query("SELECT ?s WHERE { ?s ?p ?o }").unwrap();
        assert_eq!(select_sources(&q, &catalog).unwrap().for_pattern(0).len(), 2);
        let q = parse_query("SELECT ?s WHERE { ?s <http://nowhere/p> ?o }").unwrap();
        assert!(matches!(
            select_sources(&q, &catalog),
            Err(FederationError::Unanswerable { index: 0, .. })
        ));
    }

    #[test]
    fn single_source_query_is_one_subquery() {
        let catalog = parse_catalog(CATALOG).unwrap();
        let q = parse_query("PREFIX energy: <http://w3id.org/energy/>\nSELECT ?c WHERE { ?g energy:country ?c . ?g energy:measure ?m FILTER(?m > 3) }").unwrap();
        let plan = decompose(&q, &select_sources(&q, &catalog).unwrap());
        assert_eq!(plan.subqueries.len(), 1);
        let sq = &plan.subqueries[0].query;
        assert_eq!(sq.patterns, q.patterns);
        assert_eq!(sq.filters, q.filters);
        assert_eq!(names(&sq.projection), vec!["c"]);
        assert!(plan.joins.is_empty());
    }

    #[test]
    fn disconnected_subqueries_get_a_cartesian_edge() {
        let catalog = parse_catalog(CATALOG).unwrap();
        let q = parse_query(
            "SELECT ?a ?b WHERE { ?a <http://w3id.org/energy/country> ?x . ?b <http://www.wikidata.org/prop/direct/P279> ?y }",
        )
        .unwrap();
        let plan = decompose(&q, &select_sources(&q, &catalog).unwrap());
        assert_eq!(plan.subqueries.len(), 2);
        assert!(plan.has_cartesian_product());
        assert_eq!(plan.to_json()["joins"][0]["cartesian"], true);
    }

    #[test]
    fn multi_source_pattern_is_its_own_unit_and_filter_spanning_units_stays_residual() {
        let catalog = parse_catalog(CATALOG).unwrap();
        let q = parse_query(
            "SELECT ?s WHERE { ?s <http://w3id.org/energy/country> ?c . ?s ?p ?o FILTER(?s != <http://x/y>) }",
        )
        .unwrap();
        let plan = decompose(&q, &select_sources(&q, &catalog).unwrap());
        assert_eq!(plan.subqueries.len(), 2);
        assert_eq!(plan.subqueries[1].sources, vec!["local", "wiki"]);
        assert_eq!(plan.residual_filters.len(), 1);
        let total: usize = plan.subqueries.iter().map(|s| s.patterns.len()).sum();
        assert_eq!(total, q.patterns.len());
    }
}
