use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;
use std::thread;

use super::clients::QueryClient;
use super::plan::DecomposedQuery;
use super::FederationError;
use crate::rdf::Term;
use crate::sparql::{SolutionSequence, Variable};

type Row = Vec<Option<Term>>;

/// Intermediate bindings during the join phase.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Relation {
    pub vars: Vec<Variable>,
    pub rows: Vec<Row>,
}

impl Relation {
    fn from_solutions(vars: &[Variable], solutions: &SolutionSequence) -> Self {
        let cols: Vec<Option<usize>> = vars.iter().map(|v| solutions.column(v)).collect();
        let rows = solutions
            .rows()
            .iter()
            .map(|r| cols.iter().map(|c| c.and_then(|c| r[c].clone())).collect())
            .collect();
        Relation {
            vars: vars.to_vec(),
            rows,
        }
    }

    fn shares_with(&self, other: &Relation) -> bool {
        self.vars.iter().any(|v| other.vars.contains(v))
    }
}

/// Equi-join on the shared variables; with none shared this is the Cartesian product.
/// The smaller input is the build side. Output columns are `left.vars` then the rest of `right.vars`.
pub fn hash_join(left: &Relation, right: &Relation) -> Relation {
    let shared: Vec<(usize, usize)> = left
        .vars
        .iter()
        .enumerate()
        .filter_map(|(i, v)| right.vars.iter().position(|w| w == v).map(|j| (i, j)))
        .collect();
    let right_extra: Vec<usize> = (0..right.vars.len())
        .filter(|j| !shared.iter().any(|&(_, sj)| sj == *j))
        .collect();
    let mut vars = left.vars.clone();
    vars.extend(right_extra.iter().map(|&j| right.vars[j].clone()));

    let combine = |l: &Row, r: &Row| -> Row {
        let mut out = l.clone();
        out.extend(right_extra.iter().map(|&j| r[j].clone()));
        out
    };
    let key_l = |r: &Row| -> Vec<Option<Term>> { shared.iter().map(|&(i, _)| r[i].clone()).collect() };
    let key_r = |r: &Row| -> Vec<Option<Term>> { shared.iter().map(|&(_, j)| r[j].clone()).collect() };

    let mut rows = Vec::new();
    if left.rows.len() <= right.rows.len() {
        let mut table: HashMap<Vec<Option<Term>>, Vec<&Row>> = HashMap::new();
        for l in &left.rows {
            table.entry(key_l(l)).or_default().push(l);
        }
        for r in &right.rows {
            if let Some(matches) = table.get(&key_r(r)) {
                rows.extend(matches.iter().map(|l| combine(l, r)));
            }
        }
    } else {
        let mut table: HashMap<Vec<Option<Term>>, Vec<&Row>> = HashMap::new();
        for r in &right.rows {
            table.entry(key_r(r)).or_default().push(r);
        }
        for l in &left.rows {
            if let Some(matches) = table.get(&key_l(l)) {
                rows.extend(matches.iter().map(|r| combine(l, r)));
            }
        }
    }
    Relation { vars, rows }
}

/// Runs every (subquery, source) pair concurrently, unions per subquery, then joins
/// greedily: smallest relation first, next the smallest one sharing a variable with
/// the running result, a Cartesian step only when nothing connects.
pub fn execute_federated(
    plan: &DecomposedQuery,
    clients: &BTreeMap<String, Arc<dyn QueryClient>>,
) -> Result<SolutionSequence, FederationError> {
    let mut tasks = Vec::new();
    for (unit, sub) in plan.subqueries.iter().enumerate() {
        for source in &sub.sources {
            let client = clients
                .get(source)
                .ok_or_else(|| FederationError::MissingClient(source.clone()))?;
            tasks.push((unit, source.as_str(), Arc::clone(client)));
        }
    }

    let answers: Vec<Result<SolutionSequence, String>> = thread::scope(|scope| {
        let handles: Vec<_> = tasks
            .iter()
            .map(|(unit, _, client)| {
                let query = &plan.subqueries[*unit].query;
                scope.spawn(move || client.execute(query))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err("query client panicked".into())))
            .collect()
    });

    let mut relations: Vec<Relation> = plan
        .subqueries
        .iter()
        .map(|s| Relation {
            vars: s.query.projection.clone(),
            rows: Vec::new(),
        })
        .collect();
    for ((unit, source, _), answer) in tasks.iter().zip(answers) {
        let solutions = answer.map_err(|message| FederationError::Source {
            source_id: source.to_string(),
            message,
        })?;
        let rel = &mut relations[*unit];
        let converted = Relation::from_solutions(&rel.vars, &solutions);
        rel.rows.extend(converted.rows);
    }
    if plan.original.distinct {
        for rel in &mut relations {
            let mut seen = HashSet::new();
            rel.rows.retain(|r| seen.insert(r.clone()));
        }
    }

    let joined = join_all(relations);
    Ok(finish(plan, joined))
}

fn join_all(mut relations: Vec<Relation>) -> Relation {
    if relations.is_empty() {
        // No patterns: the single empty solution.
        return Relation {
            vars: Vec::new(),
            rows: vec![Vec::new()],
        };
    }
    let smallest = |rels: &[Relation], candidates: &mut dyn Iterator<Item = usize>| -> Option<usize> {
        candidates.min_by_key(|&i| (rels[i].rows.len(), i))
    };
    let first = smallest(&relations, &mut (0..relations.len())).expect("non-empty");
    let mut acc = relations.remove(first);
    while !relations.is_empty() {
        let next = smallest(
            &relations,
            &mut (0..relations.len()).filter(|&i| relations[i].shares_with(&acc)),
        )
        .or_else(|| smallest(&relations, &mut (0..relations.len())))
        .expect("non-empty");
        let rel = relations.remove(next);
        acc = hash_join(&acc, &rel);
    }
    acc
}

fn finish(plan: &DecomposedQuery, joined: Relation) -> SolutionSequence {
    let column = |v: &Variable| joined.vars.iter().position(|w| w == v);
    let filters: Vec<_> = plan.residual_filters.iter().map(|f| (f, column(&f.variable))).collect();
    let projection = plan.projection();
    let cols: Vec<Option<usize>> = projection.iter().map(column).collect();

    let mut rows: Vec<Row> = joined
        .rows
        .into_iter()
        .filter(|r| {
            filters
                .iter()
                .all(|(f, c)| c.and_then(|c| r[c].as_ref()).is_some_and(|t| f.accepts(t)))
        })
        .map(|r| cols.iter().map(|c| c.and_then(|c| r[c].clone())).collect())
        .collect();
    if plan.original.distinct {
        let mut seen = HashSet::new();
        rows.retain(|r| seen.insert(r.clone()));
    }
    if let Some(limit) = plan.original.limit {
        rows.sort();
        rows.truncate(limit);
    }
    SolutionSequence::new(projection, rows)
}
