mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use ede_core::connector::{ContractStore, NodeIdentity, NodeState, ProvenanceLog};
use ede_core::federation::{
    decompose, execute_federated, select_sources, FederationCatalog, FederationError, LocalGraphClient, QueryClient,
};
use ede_core::rdf::Graph;
use ede_core::sparql::{evaluate, parse_query};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn catalog_and_clients(parts: Vec<Graph>) -> (FederationCatalog, BTreeMap<String, Arc<dyn QueryClient>>) {
    let mut descriptions = Vec::new();
    let mut clients: BTreeMap<String, Arc<dyn QueryClient>> = BTreeMap::new();
    for (i, g) in parts.into_iter().enumerate() {
        let identity = NodeIdentity {
            id: format!("s{i}"),
            resource: format!("r{i}"),
        };
        let state = NodeState::new(
            identity,
            g,
            ContractStore::new(Vec::new()).unwrap(),
            ProvenanceLog::in_memory(),
        );
        let mut d = state.description();
        d.endpoint = format!("mem:s{i}");
        clients.insert(d.id.clone(), Arc::new(LocalGraphClient::new(Arc::clone(&state.graph))));
        descriptions.push(d);
    }
    (FederationCatalog::new("consumer", descriptions).unwrap(), clients)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn federated_answers_equal_brute_force_over_the_union(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let size = rng.gen_range(20..200);
        let graph = common::random_graph(&mut rng, size, common::SMALL);
        let k = rng.gen_range(2..=3);
        let (catalog, clients) = catalog_and_clients(common::partition(&mut rng, &graph, k));
        for _ in 0..4 {
            let text = common::random_query(&mut rng, 4, common::SMALL);
            let query = parse_query(&text).unwrap();
            let oracle = common::nested_loop(&query, &graph);
            match select_sources(&query, &catalog) {
                Err(FederationError::Unanswerable { .. }) => prop_assert!(oracle.is_empty(), "{text}"),
                Err(e) => panic!("{e}"),
                Ok(selection) => {
                    let plan = decompose(&query, &selection);
                    let got = execute_federated(&plan, &clients).unwrap();
                    prop_assert_eq!(got.tuple_set(&query.projection), oracle, "{}", text);
                }
            }
        }
    }

    #[test]
    fn local_evaluation_equals_brute_force(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let size = rng.gen_range(0..150);
        let graph = common::random_graph(&mut rng, size, common::SMALL);
        for _ in 0..4 {
            let text = common::random_query(&mut rng, 4, common::SMALL);
            let query = parse_query(&text).unwrap();
            prop_assert_eq!(evaluate(&query, &graph).tuple_set(&query.projection), common::nested_loop(&query, &graph), "{}", text);
        }
    }

    #[test]
    fn printed_queries_reparse_to_the_same_query(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let text = common::random_query(&mut rng, 4, common::SMALL);
        let parsed = parse_query(&text).unwrap();
        prop_assert_eq!(parse_query(&parsed.to_string()).unwrap(), parsed);
    }
}
