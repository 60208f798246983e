use std::collections::BTreeMap;

use ede_core::domain::generate_fixtures;
use ede_core::mapping::{apply_mapping, materialize, parse_mapping, MappingDocument, RawRecord, ReaderRegistry};
use ede_core::rdf::Graph;
use ede_core::sparql::{evaluate, parse_query};
use proptest::prelude::*;

const ENERGY: &str = "http://w3id.org/energy/";
const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";

/// Values bound to ?v by `<s> <p> ?v`, in N-Triples form.
fn lookup(graph: &Graph, subject: &str, predicate: &str) -> Vec<String> {
    let q = parse_query(&format!("SELECT ?v WHERE {{ <{subject}> <{predicate}> ?v }}")).unwrap();
    evaluate(&q, graph)
        .rows()
        .iter()
        .filter_map(|row| row[0].as_ref().map(|t| t.to_string()))
        .collect()
}

fn read_rows(text: &str) -> Vec<BTreeMap<String, String>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            headers
                .iter()
                .zip(r.iter())
                .map(|(h, v)| (h.to_owned(), v.to_owned()))
                .collect()
        })
        .collect()
}

#[test]
fn every_fixture_field_is_recoverable_and_the_count_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    generate_fixtures(1).write_to(dir.path()).unwrap();
    let doc = MappingDocument::load(&dir.path().join("mappings/capacity.map.yaml")).unwrap();
    let out = materialize(&doc, &ReaderRegistry::default()).unwrap();
    assert!(out.errors.is_empty());

    let rows = read_rows(&std::fs::read_to_string(dir.path().join("raw/capacity.csv")).unwrap());
    let types = read_rows(&std::fs::read_to_string(dir.path().join("raw/production_types.csv")).unwrap());
    // Capacity: class + 5 predicate-object maps. Production types: class + label.
    assert_eq!(out.graph.len(), 6 * rows.len() + 2 * types.len());

    for row in &rows {
        let s = format!("{ENERGY}capacity/{}/{}/{}", row["country"], row["type"], row["year"]);
        assert_eq!(
            lookup(&out.graph, &s, &format!("{ENERGY}country")),
            [format!("\"{}\"", row["country"])]
        );
        assert_eq!(
            lookup(&out.graph, &s, &format!("{ENERGY}agg_year")),
            [format!("\"{}\"", row["year"])]
        );
        assert_eq!(
            lookup(&out.graph, &s, &format!("{ENERGY}measure")),
            [format!("\"{}\"^^<{XSD_DECIMAL}>", row["measure"])]
        );
        assert_eq!(
            lookup(&out.graph, &s, &format!("{ENERGY}productionType")),
            [format!("<{ENERGY}productionType/{}>", row["type"])]
        );
    }
    for t in &types {
        let s = format!("{ENERGY}productionType/{}", t["type"]);
        assert_eq!(
            lookup(&out.graph, &s, "http://www.w3.org/2000/01/rdf-schema#label"),
            [format!("\"{}\"", t["label"])]
        );
    }
}

const DOC: &str = r#"
maps:
  - source: { path: r.csv, format: csv, fields: [id, a, b] }
    subject: { template: "http://e/r/{id}", class: "http://e/R" }
    po:
      - { predicate: "http://e/a", field: a }
      - { predicate: "http://e/b", field: b, datatype: "http://www.w3.org/2001/XMLSchema#integer" }
"#;

proptest! {
    #[test]
    fn non_null_fields_round_trip_and_nulls_emit_nothing(
        rows in proptest::collection::btree_map("[a-z0-9]{1,6}", (proptest::option::of("[A-Za-z ]{0,8}"), proptest::option::of(0u32..10_000)), 0..25)
    ) {
        let doc = parse_mapping(DOC).unwrap();
        let records: Vec<RawRecord> = rows
            .iter()
            .map(|(id, (a, b))| {
                let mut r = RawRecord::from_pairs([("id", id.as_str())]);
                r.set("a", a.clone());
                r.set("b", b.map(|n| n.to_string()));
                r
            })
            .collect();
        let out = apply_mapping(&doc, &records);
        prop_assert!(out.errors.is_empty());
        let mut expected = 0;
        for (id, (a, b)) in &rows {
            let s = format!("http://e/r/{id}");
            expected += 1;
            let got_a = lookup(&out.graph, &s, "http://e/a");
            match a {
                Some(v) => { expected += 1; prop_assert_eq!(got_a, vec![format!("{v:?}")]); }
                None => prop_assert!(got_a.is_empty()),
            }
            let got_b = lookup(&out.graph, &s, "http://e/b");
            match b {
                Some(n) => {
                    expected += 1;
                    prop_assert_eq!(got_b, vec![format!("\"{n}\"^^<http://www.w3.org/2001/XMLSchema#integer>")]);
                }
                None => prop_assert!(got_b.is_empty()),
            }
        }
        prop_assert_eq!(out.graph.len(), expected);
    }
}
