use std::collections::BTreeMap;
use std::path::PathBuf;

use super::{MappingDocument, ObjectSpec, RawRecord, ReaderRegistry, TripleMap};
use crate::rdf::vocab::RDF_TYPE;
use crate::rdf::{Graph, Iri, Literal, Term, Triple};

/// A record that could not be mapped; processing continued past it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecordError {
    pub map_index: usize,
    pub record_index: usize,
    pub message: String,
}

#[derive(Clone, Debug, Default)]
pub struct MappingOutput {
    pub graph: Graph,
    pub errors: Vec<RecordError>,
}

impl MappingOutput {
    fn absorb(&mut self, other: MappingOutput) {
        self.graph.union_with(&other.graph);
        self.errors.extend(other.errors);
    }
}

/// Applies every triple map to the same record stream.
pub fn apply_mapping(doc: &MappingDocument, records: &[RawRecord]) -> MappingOutput {
    let mut out = MappingOutput::default();
    for (map_index, map) in doc.maps.iter().enumerate() {
        apply_one(map_index, map, records, &mut out);
    }
    out
}

/// Applies each triple map to the records of its own logical source (keyed by source path).
pub fn apply_mapping_sources(doc: &MappingDocument, sources: &BTreeMap<PathBuf, Vec<RawRecord>>) -> MappingOutput {
    let mut out = MappingOutput::default();
    for (map_index, map) in doc.maps.iter().enumerate() {
        if let Some(records) = sources.get(&map.source.path) {
            apply_one(map_index, map, records, &mut out);
        }
    }
    out
}

/// Reads every logical source from disk and applies the document.
pub fn materialize(doc: &MappingDocument, readers: &ReaderRegistry) -> crate::Result<MappingOutput> {
    let mut sources = BTreeMap::new();
    for src in doc.sources() {
        let text = crate::util::read_text(&src.path)?;
        let set = readers.read(&src.format, &text)?;
        sources.insert(src.path.clone(), set.records);
    }
    let mut out = MappingOutput::default();
    out.absorb(apply_mapping_sources(doc, &sources));
    Ok(out)
}

fn apply_one(map_index: usize, map: &TripleMap, records: &[RawRecord], out: &mut MappingOutput) {
    let rdf_type = Term::Iri(Iri::from_static(RDF_TYPE));
    for (record_index, record) in records.iter().enumerate() {
        if map.source.filter.as_ref().is_some_and(|f| !f.accepts(record)) {
            continue;
        }
        let subject = match map.subject.template.render_iri(record) {
            Some(Ok(iri)) => Term::Iri(iri),
            Some(Err(e)) => {
                out.errors.push(RecordError {
                    map_index,
                    record_index,
                    message: format!("subject: {e}"),
                });
                continue;
            }
            None => {
                out.errors.push(RecordError {
                    map_index,
                    record_index,
                    message: format!(
                        "subject template {:?} references a missing value",
                        map.subject.template.as_str()
                    ),
                });
                continue;
            }
        };
        if let Some(class) = &map.subject.class {
            out.graph.insert(triple(&subject, &rdf_type, Term::Iri(class.clone())));
        }
        for po in &map.predicate_objects {
            let object = match &po.object {
                ObjectSpec::Constant(t) => t.clone(),
                ObjectSpec::Field {
                    field,
                    datatype,
                    language,
                } => {
                    let Some(value) = record.get(field) else { continue };
                    match language {
                        Some(lang) => Term::Literal(Literal::lang(value, lang.clone()).expect("tag checked at parse")),
                        None => Term::Literal(Literal::typed(value, datatype.clone())),
                    }
                }
                ObjectSpec::Template(t) => match t.render_iri(record) {
                    None => continue,
                    Some(Ok(iri)) => Term::Iri(iri),
                    Some(Err(e)) => {
                        out.errors.push(RecordError {
                            map_index,
                            record_index,
                            message: format!("object for {}: {e}", po.predicate),
                        });
                        continue;
                    }
                },
            };
            out.graph
                .insert(triple(&subject, &Term::Iri(po.predicate.clone()), object));
        }
    }
}

fn triple(s: &Term, p: &Term, o: Term) -> Triple {
    Triple::new(s.clone(), p.clone(), o).expect("IRI subject and predicate")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::parse_mapping;
    use crate::rdf::serialize_ntriples;
    use proptest::prelude::*;

    const DOC: &str = r#"
prefixes: { energy: "http://w3id.org/energy/" }
maps:
  - source: { path: cap.csv, format: csv, fields: [country, type, measure, year] }
    subject: { template: "http://w3id.org/energy/capacity/{country}/{type}/{year}", class: energy:GenerationCapacity }
    po:
      - { predicate: energy:productionType, template: "http://w3id.org/energy/productionType/{type}" }
      - { predicate: energy:country, field: country }
      - { predicate: energy:measure, field: measure, datatype: xsd:decimal }
      - { predicate: energy:agg_year, field: year }
"#;

    fn rec(country: &str, ty: &str, measure: Option<&str>, year: &str) -> RawRecord {
        let mut r = RawRecord::from_pairs([("country", country), ("type", ty), ("year", year)]);
        r.set("measure", measure.map(str::to_owned));
        r
    }

    #[test]
    fn skip_null_drops_only_that_entry() {
        let doc = parse_mapping(DOC).unwrap();
        let out = apply_mapping(&doc, &[rec("RS", "Coal", None, "2020")]);
        assert_eq!(out.graph.len(), 4);
        assert!(out.errors.is_empty());
    }

    #[test]
    fn empty_stream_and_duplicates() {
        let doc = parse_mapping(DOC).unwrap();
        assert!(apply_mapping(&doc, &[]).graph.is_empty());
        let r = rec("RS", "WindPower", Some("320"), "2020");
        let one = apply_mapping(&doc, std::slice::from_ref(&r));
        let two = apply_mapping(&doc, &[r.clone(), r]);
        assert_eq!(one.graph, two.graph);
    }

    #[test]
    fn invalid_subject_is_a_record_error_and_processing_continues() {
        let text = r#"
maps:
  - source: { path: a.csv, format: csv, fields: [iri, v] }
    subject: { template: "{iri}" }
    po:
      - { predicate: "http://e/v", field: v }
"#;
        let doc = parse_mapping(text).unwrap();
        let records = vec![
            RawRecord::from_pairs([("iri", "http://x"), ("v", "1")]),
            RawRecord::from_pairs([("iri", "ok"), ("v", "2")]),
        ];
        let out = apply_mapping(&doc, &records);
        // "{iri}" percent-encodes ':' so neither renders an absolute IRI.
        assert_eq!(out.errors.len(), 2);
        assert_eq!(out.errors[1].record_index, 1);
        assert!(out.graph.is_empty());
    }

    #[test]
    fn record_filter() {
        let text = DOC.replace(
            "fields: [country, type, measure, year] }",
            "fields: [country, type, measure, year], filter: { field: year, equals: \"2020\" } }",
        );
        let doc = parse_mapping(&text).unwrap();
        let out = apply_mapping(
            &doc,
            &[
                rec("RS", "Coal", Some("1"), "2020"),
                rec("RS", "Coal", Some("1"), "2019"),
            ],
        );
        assert_eq!(out.graph.len(), 5);
    }

    fn arb_records() -> impl Strategy<Value = Vec<RawRecord>> {
        let rec = (
            prop::sample::select(vec!["RS", "HU", "BG"]),
            prop::sample::select(vec!["WindPower", "Coal", "Solar"]),
            proptest::option::of("[0-9]{1,3}"),
            prop::sample::select(vec!["2019", "2020"]),
        )
            .prop_map(|(c, t, m, y)| rec(c, t, m.as_deref(), y));
        proptest::collection::vec(rec, 0..20)
    }

    proptest! {
        #[test]
        fn record_independence_and_bound(r1 in arb_records(), r2 in arb_records()) {
            let doc = parse_mapping(DOC).unwrap();
            let all: Vec<_> = r1.iter().chain(r2.iter()).cloned().collect();
            let whole = apply_mapping(&doc, &all).graph;
            let mut parts = apply_mapping(&doc, &r1).graph;
            parts.union_with(&apply_mapping(&doc, &r2).graph);
            prop_assert_eq!(serialize_ntriples(&whole), serialize_ntriples(&parts));
            prop_assert!(whole.len() <= all.len() * (1 + 4));
        }
    }
}
