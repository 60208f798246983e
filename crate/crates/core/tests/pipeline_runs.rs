use std::collections::BTreeMap;
use std::path::Path;

use ede_core::domain::generate_fixtures;
use ede_core::mapping::{apply_mapping_sources, MappingDocument, ReaderRegistry};
use ede_core::pipeline::{link_entities, preprocess, run_pipeline, PipelineConfig, StageStatus, StepRegistry};
use ede_core::rdf::vocab::RDFS_LABEL;
use ede_core::rdf::{load_graph, parse_ntriples, Iri};
use ede_core::shapes::{load_shapes, validate};
use ede_core::util::{read_text, sha256_hex};

fn fixtures() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    generate_fixtures(1).write_to(dir.path()).unwrap();
    dir
}

fn stage_digests(report: &ede_core::pipeline::RunReport) -> Vec<(String, Vec<String>, Vec<String>)> {
    report
        .stages
        .iter()
        .map(|s| (s.name.to_string(), s.used.clone(), s.generated.clone()))
        .collect()
}

#[test]
fn rerunning_an_unchanged_config_reproduces_every_digest() {
    let dir = fixtures();
    let cfg = PipelineConfig::load(&dir.path().join("pipeline/capacity.pipeline.yaml")).unwrap();
    let first = run_pipeline(&cfg).unwrap();
    let bytes = std::fs::read(&cfg.output).unwrap();
    let second = run_pipeline(&cfg).unwrap();
    assert!(first.succeeded());
    assert_eq!(first.output_digest, second.output_digest);
    assert_eq!(stage_digests(&first), stage_digests(&second));
    assert_eq!(bytes, std::fs::read(&cfg.output).unwrap());
    assert_eq!(first.output_digest.as_deref(), Some(sha256_hex(&bytes).as_str()));
}

#[test]
fn orchestrated_output_equals_manual_composition() {
    let dir = fixtures();
    let path = dir.path().join("pipeline/capacity.pipeline.yaml");
    let cfg = PipelineConfig::load(&path).unwrap();
    let report = run_pipeline(&cfg).unwrap();

    // The same stages by hand: read, preprocess, map, link, validate.
    let readers = ReaderRegistry::default();
    let steps = StepRegistry::default();
    let manual_cfg = PipelineConfig::parse(&read_text(&path).unwrap(), &path, &steps).unwrap();
    let doc = MappingDocument::load(&manual_cfg.mapping).unwrap();
    let mut by_path = BTreeMap::new();
    for src in doc.sources() {
        let entry = manual_cfg
            .sources
            .iter()
            .find(|s| s.path.canonicalize().unwrap() == src.path.canonicalize().unwrap())
            .unwrap();
        let set = readers.read(&entry.format, &read_text(&entry.path).unwrap()).unwrap();
        let (records, errors) = preprocess(set.records, &entry.steps);
        assert!(errors.is_empty());
        by_path.insert(src.path.clone(), records);
    }
    let mapped = apply_mapping_sources(&doc, &by_path);
    let reference = load_graph(&dir.path().join("reference/wiki.nt")).unwrap();
    let linked = link_entities(&mapped.graph, &reference, &Iri::from_static(RDFS_LABEL));
    let shapes = load_shapes(&dir.path().join("shapes/capacity.shapes.yaml")).unwrap();
    let validation = validate(&linked.graph, &shapes);

    let loaded = parse_ntriples(&read_text(&cfg.output).unwrap()).unwrap();
    assert_eq!(loaded, linked.graph);
    assert_eq!(loaded.len(), mapped.graph.len() + linked.links.len());
    assert_eq!(report.links, linked.links.len());
    assert_eq!(report.conforms, Some(validation.conforms));
    assert!(validation.conforms);
}

#[test]
fn seeded_violation_blocks_the_load() {
    let dir = fixtures();
    let fx = generate_fixtures(1);
    let cfg = PipelineConfig::load(&dir.path().join("pipeline/capacity_revisions.pipeline.yaml")).unwrap();
    let report = run_pipeline(&cfg).unwrap();
    assert!(!report.loaded && !report.succeeded());
    assert_eq!(report.stage("load").unwrap().status, StageStatus::Skipped);
    assert!(!cfg.output.exists());
    let mut focus: Vec<String> = report
        .violations
        .iter()
        .map(|v| v.focus_node.as_iri().unwrap().as_str().to_owned())
        .collect();
    focus.sort();
    let seeded: Vec<String> = fx
        .manifest
        .pipeline_defects
        .iter()
        .map(|d| d.focus_node.clone())
        .collect();
    assert_eq!(focus, seeded);
}

/// Sums decimal strings as integers scaled to one decimal place.
fn tenths(v: &str) -> i64 {
    let (int, frac) = v.split_once('.').unwrap_or((v, "0"));
    assert_eq!(frac.len(), 1, "fixture values carry one decimal place: {v}");
    int.parse::<i64>().unwrap() * 10 + frac.parse::<i64>().unwrap()
}

#[test]
fn daily_aggregate_equals_the_hand_sum_of_hourly_values() {
    let dir = fixtures();
    let hourly = read_text(&dir.path().join("raw/production/plant-w1.csv")).unwrap();
    let values: Vec<&str> = hourly.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(values.len(), 24);
    let total: i64 = values.iter().map(|v| tenths(v)).sum();

    let cfg = PipelineConfig::load(&dir.path().join("pipeline/daily_production.pipeline.yaml")).unwrap();
    let report = run_pipeline(&cfg).unwrap();
    assert!(report.succeeded());
    let out = read_text(&cfg.output).unwrap();
    let measure = out
        .lines()
        .find(|l| l.contains("<http://w3id.org/energy/measure>"))
        .and_then(|l| l.split('"').nth(1))
        .unwrap();
    assert_eq!(
        tenths(&format!("{measure}{}", if measure.contains('.') { "" } else { ".0" })),
        total
    );
}

#[test]
fn provenance_covers_every_executed_stage() {
    let dir = fixtures();
    let cfg = PipelineConfig::load(&dir.path().join("pipeline/capacity.pipeline.yaml")).unwrap();
    let report = run_pipeline(&cfg).unwrap();
    let prov = read_text(Path::new(&report.provenance)).unwrap();
    for stage in report.stages.iter().filter(|s| s.status != StageStatus::Skipped) {
        assert!(
            prov.contains(&format!(":{}>", stage.name)),
            "missing activity for {}",
            stage.name
        );
        for d in stage.used.iter().chain(&stage.generated) {
            assert!(prov.contains(&format!("<urn:sha256:{d}>")));
        }
    }
}
