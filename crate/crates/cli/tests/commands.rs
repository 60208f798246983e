use std::path::Path;
use std::process::{Command, Output};

fn ede(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ede"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn fixtures() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let out = ede(&["fixtures", "generate", "--seed", "1", "--out", "fx"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    dir
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn no_arguments_is_a_usage_error() {
    let out = ede(&[], Path::new("."));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_input_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = ede(&["query", "--graph", "absent.nt", "--query", "absent.rq"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fixture_generation_is_reproducible() {
    let a = fixtures();
    let b = fixtures();
    let digest = |d: &Path| {
        let out = ede(&["fixtures", "generate", "--seed", "1", "--out", "again"], d);
        stdout_json(&out)["digest"].clone()
    };
    assert_eq!(digest(a.path()), digest(b.path()));
}

#[test]
fn query_returns_result_rows() {
    let dir = fixtures();
    let out = ede(
        &[
            "query",
            "--graph",
            "fx/graphs/capacity.nt",
            "--query",
            "fx/queries/sq1.rq",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(
        v["head"]["vars"],
        serde_json::json!(["country", "productionType", "measure"])
    );
    assert!(!v["results"]["bindings"].as_array().unwrap().is_empty());
}

#[test]
fn validate_exit_code_tracks_conformance() {
    let dir = fixtures();
    let clean = ede(
        &[
            "validate",
            "--graph",
            "fx/graphs/capacity.nt",
            "--shapes",
            "fx/shapes/capacity.shapes.yaml",
        ],
        dir.path(),
    );
    assert_eq!(clean.status.code(), Some(0));
    let dirty = ede(
        &[
            "validate",
            "--graph",
            "fx/defects/capacity_defects.nt",
            "--shapes",
            "fx/shapes/capacity.shapes.yaml",
            "--report",
            "report.json",
        ],
        dir.path(),
    );
    assert_eq!(dirty.status.code(), Some(1));
    assert_eq!(stdout_json(&dirty)["violations"], 3);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["conforms"], false);
}

#[test]
fn rdfize_writes_the_mapped_graph() {
    let dir = fixtures();
    let out = ede(
        &[
            "rdfize",
            "--mapping",
            "fx/mappings/capacity.map.yaml",
            "--input",
            "fx/raw/capacity.csv",
            "--input",
            "fx/raw/production_types.csv",
            "--output",
            "out.nt",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let written = std::fs::read_to_string(dir.path().join("out.nt")).unwrap();
    let reference = std::fs::read_to_string(dir.path().join("fx/graphs/capacity.nt")).unwrap();
    assert_eq!(written, reference);
    assert_eq!(stdout_json(&out)["recordErrors"], 0);
}

#[test]
fn pipeline_exit_code_tracks_the_validation_gate() {
    let dir = fixtures();
    let ok = ede(
        &["pipeline", "run", "--config", "fx/pipeline/capacity.pipeline.yaml"],
        dir.path(),
    );
    assert_eq!(ok.status.code(), Some(0));
    let blocked = ede(
        &[
            "pipeline",
            "run",
            "--config",
            "fx/pipeline/capacity_revisions.pipeline.yaml",
        ],
        dir.path(),
    );
    assert_eq!(blocked.status.code(), Some(1));
    assert_eq!(stdout_json(&blocked)["loaded"], false);
}

#[test]
fn local_federation_answers_the_worked_example() {
    let dir = fixtures();
    let out = ede(
        &[
            "federate",
            "--catalog",
            "fx/federation/worked_example.local.yaml",
            "--query",
            "fx/queries/worked_example.rq",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = stdout_json(&out)["results"]["bindings"].as_array().unwrap().clone();
    assert!(!rows.is_empty());
    for row in rows {
        assert_eq!(
            row["productionType"]["value"],
            "http://w3id.org/energy/productionType/WindPower"
        );
    }
}

#[test]
fn scenario_run_emits_a_transcript_and_provenance_show_reads_logs() {
    let dir = fixtures();
    let out = ede(
        &[
            "scenario",
            "run",
            "--script",
            "fx/scenario/script.yaml",
            "--nodes",
            "fx/nodes.yaml",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let lines = String::from_utf8(out.stdout).unwrap();
    assert!(lines.lines().count() >= 8);
    for line in lines.lines() {
        let entry: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(entry["ok"], true);
    }
    let show = ede(&["provenance", "show", "--log", "fx/logs/tso.prov.jsonl"], dir.path());
    assert!(show.status.success());
    assert!(!show.stdout.is_empty());
    let missing = ede(&["provenance", "show", "--log", "fx/logs/none.jsonl"], dir.path());
    assert_eq!(missing.status.code(), Some(2));
}
