use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;

use super::linking::link_entities;
use super::preprocess::preprocess;
use super::{PipelineConfig, ViolationPolicy};
use crate::mapping::{apply_mapping_sources, MappingDocument, RawRecord, ReaderRegistry};
use crate::rdf::vocab::{
    PROV_ACTIVITY, PROV_AT_LOCATION, PROV_ENDED_AT, PROV_ENTITY, PROV_GENERATED, PROV_STARTED_AT, PROV_USED,
    RDFS_LABEL, RDF_TYPE, XSD_DATE_TIME,
};
use crate::rdf::{load_graph, serialize_ntriples, Graph, Iri, Term, Triple};
use crate::shapes::{load_shapes, validate, Violation};
use crate::util::sha256_hex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Completed,
    Skipped,
    Failed,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageReport {
    pub name: &'static str,
    pub status: StageStatus,
    pub input_count: usize,
    pub output_count: usize,
    /// Staged artifact digests read and written by the stage.
    pub used: Vec<String>,
    pub generated: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip)]
    started: DateTime<Utc>,
    #[serde(skip)]
    ended: DateTime<Utc>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub stages: Vec<StageReport>,
    pub preprocess_errors: Vec<String>,
    pub mapping_errors: Vec<String>,
    pub links: usize,
    pub ambiguous_labels: Vec<String>,
    pub conforms: Option<bool>,
    pub violations: Vec<Violation>,
    pub loaded: bool,
    pub aborted_stage: Option<String>,
    pub output: PathBuf,
    pub output_digest: Option<String>,
    pub provenance: PathBuf,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn stage(&self, name: &str) -> Option<&StageReport> {
        self.stages.iter().find(|s| s.name == name)
    }

    /// The run finished and its output may be used.
    pub fn succeeded(&self) -> bool {
        self.aborted_stage.is_none() && self.loaded
    }
}

/// Content-addressed copies: `<staging>/<sha256>.<ext>`.
struct Staging<'a> {
    dir: &'a Path,
}

impl Staging<'_> {
    fn put(&self, bytes: &[u8], ext: &str) -> Result<String, String> {
        let digest = sha256_hex(bytes);
        let path = self.dir.join(format!("{digest}.{ext}"));
        if !path.exists() {
            std::fs::create_dir_all(self.dir).map_err(|e| format!("{}: {e}", self.dir.display()))?;
            std::fs::write(&path, bytes).map_err(|e| format!("{}: {e}", path.display()))?;
        }
        Ok(digest)
    }

    fn put_file(&self, path: &Path) -> Result<(String, Vec<u8>), String> {
        let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("bin");
        Ok((self.put(&bytes, ext)?, bytes))
    }
}

struct Stage {
    report: StageReport,
}

impl Stage {
    fn begin(name: &'static str) -> Self {
        let now = Utc::now();
        Stage {
            report: StageReport {
                name,
                status: StageStatus::Completed,
                input_count: 0,
                output_count: 0,
                used: Vec::new(),
                generated: Vec::new(),
                message: None,
                started: now,
                ended: now,
            },
        }
    }

    fn end(mut self, status: StageStatus, message: Option<String>) -> StageReport {
        self.report.status = status;
        self.report.message = message;
        self.report.ended = Utc::now();
        self.report
    }
}

fn canonical(p: &Path) -> PathBuf {
    std::fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf())
}

/// Runs every stage in order. Stage failures are reported, not returned as errors;
/// only a failure to write the provenance graph is an `Err`.
pub fn run_pipeline(cfg: &PipelineConfig) -> crate::Result<RunReport> {
    let mut report = RunReport {
        stages: Vec::new(),
        preprocess_errors: Vec::new(),
        mapping_errors: Vec::new(),
        links: 0,
        ambiguous_labels: Vec::new(),
        conforms: None,
        violations: Vec::new(),
        loaded: false,
        aborted_stage: None,
        output: cfg.output.clone(),
        output_digest: None,
        provenance: cfg.provenance.clone(),
    };
    if let Err(failure) = run_stages(cfg, &mut report) {
        let (stage, message) = *failure;
        report.stages.push(stage.end(StageStatus::Failed, Some(message)));
        report.aborted_stage = report.stages.last().map(|s| s.name.to_owned());
    }
    let prov = provenance_graph(cfg, &report);
    crate::util::write_text(&cfg.provenance, &serialize_ntriples(&prov))?;
    Ok(report)
}

type StageFailure = Box<(Stage, String)>;

fn run_stages(cfg: &PipelineConfig, report: &mut RunReport) -> Result<(), StageFailure> {
    let staging = Staging { dir: &cfg.staging };
    let readers = ReaderRegistry::default();

    // Staging: digest-named copies of every raw input.
    let mut st = Stage::begin("staging");
    let mut raw = Vec::new();
    for src in &cfg.sources {
        match staging.put_file(&src.path) {
            Ok((digest, bytes)) => {
                st.report.generated.push(digest);
                raw.push(bytes);
            }
            Err(e) => return Err(Box::new((st, e))),
        }
    }
    st.report.input_count = cfg.sources.len();
    st.report.output_count = raw.len();
    report.stages.push(st.end(StageStatus::Completed, None));

    // Preprocessing.
    let mut st = Stage::begin("preprocessing");
    let mut prepared: BTreeMap<PathBuf, Vec<RawRecord>> = BTreeMap::new();
    for (i, (src, bytes)) in cfg.sources.iter().zip(&raw).enumerate() {
        st.report.used.push(report.stages[0].generated[i].clone());
        let parsed = std::str::from_utf8(bytes)
            .map_err(|e| format!("{}: {e}", src.path.display()))
            .and_then(|text| {
                readers
                    .read(&src.format, text)
                    .map_err(|e| format!("{}: {e}", src.path.display()))
            });
        let set = match parsed {
            Ok(set) => set,
            Err(e) => return Err(Box::new((st, e))),
        };
        st.report.input_count += set.records.len();
        let (records, errors) = preprocess(set.records, &src.steps);
        report.preprocess_errors.extend(errors.iter().map(|e| {
            format!(
                "{} step {} record {}: {}",
                src.path.display(),
                e.step,
                e.record,
                e.message
            )
        }));
        st.report.output_count += records.len();
        let reader = readers.get(&src.format).expect("format was readable");
        let header = if records.is_empty() {
            set.header
        } else {
            records[0].field_names()
        };
        let text = reader.write(&crate::mapping::RecordSet {
            header,
            records: records.clone(),
        });
        match staging.put(text.as_bytes(), ext_of(&src.path)) {
            Ok(d) => st.report.generated.push(d),
            Err(e) => return Err(Box::new((st, e))),
        }
        prepared.entry(canonical(&src.path)).or_default().extend(records);
    }
    report.stages.push(st.end(StageStatus::Completed, None));

    // Mapping.
    let mut st = Stage::begin("mapping");
    st.report.used.extend(report.stages[1].generated.iter().cloned());
    let doc = match staging.put_file(&cfg.mapping).and_then(|(d, _)| {
        MappingDocument::load(&cfg.mapping)
            .map(|doc| (d, doc))
            .map_err(|e| e.to_string())
    }) {
        Ok((d, doc)) => {
            st.report.used.push(d);
            doc
        }
        Err(e) => return Err(Box::new((st, e))),
    };
    let mut by_path = BTreeMap::new();
    for src in doc.sources() {
        match prepared.get(&canonical(&src.path)) {
            Some(records) => {
                by_path.insert(src.path.clone(), records.clone());
            }
            None => {
                let msg = format!("mapping source {} is not a pipeline source", src.path.display());
                return Err(Box::new((st, msg)));
            }
        }
    }
    st.report.input_count = prepared.values().map(Vec::len).sum();
    let mapped = apply_mapping_sources(&doc, &by_path);
    report.mapping_errors = mapped
        .errors
        .iter()
        .map(|e| format!("map {} record {}: {}", e.map_index, e.record_index, e.message))
        .collect();
    st.report.output_count = mapped.graph.len();
    let mapped_text = serialize_ntriples(&mapped.graph);
    match staging.put(mapped_text.as_bytes(), "nt") {
        Ok(d) => st.report.generated.push(d),
        Err(e) => return Err(Box::new((st, e))),
    }
    let mapped_digest = st.report.generated[0].clone();
    report.stages.push(st.end(StageStatus::Completed, None));

    // Linking.
    let mut st = Stage::begin("linking");
    st.report.input_count = mapped.graph.len();
    let (graph, graph_digest) = match &cfg.linking {
        None => {
            st.report.output_count = mapped.graph.len();
            report
                .stages
                .push(st.end(StageStatus::Skipped, Some("no linking configured".into())));
            (mapped.graph, mapped_digest)
        }
        Some(spec) => {
            st.report.used.push(mapped_digest);
            let reference = match staging
                .put_file(&spec.reference)
                .map_err(|e| e.to_string())
                .and_then(|(d, _)| load_graph(&spec.reference).map(|g| (d, g)).map_err(|e| e.to_string()))
            {
                Ok((d, g)) => {
                    st.report.used.push(d);
                    g
                }
                Err(e) => return Err(Box::new((st, e))),
            };
            let outcome = link_entities(&mapped.graph, &reference, &spec.label_predicate);
            report.links = outcome.links.len();
            report.ambiguous_labels = outcome.ambiguous.iter().map(|t| t.to_string()).collect();
            st.report.output_count = outcome.graph.len();
            let digest = match staging.put(serialize_ntriples(&outcome.graph).as_bytes(), "nt") {
                Ok(d) => d,
                Err(e) => return Err(Box::new((st, e))),
            };
            st.report.generated.push(digest.clone());
            report.stages.push(st.end(StageStatus::Completed, None));
            (outcome.graph, digest)
        }
    };

    // Validation.
    let mut st = Stage::begin("validation");
    st.report.input_count = graph.len();
    let blocked = match &cfg.shapes {
        None => {
            report
                .stages
                .push(st.end(StageStatus::Skipped, Some("no shapes configured".into())));
            false
        }
        Some(path) => {
            st.report.used.push(graph_digest.clone());
            let shapes = match staging
                .put_file(path)
                .map_err(|e| e.to_string())
                .and_then(|(d, _)| load_shapes(path).map(|s| (d, s)).map_err(|e| e.to_string()))
            {
                Ok((d, s)) => {
                    st.report.used.push(d);
                    s
                }
                Err(e) => return Err(Box::new((st, e))),
            };
            let result = validate(&graph, &shapes);
            st.report.output_count = result.violations.len();
            match staging.put(result.to_json().as_bytes(), "json") {
                Ok(d) => st.report.generated.push(d),
                Err(e) => return Err(Box::new((st, e))),
            }
            report.conforms = Some(result.conforms);
            report.violations = result.violations;
            report.stages.push(st.end(StageStatus::Completed, None));
            !report.violations.is_empty() && cfg.on_violation == ViolationPolicy::Block
        }
    };

    // Load.
    let mut st = Stage::begin("load");
    st.report.input_count = graph.len();
    if blocked {
        let msg = format!("{} violation(s) under the block policy", report.violations.len());
        report.stages.push(st.end(StageStatus::Skipped, Some(msg)));
        return Ok(());
    }
    st.report.used.push(graph_digest);
    let text = serialize_ntriples(&graph);
    if let Err(e) = crate::util::write_text(&cfg.output, &text) {
        return Err(Box::new((st, e.to_string())));
    }
    let digest = sha256_hex(text.as_bytes());
    st.report.generated.push(digest.clone());
    st.report.output_count = graph.len();
    report.output_digest = Some(digest);
    report.loaded = true;
    report.stages.push(st.end(StageStatus::Completed, None));
    Ok(())
}

fn ext_of(path: &Path) -> &str {
    path.extension().and_then(|e| e.to_str()).unwrap_or("bin")
}

fn iri(s: impl Into<String>) -> Term {
    Term::Iri(Iri::new(s).expect("generated IRIs are valid"))
}

fn timestamp(t: DateTime<Utc>) -> Term {
    Term::typed(
        t.to_rfc3339_opts(SecondsFormat::Millis, true),
        Iri::from_static(XSD_DATE_TIME),
    )
}

/// One `prov:Activity` per executed stage with its used/generated staged entities.
fn provenance_graph(cfg: &PipelineConfig, report: &RunReport) -> Graph {
    let mut g = Graph::new();
    let started = report.stages.first().map_or_else(Utc::now, |s| s.started);
    let run = format!("urn:ede:run:{}:{}", &cfg.digest[..16], started.timestamp_millis());
    let mut add = |s: &Term, p: &'static str, o: Term| {
        g.insert(Triple::new(s.clone(), Term::Iri(Iri::from_static(p)), o).expect("valid triple"));
    };
    for stage in report.stages.iter().filter(|s| s.status != StageStatus::Skipped) {
        let activity = iri(format!("{run}:{}", stage.name));
        add(&activity, RDF_TYPE, iri(PROV_ACTIVITY));
        add(&activity, RDFS_LABEL, Term::string(stage.name));
        add(&activity, PROV_STARTED_AT, timestamp(stage.started));
        add(&activity, PROV_ENDED_AT, timestamp(stage.ended));
        let edges: [(&'static str, &Vec<String>); 2] = [(PROV_USED, &stage.used), (PROV_GENERATED, &stage.generated)];
        for (pred, digests) in edges {
            for d in digests {
                let entity = iri(format!("urn:sha256:{d}"));
                add(&activity, pred, entity.clone());
                add(&entity, RDF_TYPE, iri(PROV_ENTITY));
                if let Some(name) = staged_name(&cfg.staging, d) {
                    add(&entity, PROV_AT_LOCATION, Term::string(name));
                }
            }
        }
    }
    g
}

fn staged_name(dir: &Path, digest: &str) -> Option<String> {
    std::fs::read_dir(dir)
        .ok()?
        .filter_map(Result::ok)
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .find(|n| n.starts_with(digest))
}
