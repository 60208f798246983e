//! Materialized knowledge-graph creation: staging, preprocessing, mapping, linking,
//! validation and load, each recorded as a provenance activity.
//!
//! ```yaml
//! sources:
//!   - path: raw/capacity.csv
//!     format: csv
//!     preprocess:
//!       - { kind: drop-missing, field: measure }
//!       - { kind: scale-numeric, field: measure, factor: "0.001" }
//! mapping: capacity.map.yaml
//! shapes: capacity.shapes.yaml
//! linking: { label_predicate: rdfs:label, reference: reference.nt }
//! staging: staging
//! output: out/graph.nt
//! on_violation: block
//! ```

mod linking;
mod preprocess;
mod run;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use linking::{link_entities, LinkOutcome};
pub use preprocess::{
    canonical_decimal, parse_decimal, preprocess, Aggregate, DropMissing, PreprocessError, PreprocessStep, RenameField,
    ScaleNumeric, StepRegistry,
};
pub use run::{run_pipeline, RunReport, StageReport, StageStatus};

use crate::rdf::Iri;
use crate::util::yaml::{self, Prefixes};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("pipeline config: {0}")]
pub struct PipelineError(pub String);

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationPolicy {
    Block,
    Warn,
}

pub struct SourceEntry {
    pub path: PathBuf,
    pub format: String,
    pub steps: Vec<Box<dyn PreprocessStep>>,
}

#[derive(Clone, Debug)]
pub struct LinkingSpec {
    pub label_predicate: Iri,
    pub reference: PathBuf,
}

pub struct PipelineConfig {
    pub sources: Vec<SourceEntry>,
    pub mapping: PathBuf,
    pub shapes: Option<PathBuf>,
    pub linking: Option<LinkingSpec>,
    pub staging: PathBuf,
    pub output: PathBuf,
    pub provenance: PathBuf,
    pub on_violation: ViolationPolicy,
    /// Digest of the config text, used to name provenance activities.
    pub digest: String,
}

impl PipelineConfig {
    /// Parses `text`; relative paths resolve against `base_file`'s directory.
    pub fn parse(text: &str, base_file: &Path, steps: &StepRegistry) -> Result<Self, PipelineError> {
        let value = yaml::parse_document(text).map_err(PipelineError)?;
        let root = yaml::root(&value);
        let resolve = |p: String| crate::util::resolve_relative(base_file, Path::new(&p));
        let cfg = (|| {
            root.check_keys(&[
                "prefixes",
                "sources",
                "mapping",
                "shapes",
                "linking",
                "staging",
                "output",
                "provenance",
                "on_violation",
            ])?;
            let prefixes = Prefixes::from_node(root)?;
            let mut sources = Vec::new();
            for item in root.require("sources")?.node().items()? {
                let n = item.node();
                n.check_keys(&["path", "format", "preprocess"])?;
                let mut built = Vec::new();
                if let Some(list) = n.get("preprocess")? {
                    for step in list.node().items()? {
                        built.push(steps.build(step.node())?);
                    }
                }
                sources.push(SourceEntry {
                    path: resolve(n.require("path")?.node().string()?),
                    format: n.require("format")?.node().string()?,
                    steps: built,
                });
            }
            let linking = match root.get("linking")? {
                None => None,
                Some(l) => {
                    let n = l.node();
                    n.check_keys(&["label_predicate", "reference"])?;
                    Some(LinkingSpec {
                        label_predicate: prefixes.expand_node(n.require("label_predicate")?.node())?,
                        reference: resolve(n.require("reference")?.node().string()?),
                    })
                }
            };
            let on_violation = match root.get("on_violation")? {
                None => ViolationPolicy::Block,
                Some(p) => match p.node().string()?.as_str() {
                    "block" => ViolationPolicy::Block,
                    "warn" => ViolationPolicy::Warn,
                    other => {
                        return Err(p
                            .node()
                            .err(format!("on_violation must be block or warn, got {other:?}")))
                    }
                },
            };
            let output = resolve(root.require("output")?.node().string()?);
            let provenance = match root.get("provenance")? {
                Some(p) => resolve(p.node().string()?),
                None => output.with_extension("prov.nt"),
            };
            Ok::<_, String>(PipelineConfig {
                sources,
                mapping: resolve(root.require("mapping")?.node().string()?),
                shapes: root.get("shapes")?.map(|s| s.node().string()).transpose()?.map(resolve),
                linking,
                staging: resolve(root.require("staging")?.node().string()?),
                output,
                provenance,
                on_violation,
                digest: crate::util::sha256_hex(text.as_bytes()),
            })
        })()
        .map_err(PipelineError)?;
        Ok(cfg)
    }

    /// Loads the config and checks that every referenced input file exists.
    pub fn load(path: &Path) -> crate::Result<Self> {
        let cfg = Self::parse(&crate::util::read_text(path)?, path, &StepRegistry::default())?;
        let mut inputs: Vec<&Path> = cfg.sources.iter().map(|s| s.path.as_path()).collect();
        inputs.push(&cfg.mapping);
        inputs.extend(cfg.shapes.as_deref());
        inputs.extend(cfg.linking.as_ref().map(|l| l.reference.as_path()));
        for p in inputs {
            if !p.is_file() {
                return Err(PipelineError(format!("referenced file {} does not exist", p.display())).into());
            }
        }
        Ok(cfg)
    }
}
