use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ede_core::connector::{read_log, system_clock, NodeConfig, NodeServer, NodeState};
use ede_core::domain::{generate_fixtures, run_script_file};
use ede_core::federation::{
    decompose, execute_federated, select_sources, ClientRegistry, FederationCatalog, FederationError,
};
use ede_core::mapping::{apply_mapping_sources, parse_mapping, ReaderRegistry};
use ede_core::pipeline::{run_pipeline, PipelineConfig};
use ede_core::rdf::{load_graph, serialize_ntriples};
use ede_core::shapes::{load_shapes, validate};
use ede_core::sparql::{evaluate, parse_query, serialize_results};
use ede_core::util::{read_text, write_text};
use ede_core::Error;

#[derive(Parser)]
#[command(
    name = "ede",
    version,
    about = "Energy data ecosystem node tooling",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Map raw records to N-Triples.
    Rdfize {
        #[arg(long)]
        mapping: PathBuf,
        /// Raw data file; repeat for mappings with several sources.
        #[arg(long, required = true)]
        input: Vec<PathBuf>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Check a graph against shapes; exits 1 when it does not conform.
    Validate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        shapes: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Knowledge-graph creation pipelines.
    Pipeline {
        #[command(subcommand)]
        command: PipelineCommand,
    },
    /// Run a connector node until interrupted.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate a query against a local graph.
    Query {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        query: PathBuf,
    },
    /// Answer a query across the sources of a federation catalog.
    Federate {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        query: PathBuf,
        /// Print the decomposition plan instead of executing it.
        #[arg(long)]
        explain: bool,
    },
    /// Multi-node scenario scripts.
    Scenario {
        #[command(subcommand)]
        command: ScenarioCommand,
    },
    /// Deterministic fixture data.
    Fixtures {
        #[command(subcommand)]
        command: FixturesCommand,
    },
    /// Connector provenance logs.
    Provenance {
        #[command(subcommand)]
        command: ProvenanceCommand,
    },
}

#[derive(Subcommand)]
enum PipelineCommand {
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Subcommand)]
enum ScenarioCommand {
    Run(ScenarioRun),
}

#[derive(Args)]
struct ScenarioRun {
    #[arg(long)]
    script: PathBuf,
    #[arg(long)]
    nodes: PathBuf,
}

#[derive(Subcommand)]
enum FixturesCommand {
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum ProvenanceCommand {
    Show {
        #[arg(long)]
        log: PathBuf,
    },
}

/// Why a command stopped: a domain outcome (exit 1) or bad input (exit 2).
enum Failure {
    Domain(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        use ede_core::connector::ConnectorError;
        let message = e.to_string();
        match e {
            Error::Io { .. }
            | Error::Config(_)
            | Error::Sparql(_)
            | Error::Mapping(_)
            | Error::Shapes(_)
            | Error::Pipeline(_)
            | Error::Federation(FederationError::Catalog(_))
            | Error::Connector(ConnectorError::Config(_)) => Failure::Usage(message),
            _ => Failure::Domain(message),
        }
    }
}

fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
    if !text.ends_with('\n') {
        let _ = out.write_all(b"\n");
    }
    let _ = out.flush();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(m)) => {
            if !m.is_empty() {
                eprintln!("ede: {m}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("ede: {m}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Rdfize { mapping, input, output } => rdfize(&mapping, &input, &output),
        Command::Validate { graph, shapes, report } => {
            let graph = load_graph(&graph)?;
            let shapes = load_shapes(&shapes)?;
            let result = validate(&graph, &shapes);
            let text = result.to_json();
            match report {
                Some(path) => {
                    write_text(&path, &text)?;
                    emit(&json!({"conforms": result.conforms, "violations": result.violations.len()}).to_string());
                }
                None => emit(&text),
            }
            if result.conforms {
                Ok(())
            } else {
                Err(Failure::Domain(format!("{} violation(s)", result.violations.len())))
            }
        }
        Command::Pipeline {
            command: PipelineCommand::Run { config },
        } => {
            let cfg = PipelineConfig::load(&config)?;
            let report = run_pipeline(&cfg)?;
            emit(&report.to_json());
            if report.succeeded() {
                Ok(())
            } else {
                let stage = report.aborted_stage.clone().unwrap_or_else(|| "unknown".into());
                Err(Failure::Domain(format!("pipeline stopped at stage {stage}")))
            }
        }
        Command::Serve { config } => {
            let cfg = NodeConfig::load(&config)?;
            let (state, record_errors) = NodeState::from_config(&cfg)?;
            if record_errors > 0 {
                eprintln!("ede: {record_errors} record(s) could not be mapped");
            }
            let triples = state.graph.read().len();
            let server = NodeServer::start(state, &cfg.listen, system_clock()).map_err(Error::from)?;
            emit(&json!({"node": cfg.id, "endpoint": server.endpoint(), "triples": triples}).to_string());
            server.wait();
            Ok(())
        }
        Command::Query { graph, query } => {
            let graph = load_graph(&graph)?;
            let query = parse_query(&read_text(&query)?).map_err(Error::from)?;
            for v in query.unbound_projections() {
                eprintln!("ede: warning: projected variable {v} is not bound by any pattern");
            }
            emit(&serialize_results(&evaluate(&query, &graph)));
            Ok(())
        }
        Command::Federate {
            catalog,
            query,
            explain,
        } => {
            let catalog = FederationCatalog::load(&catalog)?;
            let query = parse_query(&read_text(&query)?).map_err(Error::from)?;
            for v in query.unbound_projections() {
                eprintln!("ede: warning: projected variable {v} is not bound by any pattern");
            }
            let selection = select_sources(&query, &catalog).map_err(Error::from)?;
            let plan = decompose(&query, &selection);
            if explain {
                emit(&(serde_json::to_string_pretty(&plan.to_json()).expect("plan serializes") + "\n"));
                return Ok(());
            }
            let clients = ClientRegistry::default()
                .connect_all(&catalog, &plan)
                .map_err(Error::from)?;
            let solutions = execute_federated(&plan, &clients).map_err(Error::from)?;
            emit(&serialize_results(&solutions));
            Ok(())
        }
        Command::Scenario {
            command: ScenarioCommand::Run(args),
        } => {
            let outcome = run_script_file(&args.script, &args.nodes)?;
            emit(&outcome.to_jsonl());
            for problem in &outcome.cross_check {
                eprintln!("ede: provenance cross-check: {problem}");
            }
            match (&outcome.failure, outcome.cross_check.is_empty()) {
                (Some(f), _) => Err(Failure::Domain(format!("scenario failed at {f}"))),
                (None, false) => Err(Failure::Domain("provenance cross-check failed".into())),
                (None, true) => Ok(()),
            }
        }
        Command::Fixtures {
            command: FixturesCommand::Generate { seed, out },
        } => {
            let set = generate_fixtures(seed);
            let written = set.write_to(&out)?;
            emit(&json!({"seed": seed, "files": written.len(), "digest": set.digest()}).to_string());
            Ok(())
        }
        Command::Provenance {
            command: ProvenanceCommand::Show { log },
        } => {
            if !log.exists() {
                return Err(Failure::Usage(format!("{}: no such file", log.display())));
            }
            let records = read_log(&log)?;
            let mut text = String::new();
            for r in &records {
                text.push_str(&serde_json::to_string(r).expect("record serializes"));
                text.push('\n');
            }
            if !text.is_empty() {
                emit(&text);
            }
            Ok(())
        }
    }
}

fn rdfize(mapping: &Path, inputs: &[PathBuf], output: &Path) -> Result<(), Failure> {
    let doc = parse_mapping(&read_text(mapping)?).map_err(Error::from)?;
    let readers = ReaderRegistry::default();
    let sources = doc.sources();
    let mut bound = BTreeMap::new();
    for src in &sources {
        let by_name = inputs
            .iter()
            .find(|i| i.file_name().is_some() && i.file_name() == src.path.file_name());
        let input = match (by_name, inputs, sources.len()) {
            (Some(i), _, _) => i,
            (None, [only], 1) => only,
            _ => {
                eprintln!(
                    "ede: no --input for mapping source {}; its maps are skipped",
                    src.path.display()
                );
                continue;
            }
        };
        let set = readers.read(&src.format, &read_text(input)?).map_err(Error::from)?;
        bound.insert(src.path.clone(), set.records);
    }
    let out = apply_mapping_sources(&doc, &bound);
    for e in &out.errors {
        eprintln!("ede: map {} record {}: {}", e.map_index, e.record_index, e.message);
    }
    write_text(output, &serialize_ntriples(&out.graph))?;
    emit(
        &json!({"triples": out.graph.len(), "recordErrors": out.errors.len(), "output": output.display().to_string()})
            .to_string(),
    );
    Ok(())
}
