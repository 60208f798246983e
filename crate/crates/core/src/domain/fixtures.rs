use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::vocab;
use crate::mapping::{apply_mapping_sources, parse_mapping, CsvReader, RecordReader};
use crate::rdf::vocab::{RDFS_LABEL, XSD_STRING};
use crate::rdf::{serialize_ntriples, Graph, Iri, Literal, Term, Triple};
use crate::util::sha256_hex;

/// Generated files keyed by path relative to the fixture root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixtureSet {
    pub files: BTreeMap<String, Vec<u8>>,
    pub manifest: DefectManifest,
}

/// What the generator broke on purpose, so validators can be scored exactly.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectManifest {
    /// Seeded into `defects/capacity_defects.nt`.
    pub graph_defects: Vec<SeededDefect>,
    /// Produced by `pipeline/capacity_revisions.pipeline.yaml`.
    pub pipeline_defects: Vec<SeededDefect>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeededDefect {
    pub focus_node: String,
    pub path: String,
    /// A constraint kind name such as `min-count`.
    pub kind: String,
}

impl FixtureSet {
    pub fn text(&self, path: &str) -> Option<&str> {
        self.files.get(path).and_then(|b| std::str::from_utf8(b).ok())
    }

    /// SHA-256 over every path and content, in path order.
    pub fn digest(&self) -> String {
        let mut all = Vec::new();
        for (path, bytes) in &self.files {
            all.extend_from_slice(path.as_bytes());
            all.push(0);
            all.extend_from_slice(sha256_hex(bytes).as_bytes());
            all.push(b'\n');
        }
        sha256_hex(&all)
    }

    pub fn write_to(&self, dir: &Path) -> crate::Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for (rel, bytes) in &self.files {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(|e| crate::Error::io(parent, e))?;
            }
            std::fs::write(&path, bytes).map_err(|e| crate::Error::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

const COUNTRIES: &[&str] = &["BG", "GR", "HR", "HU", "RO", "RS", "SI"];
const NON_RENEWABLE: &[&str] = &["Lignite", "NaturalGas", "Nuclear"];
const PRODUCTION_TYPES: &[&str] = &["WindPower", "Coal", "Lignite", "NaturalGas", "Nuclear"];
const PLANTS: &[(&str, &str, &str, &str)] = &[
    ("plant-w1", "Wind park 1", "WindPower", "RS"),
    ("plant-c1", "Coal unit 1", "Coal", "RS"),
    ("plant-g1", "Gas unit 1", "NaturalGas", "HU"),
];
const LOAD_POINTS: &[(&str, &str)] = &[("RS-N", "RS"), ("RS-S", "RS"), ("HU-E", "HU")];
const AREAS: &[&str] = &["HU", "RS"];
const DAY: &str = "2020-06-14";
pub(super) const NODE_IDS: &[&str] = &["tso", "supplier", "producer", "wiki", "meteo"];

fn production_type_rows() -> Vec<Vec<String>> {
    PRODUCTION_TYPES.iter().map(|t| vec![s(t), s(t)]).collect()
}

fn decimal(rng: &mut ChaCha8Rng, lo: i64, hi: i64, scale: u32) -> String {
    Decimal::new(rng.gen_range(lo..hi), scale).to_string()
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8")
}

fn s(v: &str) -> String {
    v.to_owned()
}

struct Builder {
    rng: ChaCha8Rng,
    files: BTreeMap<String, Vec<u8>>,
}

impl Builder {
    fn put(&mut self, path: &str, text: impl Into<String>) {
        self.files.insert(path.to_owned(), text.into().into_bytes());
    }
}

/// Deterministic fixtures for one seed: raw sources, mappings, shapes, contracts,
/// node configs, a reference graph, queries, pipelines, a scenario and seeded defects.
pub fn generate_fixtures(seed: u64) -> FixtureSet {
    let mut b = Builder {
        rng: ChaCha8Rng::seed_from_u64(seed),
        files: BTreeMap::new(),
    };
    let capacity = capacity_rows(&mut b.rng);
    b.put(
        "raw/capacity.csv",
        csv_text(&["country", "type", "measure", "year"], &capacity),
    );
    b.put(
        "raw/production_types.csv",
        csv_text(&["type", "label"], &production_type_rows()),
    );
    b.put("mappings/capacity.map.yaml", CAPACITY_MAP);
    b.put("shapes/capacity.shapes.yaml", CAPACITY_SHAPES);
    b.put("reference/wiki.nt", reference_graph());

    let capacity_graph = map_capacity(
        CAPACITY_MAP,
        &[
            ("../raw/capacity.csv", &capacity),
            ("../raw/production_types.csv", &production_type_rows()),
        ],
    );
    b.put("graphs/capacity.nt", serialize_ntriples(&capacity_graph));
    let (defect_graph, graph_defects) = seed_defects(&mut b.rng, &capacity_graph);
    b.put("defects/capacity_defects.nt", serialize_ntriples(&defect_graph));

    let (revisions, pipeline_defects) = revision_rows(&mut b.rng, &capacity);
    b.put(
        "raw/capacity_revisions.csv",
        csv_text(&["country", "type", "measure", "year", "revised_year"], &revisions),
    );
    b.put("mappings/capacity_revisions.map.yaml", REVISIONS_MAP);

    operational_sources(&mut b);
    for (path, text) in node_files() {
        b.put(&path, text);
    }
    for (path, text) in STATIC_FILES {
        b.put(path, *text);
    }

    let manifest = DefectManifest {
        graph_defects,
        pipeline_defects,
    };
    b.put(
        "defects/manifest.json",
        serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n",
    );
    FixtureSet {
        files: b.files,
        manifest,
    }
}

/// Unique (country, type, year). Among the 2020 rows exactly one is wind power and at
/// least one is coal; the other 2020 rows are non-renewable.
fn capacity_rows(rng: &mut ChaCha8Rng) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    let wind_country = *COUNTRIES.choose(rng).expect("non-empty");
    rows.push(vec![
        s(wind_country),
        s("WindPower"),
        decimal(rng, 1000, 40000, 1),
        s("2020"),
    ]);
    let coal_count = rng.gen_range(1..=2);
    for c in COUNTRIES.choose_multiple(rng, coal_count) {
        rows.push(vec![s(c), s("Coal"), decimal(rng, 5000, 90000, 1), s("2020")]);
    }
    for c in COUNTRIES {
        for t in NON_RENEWABLE {
            if rng.gen_bool(0.4) {
                rows.push(vec![s(c), s(t), decimal(rng, 1000, 90000, 1), s("2020")]);
            }
        }
    }
    for c in COUNTRIES {
        for t in PRODUCTION_TYPES {
            if rng.gen_bool(0.5) {
                rows.push(vec![s(c), s(t), decimal(rng, 1000, 90000, 1), s("2019")]);
            }
        }
    }
    rows
}

fn map_capacity(mapping: &str, sources: &[(&str, &[Vec<String>])]) -> Graph {
    let doc = parse_mapping(mapping).expect("shipped mapping parses");
    let mut by_path = BTreeMap::new();
    for (path, rows) in sources {
        let header: Vec<&str> = match *path {
            "../raw/production_types.csv" => vec!["type", "label"],
            _ => vec!["country", "type", "measure", "year"],
        };
        let set = CsvReader.read(&csv_text(&header, rows)).expect("generated csv parses");
        by_path.insert(PathBuf::from(path), set.records);
    }
    let out = apply_mapping_sources(&doc, &by_path);
    assert!(out.errors.is_empty(), "generated rows map cleanly");
    out.graph
}

/// Three distinct capacity records each receive one defect.
fn seed_defects(rng: &mut ChaCha8Rng, clean: &Graph) -> (Graph, Vec<SeededDefect>) {
    let class = Term::Iri(Iri::from_static(vocab::ENERGY_GENERATION_CAPACITY));
    let rdf_type = Term::Iri(Iri::from_static(vocab::RDF_TYPE));
    let mut subjects: Vec<Term> = clean
        .matching(None, Some(&rdf_type), Some(&class))
        .map(|t| t.subject().clone())
        .collect();
    subjects.sort();
    let picked: Vec<Term> = subjects.choose_multiple(rng, 3).cloned().collect();
    let (missing, mistyped, extra) = (&picked[0], &picked[1], &picked[2]);
    let country = Iri::from_static(vocab::ENERGY_COUNTRY);
    let measure = Iri::from_static(vocab::ENERGY_MEASURE);
    let year = Iri::from_static(vocab::ENERGY_AGG_YEAR);

    let mut out = Graph::new();
    for t in clean.iter() {
        let p = t.predicate().as_iri();
        if t.subject() == missing && p == Some(&country) {
            continue;
        }
        if t.subject() == mistyped && p == Some(&measure) {
            let lexical = t
                .object()
                .as_literal()
                .expect("measure is a literal")
                .lexical()
                .to_owned();
            let wrong = Term::Literal(Literal::typed(lexical, Iri::from_static(XSD_STRING)));
            out.insert(Triple::new(t.subject().clone(), t.predicate().clone(), wrong).expect("valid"));
            continue;
        }
        out.insert(t.clone());
    }
    out.insert(Triple::new(extra.clone(), Term::Iri(year.clone()), Term::string("2021")).expect("valid"));

    let defect = |focus: &Term, path: &Iri, kind: &str| SeededDefect {
        focus_node: focus.as_iri().expect("IRI subject").as_str().to_owned(),
        path: path.as_str().to_owned(),
        kind: kind.to_owned(),
    };
    let defects = vec![
        defect(missing, &country, "min-count"),
        defect(mistyped, &measure, "datatype"),
        defect(extra, &year, "max-count"),
    ];
    (out, defects)
}

/// A revision table where two rows carry a second reporting year.
fn revision_rows(rng: &mut ChaCha8Rng, capacity: &[Vec<String>]) -> (Vec<Vec<String>>, Vec<SeededDefect>) {
    let current: Vec<&Vec<String>> = capacity.iter().filter(|r| r[3] == "2020").collect();
    let revised: Vec<usize> = rand::seq::index::sample(rng, current.len(), 2.min(current.len())).into_vec();
    let mut rows = Vec::new();
    let mut defects = Vec::new();
    for (i, r) in current.iter().enumerate() {
        let mut row = (*r).clone();
        if revised.contains(&i) {
            row.push(s("2021"));
            defects.push(SeededDefect {
                focus_node: format!("{}capacity/{}/{}/{}", vocab::ENERGY, r[0], r[1], r[3]),
                path: vocab::ENERGY_AGG_YEAR.to_owned(),
                kind: "max-count".to_owned(),
            });
        } else {
            row.push(String::new());
        }
        rows.push(row);
    }
    defects.sort_by(|a, b| a.focus_node.cmp(&b.focus_node));
    (rows, defects)
}

fn reference_graph() -> String {
    let mut g = Graph::new();
    let iri = |s: &str| Term::Iri(Iri::new(s).expect("valid IRI"));
    let label = Term::Iri(Iri::from_static(RDFS_LABEL));
    let wind_power_item = format!("{}Q43302", vocab::WD);
    g.insert(
        Triple::new(
            iri(&vocab::production_type("WindPower")),
            iri(vocab::WDT_P279),
            iri(vocab::WD_Q12705),
        )
        .expect("valid"),
    );
    g.insert(Triple::new(iri(&wind_power_item), label.clone(), Term::string("WindPower")).expect("valid"));
    g.insert(Triple::new(iri(vocab::WD_Q12705), label, Term::string("renewable energy")).expect("valid"));
    serialize_ntriples(&g)
}

fn random_walk(rng: &mut ChaCha8Rng, start: i64, step: i64, lo: i64, hi: i64, n: usize) -> Vec<String> {
    let mut v = start;
    (0..n)
        .map(|_| {
            v = (v + rng.gen_range(-step..=step)).clamp(lo, hi);
            Decimal::new(v, 1).to_string()
        })
        .collect()
}

/// Hourly production and load, plans, bids, agreements, schedules, health and weather.
fn operational_sources(b: &mut Builder) {
    let rng = &mut b.rng;
    let mut plants = Vec::new();
    let mut files = Vec::new();
    for (id, name, ty, area) in PLANTS {
        plants.push(vec![s(id), s(name), s(ty), s(area), decimal(rng, 500, 4000, 0)]);
        let series = match *ty {
            "WindPower" => random_walk(rng, 600, 80, 0, 1500, 24),
            _ => random_walk(rng, 2500, 30, 1800, 3200, 24),
        };
        let rows: Vec<Vec<String>> = series
            .into_iter()
            .enumerate()
            .map(|(h, m)| vec![s(id), s(DAY), h.to_string(), m])
            .collect();
        files.push((
            format!("raw/production/{id}.csv"),
            csv_text(&["plant", "date", "hour", "measure"], &rows),
        ));
    }
    let plants_csv = csv_text(&["plant", "name", "type", "area", "capacity"], &plants);

    let mut load = Vec::new();
    for (point, area) in LOAD_POINTS {
        for (h, m) in random_walk(rng, 9000, 400, 4000, 15000, 24).into_iter().enumerate() {
            load.push(vec![s(point), s(area), h.to_string(), m]);
        }
    }
    let mut frequency = Vec::new();
    for area in AREAS {
        for h in 0..24 {
            frequency.push(vec![s(area), h.to_string(), decimal(rng, 49950, 50051, 3)]);
        }
    }
    let mut plans = Vec::new();
    for area in AREAS {
        for h in 17..20 {
            plans.push(vec![
                format!("plan-{area}-{h}"),
                s(area),
                h.to_string(),
                decimal(rng, 100, 900, 0),
                s("producer"),
            ]);
        }
    }
    let mut bids = Vec::new();
    for (i, area) in AREAS.iter().cycle().take(6).enumerate() {
        let provider = if i % 2 == 0 { "bsp-a" } else { "bsp-b" };
        let direction = if rng.gen_bool(0.5) { "up" } else { "down" };
        bids.push(vec![
            format!("bid-{}", i + 1),
            s(area),
            s(direction),
            decimal(rng, 10, 300, 0),
            decimal(rng, 2000, 15000, 2),
            s(provider),
        ]);
    }
    let agreements = vec![
        vec![s("agreement-bsp-a"), s("tso"), s("bsp-a"), decimal(rng, 100, 500, 0)],
        vec![s("agreement-bsp-b"), s("tso"), s("bsp-b"), decimal(rng, 100, 500, 0)],
    ];
    let mut schedules = Vec::new();
    for (id, ..) in PLANTS {
        for horizon in ["short", "medium", "long"] {
            schedules.push(vec![s(id), s(horizon), decimal(rng, 100, 3000, 0)]);
        }
    }
    let health = |prefix: &str, n: usize, rng: &mut ChaCha8Rng| -> String {
        let rows: Vec<Vec<String>> = (1..=n)
            .map(|i| {
                let status = if rng.gen_bool(0.25) { "degraded" } else { "ok" };
                vec![format!("{prefix}-asset-{i}"), s(status), decimal(rng, 200, 900, 1)]
            })
            .collect();
        csv_text(&["asset", "status", "temperature"], &rows)
    };
    let producer_health = health("producer", 4, rng);
    let supplier_health = health("supplier", 3, rng);
    let mut weather = String::new();
    for station in ["HU-01", "RS-01"] {
        let wind = random_walk(rng, 50, 8, 0, 250, 24);
        for (h, w) in wind.iter().enumerate() {
            let temp = decimal(rng, 120, 320, 1);
            weather.push_str(&format!(
                "{{\"hour\":{h},\"station\":\"{station}\",\"temperature\":{temp},\"wind_speed\":{w}}}\n"
            ));
        }
    }

    for (path, text) in files {
        b.put(&path, text);
    }
    b.put("raw/plants.csv", plants_csv);
    b.put("raw/load.csv", csv_text(&["point", "area", "hour", "measure"], &load));
    b.put("raw/frequency.csv", csv_text(&["area", "hour", "hz"], &frequency));
    b.put(
        "raw/areas.csv",
        csv_text(
            &["area", "operator"],
            &AREAS.iter().map(|a| vec![s(a), s("tso")]).collect::<Vec<_>>(),
        ),
    );
    b.put(
        "raw/plans.csv",
        csv_text(&["plan", "area", "hour", "measure", "party"], &plans),
    );
    b.put(
        "raw/bids.csv",
        csv_text(&["bid", "area", "direction", "quantity", "price", "provider"], &bids),
    );
    b.put(
        "raw/agreements.csv",
        csv_text(&["agreement", "operator", "supplier", "reserve"], &agreements),
    );
    b.put(
        "raw/schedules.csv",
        csv_text(&["plant", "horizon", "measure"], &schedules),
    );
    b.put("raw/producer_health.csv", producer_health);
    b.put("raw/supplier_health.csv", supplier_health);
    b.put("raw/weather.jsonl", weather);
}

const CAPACITY_MAP: &str = r#"prefixes:
  energy: "http://w3id.org/energy/"
maps:
  - name: generation-capacity
    source: { path: ../raw/capacity.csv, format: csv, fields: [country, type, measure, year] }
    subject:
      template: "http://w3id.org/energy/capacity/{country}/{type}/{year}"
      class: energy:GenerationCapacity
    po:
      - { predicate: energy:productionType, template: "http://w3id.org/energy/productionType/{type}" }
      - { predicate: energy:country, field: country }
      - { predicate: energy:measure, field: measure, datatype: xsd:decimal }
      - { predicate: energy:agg_year, field: year }
      - { predicate: prov:wasDerivedFrom, constant: "http://w3id.org/energy/source/transparency-platform" }
  - name: production-types
    source: { path: ../raw/production_types.csv, format: csv, fields: [type, label] }
    subject:
      template: "http://w3id.org/energy/productionType/{type}"
      class: energy:ProductionType
    po:
      - { predicate: rdfs:label, field: label }
"#;

const REVISIONS_MAP: &str = r#"prefixes:
  energy: "http://w3id.org/energy/"
maps:
  - name: revised-capacity
    source: { path: ../raw/capacity_revisions.csv, format: csv, fields: [country, type, measure, year, revised_year] }
    subject:
      template: "http://w3id.org/energy/capacity/{country}/{type}/{year}"
      class: energy:GenerationCapacity
    po:
      - { predicate: energy:productionType, template: "http://w3id.org/energy/productionType/{type}" }
      - { predicate: energy:country, field: country }
      - { predicate: energy:measure, field: measure, datatype: xsd:decimal }
      - { predicate: energy:agg_year, field: year }
      - { predicate: energy:agg_year, field: revised_year }
      - { predicate: prov:wasDerivedFrom, constant: "http://w3id.org/energy/source/transparency-platform" }
"#;

const CAPACITY_SHAPES: &str = r#"prefixes:
  energy: "http://w3id.org/energy/"
shapes:
  - id: GenerationCapacityShape
    target_class: energy:GenerationCapacity
    properties:
      - { path: energy:country, min_count: 1, max_count: 1, node_kind: Literal }
      - { path: energy:measure, min_count: 1, max_count: 1, datatype: xsd:decimal }
      - { path: energy:agg_year, min_count: 1, max_count: 1 }
      - { path: energy:productionType, min_count: 1, max_count: 1, node_kind: IRI }
      - { path: prov:wasDerivedFrom, min_count: 1, node_kind: IRI }
"#;

const PREFIXES: &str = r#"prefixes:
  energy: "http://w3id.org/energy/"
  cim: "urn:ede:cim:"
"#;

const TSO_MAP: &str = r#"maps:
  - name: load
    source: { path: ../raw/load.csv, format: csv, fields: [point, area, hour, measure] }
    subject: { template: "http://w3id.org/energy/load/{point}/{hour}", class: cim:ActivePower }
    po:
      - { predicate: energy:point, template: "http://w3id.org/energy/point/{point}" }
      - { predicate: energy:area, template: "http://w3id.org/energy/area/{area}" }
      - { predicate: energy:hour, field: hour, datatype: xsd:integer }
      - { predicate: energy:measure, field: measure, datatype: xsd:decimal }
  - name: frequency
    source: { path: ../raw/frequency.csv, format: csv, fields: [area, hour, hz] }
    subject: { template: "http://w3id.org/energy/frequency/{area}/{hour}", class: cim:Frequency }
    po:
      - { predicate: energy:area, template: "http://w3id.org/energy/area/{area}" }
      - { predicate: energy:hour, field: hour, datatype: xsd:integer }
      - { predicate: energy:hz, field: hz, datatype: xsd:decimal }
  - name: control-areas
    source: { path: ../raw/areas.csv, format: csv, fields: [area, operator] }
    subject: { template: "http://w3id.org/energy/area/{area}", class: cim:HostControlArea }
    po:
      - { predicate: energy:operator, template: "http://w3id.org/energy/party/{operator}" }
  - name: operators
    source: { path: ../raw/areas.csv, format: csv, fields: [area, operator] }
    subject: { template: "http://w3id.org/energy/party/{operator}", class: cim:ControlAreaOperator }
  - name: balancing-plans
    source: { path: ../raw/plans.csv, format: csv, fields: [plan, area, hour, measure, party] }
    subject: { template: "http://w3id.org/energy/plan/{plan}", class: cim:Agreement }
    po:
      - { predicate: energy:area, template: "http://w3id.org/energy/area/{area}" }
      - { predicate: energy:hour, field: hour, datatype: xsd:integer }
      - { predicate: energy:measure, field: measure, datatype: xsd:decimal }
      - { predicate: energy:party, template: "http://w3id.org/energy/party/{party}" }
"#;

const SUPPLIER_MAP: &str = r#"maps:
  - name: bids
    source: { path: ../raw/bids.csv, format: csv, fields: [bid, area, direction, quantity, price, provider] }
    subject: { template: "http://w3id.org/energy/bid/{bid}", class: cim:ReserveReq }
    po:
      - { predicate: energy:area, template: "http://w3id.org/energy/area/{area}" }
      - { predicate: energy:direction, field: direction }
      - { predicate: energy:quantity, field: quantity, datatype: xsd:decimal }
      - { predicate: energy:price, field: price, datatype: xsd:decimal }
      - { predicate: energy:offeredBy, template: "http://w3id.org/energy/party/{provider}" }
  - name: balance-suppliers
    source: { path: ../raw/bids.csv, format: csv, fields: [bid, area, direction, quantity, price, provider] }
    subject: { template: "http://w3id.org/energy/party/{provider}", class: cim:BalanceSupplier }
    po:
      - { predicate: rdfs:label, field: provider }
  - name: agreements
    source: { path: ../raw/agreements.csv, format: csv, fields: [agreement, operator, supplier, reserve] }
    subject: { template: "http://w3id.org/energy/agreement/{agreement}", class: cim:Agreement }
    po:
      - { predicate: energy:party, template: "http://w3id.org/energy/party/{operator}" }
      - { predicate: energy:party, template: "http://w3id.org/energy/party/{supplier}" }
      - { predicate: energy:reserveMW, field: reserve, datatype: xsd:decimal }
  - name: health
    source: { path: ../raw/supplier_health.csv, format: csv, fields: [asset, status, temperature] }
    subject: { template: "http://w3id.org/energy/asset/{asset}", class: cim:PowerSystemResource }
    po:
      - { predicate: energy:status, field: status }
      - { predicate: energy:temperature, field: temperature, datatype: xsd:decimal }
"#;

const PRODUCER_MAP: &str = r#"maps:
  - name: plants
    source: { path: ../raw/plants.csv, format: csv, fields: [plant, name, type, area, capacity] }
    subject: { template: "http://w3id.org/energy/plant/{plant}", class: cim:Plant }
    po:
      - { predicate: rdfs:label, field: name }
      - { predicate: energy:productionType, template: "http://w3id.org/energy/productionType/{type}" }
      - { predicate: energy:area, template: "http://w3id.org/energy/area/{area}" }
      - { predicate: energy:installedCapacity, field: capacity, datatype: xsd:decimal }
  - name: plant-containers
    source: { path: ../raw/plants.csv, format: csv, fields: [plant, name, type, area, capacity] }
    subject: { template: "http://w3id.org/energy/plant/{plant}", class: cim:EquipmentContainer }
  - name: schedules
    source: { path: ../raw/schedules.csv, format: csv, fields: [plant, horizon, measure] }
    subject: { template: "http://w3id.org/energy/schedule/{plant}/{horizon}", class: cim:RegisteredResource }
    po:
      - { predicate: energy:plant, template: "http://w3id.org/energy/plant/{plant}" }
      - { predicate: energy:horizon, field: horizon }
      - { predicate: energy:measure, field: measure, datatype: xsd:decimal }
  - name: health
    source: { path: ../raw/producer_health.csv, format: csv, fields: [asset, status, temperature] }
    subject: { template: "http://w3id.org/energy/asset/{asset}", class: cim:PowerSystemResource }
    po:
      - { predicate: energy:status, field: status }
      - { predicate: energy:temperature, field: temperature, datatype: xsd:decimal }
"#;

fn production_maps() -> String {
    let mut out = String::new();
    for (id, ..) in PLANTS {
        out.push_str(&format!(
            r#"  - name: production-{id}
    source: {{ path: ../raw/production/{id}.csv, format: csv, fields: [plant, date, hour, measure] }}
    subject: {{ template: "http://w3id.org/energy/production/{{plant}}/{{date}}/{{hour}}", class: cim:ActivePower }}
    po:
      - {{ predicate: energy:plant, template: "http://w3id.org/energy/plant/{{plant}}" }}
      - {{ predicate: energy:date, field: date, datatype: xsd:date }}
      - {{ predicate: energy:hour, field: hour, datatype: xsd:integer }}
      - {{ predicate: energy:measure, field: measure, datatype: xsd:decimal }}
"#
        ));
    }
    out
}

const METEO_MAP: &str = r#"maps:
  - name: weather
    source: { path: ../raw/weather.jsonl, format: json-lines, fields: [station, hour, temperature, wind_speed] }
    subject: { template: "http://w3id.org/energy/weather/{station}/{hour}", class: energy:WeatherObservation }
    po:
      - { predicate: energy:station, field: station }
      - { predicate: energy:hour, field: hour, datatype: xsd:integer }
      - { predicate: energy:temperature, field: temperature, datatype: xsd:decimal }
      - { predicate: energy:windSpeed, field: wind_speed, datatype: xsd:decimal }
"#;

const DAILY_MAP: &str = r#"prefixes:
  energy: "http://w3id.org/energy/"
maps:
  - name: daily-production
    source: { path: ../raw/production/plant-w1.csv, format: csv, fields: [plant, date, measure] }
    subject: { template: "http://w3id.org/energy/production/{plant}/{date}", class: energy:DailyProduction }
    po:
      - { predicate: energy:plant, template: "http://w3id.org/energy/plant/{plant}" }
      - { predicate: energy:date, field: date, datatype: xsd:date }
      - { predicate: energy:measure, field: measure, datatype: xsd:decimal }
"#;

fn contract(id: &str, provider: &str, consumer: &str, ops: &str, from: &str, to: &str, purpose: &str) -> String {
    format!(
        "- id: {id}\n  provider: {provider}\n  consumer: {consumer}\n  resource: {provider}-kg\n  operations: [{ops}]\n  not_before: \"{from}\"\n  expiry: \"{to}\"\n  purpose: {purpose}\n"
    )
}

const Y2020: (&str, &str) = ("2020-01-01T00:00:00Z", "2021-01-01T00:00:00Z");
const Y2019: (&str, &str) = ("2019-01-01T00:00:00Z", "2020-01-01T00:00:00Z");
const OPEN: (&str, &str) = ("2020-01-01T00:00:00Z", "2100-01-01T00:00:00Z");

fn contracts_for(node: &str) -> String {
    let c = |id, consumer, ops, (from, to): (&str, &str), purpose| contract(id, node, consumer, ops, from, to, purpose);
    match node {
        "tso" => [
            c(
                "supplier-tso-capacity",
                "supplier",
                "catalog, query",
                OPEN,
                "generation capacity analysis",
            ),
            c(
                "producer-tso-2020",
                "producer",
                "catalog, query",
                Y2020,
                "balancing plans for the BRP",
            ),
        ]
        .concat(),
        "supplier" => [
            c(
                "tso-supplier-2020",
                "tso",
                "catalog, query",
                Y2020,
                "bids, agreements and health monitoring",
            ),
            c(
                "tso-supplier-2019",
                "tso",
                "catalog, query",
                Y2019,
                "previous balancing period",
            ),
        ]
        .concat(),
        "producer" => [
            c(
                "supplier-producer-2020",
                "supplier",
                "query",
                Y2020,
                "expected realization",
            ),
            c(
                "tso-producer-2020",
                "tso",
                "query",
                Y2020,
                "forecasts and health monitoring",
            ),
        ]
        .concat(),
        "wiki" => [
            c(
                "supplier-wiki-open",
                "supplier",
                "catalog, query",
                OPEN,
                "open reference data",
            ),
            c("tso-wiki-open", "tso", "catalog, query", OPEN, "open reference data"),
        ]
        .concat(),
        "meteo" => c(
            "supplier-meteo-2020",
            "supplier",
            "query",
            Y2020,
            "meteorological observations",
        ),
        _ => unreachable!("fixed node list"),
    }
}

fn node_config(node: &str, port: u16) -> String {
    let (graphs, mappings): (&[&str], &[&str]) = match node {
        "tso" => (&[], &["../mappings/capacity.map.yaml", "../mappings/tso.map.yaml"]),
        "supplier" => (&[], &["../mappings/supplier.map.yaml"]),
        "producer" => (&[], &["../mappings/producer.map.yaml"]),
        "wiki" => (&["../reference/wiki.nt"], &[]),
        "meteo" => (&[], &["../mappings/meteo.map.yaml"]),
        _ => unreachable!("fixed node list"),
    };
    let list = |items: &[&str]| items.iter().map(|i| format!("\n  - {i}")).collect::<String>();
    let mut out = format!("id: {node}\nresource: {node}-kg\nlisten: \"127.0.0.1:{port}\"\n");
    if !graphs.is_empty() {
        out.push_str(&format!("graphs:{}\n", list(graphs)));
    }
    if !mappings.is_empty() {
        out.push_str(&format!("mappings:{}\n", list(mappings)));
    }
    out.push_str(&format!(
        "contracts: ../contracts/{node}.yaml\nprovenance_log: ../logs/{node}.prov.jsonl\n"
    ));
    out
}

static STATIC_FILES: &[(&str, &str)] = &[
    ("queries/worked_example.rq", WORKED_EXAMPLE),
    ("queries/worked_example_verbatim.rq", WORKED_EXAMPLE_VERBATIM),
    ("queries/sq1.rq", SQ1),
    ("queries/sq2.rq", SQ2),
    ("federation/worked_example.yaml", WORKED_CATALOG),
    ("federation/worked_example.local.yaml", WORKED_CATALOG_LOCAL),
    ("mappings/daily_production.map.yaml", DAILY_MAP),
    ("pipeline/capacity.pipeline.yaml", CAPACITY_PIPELINE),
    ("pipeline/capacity_revisions.pipeline.yaml", REVISIONS_PIPELINE),
    ("pipeline/daily_production.pipeline.yaml", DAILY_PIPELINE),
    ("scenario/script.yaml", super::scenario::DEFAULT_SCRIPT),
    ("nodes.yaml", NODES),
];

const NODES: &str = "nodes:\n  - nodes/tso.yaml\n  - nodes/supplier.yaml\n  - nodes/producer.yaml\n  - nodes/wiki.yaml\n  - nodes/meteo.yaml\n";

pub(super) const WORKED_EXAMPLE: &str = r#"PREFIX wd:     <http://www.wikidata.org/entity/>
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

const WORKED_EXAMPLE_VERBATIM: &str = r#"PREFIX wd:     <http://www.wikidata.org/entity/>
PREFIX wdt:    <http://www.wikidata.org/prop/direct/>
PREFIX energy: <http://w3id.org/energy/>

SELECT DISTINCT ?country ?productionType ?measure
WHERE {
?genCapacity    a  energy:GenerationCapacity .
?genCapacity    energy:productionType ?productionType .
?genCapacity    energy:country        ?country .
?genCapacity    energy:measure        ?g_measure .
?genCapacity    energy:agg_year       "2020" .
?productionType wdt:P279              wd:Q12705 .
}
"#;

const SQ1: &str = r#"PREFIX energy: <http://w3id.org/energy/>

SELECT DISTINCT ?country ?productionType ?measure
WHERE {
?genCapacity    a  energy:GenerationCapacity .
?genCapacity    energy:productionType ?productionType .
?genCapacity    energy:country        ?country .
?genCapacity    energy:measure        ?measure .
?genCapacity    energy:agg_year       "2020" .
}
"#;

const SQ2: &str = r#"PREFIX wd:  <http://www.wikidata.org/entity/>
PREFIX wdt: <http://www.wikidata.org/prop/direct/>

SELECT DISTINCT ?productionType
WHERE {
?productionType wdt:P279 wd:Q12705 .
}
"#;

const WORKED_CATALOG: &str = r#"consumer: supplier
prefixes:
  energy: "http://w3id.org/energy/"
  wdt: "http://www.wikidata.org/prop/direct/"
sources:
  - id: tso
    endpoint: "tcp://127.0.0.1:7101"
    contract: supplier-tso-capacity
    classes: [energy:GenerationCapacity, energy:ProductionType]
    predicates: ["energy:*"]
  - id: wiki
    endpoint: "tcp://127.0.0.1:7104"
    contract: supplier-wiki-open
    predicates: [wdt:P279]
"#;

const WORKED_CATALOG_LOCAL: &str = r#"consumer: supplier
prefixes:
  energy: "http://w3id.org/energy/"
  wdt: "http://www.wikidata.org/prop/direct/"
sources:
  - id: tso
    endpoint: "file:../graphs/capacity.nt"
    classes: [energy:GenerationCapacity, energy:ProductionType]
    predicates: ["energy:*"]
  - id: wiki
    endpoint: "file:../reference/wiki.nt"
    predicates: [wdt:P279]
"#;

const CAPACITY_PIPELINE: &str = r#"sources:
  - path: ../raw/capacity.csv
    format: csv
    preprocess:
      - { kind: drop-missing, field: measure }
  - path: ../raw/production_types.csv
    format: csv
mapping: ../mappings/capacity.map.yaml
shapes: ../shapes/capacity.shapes.yaml
linking: { label_predicate: rdfs:label, reference: ../reference/wiki.nt }
staging: ../work/staging
output: ../work/capacity.nt
on_violation: block
"#;

const REVISIONS_PIPELINE: &str = r#"sources:
  - path: ../raw/capacity_revisions.csv
    format: csv
mapping: ../mappings/capacity_revisions.map.yaml
shapes: ../shapes/capacity.shapes.yaml
staging: ../work/staging
output: ../work/capacity_revisions.nt
on_violation: block
"#;

const DAILY_PIPELINE: &str = r#"sources:
  - path: ../raw/production/plant-w1.csv
    format: csv
    preprocess:
      - { kind: aggregate, group_by: [plant, date], sum: measure }
mapping: ../mappings/daily_production.map.yaml
staging: ../work/staging
output: ../work/daily_production.nt
on_violation: block
"#;

/// Node configs, contracts and per-node mappings; they depend only on the node list.
pub(super) fn node_files() -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (i, node) in NODE_IDS.iter().enumerate() {
        out.push((format!("nodes/{node}.yaml"), node_config(node, 7101 + i as u16)));
        out.push((format!("contracts/{node}.yaml"), contracts_for(node)));
    }
    out.push(("mappings/tso.map.yaml".into(), format!("{PREFIXES}{TSO_MAP}")));
    out.push(("mappings/supplier.map.yaml".into(), format!("{PREFIXES}{SUPPLIER_MAP}")));
    out.push((
        "mappings/producer.map.yaml".into(),
        format!("{PREFIXES}{PRODUCER_MAP}{}", production_maps()),
    ));
    out.push(("mappings/meteo.map.yaml".into(), format!("{PREFIXES}{METEO_MAP}")));
    out
}
