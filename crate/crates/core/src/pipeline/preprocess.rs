//! Record-level cleaning steps, built from YAML by kind name.

use std::collections::BTreeMap;
use std::str::FromStr;

use rust_decimal::Decimal;

use crate::mapping::RawRecord;
use crate::util::yaml::Node;

/// A record that a step could not process; it is dropped from the stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreprocessError {
    pub step: usize,
    pub record: usize,
    pub message: String,
}

pub trait PreprocessStep: Send + Sync {
    fn kind(&self) -> &'static str;
    /// `errors` receives one entry per dropped record, indexed within this step's input.
    fn apply(&self, records: Vec<RawRecord>, errors: &mut Vec<(usize, String)>) -> Vec<RawRecord>;
}

/// Parses a decimal, accepting scientific notation.
pub fn parse_decimal(text: &str) -> Option<Decimal> {
    let t = text.trim();
    Decimal::from_str(t).or_else(|_| Decimal::from_scientific(t)).ok()
}

/// No exponent, trailing zeros trimmed, `.` as separator.
pub fn canonical_decimal(d: Decimal) -> String {
    d.normalize().to_string()
}

pub struct RenameField {
    pub from: String,
    pub to: String,
}

impl PreprocessStep for RenameField {
    fn kind(&self) -> &'static str {
        "rename-field"
    }

    fn apply(&self, mut records: Vec<RawRecord>, _: &mut Vec<(usize, String)>) -> Vec<RawRecord> {
        for r in &mut records {
            r.rename(&self.from, &self.to);
        }
        records
    }
}

/// Multiplies a numeric field; missing values stay missing.
pub struct ScaleNumeric {
    pub field: String,
    pub factor: Decimal,
}

impl PreprocessStep for ScaleNumeric {
    fn kind(&self) -> &'static str {
        "scale-numeric"
    }

    fn apply(&self, records: Vec<RawRecord>, errors: &mut Vec<(usize, String)>) -> Vec<RawRecord> {
        let mut out = Vec::with_capacity(records.len());
        for (i, mut r) in records.into_iter().enumerate() {
            let Some(raw) = r.get(&self.field) else {
                out.push(r);
                continue;
            };
            match parse_decimal(raw).and_then(|v| v.checked_mul(self.factor)) {
                Some(v) => {
                    r.set(self.field.clone(), Some(canonical_decimal(v)));
                    out.push(r);
                }
                None => errors.push((i, format!("{}: {raw:?} is not a scalable number", self.field))),
            }
        }
        out
    }
}

/// One record per distinct group-by tuple, in first-appearance order, carrying the
/// group-by fields and the sum of `sum`.
pub struct Aggregate {
    pub group_by: Vec<String>,
    pub sum: String,
}

impl PreprocessStep for Aggregate {
    fn kind(&self) -> &'static str {
        "aggregate"
    }

    fn apply(&self, records: Vec<RawRecord>, errors: &mut Vec<(usize, String)>) -> Vec<RawRecord> {
        let mut order: Vec<Vec<Option<String>>> = Vec::new();
        let mut sums: BTreeMap<Vec<Option<String>>, Decimal> = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            let value = match r.get(&self.sum).map(|raw| (raw, parse_decimal(raw))) {
                Some((_, Some(v))) => v,
                Some((raw, None)) => {
                    errors.push((i, format!("{}: {raw:?} is not a number", self.sum)));
                    continue;
                }
                None => {
                    errors.push((i, format!("{}: missing value", self.sum)));
                    continue;
                }
            };
            let key: Vec<Option<String>> = self.group_by.iter().map(|f| r.get(f).map(str::to_owned)).collect();
            match sums.get_mut(&key) {
                Some(total) => match total.checked_add(value) {
                    Some(t) => *total = t,
                    None => errors.push((i, format!("{}: sum overflows", self.sum))),
                },
                None => {
                    order.push(key.clone());
                    sums.insert(key, value);
                }
            }
        }
        order
            .into_iter()
            .map(|key| {
                let mut rec = RawRecord::new();
                for (f, v) in self.group_by.iter().zip(&key) {
                    rec.set(f.clone(), v.clone());
                }
                rec.set(self.sum.clone(), Some(canonical_decimal(sums[&key])));
                rec
            })
            .collect()
    }
}

pub struct DropMissing {
    pub field: String,
}

impl PreprocessStep for DropMissing {
    fn kind(&self) -> &'static str {
        "drop-missing"
    }

    fn apply(&self, mut records: Vec<RawRecord>, _: &mut Vec<(usize, String)>) -> Vec<RawRecord> {
        records.retain(|r| r.get(&self.field).is_some());
        records
    }
}

type StepBuilder = fn(Node<'_>) -> Result<Box<dyn PreprocessStep>, String>;

/// Step builders keyed by the `kind` value in pipeline configs.
#[derive(Clone)]
pub struct StepRegistry {
    builders: BTreeMap<&'static str, StepBuilder>,
}

impl Default for StepRegistry {
    fn default() -> Self {
        let mut r = StepRegistry {
            builders: BTreeMap::new(),
        };
        r.register("rename-field", |n| {
            n.check_keys(&["kind", "from", "to"])?;
            Ok(Box::new(RenameField {
                from: n.require("from")?.node().string()?,
                to: n.require("to")?.node().string()?,
            }))
        });
        r.register("scale-numeric", |n| {
            n.check_keys(&["kind", "field", "factor"])?;
            let f = n.require("factor")?;
            let raw = f.node().string()?;
            let factor = parse_decimal(&raw).ok_or_else(|| f.node().err(format!("{raw:?} is not a finite number")))?;
            if factor.is_zero() {
                return Err(f.node().err("factor must be non-zero"));
            }
            Ok(Box::new(ScaleNumeric {
                field: n.require("field")?.node().string()?,
                factor,
            }))
        });
        r.register("aggregate", |n| {
            n.check_keys(&["kind", "group_by", "sum"])?;
            let g = n.require("group_by")?;
            let group_by = g.node().strings()?;
            if group_by.is_empty() {
                return Err(g.node().err("group_by must name at least one field"));
            }
            Ok(Box::new(Aggregate {
                group_by,
                sum: n.require("sum")?.node().string()?,
            }))
        });
        r.register("drop-missing", |n| {
            n.check_keys(&["kind", "field"])?;
            Ok(Box::new(DropMissing {
                field: n.require("field")?.node().string()?,
            }))
        });
        r
    }
}

impl StepRegistry {
    pub fn register(&mut self, kind: &'static str, builder: StepBuilder) {
        self.builders.insert(kind, builder);
    }

    pub fn kinds(&self) -> Vec<&'static str> {
        self.builders.keys().copied().collect()
    }

    pub fn build(&self, node: Node<'_>) -> Result<Box<dyn PreprocessStep>, String> {
        let kind_node = node.require("kind")?;
        let kind = kind_node.node().string()?;
        let builder = self.builders.get(kind.as_str()).ok_or_else(|| {
            kind_node.node().err(format!(
                "unknown step kind {kind:?} (known: {})",
                self.kinds().join(", ")
            ))
        })?;
        builder(node)
    }
}

/// Applies steps in order, collecting the records each step dropped.
pub fn preprocess(
    records: Vec<RawRecord>,
    steps: &[Box<dyn PreprocessStep>],
) -> (Vec<RawRecord>, Vec<PreprocessError>) {
    let mut errors = Vec::new();
    let mut current = records;
    for (step, s) in steps.iter().enumerate() {
        let mut step_errors = Vec::new();
        current = s.apply(current, &mut step_errors);
        errors.extend(
            step_errors
                .into_iter()
                .map(|(record, message)| PreprocessError { step, record, message }),
        );
    }
    (current, errors)
}
