//! Raw records and the readers that produce them, registered by format name.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::Value;

use super::MappingError;

/// An ordered set of named fields; `None` marks an explicitly missing value.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RawRecord {
    fields: Vec<(String, Option<String>)>,
}

impl RawRecord {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a record from pairs; a later duplicate name replaces the earlier value.
    pub fn from_pairs<K: Into<String>, V: Into<String>>(pairs: impl IntoIterator<Item = (K, V)>) -> Self {
        let mut r = RawRecord::new();
        for (k, v) in pairs {
            r.set(k, Some(v.into()));
        }
        r
    }

    /// The value of `field`, or `None` when absent or missing.
    pub fn get(&self, field: &str) -> Option<&str> {
        self.fields
            .iter()
            .find(|(k, _)| k == field)
            .and_then(|(_, v)| v.as_deref())
    }

    pub fn has_field(&self, field: &str) -> bool {
        self.fields.iter().any(|(k, _)| k == field)
    }

    pub fn set(&mut self, field: impl Into<String>, value: Option<String>) {
        let field = field.into();
        match self.fields.iter_mut().find(|(k, _)| *k == field) {
            Some(slot) => slot.1 = value,
            None => self.fields.push((field, value)),
        }
    }

    pub fn rename(&mut self, from: &str, to: &str) {
        if from == to {
            return;
        }
        let value = self
            .fields
            .iter()
            .position(|(k, _)| k == from)
            .map(|i| self.fields.remove(i).1);
        if let Some(value) = value {
            self.set(to, value);
        }
    }

    pub fn fields(&self) -> impl Iterator<Item = (&str, Option<&str>)> {
        self.fields.iter().map(|(k, v)| (k.as_str(), v.as_deref()))
    }

    pub fn field_names(&self) -> Vec<String> {
        self.fields.iter().map(|(k, _)| k.clone()).collect()
    }
}

/// A parsed tabular source: the header (or inferred schema) and its records.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RecordSet {
    pub header: Vec<String>,
    pub records: Vec<RawRecord>,
}

/// Reads and writes one raw-data format.
pub trait RecordReader: Send + Sync {
    fn format(&self) -> &'static str;
    fn read(&self, text: &str) -> Result<RecordSet, MappingError>;
    fn write(&self, set: &RecordSet) -> String;
}

/// RFC 4180 CSV with a header row. Empty cells are missing values.
pub struct CsvReader;

impl RecordReader for CsvReader {
    fn format(&self) -> &'static str {
        "csv"
    }

    fn read(&self, text: &str) -> Result<RecordSet, MappingError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| MappingError::Source(format!("csv header: {e}")))?
            .iter()
            .map(str::to_owned)
            .collect();
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = header.iter().find(|h| !seen.insert(h.as_str())) {
            return Err(MappingError::Source(format!("csv header repeats field {dup:?}")));
        }
        let mut records = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let row = row.map_err(|e| MappingError::Source(format!("csv row {}: {e}", i + 1)))?;
            let mut rec = RawRecord::new();
            for (name, cell) in header.iter().zip(row.iter()) {
                let value = (!cell.is_empty()).then(|| cell.to_owned());
                rec.set(name.clone(), value);
            }
            records.push(rec);
        }
        if header.is_empty() && !text.trim().is_empty() {
            return Err(MappingError::Source("csv without header".into()));
        }
        Ok(RecordSet { header, records })
    }

    fn write(&self, set: &RecordSet) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        if !set.header.is_empty() {
            w.write_record(&set.header).expect("in-memory write");
        }
        for r in &set.records {
            let row: Vec<&str> = set.header.iter().map(|h| r.get(h).unwrap_or("")).collect();
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }
}

/// One flat JSON object per line. `null` values are missing; numbers keep their text.
pub struct JsonLinesReader;

impl RecordReader for JsonLinesReader {
    fn format(&self) -> &'static str {
        "json-lines"
    }

    fn read(&self, text: &str) -> Result<RecordSet, MappingError> {
        let mut header: Vec<String> = Vec::new();
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let obj: serde_json::Map<String, Value> = serde_json::from_str(line)
                .map_err(|e| MappingError::Source(format!("json-lines line {}: {e}", i + 1)))?;
            let mut rec = RawRecord::new();
            for (k, v) in obj {
                let value = match v {
                    Value::Null => None,
                    Value::String(s) => Some(s),
                    Value::Number(n) => Some(n.to_string()),
                    Value::Bool(b) => Some(b.to_string()),
                    _ => {
                        return Err(MappingError::Source(format!(
                            "json-lines line {}: field {k:?} is not a flat value",
                            i + 1
                        )))
                    }
                };
                if !header.contains(&k) {
                    header.push(k.clone());
                }
                rec.set(k, value);
            }
            records.push(rec);
        }
        Ok(RecordSet { header, records })
    }

    fn write(&self, set: &RecordSet) -> String {
        let mut out = String::new();
        for r in &set.records {
            let obj: serde_json::Map<String, Value> = r
                .fields()
                .map(|(k, v)| (k.to_owned(), v.map_or(Value::Null, |s| Value::String(s.to_owned()))))
                .collect();
            out.push_str(&Value::Object(obj).to_string());
            out.push('\n');
        }
        out
    }
}

/// Record readers keyed by format name.
#[derive(Clone)]
pub struct ReaderRegistry {
    readers: BTreeMap<String, Arc<dyn RecordReader>>,
}

impl Default for ReaderRegistry {
    fn default() -> Self {
        let mut r = ReaderRegistry {
            readers: BTreeMap::new(),
        };
        r.register(Arc::new(CsvReader));
        r.register(Arc::new(JsonLinesReader));
        r
    }
}

impl ReaderRegistry {
    pub fn register(&mut self, reader: Arc<dyn RecordReader>) {
        self.readers.insert(reader.format().to_owned(), reader);
    }

    pub fn get(&self, format: &str) -> Option<Arc<dyn RecordReader>> {
        self.readers.get(format).cloned()
    }

    pub fn formats(&self) -> Vec<String> {
        self.readers.keys().cloned().collect()
    }

    pub fn read(&self, format: &str, text: &str) -> Result<RecordSet, MappingError> {
        self.get(format)
            .ok_or_else(|| MappingError::Source(format!("unknown source format {format:?}")))?
            .read(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_empty_cells_are_missing() {
        let set = CsvReader.read("a,b\n1,\n\"x,y\",2\n").unwrap();
        assert_eq!(set.header, vec!["a", "b"]);
        assert_eq!(set.records[0].get("b"), None);
        assert!(set.records[0].has_field("b"));
        assert_eq!(set.records[1].get("a"), Some("x,y"));
        let again = CsvReader.read(&CsvReader.write(&set)).unwrap();
        assert_eq!(again, set);
    }

    #[test]
    fn json_lines_flat_values() {
        let set = JsonLinesReader
            .read("{\"a\": \"x\", \"n\": 3.5, \"z\": null}\n\n{\"a\": \"y\"}\n")
            .unwrap();
        assert_eq!(set.records.len(), 2);
        assert_eq!(set.records[0].get("n"), Some("3.5"));
        assert_eq!(set.records[0].get("z"), None);
        assert!(JsonLinesReader.read("{\"a\": {\"nested\": 1}}").is_err());
    }

    #[test]
    fn registry_lookup_by_format() {
        let reg = ReaderRegistry::default();
        assert_eq!(reg.formats(), vec!["csv", "json-lines"]);
        assert!(reg.read("xml", "").is_err());
    }

    #[test]
    fn rename_keeps_value() {
        let mut r = RawRecord::from_pairs([("a", "1"), ("b", "2")]);
        r.rename("a", "c");
        assert_eq!(r.get("c"), Some("1"));
        assert!(!r.has_field("a"));
    }
}
