use serde_json::{json, Map, Value};

use crate::{Format, Report};

/// Version of the JSON layout; bump on any incompatible change.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Shortest round-trip form, switching to exponent notation for very large or small magnitudes.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Replaces every non-integer JSON number by its shortest round-trip decimal string.
fn stringify_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => Value::String(num(n.as_f64().unwrap())),
        Value::Array(a) => Value::Array(a.into_iter().map(stringify_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, stringify_floats(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

pub fn render(report: Report, format: Format, high_precision: bool) -> Result<String, String> {
    match format {
        Format::Json => {
            let mut results = report.results;
            if high_precision {
                results = stringify_floats(results);
            }
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": report.command,
                "tool_version": env!("CARGO_PKG_VERSION"),
                "config": report.config,
                "results": results,
            });
            let mut s = serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&report.table.header).map_err(|e| e.to_string())?;
            for r in &report.table.rows {
                w.write_record(r).map_err(|e| e.to_string())?;
            }
            String::from_utf8(w.into_inner().map_err(|e| e.to_string())?).map_err(|e| e.to_string())
        }
    }
}
