use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// `{"re", "im"}` form of a complex number.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Cx {
    pub re: f64,
    pub im: f64,
}

impl From<num_complex::Complex64> for Cx {
    fn from(z: num_complex::Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

/// What a command produced. `table` is set for commands whose result is a
/// list of flat rows and can therefore be written as CSV.
pub struct Report {
    pub json: Value,
    pub table: Option<Vec<Value>>,
    /// Set when the computed result violates the checked property.
    pub violation: Option<String>,
}

impl Report {
    pub fn single(doc: &impl Serialize) -> Result<Self, Failure> {
        Ok(Self {
            json: to_finite_value(doc)?,
            table: None,
            violation: None,
        })
    }

    pub fn with_table(doc: &impl Serialize, rows: &[impl Serialize]) -> Result<Self, Failure> {
        let rows = rows.iter().map(to_finite_value).collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            json: to_finite_value(doc)?,
            table: Some(rows),
            violation: None,
        })
    }

    pub fn violated_if(mut self, violated: bool, message: impl FnOnce() -> String) -> Self {
        if violated {
            self.violation = Some(message());
        }
        self
    }
}

/// Converts to JSON, refusing NaN and infinities. serde_json writes those as
/// `null`, so documents leave absent fields out instead of writing `null`,
/// and any `null` left is a number that was not finite.
pub fn to_finite_value(doc: &impl Serialize) -> Result<Value, Failure> {
    let value = serde_json::to_value(doc).map_err(|e| Failure::Violation(format!("cannot encode output: {e}")))?;
    match null_path(&value, String::new()) {
        Some(path) => Err(Failure::Violation(format!(
            "refusing to write output: non-finite number at `{path}`"
        ))),
        None => Ok(value),
    }
}

fn null_path(value: &Value, path: String) -> Option<String> {
    match value {
        Value::Null => Some(if path.is_empty() { ".".into() } else { path }),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .find_map(|(i, v)| null_path(v, format!("{path}[{i}]"))),
        Value::Object(map) => map.iter().find_map(|(k, v)| null_path(v, format!("{path}.{k}"))),
        _ => None,
    }
}

pub fn render(report: &Report, format: Format, command: &str) -> Result<Vec<u8>, Failure> {
    match format {
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(&report.json)
                .map_err(|e| Failure::Violation(format!("cannot encode output: {e}")))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => {
            let rows = report
                .table
                .as_ref()
                .ok_or_else(|| Failure::Usage(format!("`{command}` has no tabular output; use --format json")))?;
            csv_bytes(rows)
        }
    }
}

fn csv_bytes(rows: &[Value]) -> Result<Vec<u8>, Failure> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = match rows.first() {
        Some(Value::Object(map)) => map.keys().cloned().collect(),
        Some(_) => return Err(Failure::Violation("table rows must be objects".into())),
        None => Vec::new(),
    };
    let io = |e: csv::Error| Failure::Violation(format!("cannot write CSV: {e}"));
    if !header.is_empty() {
        writer.write_record(&header).map_err(io)?;
    }
    for row in rows {
        let cells = header.iter().map(|key| match row.get(key) {
            None | Some(Value::Null) => String::new(),
            Some(Value::String(s)) => s.clone(),
            Some(other) => other.to_string(),
        });
        writer.write_record(cells).map_err(io)?;
    }
    writer
        .into_inner()
        .map_err(|e| Failure::Violation(format!("cannot write CSV: {e}")))
}

pub fn emit(bytes: &[u8], output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(path) => {
            std::fs::write(path, bytes).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|()| out.flush())
                .map_err(|e| Failure::Usage(format!("cannot write to standard output: {e}")))
        }
    }
}
