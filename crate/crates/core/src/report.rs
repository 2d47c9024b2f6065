//! Machine-readable report envelope shared by the command-line front end:
//! schema-versioned JSON with a command echo, an input digest and a warnings
//! list, plus deterministic CSV rendering helpers.

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub input_digest: String,
    pub results: serde_json::Value,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(command: impl Into<String>, input_digest: impl Into<String>) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            input_digest: input_digest.into(),
            results: serde_json::Value::Null,
            warnings: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Deterministic shortest-roundtrip float rendering for CSV columns.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

/// Renders one CSV table: a header row and data rows, '\n'-terminated.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
