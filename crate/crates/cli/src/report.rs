use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

/// JSON envelope written for every run. Field order is fixed by the struct;
/// nested maps are sorted by key, so identical runs give identical bytes
/// apart from `wall_time_ms`.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub wall_time_ms: u64,
}

/// What a command hands back to `main`.
pub struct Outcome {
    pub inputs: Value,
    pub results: Value,
    pub tolerances: BTreeMap<String, f64>,
    /// Set when the command treats a found violation as failure.
    pub failed: bool,
    /// Extra human-readable lines printed before the scalar results.
    pub lines: Vec<String>,
}

impl Outcome {
    pub fn new(inputs: Value, results: Value) -> Self {
        Self {
            inputs,
            results,
            tolerances: BTreeMap::new(),
            failed: false,
            lines: Vec::new(),
        }
    }

    pub fn tol(mut self, key: &str, value: f64) -> Self {
        self.tolerances.insert(key.to_string(), value);
        self
    }
}

/// Plain-text rendering: the command's own lines, then every scalar field of
/// the results.
pub fn render_text(report: &RunReport, lines: &[String]) -> String {
    let mut out = String::new();
    for l in lines {
        out.push_str(l);
        out.push('\n');
    }
    if let Value::Object(map) = &report.results {
        for (k, v) in map {
            match v {
                Value::Array(_) | Value::Object(_) => {}
                Value::String(s) => out.push_str(&format!("{k}: {s}\n")),
                other => out.push_str(&format!("{k}: {other}\n")),
            }
        }
    }
    out
}
