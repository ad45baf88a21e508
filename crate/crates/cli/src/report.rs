//! Report assembly and rendering.
//!
//! JSON layout (keys are stable):
//! `{"command", "config", "checks": [{"name", "status", "backend", "residual",
//! "dimensions", "detail"}], "data", "passed", "wall_time_ms"}`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use opgraph_core::Backend;

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    /// `"pass"` or `"fail"`
    pub status: &'static str,
    /// Backend the numbers of this check were computed under.
    pub backend: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub dimensions: BTreeMap<String, usize>,
    pub detail: String,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, passed: bool, backend: Backend) -> Self {
        Self {
            name: name.into(),
            status: if passed { "pass" } else { "fail" },
            backend: backend.to_string(),
            residual: None,
            dimensions: BTreeMap::new(),
            detail: String::new(),
        }
    }

    pub fn residual(mut self, r: f64) -> Self {
        self.residual = Some(r);
        self
    }

    pub fn dim(mut self, key: &str, value: usize) -> Self {
        self.dimensions.insert(key.to_string(), value);
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.status == "pass"
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub checks: Vec<CheckRecord>,
    pub data: Value,
    pub passed: bool,
    pub wall_time_ms: f64,
}

impl Report {
    pub fn new(
        command: &str,
        config: Value,
        checks: Vec<CheckRecord>,
        data: Value,
        wall_time_ms: f64,
    ) -> Self {
        let passed = checks.iter().all(CheckRecord::passed);
        Self {
            command: command.to_string(),
            config,
            checks,
            data,
            passed,
            wall_time_ms,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "opgraph {}  {}", self.command, compact(&self.config));
        if let Some(table) = self.data.get("rows").and_then(Value::as_array) {
            render_rows(&mut out, table);
        } else if !self.data.is_null() {
            for (k, v) in self.data.as_object().into_iter().flatten() {
                let _ = writeln!(out, "  {k}: {}", compact(v));
            }
        }
        for c in &self.checks {
            let _ = write!(
                out,
                "{} [{}] {}",
                c.status.to_uppercase(),
                c.backend,
                c.name
            );
            if let Some(r) = c.residual {
                let _ = write!(out, "  residual={r:e}");
            }
            for (k, v) in &c.dimensions {
                let _ = write!(out, "  {k}={v}");
            }
            if !c.detail.is_empty() {
                let _ = write!(out, "  ({})", c.detail);
            }
            out.push('\n');
        }
        let failed = self.checks.iter().filter(|c| !c.passed()).count();
        let _ = writeln!(
            out,
            "{} checks, {failed} failed, {:.1} ms",
            self.checks.len(),
            self.wall_time_ms
        );
        out
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render_rows(out: &mut String, rows: &[Value]) {
    let Some(first) = rows.first().and_then(Value::as_object) else {
        return;
    };
    let keys: Vec<&String> = first.keys().collect();
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            keys.iter()
                .map(|k| r.get(k.as_str()).map(compact).unwrap_or_default())
                .collect()
        })
        .collect();
    let widths: Vec<usize> = keys
        .iter()
        .enumerate()
        .map(|(i, k)| {
            cells
                .iter()
                .map(|c| c[i].len())
                .chain([k.len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |items: Vec<&str>| {
        items
            .iter()
            .zip(&widths)
            .map(|(s, w)| format!("{s:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let _ = writeln!(out, "  {}", line(keys.iter().map(|k| k.as_str()).collect()));
    for c in &cells {
        let _ = writeln!(out, "  {}", line(c.iter().map(String::as_str).collect()));
    }
}
