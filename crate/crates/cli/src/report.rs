//! Report envelope and its three renderings.

use std::fmt::Write as _;
use std::time::Duration;

use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA: u32 = 1;

/// Rows for the CSV view.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Table {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// What a subcommand hands back before rendering.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub ok: bool,
    pub result: Value,
    pub table: Option<Table>,
    /// Extra timing entries beside the total, kept out of `result`.
    pub timing: Vec<(String, Value)>,
    /// Printed to stderr when `ok` is false.
    pub failures: Vec<String>,
    /// Exit code when `ok` is false; a batch raises it to its worst job.
    pub exit: i32,
}

impl Report {
    pub fn new(command: &str, ok: bool, result: impl Serialize) -> Report {
        Report {
            command: command.to_string(),
            ok,
            result: serde_json::to_value(result).expect("report values serialize"),
            table: None,
            timing: Vec::new(),
            failures: Vec::new(),
            exit: crate::EXIT_FAIL,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.ok {
            crate::EXIT_OK
        } else {
            self.exit
        }
    }

    pub fn with_table(mut self, t: Table) -> Report {
        self.table = Some(t);
        self
    }

    pub fn fail(&mut self, msg: impl Into<String>) {
        self.ok = false;
        self.failures.push(msg.into());
    }

    pub fn envelope(&self, elapsed: Duration) -> Value {
        let mut timing = serde_json::Map::new();
        timing.insert("ms".into(), json!(ms(elapsed)));
        for (k, v) in &self.timing {
            timing.insert(k.clone(), v.clone());
        }
        json!({
            "schema": SCHEMA,
            "command": self.command,
            "ok": self.ok,
            "result": self.result,
            "timing": timing,
        })
    }
}

pub fn ms(d: Duration) -> f64 {
    (d.as_secs_f64() * 1e6).round() / 1e3
}

/// Indented `key: value` view of a JSON value.
pub fn to_text(v: &Value) -> String {
    let mut out = String::new();
    text_into(&mut out, v, 0);
    out
}

fn as_complex(v: &Value) -> Option<(f64, f64)> {
    let m = v.as_object()?;
    if m.len() != 2 {
        return None;
    }
    Some((m.get("re")?.as_f64()?, m.get("im")?.as_f64()?))
}

fn is_flat(v: &Value) -> bool {
    match v {
        Value::Array(a) => a.iter().all(is_flat),
        Value::Object(_) => as_complex(v).is_some(),
        _ => true,
    }
}

fn inline(v: &Value) -> String {
    if let Some((re, im)) = as_complex(v) {
        let sign = if im.is_sign_negative() { '-' } else { '+' };
        return format!("{}{sign}{}i", num(re), num(im.abs()));
    }
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_f64() => num(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(a) => {
            let parts: Vec<String> = a.iter().map(inline).collect();
            format!("[{}]", parts.join(", "))
        }
        other => other.to_string(),
    }
}

fn text_into(out: &mut String, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                if is_flat(x) {
                    let _ = writeln!(out, "{pad}{k}: {}", inline(x));
                } else {
                    let _ = writeln!(out, "{pad}{k}:");
                    text_into(out, x, depth + 1);
                }
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                if is_flat(x) {
                    let _ = writeln!(out, "{pad}- {}", inline(x));
                } else {
                    let _ = writeln!(out, "{pad}- [{}]", i + 1);
                    text_into(out, x, depth + 1);
                }
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{}", inline(other));
        }
    }
}

/// Shortest round-trip float text, so CSV files stay deterministic.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
