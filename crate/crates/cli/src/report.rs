use std::fs;
use std::io;
use std::path::Path;

use serde_json::{json, Map, Value};

/// Twelve significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.11e}")
}

/// JSON number rounded to twelve significant digits; non-finite values become null.
pub fn json_num(v: f64) -> Value {
    num(v).parse::<f64>().ok().and_then(serde_json::Number::from_f64).map_or(Value::Null, Value::Number)
}

/// Terminal rendering of a summary value, floats with twelve significant digits.
pub fn display_value(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => num(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(items) => format!("[{}]", items.iter().map(display_value).collect::<Vec<_>>().join(", ")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: Option<f64>,
    pub limit: Option<f64>,
    pub detail: String,
}

impl Check {
    /// Passes when `value <= limit`.
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            passed: value <= limit,
            value: Some(value),
            limit: Some(limit),
            detail: format!("{} <= {}", num(value), num(limit)),
        }
    }

    pub fn flag(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, value: None, limit: None, detail: detail.into() }
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("name".into(), json!(self.name));
        m.insert("passed".into(), json!(self.passed));
        if let Some(v) = self.value {
            m.insert("value".into(), json_num(v));
        }
        if let Some(l) = self.limit {
            m.insert("limit".into(), json_num(l));
        }
        m.insert("detail".into(), json!(self.detail));
        Value::Object(m)
    }
}

/// Result of one scenario: checks, summary values and report files.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub summary: Vec<(String, Value)>,
    /// File name and contents; the first entry is the primary table.
    pub files: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn primary_table(&self) -> Option<&str> {
        self.files.first().and_then(|(_, b)| std::str::from_utf8(b).ok())
    }

    pub fn report_json(&self, name: &str, kind: &str) -> String {
        let summary: Map<String, Value> = self.summary.iter().cloned().collect();
        let v = json!({
            "scenario": name,
            "kind": kind,
            "passed": self.passed(),
            "checks": self.checks.iter().map(Check::to_json).collect::<Vec<_>>(),
            "summary": summary,
            "files": self.files.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
        });
        let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
        s.push('\n');
        s
    }

    /// Writes `report.json` and every table into `dir`.
    pub fn write(&self, dir: &Path, name: &str, kind: &str) -> io::Result<Vec<String>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (file, bytes) in &self.files {
            fs::write(dir.join(file), bytes)?;
            written.push(file.clone());
        }
        fs::write(dir.join("report.json"), self.report_json(name, kind))?;
        written.push("report.json".into());
        Ok(written)
    }
}

/// CSV table with a fixed header.
pub struct Csv {
    buf: String,
    width: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Csv { buf, width: header.len() }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.width);
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf.into_bytes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(num(0.255), "2.55000000000e-1");
        assert_eq!(json_num(1.0 / 3.0), json!(0.333333333333));
        assert_eq!(json_num(f64::NAN), Value::Null);
        assert_eq!(display_value(&json!([0.5, 3])), "[5.00000000000e-1, 3]");
    }

    #[test]
    fn report_lists_files() {
        let o = Outcome {
            checks: vec![Check::at_most("gap", 1e-9, 1e-6), Check::flag("found", false, "missing level")],
            summary: vec![("levels".into(), json!(3))],
            files: vec![("spectrum.csv".into(), b"index\n".to_vec())],
        };
        assert!(!o.passed());
        let r: Value = serde_json::from_str(&o.report_json("s", "spectrum")).unwrap();
        assert_eq!(r["files"], json!(["spectrum.csv"]));
        assert_eq!(r["checks"][0]["passed"], json!(true));
        assert_eq!(r["summary"]["levels"], json!(3));
    }
}
