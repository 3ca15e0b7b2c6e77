//! Rendering of command results. Both formats start from the effective
//! configuration and print every float through `export::num`, so equal
//! inputs always give equal bytes.

use qmomentum::export::{num, Table};
use serde_json::{json, Map, Value};

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Scalar {
    fn text(&self) -> String {
        match self {
            Scalar::Num(x) => num(*x),
            Scalar::Int(i) => i.to_string(),
            Scalar::Bool(b) => b.to_string(),
            Scalar::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Scalar::Num(x) => Value::String(num(*x)),
            Scalar::Int(i) => json!(i),
            Scalar::Bool(b) => json!(b),
            Scalar::Text(s) => Value::String(s.clone()),
        }
    }
}

impl From<f64> for Scalar {
    fn from(x: f64) -> Self {
        Scalar::Num(x)
    }
}

impl From<usize> for Scalar {
    fn from(i: usize) -> Self {
        Scalar::Int(i as i64)
    }
}

impl From<bool> for Scalar {
    fn from(b: bool) -> Self {
        Scalar::Bool(b)
    }
}

impl From<&str> for Scalar {
    fn from(s: &str) -> Self {
        Scalar::Text(s.to_string())
    }
}

impl From<String> for Scalar {
    fn from(s: String) -> Self {
        Scalar::Text(s)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub summary: Vec<(String, Scalar)>,
    pub tables: Vec<(String, Table)>,
}

impl Report {
    pub fn put(&mut self, key: &str, value: impl Into<Scalar>) {
        self.summary.push((key.to_string(), value.into()));
    }

    pub fn table(&mut self, name: &str, table: Table) {
        self.tables.push((name.to_string(), table));
    }

    pub fn render(&self, format: Format, config: &Value) -> String {
        match format {
            Format::Csv => self.csv(config),
            Format::Json => self.json(config),
        }
    }

    fn csv(&self, config: &Value) -> String {
        let mut out = format!("# config: {config}\n");
        if !self.summary.is_empty() {
            out.push_str("# table: summary\nkey,value\n");
            for (k, v) in &self.summary {
                out.push_str(&format!("{k},{}\n", csv_field(&v.text())));
            }
        }
        for (name, t) in &self.tables {
            out.push_str(&format!("\n# table: {name}\n"));
            out.push_str(&t.to_csv());
        }
        out
    }

    fn json(&self, config: &Value) -> String {
        let summary: Map<String, Value> = self.summary.iter().map(|(k, v)| (k.clone(), v.json())).collect();
        let tables: Map<String, Value> = self.tables.iter().map(|(k, t)| (k.clone(), t.to_json_value())).collect();
        let doc = json!({ "config": config, "data": { "summary": summary, "tables": tables } });
        let mut s = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
        s.push('\n');
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
