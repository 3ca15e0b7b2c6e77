//! Plain numeric tables for CSV output. Numbers use Rust's shortest
//! round-trip formatting, which is locale-free and uses `.` as the decimal
//! separator, so identical data always produce identical bytes.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Shortest decimal string that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        // fold -0 into 0 so signs of zero never change output bytes
        "0".to_string()
    } else if x.abs() < 1e-5 || x.abs() >= 1e16 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.iter().map(|&x| num(x)).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    /// Rows as JSON objects keyed by column, values as decimal strings.
    pub fn to_json_value(&self) -> serde_json::Value {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let obj: serde_json::Map<String, serde_json::Value> =
                    self.header.iter().zip(r).map(|(h, &x)| (h.clone(), serde_json::Value::String(num(x)))).collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::Value::Array(rows)
    }
}
