//! Report emission: versioned JSON envelopes and fixed-column CSV tables.
//! Artifacts are byte-deterministic for a given configuration: map keys are
//! ordered, floats use a fixed scientific format, wall-clock data stays out.

use crate::error::Result;
use serde_json::{json, Value};

pub fn fmt_f(x: f64) -> String {
    if x == 0.0 {
        "0e0".to_string()
    } else {
        format!("{x:.12e}")
    }
}

/// CSV builder with a fixed header and row width.
pub struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Csv {
        Csv {
            header: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.header.len(), "csv row width");
        self.rows.push(cells.to_vec());
    }

    pub fn row_f(&mut self, cells: &[f64]) {
        self.row(&cells.iter().map(|&x| fmt_f(x)).collect::<Vec<_>>());
    }

    pub fn to_string(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// Versioned envelope: {"spec": 1, "tool": ..., "version": ..., body...}.
pub fn envelope(kind: &str, config_echo: Value, body: Value) -> Value {
    json!({
        "spec": 1,
        "tool": "bose-expand",
        "version": env!("CARGO_PKG_VERSION"),
        "kind": kind,
        "config": config_echo,
        "report": body,
    })
}

pub fn write_text(path: &std::path::Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

pub fn write_json(path: &std::path::Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_stable_text() {
        let mut c = Csv::new(&["n", "value"]);
        c.row_f(&[8.0, 0.125]);
        c.row_f(&[10.0, 0.0]);
        assert_eq!(c.to_string(), "n,value\n8.000000000000e0,1.250000000000e-1\n1.000000000000e1,0e0\n");
    }
}
