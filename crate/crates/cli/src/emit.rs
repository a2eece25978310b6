//! CSV emission.
//!
//! Schema (fixed column order): `k,metric,value,stderr,component,extra`.
//! One row per (k, metric, component); `component` is 1-based, 0 marks a
//! scalar/aggregate row. Header comment lines (prefixed `#`) carry the
//! resolved configuration, so a file is reproducible from its own header.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

/// One output record.
#[derive(Debug, Clone)]
pub struct Row {
    pub k: usize,
    pub metric: &'static str,
    pub value: f64,
    /// None renders as an empty field (deterministic quantities).
    pub stderr: Option<f64>,
    pub component: usize,
    pub extra: String,
}

impl Row {
    pub fn scalar(k: usize, metric: &'static str, value: f64) -> Self {
        Self { k, metric, value, stderr: None, component: 0, extra: String::new() }
    }

    pub fn with_stderr(mut self, stderr: f64) -> Self {
        self.stderr = Some(stderr);
        self
    }

    pub fn with_component(mut self, component: usize) -> Self {
        self.component = component;
        self
    }

    pub fn with_extra(mut self, extra: impl Into<String>) -> Self {
        self.extra = extra.into();
        self
    }
}

fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v}")
    }
}

/// Renders header comments plus rows into CSV text.
pub fn render_csv(header: &[String], rows: &[Row]) -> String {
    let mut text = String::new();
    for line in header {
        let _ = writeln!(text, "{line}");
    }
    let _ = writeln!(text, "k,metric,value,stderr,component,extra");
    for row in rows {
        let stderr = row.stderr.map(fmt_value).unwrap_or_default();
        let _ = writeln!(
            text,
            "{},{},{},{},{},{}",
            row.k,
            row.metric,
            fmt_value(row.value),
            stderr,
            row.component,
            row.extra
        );
    }
    text
}

/// Writes the CSV to disk, creating parent directories as needed.
pub fn write_csv(path: &Path, header: &[String], rows: &[Row]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("cannot create {}", parent.display()))?;
        }
    }
    fs::write(path, render_csv(header, rows))
        .with_context(|| format!("cannot write {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_nan_and_empty_stderr() {
        let rows = vec![
            Row::scalar(0, "bound_coarse", f64::NAN).with_extra("needs k >= 1"),
            Row::scalar(1, "risk_learning", 0.5).with_stderr(0.01).with_component(0),
        ];
        let text = render_csv(&["# seed = 1".into()], &rows);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# seed = 1");
        assert_eq!(lines[1], "k,metric,value,stderr,component,extra");
        assert_eq!(lines[2], "0,bound_coarse,NaN,,0,needs k >= 1");
        assert_eq!(lines[3], "1,risk_learning,0.5,0.01,0,");
    }
}
