//! Artifact writers: commented headers, CSV tables and key-value reports.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use oseen_core::diagnostics::{DiagnosticRecord, CSV_COLUMNS};

use crate::config::ExperimentConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// `# `-prefixed header: schema version, artifact kind, then the resolved
/// configuration as TOML.
pub fn header(kind: &str, cfg: &ExperimentConfig) -> String {
    let mut s = format!("# schema_version = {SCHEMA_VERSION}\n# kind = {kind}\n");
    for line in cfg.to_toml().lines() {
        if line.is_empty() {
            s.push_str("#\n");
        } else {
            s.push_str("# ");
            s.push_str(line);
            s.push('\n');
        }
    }
    s
}

pub fn format_value(v: f64) -> String {
    format!("{v:e}")
}

fn create(path: &Path) -> std::io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes a CSV file: header block, column row, then pre-formatted rows.
pub fn write_csv(
    path: &Path,
    header_text: &str,
    columns: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> std::io::Result<()> {
    let mut w = create(path)?;
    w.write_all(header_text.as_bytes())?;
    let mut csv = csv::WriterBuilder::new().from_writer(w);
    csv.write_record(columns)?;
    for row in rows {
        csv.write_record(&row)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_trajectory(
    path: &Path,
    header_text: &str,
    records: &[DiagnosticRecord],
) -> std::io::Result<()> {
    write_csv(
        path,
        header_text,
        &CSV_COLUMNS,
        records
            .iter()
            .map(|r| r.row().iter().map(|v| format_value(*v)).collect()),
    )
}

/// Ordered `key = value` pairs.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct KeyValues(pub Vec<(String, String)>);

impl KeyValues {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.0.push((key.into(), value.to_string()));
    }

    pub fn num(&mut self, key: impl Into<String>, value: f64) {
        self.push(key, format_value(value));
    }

    pub fn render(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Parses `key = value` lines, skipping blanks and `#` comments.
    pub fn parse(text: &str) -> Self {
        Self(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .filter_map(|l| l.split_once(" = "))
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .collect(),
        )
    }
}

pub fn write_text(path: &Path, header_text: &str, body: &str) -> std::io::Result<()> {
    let mut w = create(path)?;
    w.write_all(header_text.as_bytes())?;
    w.write_all(body.as_bytes())?;
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_lines_are_comments() {
        let h = header("trajectory", &ExperimentConfig::default());
        assert!(h.lines().all(|l| l.starts_with('#')));
        assert!(h.starts_with("# schema_version = 1\n# kind = trajectory\n"));
    }

    #[test]
    fn key_values_roundtrip() {
        let mut kv = KeyValues::default();
        kv.num("a.b", 0.1);
        kv.push("name", "power_log");
        let back = KeyValues::parse(&format!("# comment\n{}", kv.render()));
        assert_eq!(back, kv);
        assert_eq!(back.get("a.b"), Some("1e-1"));
    }
}
