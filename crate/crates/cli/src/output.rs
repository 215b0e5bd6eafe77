//! Rendering and file output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use sqzsim::homodyne::{Axis, Trace};

use crate::config::Format;
use crate::error::{CliError, CliResult};

/// Round to `digits` decimals for reporting.
pub fn round(x: f64, digits: i32) -> f64 {
    let s = 10f64.powi(digits);
    (x * s).round() / s
}

pub fn db(x: f64) -> String {
    format!("{x:.2}")
}

pub fn pct(fraction: f64) -> String {
    format!("{:.2}", 100.0 * fraction)
}

pub fn mrad(rad: f64) -> String {
    format!("{:.2}", 1e3 * rad)
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| CliError::Data(e.to_string()))
    }

    /// Left-aligned first column, right-aligned rest.
    pub fn to_text(&self) -> String {
        let mut width: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for r in &self.rows {
            for (w, c) in width.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&width)
                .enumerate()
                .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut out = line(&self.headers);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Data(e.to_string())
}

/// What a command prints: a table for text/CSV, a JSON document otherwise.
#[derive(Debug, Clone)]
pub struct Report {
    pub table: Table,
    pub json: Value,
}

impl Report {
    pub fn render(&self, format: Format) -> CliResult<String> {
        Ok(match format {
            Format::Text => self.table.to_text(),
            Format::Csv => String::from_utf8(self.table.to_csv()?).expect("csv is utf-8"),
            Format::Json => format!("{}\n", serde_json::to_string_pretty(&self.json).expect("json")),
        })
    }
}

/// Files written by one command, keyed by name relative to the output
/// directory.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    hashes: BTreeMap<String, String>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hashes: BTreeMap::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.hashes.insert(name.to_string(), sha256_hex(bytes));
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Data(e.to_string()))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn write_table(&mut self, name: &str, table: &Table) -> CliResult<PathBuf> {
        self.write(name, &table.to_csv()?)
    }

    pub fn hashes(&self) -> &BTreeMap<String, String> {
        &self.hashes
    }

    pub fn names(&self) -> Vec<String> {
        self.hashes.keys().cloned().collect()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `(abscissa, level_dB)` CSV of a trace.
pub fn trace_table(trace: &Trace) -> Table {
    let (head, fmt): (&str, fn(f64) -> String) = match trace.axis {
        Axis::Time => ("time_s", |t| format!("{t:.6}")),
        Axis::Frequency => ("freq_Hz", |f| format!("{f:.0}")),
    };
    let mut t = Table::new(&[head, "level_dB"]);
    for (x, l) in trace.abscissa.iter().zip(&trace.level_db) {
        t.push(vec![fmt(*x), db(*l)]);
    }
    t
}

/// Everything about a trace except its samples.
pub fn trace_sidecar(trace: &Trace, extra: Value) -> Value {
    let mut v = json!({
        "axis": trace.axis,
        "reference": trace.reference,
        "points": trace.len(),
        "settings": trace.settings,
        "sample_rate": trace.sample_rate,
        "seed": trace.seed,
        "mean_dB": round(trace.mean_db(), 2),
        "std_dB": round(trace.std_db(), 3),
    });
    if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
        m.extend(e);
    }
    v
}

/// Write a trace as CSV plus JSON sidecar named `{stem}.csv` / `{stem}.json`.
pub fn write_trace(art: &mut Artifacts, stem: &str, trace: &Trace, extra: Value) -> CliResult<()> {
    art.write_table(&format!("{stem}.csv"), &trace_table(trace))?;
    art.write_json(&format!("{stem}.json"), &trace_sidecar(trace, extra))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_and_units() {
        assert_eq!(round(10.1484, 2), 10.15);
        assert_eq!(db(-10.148), "-10.15");
        assert_eq!(pct(0.0808), "8.08");
        assert_eq!(mrad(0.009), "9.00");
    }

    #[test]
    fn text_table_aligns() {
        let mut t = Table::new(&["item", "loss_pct"]);
        t.push(vec!["waveguide".into(), "2.03".into()]);
        t.push(vec!["total".into(), "8.00".into()]);
        let s = t.to_text();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "item       loss_pct");
        assert_eq!(lines[1], "waveguide      2.03");
        assert_eq!(lines[2], "total          8.00");
    }

    #[test]
    fn csv_quotes_when_needed() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["x,y".into(), "1".into()]);
        assert_eq!(String::from_utf8(t.to_csv().unwrap()).unwrap(), "a,b\n\"x,y\",1\n");
    }

    #[test]
    fn known_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
