use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::Path;

use freysha_core::arith::parse_factored;
use freysha_core::sha::ShaReport;
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::store::read_json_lines;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Text,
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Headers plus string cells; the common shape of everything printed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Table {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<S: Into<String>>(&mut self, row: impl IntoIterator<Item = S>) {
        let row: Vec<String> = row.into_iter().map(Into::into).collect();
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.headers)?;
                for row in &self.rows {
                    w.write_record(row)?;
                }
                finish(w)
            }
            OutputFormat::Json => {
                let rows: Vec<serde_json::Map<String, serde_json::Value>> = self
                    .rows
                    .iter()
                    .map(|row| {
                        self.headers
                            .iter()
                            .cloned()
                            .zip(row.iter().map(|c| serde_json::Value::String(c.clone())))
                            .collect()
                    })
                    .collect();
                let mut text = serde_json::to_string_pretty(&rows).expect("serializable");
                text.push('\n');
                Ok(text)
            }
            OutputFormat::Text => Ok(self.render_text(self.rows.len() != 1)),
        }
    }

    fn render_text(&self, columns: bool) -> String {
        let mut out = String::new();
        if !columns {
            let width = self
                .headers
                .iter()
                .map(|h| h.chars().count())
                .max()
                .unwrap_or(0);
            for (h, v) in self.headers.iter().zip(&self.rows[0]) {
                let _ = writeln!(out, "{h:<width$}  {v}");
            }
            return out;
        }
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |out: &mut String, cells: &[String]| {
            let mut s = String::new();
            for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
                if i > 0 {
                    s.push_str("  ");
                }
                let _ = write!(s, "{cell:>w$}");
            }
            out.push_str(s.trim_end());
            out.push('\n');
        };
        line(&mut out, &self.headers);
        for row in &self.rows {
            line(&mut out, row);
        }
        out
    }
}

/// One result row: the seven table columns followed by the class data and
/// run statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub sha: String,
    pub c: String,
    pub a: String,
    pub q: String,
    pub k: usize,
    #[serde(rename = "L")]
    pub l: String,
    #[serde(rename = "G")]
    pub g: String,
    #[serde(default)]
    pub sha_root: Option<String>,
    #[serde(default)]
    pub s: Option<u32>,
    #[serde(default)]
    pub t: Option<u32>,
    #[serde(default)]
    pub c1: Option<u64>,
    #[serde(default)]
    pub c2: Option<u64>,
    #[serde(default)]
    pub c3: Option<u64>,
    #[serde(default)]
    pub c4: Option<u64>,
    #[serde(default)]
    pub conductor: Option<String>,
    #[serde(default)]
    pub burden: Option<u64>,
    #[serde(default)]
    pub residual: Option<String>,
    #[serde(default)]
    pub n_terms: Option<u64>,
    #[serde(default)]
    pub runtime_secs: Option<f64>,
    #[serde(default)]
    pub class_hash: Option<String>,
}

pub const TABLE_HEADERS: [&str; 7] = ["|Sha|", "c", "a", "q", "k", "L", "G"];

impl ReportRecord {
    pub fn from_report(report: &ShaReport, runtime_secs: f64) -> Self {
        let [sha, c, a, q, k, l, g] = report.row();
        ReportRecord {
            sha,
            c,
            a,
            q,
            k: k.parse().expect("k is an index"),
            l,
            g,
            sha_root: Some(report.sha_root.to_string()),
            s: Some(report.s),
            t: Some(report.t),
            c1: Some(report.c_values[0]),
            c2: Some(report.c_values[1]),
            c3: Some(report.c_values[2]),
            c4: Some(report.c_values[3]),
            conductor: Some(report.conductor.to_string()),
            burden: report.burden,
            residual: Some(report.residual.to_sig_string(6)),
            n_terms: Some(report.n_terms),
            runtime_secs: Some(runtime_secs),
            class_hash: Some(report.class_hash.clone()),
        }
    }

    /// `sqrt|Sha|`, from the explicit column or from the `r^2` rendering.
    pub fn root(&self) -> Option<BigInt> {
        let text = match &self.sha_root {
            Some(r) => r.as_str(),
            None => self.sha.trim().strip_suffix("^2")?,
        };
        text.trim().parse().ok()
    }

    pub fn g_value(&self) -> Option<f64> {
        self.g.trim().parse().ok()
    }

    pub fn row(&self) -> [String; 7] {
        [
            self.sha.clone(),
            self.c.clone(),
            self.a.clone(),
            self.q.clone(),
            self.k.to_string(),
            self.l.clone(),
            self.g.clone(),
        ]
    }
}

/// Integer given either in factored notation or as plain decimal digits.
pub fn parse_integer(text: &str) -> Option<BigInt> {
    parse_factored(text)
        .map(|f| f.value().clone())
        .ok()
        .or_else(|| text.trim().parse().ok())
}

#[derive(Clone, Debug, Default)]
pub struct ReportFilter {
    /// Keep rows with `sqrt|Sha|` at least this.
    pub min_root: Option<BigInt>,
    /// Keep rows with `G` at least this.
    pub min_g: Option<f64>,
    pub a: Option<BigInt>,
    pub c: Option<BigInt>,
}

impl ReportFilter {
    pub fn keeps(&self, record: &ReportRecord) -> bool {
        if let Some(min) = &self.min_root {
            if record.root().map_or(true, |r| r < *min) {
                return false;
            }
        }
        if let Some(min) = self.min_g {
            if record.g_value().map_or(true, |g| g < min) {
                return false;
            }
        }
        if let Some(a) = &self.a {
            if parse_integer(&record.a).as_ref() != Some(a) {
                return false;
            }
        }
        if let Some(c) = &self.c {
            if parse_integer(&record.c).as_ref() != Some(c) {
                return false;
            }
        }
        true
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum SortKey {
    /// Largest `|Sha|` first.
    #[default]
    Sha,
    /// Largest `G` first.
    G,
    /// By `c`, then `a`, then `q`.
    Triple,
}

fn by_triple(x: &ReportRecord, y: &ReportRecord) -> Ordering {
    let key = |r: &ReportRecord| {
        (
            parse_integer(&r.c),
            parse_integer(&r.a),
            r.q.trim().parse::<i64>().ok(),
        )
    };
    key(x).cmp(&key(y))
}

/// Filters and sorts; ties fall back to the triple ordering.
pub fn select(records: &[ReportRecord], filter: &ReportFilter, sort: SortKey) -> Vec<ReportRecord> {
    let mut out: Vec<ReportRecord> = records
        .iter()
        .filter(|r| filter.keeps(r))
        .cloned()
        .collect();
    out.sort_by(|x, y| {
        let primary = match sort {
            SortKey::Sha => y.root().cmp(&x.root()),
            SortKey::G => y
                .g_value()
                .partial_cmp(&x.g_value())
                .unwrap_or(Ordering::Equal),
            SortKey::Triple => Ordering::Equal,
        };
        primary.then_with(|| by_triple(x, y))
    });
    out
}

pub fn render_records(records: &[ReportRecord], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => {
            let mut text = serde_json::to_string_pretty(records).expect("serializable");
            text.push('\n');
            Ok(text)
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            if records.is_empty() {
                w.write_record(["sha", "c", "a", "q", "k", "L", "G"])?;
            }
            for r in records {
                w.serialize(r)?;
            }
            finish(w)
        }
        OutputFormat::Text => {
            let mut table = Table::new(TABLE_HEADERS);
            for r in records {
                table.push(r.row());
            }
            Ok(table.render_text(true))
        }
    }
}

/// Reads result records from `.csv`, `.json` (an array) or JSON lines.
pub fn load_records(path: &Path) -> Result<Vec<ReportRecord>> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => {
            let mut reader = csv::Reader::from_path(path)?;
            let mut out = Vec::new();
            for row in reader.deserialize() {
                out.push(row?);
            }
            Ok(out)
        }
        Some("json") => {
            let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
            serde_json::from_str(&text).map_err(Error::json(path))
        }
        _ => read_json_lines(path),
    }
}
