use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FitReport, SweepConfig, SweepRecord};
use crate::{Error, Result};

pub const CSV_COLUMNS: [&str; 13] = [
    "k",
    "h_max",
    "n_vertices",
    "sigma1_bar",
    "gap",
    "beta_total",
    "psi_l2",
    "psi_linf",
    "quasimode_res",
    "window_count",
    "dual_dist",
    "wall_ms",
    "status",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Everything a sweep produces, as stored in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResults {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<SweepConfig>,
    pub records: Vec<SweepRecord>,
    pub fit: Option<FitReport>,
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn to_csv(records: &[SweepRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Parse(format!("csv: {e}"));
    w.write_record(CSV_COLUMNS).map_err(err)?;
    for r in records {
        w.write_record([
            r.k.to_string(),
            opt(r.h_max),
            opt(r.n_vertices),
            opt(r.sigma1_bar),
            opt(r.gap),
            opt(r.beta_total),
            opt(r.psi_l2),
            opt(r.psi_linf),
            opt(r.quasimode_res),
            opt(r.window_count),
            opt(r.dual_dist),
            r.wall_ms.to_string(),
            r.status.clone(),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Parse the CSV form back into records (without JSON-only details).
pub fn from_csv(text: &str) -> Result<Vec<SweepRecord>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rd
        .headers()
        .map_err(|e| Error::Parse(format!("csv: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != CSV_COLUMNS {
        return Err(Error::Parse(format!("unexpected csv columns {header:?}")));
    }
    let mut out = Vec::new();
    for (line, row) in rd.records().enumerate() {
        let row = row.map_err(|e| Error::Parse(format!("csv: {e}")))?;
        let bad = |col: &str| Error::Parse(format!("csv row {}: bad {col}", line + 1));
        let f = |i: usize| -> Result<Option<f64>> {
            match &row[i] {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|_| bad(CSV_COLUMNS[i])),
            }
        };
        let u = |i: usize| -> Result<Option<usize>> {
            match &row[i] {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|_| bad(CSV_COLUMNS[i])),
            }
        };
        out.push(SweepRecord {
            k: u(0)?.ok_or_else(|| bad("k"))?,
            h_max: f(1)?,
            n_vertices: u(2)?,
            sigma1_bar: f(3)?,
            gap: f(4)?,
            beta_total: f(5)?,
            psi_l2: f(6)?,
            psi_linf: f(7)?,
            quasimode_res: f(8)?,
            window_count: u(9)?,
            dual_dist: f(10)?,
            wall_ms: row[11].parse().map_err(|_| bad("wall_ms"))?,
            status: row[12].to_string(),
            details: None,
        });
    }
    Ok(out)
}

pub fn to_json(results: &SweepResults) -> String {
    serde_json::to_string_pretty(results).expect("results serialize")
}

pub fn from_json(text: &str) -> Result<SweepResults> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("results json: {e}")))
}

/// Write records (and, for JSON, the fit) to `path`.
pub fn emit_results(records: &[SweepRecord], fit: Option<&FitReport>, format: Format, path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Usage("no records to emit".into()));
    }
    let text = match format {
        Format::Csv => to_csv(records)?,
        Format::Json => to_json(&SweepResults { config: None, records: records.to_vec(), fit: fit.cloned() }),
    };
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Load records from a CSV or JSON file, chosen by extension.
pub fn load_results(path: &Path) -> Result<SweepResults> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => Ok(SweepResults { config: None, records: from_csv(&text)?, fit: None }),
        _ => from_json(&text),
    }
}
