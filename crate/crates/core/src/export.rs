//! File formats: per-path trajectory CSV, per-path JSONL summaries, and CSV
//! tables for the error decomposition, asset scenario and per-time
//! redundancy fits.
//!
//! Column sets are fixed. Floats are written in Rust's shortest round-trip
//! form, so identical inputs give identical bytes.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomposition::{AssetScenario, ErrorDecomposition};
use crate::discrete::PathRecord;
use crate::measures::Outcome;
use crate::redundancy::RedundancyReport;

pub const TRAJECTORY_COLUMNS: [&str; 10] = [
    "step",
    "datum",
    "true_loglr",
    "test_loglr",
    "p",
    "p_check",
    "pi",
    "err",
    "bias",
    "diffusive",
];
pub const DECOMPOSITION_COLUMNS: [&str; 7] = ["path", "step", "bias", "diffusive", "total", "bias_closed_form", "rho"];
pub const ASSET_COLUMNS: [&str; 5] = ["path", "step", "x", "y", "z"];
pub const TIME_FIT_COLUMNS: [&str; 5] = ["time", "gamma", "c", "residual", "state_map_residual"];

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn num(x: f64) -> String {
    x.to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Replaces `step` by `time` in the first column for continuous-time paths.
fn header<const N: usize>(cols: [&'static str; N], time_grid: bool) -> [&'static str; N] {
    let mut h = cols;
    if time_grid {
        for c in h.iter_mut() {
            if *c == "step" {
                *c = "time";
            }
        }
    }
    h
}

fn clock(rec: &PathRecord, n: usize) -> String {
    match rec.time_step {
        Some(dt) => num(n as f64 * dt),
        None => n.to_string(),
    }
}

/// One row per grid point, the first row holding the priors (empty datum).
pub fn write_trajectory_csv<W: Write>(rec: &PathRecord, w: W) -> Result<(), ExportError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header(TRAJECTORY_COLUMNS, rec.time_step.is_some()))?;
    for n in 0..=rec.horizon() {
        let datum = if n == 0 { String::new() } else { num(rec.data[n - 1]) };
        out.write_record([
            clock(rec, n),
            datum,
            num(rec.true_loglr[n]),
            num(rec.test_loglr[n]),
            num(rec.p[n]),
            num(rec.p_check[n]),
            num(rec.pi[n]),
            num(rec.err[n]),
            num(rec.bias[n]),
            num(rec.diffusive[n]),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// End-of-path summary, one JSON object per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub path_index: usize,
    pub outcome: Outcome,
    pub horizon: usize,
    pub final_time: Option<f64>,
    pub true_loglr: f64,
    pub test_loglr: f64,
    pub p: f64,
    pub p_check: f64,
    pub pi: f64,
    pub err: f64,
    pub bias: f64,
    pub diffusive: f64,
}

impl From<&PathRecord> for PathSummary {
    fn from(rec: &PathRecord) -> Self {
        let n = rec.horizon();
        PathSummary {
            path_index: rec.path_index,
            outcome: rec.outcome,
            horizon: n,
            final_time: rec.time_step.map(|dt| n as f64 * dt),
            true_loglr: rec.true_loglr[n],
            test_loglr: rec.test_loglr[n],
            p: rec.p[n],
            p_check: rec.p_check[n],
            pi: rec.pi[n],
            err: rec.err[n],
            bias: rec.bias[n],
            diffusive: rec.diffusive[n],
        }
    }
}

pub fn write_summaries_jsonl<W: Write>(paths: &[PathRecord], mut w: W) -> Result<(), ExportError> {
    for rec in paths {
        serde_json::to_writer(&mut w, &PathSummary::from(rec))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Decomposition rows for every path; `bias_closed_form` is evaluated from
/// the record's `pi` series.
pub fn write_decomposition_csv<W: Write>(
    records: &[PathRecord],
    decomps: &[ErrorDecomposition],
    w: W,
) -> Result<(), ExportError> {
    let time_grid = records.first().is_some_and(|r| r.time_step.is_some());
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header(DECOMPOSITION_COLUMNS, time_grid))?;
    for (rec, d) in records.iter().zip(decomps) {
        for n in 0..d.total.len() {
            let pi = crate::belief::Belief::new(rec.pi[n]).expect("interior belief");
            let closed = crate::decomposition::bias_term(pi, d.rho).expect("valid rho");
            out.write_record([
                d.path_index.to_string(),
                clock(rec, n),
                num(d.bias[n]),
                num(d.diffusive[n]),
                num(d.total[n]),
                num(closed),
                num(d.rho),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_asset_csv<W: Write>(records: &[PathRecord], scenarios: &[AssetScenario], w: W) -> Result<(), ExportError> {
    let time_grid = records.first().is_some_and(|r| r.time_step.is_some());
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header(ASSET_COLUMNS, time_grid))?;
    for (rec, a) in records.iter().zip(scenarios) {
        for n in 0..a.z.len() {
            out.write_record([a.path_index.to_string(), clock(rec, n), num(a.x[n]), num(a.y[n]), num(a.z[n])])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_time_fits_csv<W: Write>(report: &RedundancyReport, w: W) -> Result<(), ExportError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TIME_FIT_COLUMNS)?;
    for f in &report.state_map_fits {
        out.write_record([
            f.time.to_string(),
            opt(f.gamma),
            opt(f.c),
            opt(f.power_law_residual),
            num(f.state_map_residual),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<W: Write, T: Serialize>(value: &T, mut w: W) -> Result<(), ExportError> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
