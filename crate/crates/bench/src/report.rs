use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use spgemm_core::{ColumnPlan, CostReport};

use crate::config::RunConfig;
use crate::error::Result;
use crate::stats::MatrixStats;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NotChecked,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotChecked => "not_checked",
        }
    }
}

/// Scalar work spent sorting and blocking columns, against the kernel's
/// loop trips. Zero for kernels without a plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Preprocessing {
    pub scalar_work: u64,
    /// `scalar_work / (scalar_work + loop_iterations)`.
    pub share: f64,
}

impl Preprocessing {
    pub fn new(scalar_work: u64, loop_iterations: u64) -> Self {
        let total = scalar_work + loop_iterations;
        Preprocessing {
            scalar_work,
            share: if total == 0 { 0.0 } else { scalar_work as f64 / total as f64 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    /// Seconds since the Unix epoch. The only field that differs between
    /// identical runs.
    pub timestamp: u64,
    pub label: String,
    pub config: RunConfig,
    pub matrix: MatrixStats,
    pub nnz_c: usize,
    /// All counts are model counts, not wall-clock.
    pub cost: CostReport,
    /// `Σ instructions · ⌈VL / lanes⌉`.
    pub lane_cycles: u64,
    pub utilization: f64,
    pub verdict: Verdict,
    pub preprocessing: Preprocessing,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<ColumnPlan>,
}

pub fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Columns shared by every per-run CSV row.
pub fn csv_header() -> Vec<&'static str> {
    let mut h = vec!["label", "algo", "matrix", "nrows", "ncols", "nnz", "nnz_c"];
    h.extend(CostReport::FIELDS);
    h.extend(["lane_cycles", "utilization", "preprocessing_share", "verdict"]);
    h
}

pub fn csv_record(r: &RunReport) -> Vec<String> {
    let mut row = vec![
        r.label.clone(),
        r.config.algo.to_string(),
        r.matrix.name.clone(),
        r.matrix.nrows.to_string(),
        r.matrix.ncols.to_string(),
        r.matrix.nnz.to_string(),
        r.nnz_c.to_string(),
    ];
    row.extend(CostReport::FIELDS.iter().map(|f| r.cost.metric(f).unwrap_or(0).to_string()));
    row.extend([
        r.lane_cycles.to_string(),
        r.utilization.to_string(),
        r.preprocessing.share.to_string(),
        r.verdict.as_str().to_string(),
    ]);
    row
}

pub fn write_json<W: Write, S: Serialize>(out: W, value: &S) -> Result<()> {
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

pub fn write_run_csv<W: Write>(out: W, reports: &[RunReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header())?;
    for r in reports {
        w.write_record(csv_record(r))?;
    }
    w.flush()?;
    Ok(())
}
