use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use spgemm_core::machine::DEFAULT_LANES;
use spgemm_core::sparse::{
    csc_matches, dense_oracle, generate_synthetic, gustavson_reference, matrices_match,
    read_matrix_market,
};
use spgemm_core::{
    esc_kernel, hybrid_kernel, spa_kernel, Accumulator, ColumnPlan, CostReport, CscMatrix,
    KernelOutput, Threshold, VecEngine,
};

use crate::config::{Algo, AlgoSpec, MatrixSource, RunConfig};
use crate::error::{BenchError, Result};
use crate::report::{self, Preprocessing, RunReport, Verdict, SCHEMA_VERSION};
use crate::stats::MatrixStats;

/// Above this many columns the oracle is the sparse reference product
/// instead of a dense triple loop.
pub const DENSE_ORACLE_MAX_COLS: usize = 5000;
pub const VERIFY_REL_TOL: f64 = 1e-12;

pub fn load_matrix(source: &MatrixSource) -> Result<CscMatrix<f64>> {
    match source {
        MatrixSource::File { path } => {
            let file = File::open(path).map_err(|source| BenchError::Io {
                path: path.clone(),
                source,
            })?;
            Ok(read_matrix_market(BufReader::new(file))?)
        }
        MatrixSource::Synthetic { n, z, seed } => Ok(generate_synthetic(*n, *z, *seed)?),
    }
}

/// `A·B` with the kernel `cfg` selects; the plan is returned for the
/// blocked kernels.
pub fn multiply(
    cfg: &RunConfig,
    a: &CscMatrix<f64>,
    b: &CscMatrix<f64>,
) -> Result<(KernelOutput<f64>, Option<ColumnPlan>)> {
    let mut engine = VecEngine::new(cfg.max_vl, DEFAULT_LANES);
    Ok(match cfg.algo {
        Algo::Spa => (spa_kernel(a, b, &mut engine)?, None),
        Algo::Esc => (esc_kernel(a, b, &cfg.esc_params(), &mut engine)?, None),
        algo => {
            let plan = ColumnPlan::build(a, b, cfg.plan_config())?;
            let acc = if algo.uses_hash() {
                Accumulator::Hash { c: cfg.hash_c }
            } else {
                Accumulator::Dense
            };
            (hybrid_kernel(a, b, &plan, acc, &mut engine)?, Some(plan))
        }
    })
}

/// Compare `c` against an independent product of `a·b`.
pub fn verify(a: &CscMatrix<f64>, b: &CscMatrix<f64>, c: &CscMatrix<f64>) -> Result<bool> {
    Ok(if b.ncols() <= DENSE_ORACLE_MAX_COLS {
        matrices_match(c, &dense_oracle(a, b)?, VERIFY_REL_TOL)
    } else {
        csc_matches(c, &gustavson_reference(a, b)?, VERIFY_REL_TOL)
    })
}

/// Run `cfg` on an already loaded matrix, computing `A·A`.
pub fn run_on(cfg: &RunConfig, a: &CscMatrix<f64>) -> Result<RunReport> {
    cfg.validate()?;
    if a.nrows() != a.ncols() {
        return Err(spgemm_core::Error::Input(format!(
            "A·A needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        ))
        .into());
    }
    let (out, plan) = multiply(cfg, a, a)?;
    let verdict = match cfg.verify {
        false => Verdict::NotChecked,
        true if verify(a, a, &out.matrix)? => Verdict::Pass,
        true => Verdict::Fail,
    };
    let scalar_work = plan.as_ref().map_or(0, |p| p.scalar_work);
    Ok(RunReport {
        schema: SCHEMA_VERSION,
        timestamp: report::now(),
        label: cfg.label(),
        config: cfg.clone(),
        matrix: MatrixStats::of(&cfg.source.name(), a, a)?,
        nnz_c: out.matrix.nnz(),
        cost: out.report,
        lane_cycles: out.lane_cycles,
        utilization: out.report.utilization(),
        verdict,
        preprocessing: Preprocessing::new(scalar_work, out.report.loop_iterations),
        plan: plan.filter(|_| cfg.dump_plan),
    })
}

pub fn cmd_run(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    run_on(cfg, &load_matrix(&cfg.source)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Non-zeros per column of a synthetic matrix.
    Z,
    Bmax,
    Bmin,
    /// Hybrid threshold; accepts `inf`.
    T,
}

/// Comma-separated items, each a value or an inclusive range `A..B:STEP`.
pub fn parse_values(s: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        let Some((lo, rest)) = item.split_once("..") else {
            out.push(item.to_string());
            continue;
        };
        let (hi, step) = rest.split_once(':').unwrap_or((rest, "1"));
        let num = |x: &str| {
            x.trim()
                .parse::<usize>()
                .map_err(|_| BenchError::usage(format!("invalid range '{item}'")))
        };
        let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
        if step == 0 || lo > hi {
            return Err(BenchError::usage(format!("invalid range '{item}'")));
        }
        out.extend((lo..=hi).step_by(step).map(|v| v.to_string()));
    }
    if out.is_empty() {
        return Err(BenchError::usage("sweep needs at least one value"));
    }
    Ok(out)
}

pub fn apply_axis(base: &RunConfig, axis: Axis, value: &str) -> Result<RunConfig> {
    let mut cfg = base.clone();
    let num = || {
        value
            .parse::<usize>()
            .map_err(|_| BenchError::usage(format!("invalid {axis:?} value '{value}'")))
    };
    match axis {
        Axis::Z => match &mut cfg.source {
            MatrixSource::Synthetic { z, .. } => *z = num()?,
            MatrixSource::File { .. } => {
                return Err(BenchError::usage("sweeping Z needs a --synthetic matrix"))
            }
        },
        Axis::Bmax => {
            cfg.b_max = num()?;
            cfg.b_min = cfg.b_min.min(cfg.b_max);
        }
        Axis::Bmin => {
            cfg.b_min = num()?;
            cfg.b_max = cfg.b_max.max(cfg.b_min);
        }
        Axis::T => {
            cfg.threshold = value
                .parse::<Threshold>()
                .map_err(|e| BenchError::usage(e.to_string()))?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub axis: Axis,
    pub value: String,
    pub report: RunReport,
}

/// One row per `(value, config)`, value-major. A matrix is reloaded only
/// when the source changes.
pub fn cmd_sweep(configs: &[RunConfig], axis: Axis, values: &[String]) -> Result<Vec<SweepPoint>> {
    let mut planned = Vec::with_capacity(values.len());
    for v in values {
        let cfgs = configs
            .iter()
            .map(|c| apply_axis(c, axis, v))
            .collect::<Result<Vec<_>>>()?;
        planned.push((v, cfgs));
    }
    let mut cached: Option<(MatrixSource, CscMatrix<f64>)> = None;
    let mut points = Vec::new();
    for (v, cfgs) in planned {
        for cfg in &cfgs {
            if cached.as_ref().is_none_or(|(src, _)| *src != cfg.source) {
                cached = Some((cfg.source.clone(), load_matrix(&cfg.source)?));
            }
            let (_, a) = cached.as_ref().expect("loaded above");
            points.push(SweepPoint {
                axis,
                value: v.clone(),
                report: run_on(cfg, a)?,
            });
        }
    }
    Ok(points)
}

pub fn write_sweep_csv<W: Write>(out: W, points: &[SweepPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["axis", "value"];
    header.extend(report::csv_header());
    w.write_record(header)?;
    for p in points {
        let axis = p.axis.to_possible_value().expect("no skipped variants");
        let mut row = vec![axis.get_name().to_string(), p.value.clone()];
        row.extend(report::csv_record(&p.report));
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// One matrix of a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub matrix: String,
    pub nrows: usize,
    pub ncols: usize,
    pub nnz: usize,
    /// The metric for SPA on this matrix.
    pub baseline: Option<u64>,
    /// `metric(algo) / metric(SPA)` per configuration; lower is better.
    pub ratios: Vec<Option<f64>>,
    pub best: Option<String>,
    pub error: Option<String>,
    pub verification_failed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareTable {
    pub schema: u32,
    pub metric: String,
    pub labels: Vec<String>,
    pub rows: Vec<CompareRow>,
    /// Geometric mean of each column over rows where it is defined.
    pub geomean: Vec<Option<f64>>,
    pub best_geomean: Option<String>,
}

impl CompareTable {
    pub fn verification_failures(&self) -> usize {
        self.rows.iter().filter(|r| r.verification_failed).count()
    }

    pub fn matrix_errors(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.error.is_some() && !r.verification_failed)
            .count()
    }
}

fn argmin(labels: &[String], ratios: &[Option<f64>]) -> Option<String> {
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in ratios.iter().enumerate() {
        if let Some(r) = *r {
            if best.is_none_or(|(_, b)| r < b) {
                best = Some((i, r));
            }
        }
    }
    best.map(|(i, _)| labels[i].clone())
}

pub fn geometric_mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for x in xs.into_iter().filter(|&x| x > 0.0) {
        sum += x.ln();
        n += 1;
    }
    (n > 0).then(|| (sum / n as f64).exp())
}

fn compare_one(source: &MatrixSource, configs: &[RunConfig], baseline: &RunConfig, metric: &str) -> CompareRow {
    let mut row = CompareRow {
        matrix: source.name(),
        nrows: 0,
        ncols: 0,
        nnz: 0,
        baseline: None,
        ratios: vec![None; configs.len()],
        best: None,
        error: None,
        verification_failed: false,
    };
    let a = match load_matrix(source) {
        Ok(a) => a,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    (row.nrows, row.ncols, row.nnz) = (a.nrows(), a.ncols(), a.nnz());

    let value = |r: &CostReport| r.metric(metric).expect("metric validated");
    let note = |row: &mut CompareRow, msg: String| {
        row.error.get_or_insert(msg);
    };
    let with_source = |c: &RunConfig| RunConfig {
        source: source.clone(),
        ..c.clone()
    };
    let base = match run_on(&with_source(baseline), &a) {
        Ok(r) => r,
        Err(e) => {
            note(&mut row, e.to_string());
            return row;
        }
    };
    if base.verdict == Verdict::Fail {
        row.verification_failed = true;
        note(&mut row, format!("verification failed: {}", base.label));
    }
    let b = value(&base.cost);
    row.baseline = Some(b);
    for (i, cfg) in configs.iter().enumerate() {
        let cfg = with_source(cfg);
        let report = if cfg == with_source(baseline) {
            Ok(base.clone())
        } else {
            run_on(&cfg, &a)
        };
        match report {
            Ok(r) => {
                if r.verdict == Verdict::Fail {
                    row.verification_failed = true;
                    note(&mut row, format!("verification failed: {}", r.label));
                }
                row.ratios[i] = (b > 0).then(|| value(&r.cost) as f64 / b as f64);
            }
            Err(e) => note(&mut row, format!("{}: {e}", cfg.label())),
        }
    }
    row
}

/// Ratios of `metric` against SPA for every configuration on every matrix.
/// Matrices run on worker threads; rows keep the order of `sources`.
pub fn cmd_compare(sources: &[MatrixSource], configs: &[RunConfig], metric: &str) -> Result<CompareTable> {
    if !CostReport::FIELDS.contains(&metric) {
        return Err(BenchError::usage(format!(
            "unknown metric '{metric}', expected one of {}",
            CostReport::FIELDS.join(", ")
        )));
    }
    let Some(first) = configs.first() else {
        return Err(BenchError::usage("compare needs at least one algorithm"));
    };
    for c in configs {
        c.validate()?;
    }
    let spa = AlgoSpec {
        algo: Algo::Spa,
        blocks: None,
    };
    let baseline = first.clone().with_spec(spa);

    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<Option<CompareRow>>> = Mutex::new(vec![None; sources.len()]);
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(sources.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(src) = sources.get(i) else { break };
                let row = compare_one(src, configs, &baseline, metric);
                rows.lock().expect("no worker panics while holding the lock")[i] = Some(row);
            });
        }
    });
    let rows: Vec<CompareRow> = rows
        .into_inner()
        .expect("workers joined")
        .into_iter()
        .map(|r| r.expect("every index visited"))
        .collect();

    let labels: Vec<String> = configs.iter().map(RunConfig::label).collect();
    let rows: Vec<CompareRow> = rows
        .into_iter()
        .map(|mut r| {
            r.best = argmin(&labels, &r.ratios);
            r
        })
        .collect();
    let geomean: Vec<Option<f64>> = (0..configs.len())
        .map(|i| geometric_mean(rows.iter().filter_map(|r| r.ratios[i])))
        .collect();
    Ok(CompareTable {
        schema: SCHEMA_VERSION,
        metric: metric.to_string(),
        best_geomean: argmin(&labels, &geomean),
        labels,
        rows,
        geomean,
    })
}

/// Read a compare list: one source per line, `#` comments and blank lines
/// skipped, relative paths resolved against the list's directory.
pub fn read_list(path: &Path, default_seed: u64) -> Result<Vec<MatrixSource>> {
    let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| MatrixSource::parse_list_entry(l, base, default_seed))
        .collect()
}

fn fmt_ratio(r: Option<f64>) -> String {
    r.map_or_else(String::new, |r| format!("{r:.4}"))
}

pub fn write_compare_csv<W: Write>(out: W, table: &CompareTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "matrix".to_string(),
        "nrows".to_string(),
        "ncols".to_string(),
        "nnz".to_string(),
        format!("SPA {}", table.metric),
    ];
    header.extend(table.labels.iter().map(|l| format!("{l} ratio")));
    header.extend(["best".to_string(), "error".to_string()]);
    w.write_record(&header)?;
    for r in &table.rows {
        let mut row = vec![
            r.matrix.clone(),
            r.nrows.to_string(),
            r.ncols.to_string(),
            r.nnz.to_string(),
            r.baseline.map_or_else(String::new, |b| b.to_string()),
        ];
        row.extend(r.ratios.iter().map(|&x| fmt_ratio(x)));
        row.push(r.best.clone().unwrap_or_default());
        row.push(r.error.clone().unwrap_or_default());
        w.write_record(&row)?;
    }
    let mut summary = vec!["geomean".to_string(), String::new(), String::new(), String::new(), String::new()];
    summary.extend(table.geomean.iter().map(|&x| fmt_ratio(x)));
    summary.push(table.best_geomean.clone().unwrap_or_default());
    summary.push(String::new());
    w.write_record(&summary)?;
    w.flush()?;
    Ok(())
}
