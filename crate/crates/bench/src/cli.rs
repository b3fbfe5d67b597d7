use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use spgemm_core::machine::DEFAULT_MAX_VL;
use spgemm_core::{RadixPolicy, Threshold, DEFAULT_HASH_C};

use crate::commands::{self, Axis};
use crate::config::{
    parse_radix, AlgoSpec, Format, MatrixSource, RunConfig, DEFAULT_ESC_THRESHOLD, DEFAULT_SEED,
    SEED_ENV,
};
use crate::error::{BenchError, Result, EXIT_VERIFICATION_FAILED};
use crate::report::{self, Verdict};

/// Run sparse matrix products on the vector cost model and report counts.
#[derive(Debug, Parser)]
#[command(name = "spgemm-bench", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Multiply one matrix by itself with one algorithm.
    Run(RunArgs),
    /// Repeat a run over a list of parameter values.
    Sweep(SweepArgs),
    /// Tabulate metric ratios against SPA over a list of matrices.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Args)]
pub struct MatrixArgs {
    /// Matrix Market file.
    #[arg(long, value_name = "PATH", conflicts_with = "synthetic")]
    pub matrix: Option<PathBuf>,
    /// Uniform synthetic matrix; SEED defaults to $SPGEMM_SEED or 1.
    #[arg(long, value_name = "N,Z[,SEED]")]
    pub synthetic: Option<String>,
}

impl MatrixArgs {
    pub fn source(&self, default_seed: u64) -> Result<MatrixSource> {
        match (&self.matrix, &self.synthetic) {
            (Some(path), _) => Ok(MatrixSource::File { path: path.clone() }),
            (None, Some(spec)) => MatrixSource::parse_synthetic(spec, default_seed),
            (None, None) => Err(BenchError::usage("one of --matrix or --synthetic is required")),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    /// Smallest block; overrides the preset.
    #[arg(long)]
    pub bmin: Option<usize>,
    /// Largest block; overrides the preset.
    #[arg(long)]
    pub bmax: Option<usize>,
    /// Hybrid threshold: sorted columns with at least this many
    /// multiplications go through SPA. `inf` disables the SPA part.
    #[arg(short = 't', long, default_value = "40")]
    pub threshold: Threshold,
    #[arg(long, default_value_t = DEFAULT_MAX_VL)]
    pub max_vl: usize,
    /// Hash multiplier `c` in `h(i) = (i·c) mod H`.
    #[arg(long, default_value_t = DEFAULT_HASH_C)]
    pub hash_c: usize,
    /// ESC closes a column group once its multiplications reach this.
    #[arg(long, default_value_t = DEFAULT_ESC_THRESHOLD)]
    pub esc_threshold: usize,
    /// ESC radix-sort digit width: `auto` or a bit count.
    #[arg(long, default_value = "auto", value_parser = parse_radix)]
    pub radix: RadixPolicy,
    /// Check the product against an independent oracle.
    #[arg(long)]
    pub verify: bool,
}

impl KernelArgs {
    pub fn configure(&self, spec: AlgoSpec, source: MatrixSource) -> RunConfig {
        let mut cfg = RunConfig::new(spec.algo, source).with_spec(spec);
        if let Some(b) = self.bmin {
            cfg.b_min = b;
        }
        if let Some(b) = self.bmax {
            cfg.b_max = b;
        }
        cfg.threshold = self.threshold;
        cfg.max_vl = self.max_vl;
        cfg.hash_c = self.hash_c;
        cfg.esc_threshold = self.esc_threshold;
        cfg.radix = self.radix;
        cfg.verify = self.verify;
        cfg
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write here instead of stdout.
    #[arg(short = 'o', long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// spa, spars, hash, hspa, hhash, esc, optionally with block sizes as in
    /// `spars-40/40` or `h-hash-256/256`.
    #[arg(long)]
    pub algo: AlgoSpec,
    #[command(flatten)]
    pub matrix: MatrixArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Embed the column plan in the JSON report.
    #[arg(long)]
    pub dump_plan: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// One or more algorithm specs, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub algo: Vec<AlgoSpec>,
    #[command(flatten)]
    pub matrix: MatrixArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, value_enum)]
    pub axis: Axis,
    /// Comma-separated values; `A..B:STEP` expands to an inclusive range.
    #[arg(long)]
    pub values: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// File with one matrix per line: a path or `synthetic:N,Z[,SEED]`.
    #[arg(long, value_name = "PATH")]
    pub list: PathBuf,
    /// Algorithm specs, comma separated; defaults to the ten-way roster.
    #[arg(long, value_delimiter = ',')]
    pub algo: Vec<AlgoSpec>,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Counter the ratios are taken on.
    #[arg(long, default_value = "loop_iterations")]
    pub metric: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// `$SPGEMM_SEED` if set, else [`DEFAULT_SEED`].
pub fn seed_from_env() -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| BenchError::usage(format!("{SEED_ENV} must be an unsigned integer, got '{v}'"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| BenchError::Io {
            path: p.to_path_buf(),
            source,
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// Run a parsed command line; returns the process exit code for runs that
/// completed (0, or 3 when verification failed).
pub fn execute(cli: Cli, default_seed: u64) -> Result<u8> {
    match cli.command {
        Command::Run(args) => {
            let mut cfg = args.kernel.configure(args.algo, args.matrix.source(default_seed)?);
            cfg.dump_plan = args.dump_plan;
            cfg.output = args.output.output.clone();
            cfg.format = args.output.format.unwrap_or(Format::Json);
            let r = commands::cmd_run(&cfg)?;
            let out = open_output(cfg.output.as_deref())?;
            match cfg.format {
                Format::Json => report::write_json(out, &r)?,
                Format::Csv => report::write_run_csv(out, std::slice::from_ref(&r))?,
            }
            Ok(if r.verdict == Verdict::Fail { EXIT_VERIFICATION_FAILED } else { 0 })
        }
        Command::Sweep(args) => {
            let source = args.matrix.source(default_seed)?;
            let configs: Vec<RunConfig> = args
                .algo
                .iter()
                .map(|&spec| args.kernel.configure(spec, source.clone()))
                .collect();
            let values = commands::parse_values(&args.values)?;
            let points = commands::cmd_sweep(&configs, args.axis, &values)?;
            let out = open_output(args.output.output.as_deref())?;
            match args.output.format.unwrap_or(Format::Csv) {
                Format::Json => report::write_json(out, &points)?,
                Format::Csv => commands::write_sweep_csv(out, &points)?,
            }
            let failed = points.iter().any(|p| p.report.verdict == Verdict::Fail);
            Ok(if failed { EXIT_VERIFICATION_FAILED } else { 0 })
        }
        Command::Compare(args) => {
            let sources = commands::read_list(&args.list, default_seed)?;
            let specs = if args.algo.is_empty() { AlgoSpec::roster() } else { args.algo.clone() };
            let placeholder = MatrixSource::Synthetic { n: 1, z: 1, seed: default_seed };
            let configs: Vec<RunConfig> = specs
                .iter()
                .map(|&spec| args.kernel.configure(spec, placeholder.clone()))
                .collect();
            let table = commands::cmd_compare(&sources, &configs, &args.metric)?;
            let out = open_output(args.output.output.as_deref())?;
            match args.output.format.unwrap_or(Format::Csv) {
                Format::Json => report::write_json(out, &table)?,
                Format::Csv => commands::write_compare_csv(out, &table)?,
            }
            Ok(if table.verification_failures() > 0 {
                EXIT_VERIFICATION_FAILED
            } else if table.matrix_errors() > 0 {
                2
            } else {
                0
            })
        }
    }
}
