use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use spgemm_core::machine::DEFAULT_MAX_VL;
use spgemm_core::{EscParams, PlanConfig, RadixPolicy, Threshold, DEFAULT_HASH_C};

use crate::error::{BenchError, Result};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_THRESHOLD: usize = 40;
pub const DEFAULT_ESC_THRESHOLD: usize = 10_000;
/// Environment variable that replaces [`DEFAULT_SEED`].
pub const SEED_ENV: &str = "SPGEMM_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Spa,
    Spars,
    Hash,
    Hspa,
    Hhash,
    Esc,
}

impl Algo {
    pub const ALL: [Algo; 6] = [Algo::Spa, Algo::Spars, Algo::Hash, Algo::Hspa, Algo::Hhash, Algo::Esc];

    pub fn is_blocked(self) -> bool {
        !matches!(self, Algo::Spa | Algo::Esc)
    }

    pub fn is_hybrid(self) -> bool {
        matches!(self, Algo::Hspa | Algo::Hhash)
    }

    pub fn uses_hash(self) -> bool {
        matches!(self, Algo::Hash | Algo::Hhash)
    }

    /// `(b_min, b_max)` when neither a preset nor a flag gives one.
    pub fn default_blocks(self) -> (usize, usize) {
        if self.uses_hash() {
            (256, 256)
        } else {
            (40, 40)
        }
    }

    fn display_name(self) -> &'static str {
        match self {
            Algo::Spa => "SPA",
            Algo::Spars => "Spars",
            Algo::Hash => "Hash",
            Algo::Hspa => "H-Spa",
            Algo::Hhash => "H-Hash",
            Algo::Esc => "ESC",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

impl FromStr for Algo {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "spa" => Ok(Algo::Spa),
            "spars" => Ok(Algo::Spars),
            "hash" => Ok(Algo::Hash),
            "hspa" | "h-spa" => Ok(Algo::Hspa),
            "hhash" | "h-hash" => Ok(Algo::Hhash),
            "esc" => Ok(Algo::Esc),
            _ => Err(BenchError::usage(format!("unknown algorithm '{s}'"))),
        }
    }
}

/// An algorithm with optional block sizes, written `spars-40/40`,
/// `h-hash-32/256`, `spa`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlgoSpec {
    pub algo: Algo,
    pub blocks: Option<(usize, usize)>,
}

impl AlgoSpec {
    /// The ten configurations of the standard comparison table.
    pub fn roster() -> Vec<AlgoSpec> {
        [
            "spa",
            "spars-16/64",
            "spars-40/40",
            "h-spa-16/64",
            "h-spa-40/40",
            "hash-32/256",
            "hash-256/256",
            "h-hash-32/256",
            "h-hash-256/256",
            "esc",
        ]
        .iter()
        .map(|s| s.parse().expect("roster entries parse"))
        .collect()
    }
}

impl FromStr for AlgoSpec {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || BenchError::usage(format!("invalid algorithm spec '{s}'"));
        let t = s.trim();
        if let Some((name, sizes)) = t.rsplit_once('-').filter(|(_, r)| r.contains('/')) {
            let (lo, hi) = sizes.split_once('/').ok_or_else(bad)?;
            let lo = lo.trim().parse().map_err(|_| bad())?;
            let hi = hi.trim().parse().map_err(|_| bad())?;
            let algo: Algo = name.parse()?;
            if !algo.is_blocked() {
                return Err(BenchError::usage(format!("{algo} takes no block sizes")));
            }
            Ok(AlgoSpec {
                algo,
                blocks: Some((lo, hi)),
            })
        } else {
            Ok(AlgoSpec {
                algo: t.parse()?,
                blocks: None,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MatrixSource {
    File { path: PathBuf },
    Synthetic { n: usize, z: usize, seed: u64 },
}

impl MatrixSource {
    /// `N,Z` or `N,Z,SEED`.
    pub fn parse_synthetic(s: &str, default_seed: u64) -> Result<Self> {
        let bad = || BenchError::usage(format!("synthetic matrix must be N,Z[,SEED], got '{s}'"));
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let num = |p: &str| p.parse::<u64>().map_err(|_| bad());
        let (n, z, seed) = match parts.as_slice() {
            [n, z] => (num(n)?, num(z)?, default_seed),
            [n, z, seed] => (num(n)?, num(z)?, num(seed)?),
            _ => return Err(bad()),
        };
        if z == 0 || z > n {
            return Err(BenchError::usage(format!(
                "synthetic matrix needs 0 < Z <= N, got N={n}, Z={z}"
            )));
        }
        Ok(MatrixSource::Synthetic {
            n: n as usize,
            z: z as usize,
            seed,
        })
    }

    /// A line of a compare list: `synthetic:N,Z[,SEED]` or a path, relative
    /// paths taken from `base`.
    pub fn parse_list_entry(line: &str, base: &Path, default_seed: u64) -> Result<Self> {
        let line = line.trim();
        match line.strip_prefix("synthetic:") {
            Some(spec) => Self::parse_synthetic(spec, default_seed),
            None => Ok(MatrixSource::File {
                path: base.join(line),
            }),
        }
    }

    pub fn name(&self) -> String {
        match self {
            MatrixSource::File { path } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
            MatrixSource::Synthetic { n, z, seed } => format!("synthetic-{n}-{z}-{seed}"),
        }
    }
}

/// `auto` or a bit count.
pub fn parse_radix(s: &str) -> Result<RadixPolicy> {
    if s.trim().eq_ignore_ascii_case("auto") {
        return Ok(RadixPolicy::Auto);
    }
    s.trim()
        .parse()
        .map(RadixPolicy::Fixed)
        .map_err(|_| BenchError::usage(format!("radix must be 'auto' or a bit count, got '{s}'")))
}

/// Everything one kernel run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub algo: Algo,
    pub source: MatrixSource,
    /// Only the hybrids read this; the others run with an infinite threshold.
    pub threshold: Threshold,
    pub b_min: usize,
    pub b_max: usize,
    pub max_vl: usize,
    pub hash_c: usize,
    pub esc_threshold: usize,
    pub radix: RadixPolicy,
    pub verify: bool,
    pub dump_plan: bool,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn new(algo: Algo, source: MatrixSource) -> Self {
        let (b_min, b_max) = algo.default_blocks();
        RunConfig {
            algo,
            source,
            threshold: Threshold::Finite(DEFAULT_THRESHOLD),
            b_min,
            b_max,
            max_vl: DEFAULT_MAX_VL,
            hash_c: DEFAULT_HASH_C,
            esc_threshold: DEFAULT_ESC_THRESHOLD,
            radix: RadixPolicy::Auto,
            verify: false,
            dump_plan: false,
            output: None,
            format: Format::Json,
        }
    }

    /// Switch to `spec`'s algorithm and, if it names them, its block sizes.
    /// Otherwise the block sizes fall back to the algorithm's defaults.
    pub fn with_spec(mut self, spec: AlgoSpec) -> Self {
        self.algo = spec.algo;
        (self.b_min, self.b_max) = spec.blocks.unwrap_or_else(|| spec.algo.default_blocks());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_vl == 0 {
            return Err(BenchError::usage("--max-vl must be at least 1"));
        }
        if self.algo.is_blocked() && !(1 <= self.b_min && self.b_min <= self.b_max && self.b_max <= self.max_vl) {
            return Err(BenchError::usage(format!(
                "block sizes need 1 <= b_min <= b_max <= max_vl, got {}/{} with max_vl {}",
                self.b_min, self.b_max, self.max_vl
            )));
        }
        if let RadixPolicy::Fixed(r) = self.radix {
            if !(1..=16).contains(&r) {
                return Err(BenchError::usage(format!("radix width {r} outside 1..=16")));
            }
        }
        if let MatrixSource::Synthetic { n, z, .. } = self.source {
            if z == 0 || z > n {
                return Err(BenchError::usage(format!(
                    "synthetic matrix needs 0 < Z <= N, got N={n}, Z={z}"
                )));
            }
        }
        Ok(())
    }

    /// Short name such as `H-Hash-256/256`.
    pub fn label(&self) -> String {
        if self.algo.is_blocked() {
            format!("{}-{}/{}", self.algo.display_name(), self.b_min, self.b_max)
        } else {
            self.algo.display_name().to_string()
        }
    }

    pub fn effective_threshold(&self) -> Threshold {
        if self.algo.is_hybrid() {
            self.threshold
        } else {
            Threshold::Infinite
        }
    }

    pub fn plan_config(&self) -> PlanConfig {
        PlanConfig {
            b_min: self.b_min,
            b_max: self.b_max,
            max_vl: self.max_vl,
            threshold: self.effective_threshold(),
            hash_sizes: self.algo.uses_hash(),
        }
    }

    pub fn esc_params(&self) -> EscParams {
        EscParams {
            group_threshold: self.esc_threshold,
            radix: self.radix,
        }
    }
}
