//! Plain-text configuration: `key = value` lines under `[section]`
//! headers, `#` comments. Unknown keys are rejected so typos surface as
//! usage errors.

use anyhow::{anyhow, bail, Context, Result};
use p2plab_core::cachesim::CacheConfig;
use p2plab_core::domain::GeneratorKind;
use p2plab_core::model::DbimComputeForm;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Dbim,
    Photons,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Dbim => write!(f, "dbim"),
            Mode::Photons => write!(f, "photons"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub seed: Option<u64>,
    pub out: PathBuf,
    /// Timed passes per sweep point; medians are reported. The adaptive
    /// mode jitters particles between passes, the uniform mode
    /// re-randomizes charges.
    pub iterations: usize,
    pub trace: bool,
    pub seed_count: usize,

    pub n: usize,
    pub n_sweep: Vec<usize>,
    pub t_sweep: Vec<usize>,
    pub generator: GeneratorKind,
    pub rf: usize,
    pub batch_size: usize,
    pub byte_cap: u64,
    pub partitions: usize,
    pub periodic: bool,
    pub max_depth: u32,
    pub softening: f64,
    pub jitter: f64,

    pub cache_capacity: u64,
    pub cache_line: u32,
    pub cache_ways: u32,
    pub cache_group: u32,

    pub share_p2p: f64,
    pub calibration: f64,
    pub compute_form: DbimComputeForm,
    pub share_local: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: Mode::Photons,
            seed: None,
            out: PathBuf::from("out"),
            iterations: 20,
            trace: true,
            seed_count: 1,
            n: 4000,
            n_sweep: Vec::new(),
            t_sweep: vec![2, 4, 8, 16, 32, 64],
            generator: GeneratorKind::Uniform,
            rf: 2,
            batch_size: 20_000,
            byte_cap: p2plab_core::layouts::DEFAULT_BYTE_CAP,
            partitions: 4,
            periodic: true,
            max_depth: 64,
            softening: 1e-3,
            jitter: 0.01,
            cache_capacity: 2 * 1024 * 1024,
            cache_line: 128,
            cache_ways: 16,
            cache_group: 32,
            share_p2p: 0.47,
            calibration: 1.0,
            compute_form: DbimComputeForm::PrintedRow,
            share_local: None,
        }
    }
}

impl ExperimentConfig {
    pub fn cache_config(&self) -> Result<CacheConfig> {
        CacheConfig::new(
            self.cache_capacity,
            self.cache_line,
            self.cache_ways,
            self.cache_group,
        )
        .map_err(|e| anyhow!(e))
    }

    /// Sweep points: every (n, t) combination. An explicitly empty
    /// t_sweep means a zero-length sweep (header-only outputs).
    pub fn sweep(&self) -> Result<Vec<(usize, usize)>> {
        let ns: &[usize] = if self.n_sweep.is_empty() {
            std::slice::from_ref(&self.n)
        } else {
            &self.n_sweep
        };
        Ok(ns
            .iter()
            .flat_map(|&n| self.t_sweep.iter().map(move |&t| (n, t)))
            .collect())
    }

    /// The mandatory seed, after merging config, flag and environment.
    pub fn require_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| anyhow!("a seed is mandatory: set it in [experiment], via --seed, or P2PLAB_SEED"))
    }
}

fn parse_list<T: std::str::FromStr>(value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| anyhow!("bad list entry {s:?}: {e}")))
        .collect()
}

fn parse_bool(value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => bail!("expected a boolean, got {other:?}"),
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut section = String::new();
    let mut t_sweep_set = false;
    let mut n_set = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |e: anyhow::Error| e.context(format!("config line {}", lineno + 1));
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| anyhow!("config line {}: unterminated section header", lineno + 1))?;
            section = name.trim().to_string();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {}: expected key = value", lineno + 1))?;
        let (key, value) = (key.trim(), value.trim());
        let r: Result<()> = (|| {
            match (section.as_str(), key) {
                ("experiment", "mode") => {
                    cfg.mode = match value {
                        "dbim" => Mode::Dbim,
                        "photons" => Mode::Photons,
                        other => bail!("unknown mode {other:?} (dbim|photons)"),
                    }
                }
                ("experiment", "seed") => cfg.seed = Some(value.parse()?),
                ("experiment", "out") => cfg.out = PathBuf::from(value),
                ("experiment", "iterations") => cfg.iterations = value.parse()?,
                ("experiment", "trace") => cfg.trace = parse_bool(value)?,
                ("experiment", "seed_count") => cfg.seed_count = value.parse()?,
                ("scenario", "n") => {
                    cfg.n = value.parse()?;
                    n_set = true;
                }
                ("scenario", "n_sweep") => cfg.n_sweep = parse_list(value)?,
                ("scenario", "t_sweep") => {
                    cfg.t_sweep = parse_list(value)?;
                    t_sweep_set = true;
                }
                ("scenario", "generator") => {
                    cfg.generator = value.parse().map_err(|e: String| anyhow!(e))?
                }
                ("scenario", "rf") => cfg.rf = value.parse()?,
                ("scenario", "batch_size") => cfg.batch_size = value.parse()?,
                ("scenario", "byte_cap") => cfg.byte_cap = value.parse()?,
                ("scenario", "partitions") => cfg.partitions = value.parse()?,
                ("scenario", "periodic") => cfg.periodic = parse_bool(value)?,
                ("scenario", "max_depth") => cfg.max_depth = value.parse()?,
                ("scenario", "softening") => cfg.softening = value.parse()?,
                ("scenario", "jitter") => cfg.jitter = value.parse()?,
                ("cache", "capacity") => cfg.cache_capacity = value.parse()?,
                ("cache", "line") => cfg.cache_line = value.parse()?,
                ("cache", "ways") => cfg.cache_ways = value.parse()?,
                ("cache", "group") => cfg.cache_group = value.parse()?,
                ("model", "share_p2p") => cfg.share_p2p = value.parse()?,
                ("model", "calibration") => cfg.calibration = value.parse()?,
                ("model", "compute_form") => {
                    cfg.compute_form = match value {
                        "printed" => DbimComputeForm::PrintedRow,
                        "base-column" => DbimComputeForm::BaseColumn,
                        other => bail!("unknown compute_form {other:?} (printed|base-column)"),
                    }
                }
                ("model", "share_local") => cfg.share_local = Some(value.parse()?),
                (s, k) => bail!("unknown key {k:?} in section [{s}]"),
            }
            Ok(())
        })();
        r.map_err(at)?;
    }
    if cfg.iterations == 0 {
        bail!("iterations must be >= 1");
    }
    if cfg.seed_count == 0 {
        bail!("seed_count must be >= 1");
    }
    // the uniform-grid mode has its own customary sweep
    if cfg.mode == Mode::Dbim {
        if !t_sweep_set {
            cfg.t_sweep = vec![16, 64, 256];
        }
        if !n_set {
            cfg.n = 65536;
        }
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    parse_config(&text)
}

/// Seed for sweep scenario `index` under base seed `seed`.
pub fn scenario_seed(seed: u64, index: u64) -> u64 {
    seed ^ (index.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}
