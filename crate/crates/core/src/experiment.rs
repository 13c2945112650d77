//! Batch distortion experiments.
//!
//! Each run samples one valuation profile and re-partitions it for every
//! district count, so columns for different `k` are paired. Run `r` draws
//! from ChaCha stream `r` of the configured seed, which makes the table
//! independent of how runs are scheduled across threads.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::{distortion_empirical, distortion_exact, DistortionReport};
use crate::datagen::{partition_uniform, sample_valuations, DistributionSpec};
use crate::error::{Error, Result};
use crate::instance::{normalize_unit_sum, Districts, Instance};
use crate::io::read_instance;
use crate::mechanism::MechanismSpec;
use crate::ratings::{load_ratings, sample_ratings_valuations, RatingsConfig, RatingsMatrix};

/// Mechanisms evaluated when `rules = default`: plurality over the
/// deterministic rules, uniform over the point-voting ones.
pub const DEFAULT_RULES: &[&str] = &[
    "plurality-of-range",
    "plurality-of-plurality",
    "plurality-of-veto",
    "plurality-of-borda",
    "plurality-of-harmonic",
    "uniform-of-prop-plurality",
    "uniform-of-prop-veto",
    "uniform-of-prop-borda",
    "uniform-of-prop-harmonic",
    "uniform-of-bchlps",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Synthetic(DistributionSpec),
    Ratings { path: PathBuf, config: RatingsConfig },
    /// Fixed instance file; only the partition varies between runs.
    File(PathBuf),
}

impl Source {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Synthetic(d) => d.label(),
            Self::Ratings { .. } => "ratings",
            Self::File(_) => "file",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    MonteCarlo,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::MonteCarlo => "montecarlo",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: Source,
    pub n: usize,
    pub m: usize,
    /// Empty means: keep the partition stored in the instance file.
    pub k_values: Vec<usize>,
    pub runs: usize,
    pub samples_per_randomized: usize,
    pub mode: Mode,
    pub rules: Vec<MechanismSpec>,
    pub seed: u64,
    pub out_path: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            source: Source::Synthetic(DistributionSpec::UNIFORM),
            n: 100,
            m: 8,
            k_values: vec![1, 2, 5, 20, 25],
            runs: 500,
            samples_per_randomized: 150,
            mode: Mode::Exact,
            rules: default_rules(),
            seed: 0,
            out_path: None,
        }
    }
}

pub fn default_rules() -> Vec<MechanismSpec> {
    DEFAULT_RULES
        .iter()
        .map(|r| r.parse().expect("built-in identifiers parse"))
        .collect()
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::Config(format!("bad value `{s}` for `{key}`"))))
        .collect()
}

fn parse_one<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value `{value}` for `{key}`")))
}

impl ExperimentConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "dist" | "distribution" => self.source = Source::Synthetic(value.parse()?),
            "data" => {
                let config = match &self.source {
                    Source::Ratings { config, .. } => *config,
                    _ => RatingsConfig::default(),
                };
                self.source = Source::Ratings {
                    path: value.into(),
                    config,
                };
            }
            "instance" => self.source = Source::File(value.into()),
            "missing_marker" | "count_column" => {
                let Source::Ratings { config, .. } = &mut self.source else {
                    return Err(Error::Config(format!("`{key}` needs a ratings source (`data`)")));
                };
                if key.trim() == "missing_marker" {
                    config.missing_marker = parse_one(key, value)?;
                } else {
                    config.has_count_column = parse_one(key, value)?;
                }
            }
            "n" => self.n = parse_one(key, value)?,
            "m" => self.m = parse_one(key, value)?,
            "k" => self.k_values = parse_list(key, value)?,
            "runs" => self.runs = parse_one(key, value)?,
            "samples" => self.samples_per_randomized = parse_one(key, value)?,
            "mode" => {
                self.mode = match value {
                    "exact" => Mode::Exact,
                    "montecarlo" | "monte-carlo" => Mode::MonteCarlo,
                    _ => return Err(Error::Config(format!("mode must be exact or montecarlo, got `{value}`"))),
                }
            }
            "rules" => {
                self.rules = if value == "default" {
                    default_rules()
                } else {
                    value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(str::parse)
                        .collect::<Result<_>>()?
                }
            }
            "seed" => self.seed = parse_one(key, value)?,
            "out" => self.out_path = Some(value.into()),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Reads `key = value` lines on top of the defaults; `#` starts a
    /// comment.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut config = Self::default();
        config.apply_kv(text)?;
        Ok(config)
    }

    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            self.set(key, value).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_kv(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.samples_per_randomized == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        if self.rules.is_empty() {
            return Err(Error::Config("no rules given".into()));
        }
        if !matches!(self.source, Source::File(_)) {
            if self.n == 0 || self.m < 2 {
                return Err(Error::Config(format!("need n >= 1 and m >= 2, got n = {}, m = {}", self.n, self.m)));
            }
            if self.k_values.is_empty() {
                return Err(Error::Config("no district counts given".into()));
            }
        }
        if let Some(&k) = self.k_values.iter().find(|&&k| k == 0 || !self.n.is_multiple_of(k)) {
            if !matches!(self.source, Source::File(_)) {
                return Err(Error::Config(format!("k = {k} does not divide n = {}", self.n)));
            }
        }
        Ok(())
    }
}

/// One aggregated table row.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub rule: String,
    pub k: usize,
    pub source: String,
    pub mean_distortion: f64,
    pub std_distortion: f64,
    pub runs: usize,
    pub mode: Mode,
    pub seed: u64,
}

/// Per-run log line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunLog {
    pub run: usize,
    pub partition_seed: u64,
    /// Valuation rows that were all zero and normalized to uniform.
    pub zero_rows: usize,
}

impl std::fmt::Display for RunLog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "run={} partition_seed={} zero_rows={}",
            self.run, self.partition_seed, self.zero_rows
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    pub log: Vec<RunLog>,
}

impl ResultTable {
    pub fn row(&self, rule: &str, k: usize) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.rule == rule && r.k == k)
    }
}

enum Prepared {
    Synthetic(DistributionSpec),
    Ratings(RatingsMatrix),
    File(Instance),
}

struct RunOutcome {
    log: RunLog,
    /// `[k index][rule index]`
    results: Vec<Vec<(f64, Mode)>>,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    let prepared = match &config.source {
        Source::Synthetic(d) => Prepared::Synthetic(*d),
        Source::Ratings { path, config: rc } => Prepared::Ratings(load_ratings(path, rc)?),
        Source::File(path) => Prepared::File(read_instance(path)?),
    };
    let (n, k_values) = match &prepared {
        Prepared::File(inst) => {
            if let Some(&k) = config.k_values.iter().find(|&&k| k == 0 || inst.n() % k != 0) {
                return Err(Error::Config(format!("k = {k} does not divide n = {}", inst.n())));
            }
            (inst.n(), config.k_values.clone())
        }
        _ => (config.n, config.k_values.clone()),
    };

    let outcomes = (0..config.runs)
        .into_par_iter()
        .map(|run| run_once(config, &prepared, n, &k_values, run))
        .collect::<Result<Vec<_>>>()?;

    let ks: Vec<usize> = match &prepared {
        Prepared::File(inst) if k_values.is_empty() => vec![inst.k()],
        _ => k_values,
    };
    let mut rows = Vec::new();
    for (ki, &k) in ks.iter().enumerate() {
        for (ri, rule) in config.rules.iter().enumerate() {
            let ratios: Vec<f64> = outcomes.iter().map(|o| o.results[ki][ri].0).collect();
            let mode = if outcomes.iter().any(|o| o.results[ki][ri].1 == Mode::MonteCarlo) {
                Mode::MonteCarlo
            } else {
                Mode::Exact
            };
            let (mean, std) = mean_std(&ratios);
            rows.push(ResultRow {
                rule: rule.to_string(),
                k,
                source: config.source.label().to_string(),
                mean_distortion: mean,
                std_distortion: std,
                runs: config.runs,
                mode,
                seed: config.seed,
            });
        }
    }
    rows.sort_by(|a, b| a.rule.cmp(&b.rule).then(a.k.cmp(&b.k)));
    Ok(ResultTable {
        rows,
        log: outcomes.into_iter().map(|o| o.log).collect(),
    })
}

fn run_once(config: &ExperimentConfig, prepared: &Prepared, n: usize, k_values: &[usize], run: usize) -> Result<RunOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(run as u64);
    let (valuations, zero_rows) = match prepared {
        Prepared::Synthetic(dist) => {
            let raw = sample_valuations(n, config.m, dist, &mut rng)?;
            let zeros = raw.iter().filter(|r| r.iter().all(|&v| v == 0.0)).count();
            (normalize_unit_sum(&raw)?, zeros)
        }
        Prepared::Ratings(matrix) => {
            let sample = sample_ratings_valuations(matrix, n, config.m, &mut rng)?;
            (sample.valuations, sample.zero_rows)
        }
        Prepared::File(inst) => (inst.valuations().to_vec(), 0),
    };
    let partition_seed = rng.next_u64();

    let mut results = Vec::new();
    let partitions: Vec<Option<usize>> = if k_values.is_empty() {
        vec![None]
    } else {
        k_values.iter().copied().map(Some).collect()
    };
    for (ki, k) in partitions.into_iter().enumerate() {
        let mut krng = ChaCha8Rng::seed_from_u64(partition_seed);
        krng.set_stream(ki as u64);
        let districts = match (k, prepared) {
            (Some(k), _) => partition_uniform(n, k, &mut krng)?,
            (None, Prepared::File(inst)) => inst.districts().clone(),
            (None, _) => Districts::single(n),
        };
        let instance = Instance::new(valuations.clone(), districts)?;
        let per_rule = config
            .rules
            .iter()
            .map(|spec| evaluate(&instance, spec, config, &mut krng))
            .collect::<Result<Vec<_>>>()?;
        results.push(per_rule);
    }
    Ok(RunOutcome {
        log: RunLog {
            run,
            partition_seed,
            zero_rows,
        },
        results,
    })
}

fn evaluate(instance: &Instance, spec: &MechanismSpec, config: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<(f64, Mode)> {
    let empirical = |rng: &mut ChaCha8Rng| -> Result<DistortionReport> {
        distortion_empirical(instance, spec, config.samples_per_randomized, rng)
    };
    match config.mode {
        Mode::MonteCarlo => Ok((empirical(rng)?.ratio, Mode::MonteCarlo)),
        Mode::Exact => match distortion_exact(instance, spec) {
            Ok(report) => Ok((report.ratio, Mode::Exact)),
            Err(Error::UnsupportedCombination(_)) => Ok((empirical(rng)?.ratio, Mode::MonteCarlo)),
            Err(e) => Err(e),
        },
    }
}

/// Mean and sample standard deviation; infinite if any value is.
fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.iter().any(|v| v.is_infinite()) {
        return (f64::INFINITY, f64::INFINITY);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub const CSV_HEADER: &str = "rule,k,source,mean_distortion,std_distortion,runs,mode,seed";

fn fmt_value(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x:.6}")
    }
}

/// CSV text, rows sorted by `(rule, k)`.
pub fn to_csv(table: &ResultTable) -> String {
    let mut rows: Vec<&ResultRow> = table.rows.iter().collect();
    rows.sort_by(|a, b| a.rule.cmp(&b.rule).then(a.k.cmp(&b.k)));
    let mut out = String::new();
    writeln!(out, "{CSV_HEADER}").unwrap();
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.rule,
            r.k,
            r.source,
            fmt_value(r.mean_distortion),
            fmt_value(r.std_distortion),
            r.runs,
            r.mode.as_str(),
            r.seed
        )
        .unwrap();
    }
    out
}

pub fn emit_csv(table: &ResultTable, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_csv(table))?;
    Ok(())
}
