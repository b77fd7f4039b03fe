//! Parameter sweeps over simulated corpora and over the number of fitted topics.
//!
//! Results are tidy: one row per (value, seed, metric). Cells are independent
//! and may run in any order; rows are sorted by (value, seed) before return.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::DocumentTermMatrix;
use crate::error::{Error, Result};
use crate::goodness::{log_likelihood_full, mcfadden_r2, r_squared};
use crate::lda::{fit_lda, GibbsConfig};
use crate::model::TopicModel;
use crate::simgen::{simulate_corpus, SimulationConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Varied {
    Topics,
    Documents,
    Vocabulary,
    DocLength,
}

impl Varied {
    pub fn as_str(self) -> &'static str {
        match self {
            Varied::Topics => "topics",
            Varied::Documents => "documents",
            Varied::Vocabulary => "vocabulary",
            Varied::DocLength => "doc_length",
        }
    }

    /// `base` with this parameter set to `value`.
    pub fn apply(self, base: &SimulationConfig, value: f64) -> Result<SimulationConfig> {
        let mut cfg = base.clone();
        let as_count = |x: f64| {
            if x >= 1.0 && x.fract() == 0.0 {
                Ok(x as usize)
            } else {
                Err(Error::InvalidConfig(format!("{} must be a positive integer, got {x}", self.as_str())))
            }
        };
        match self {
            Varied::Topics => cfg.k = as_count(value)?,
            Varied::Documents => cfg.d = as_count(value)?,
            Varied::Vocabulary => cfg.v = as_count(value)?,
            Varied::DocLength => cfg.lambda = value,
        }
        Ok(cfg)
    }
}

impl fmt::Display for Varied {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    RSquared,
    Mcfadden,
    LogLikelihood,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::RSquared => "r_squared",
            Metric::Mcfadden => "mcfadden",
            Metric::LogLikelihood => "log_likelihood",
        }
    }
}

fn default_metrics() -> Vec<Metric> {
    vec![Metric::RSquared, Metric::Mcfadden, Metric::LogLikelihood]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub varied: Varied,
    pub values: Vec<f64>,
    #[serde(default)]
    pub base: SimulationConfig,
    pub seeds: Vec<u64>,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() || self.seeds.is_empty() || self.metrics.is_empty() {
            return Err(Error::InvalidConfig("sweep needs values, seeds and metrics".into()));
        }
        if self.values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidConfig("sweep values must be strictly increasing".into()));
        }
        if self.values.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::InvalidConfig("sweep values must be positive".into()));
        }
        for &value in &self.values {
            self.varied.apply(&self.base, value)?.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub varied: String,
    pub value: f64,
    pub seed: u64,
    pub metric: Metric,
    pub metric_value: f64,
    pub elapsed_ms: f64,
}

/// Configuration that reproduces one sweep cell on its own.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum CellConfig {
    Simulation(SimulationConfig),
    Fit(GibbsConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub value: f64,
    pub seed: u64,
    pub config: CellConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub provenance: Vec<Provenance>,
}

impl SweepResult {
    /// Values of `metric` for `seed`, in sweep order.
    pub fn series(&self, metric: Metric, seed: u64) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.metric == metric && r.seed == seed)
            .map(|r| r.metric_value)
            .collect()
    }

    pub fn values_of(&self, metric: Metric) -> Vec<f64> {
        self.rows.iter().filter(|r| r.metric == metric).map(|r| r.metric_value).collect()
    }

    /// Tidy CSV: `varied,value,seed,metric,value,elapsed_ms`.
    pub fn write_csv<W: Write>(&self, mut out: W, include_timing: bool) -> std::io::Result<()> {
        writeln!(out, "varied,value,seed,metric,value,elapsed_ms")?;
        for r in &self.rows {
            let elapsed = if include_timing { r.elapsed_ms } else { 0.0 };
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.varied,
                r.value,
                r.seed,
                r.metric.as_str(),
                r.metric_value,
                elapsed
            )?;
        }
        Ok(())
    }

    pub fn write_provenance<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, &self.provenance)?;
        Ok(())
    }

    /// Writes the CSV to `path` and the provenance to `path` with a `.provenance.json` suffix.
    pub fn save(&self, path: impl AsRef<Path>, include_timing: bool) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write_csv(&mut out, include_timing).map_err(|e| Error::io(path, e))?;
        out.flush().map_err(|e| Error::io(path, e))?;

        let side = provenance_path(path);
        let file = fs::File::create(&side).map_err(|e| Error::io(&side, e))?;
        let mut out = BufWriter::new(file);
        self.write_provenance(&mut out)?;
        out.flush().map_err(|e| Error::io(&side, e))
    }
}

pub fn provenance_path(path: &Path) -> std::path::PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".provenance.json");
    path.with_file_name(name)
}

fn evaluate(dtm: &DocumentTermMatrix, model: &TopicModel, metric: Metric) -> Result<f64> {
    Ok(match metric {
        Metric::RSquared => r_squared(dtm, model)?.r_squared,
        Metric::Mcfadden => mcfadden_r2(dtm, model)?.mcfadden_r2,
        Metric::LogLikelihood => log_likelihood_full(dtm, model)?,
    })
}

fn cell_error(label: String, source: Error) -> Error {
    Error::SweepCell {
        cell: label,
        source: Box::new(source),
    }
}

struct Cell {
    rows: Vec<SweepRow>,
    provenance: Provenance,
}

fn assemble(mut cells: Vec<Cell>) -> SweepResult {
    cells.sort_by(|a, b| {
        a.provenance
            .value
            .total_cmp(&b.provenance.value)
            .then(a.provenance.seed.cmp(&b.provenance.seed))
    });
    let mut rows = Vec::new();
    let mut provenance = Vec::new();
    for c in cells {
        rows.extend(c.rows);
        provenance.push(c.provenance);
    }
    SweepResult { rows, provenance }
}

/// Simulates one corpus per (value, seed) and scores the generating
/// parameters against it. No estimation is involved.
pub fn run_property_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let jobs: Vec<(f64, u64)> = spec
        .values
        .iter()
        .flat_map(|&v| spec.seeds.iter().map(move |&s| (v, s)))
        .collect();
    let cells = jobs
        .into_par_iter()
        .map(|(value, seed)| {
            let label = format!("{}={value} seed={seed}", spec.varied);
            let start = Instant::now();
            let mut cfg = spec.varied.apply(&spec.base, value).map_err(|e| cell_error(label.clone(), e))?;
            cfg.seed = seed;
            let sim = simulate_corpus(&cfg).map_err(|e| cell_error(label.clone(), e))?;
            let mut rows = Vec::with_capacity(spec.metrics.len());
            for &metric in &spec.metrics {
                let metric_value = evaluate(&sim.dtm, &sim.model, metric).map_err(|e| cell_error(label.clone(), e))?;
                rows.push(SweepRow {
                    varied: spec.varied.to_string(),
                    value,
                    seed,
                    metric,
                    metric_value,
                    elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
                });
            }
            Ok(Cell {
                rows,
                provenance: Provenance {
                    value,
                    seed,
                    config: CellConfig::Simulation(cfg),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(cells))
}

/// Fits LDA once per `k` with the template's seed and scores each fit on
/// the training corpus by R² and the full log-likelihood.
pub fn run_k_sweep(dtm: &DocumentTermMatrix, k_values: &[usize], gibbs: &GibbsConfig) -> Result<SweepResult> {
    if k_values.is_empty() {
        return Err(Error::InvalidConfig("k_values must not be empty".into()));
    }
    if k_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("k_values must be strictly increasing".into()));
    }
    let cells = k_values
        .par_iter()
        .map(|&k| {
            let label = format!("k={k} seed={}", gibbs.seed);
            let start = Instant::now();
            let cfg = GibbsConfig { k, ..gibbs.clone() };
            let model = fit_lda(dtm, &cfg).map_err(|e| cell_error(label.clone(), e))?;
            let mut rows = Vec::with_capacity(2);
            for metric in [Metric::RSquared, Metric::LogLikelihood] {
                let metric_value = evaluate(dtm, &model, metric).map_err(|e| cell_error(label.clone(), e))?;
                rows.push(SweepRow {
                    varied: "k".into(),
                    value: k as f64,
                    seed: gibbs.seed,
                    metric,
                    metric_value,
                    elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
                });
            }
            Ok(Cell {
                rows,
                provenance: Provenance {
                    value: k as f64,
                    seed: gibbs.seed,
                    config: CellConfig::Fit(cfg),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(cells))
}

/// Where a K sweep gets its corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusSource {
    /// Triplet file, resolved relative to the sweep file.
    Dtm(String),
    Simulate(SimulationConfig),
}

/// A sweep file: either a property sweep or a K sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SweepPlan {
    Property(SweepSpec),
    KSweep {
        corpus: CorpusSource,
        k_values: Vec<usize>,
        gibbs: GibbsConfig,
    },
}

impl SweepPlan {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Runs the plan. Relative DTM paths are resolved against `base_dir`.
    pub fn run(&self, base_dir: &Path) -> Result<SweepResult> {
        match self {
            SweepPlan::Property(spec) => run_property_sweep(spec),
            SweepPlan::KSweep { corpus, k_values, gibbs } => {
                let dtm = match corpus {
                    CorpusSource::Dtm(path) => crate::corpus::load_dtm(base_dir.join(path))?,
                    CorpusSource::Simulate(cfg) => simulate_corpus(cfg)?.dtm,
                };
                run_k_sweep(&dtm, k_values, gibbs)
            }
        }
    }
}
