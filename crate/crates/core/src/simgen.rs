//! Synthetic corpora drawn from the LDA generative process.
//!
//! Topics are drawn as φ_k ~ Dirichlet(β), document mixtures as
//! θ_d ~ Dirichlet(α), lengths from a zero-truncated Poisson(λ), then each
//! token picks a topic from θ_d and a word from that topic. The exact Θ and
//! Φ used are returned with the counts.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::DocumentTermMatrix;
use crate::error::{Error, Result};
use crate::model::{Matrix, TopicModel};
use crate::rng::{substream, Domain};

/// A Dirichlet parameter vector, possibly given in closed form so it can be
/// re-resolved when the dimension changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Prior {
    Symmetric(f64),
    Vector(Vec<f64>),
    PowerLaw { power_law: PowerLaw },
    /// Symmetric, with entries `concentration / len` so the total stays fixed
    /// when the dimension changes.
    Concentration { concentration: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    #[serde(default = "default_exponent")]
    pub exponent: f64,
    /// `None` scales the vector to sum to one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub magnitude: Option<f64>,
}

fn default_exponent() -> f64 {
    1.0
}

impl Prior {
    pub fn power_law(exponent: f64, magnitude: Option<f64>) -> Self {
        Prior::PowerLaw {
            power_law: PowerLaw { exponent, magnitude },
        }
    }

    /// Expands to a vector of length `len`.
    pub fn resolve(&self, len: usize) -> Result<Vec<f64>> {
        let out = match self {
            Prior::Symmetric(x) => vec![*x; len],
            Prior::Concentration { concentration } => vec![concentration / len as f64; len],
            Prior::Vector(v) => {
                if v.len() != len {
                    return Err(Error::InvalidConfig(format!(
                        "prior vector has {} entries, expected {len}",
                        v.len()
                    )));
                }
                v.clone()
            }
            Prior::PowerLaw { power_law } => {
                if !(power_law.exponent > 0.0) {
                    return Err(Error::InvalidConfig("power-law exponent must be positive".into()));
                }
                let magnitude = match power_law.magnitude {
                    Some(m) => m,
                    None => 1.0 / (1..=len).map(|r| (r as f64).powf(-power_law.exponent)).sum::<f64>(),
                };
                if !(magnitude > 0.0) {
                    return Err(Error::InvalidConfig("power-law magnitude must be positive".into()));
                }
                power_law_beta(len, power_law.exponent, magnitude)
            }
        };
        if let Some(x) = out.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::InvalidConfig(format!("prior entry {x} is not strictly positive")));
        }
        Ok(out)
    }
}

/// Generative parameters of a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    #[serde(default = "defaults::k")]
    pub k: usize,
    #[serde(default = "defaults::d")]
    pub d: usize,
    #[serde(default = "defaults::v")]
    pub v: usize,
    #[serde(default = "defaults::lambda")]
    pub lambda: f64,
    #[serde(default = "defaults::alpha")]
    pub alpha: Prior,
    #[serde(default = "defaults::beta")]
    pub beta: Prior,
    #[serde(default)]
    pub seed: u64,
}

mod defaults {
    use super::Prior;

    pub fn k() -> usize {
        50
    }
    pub fn d() -> usize {
        2000
    }
    pub fn v() -> usize {
        5000
    }
    pub fn lambda() -> f64 {
        500.0
    }
    pub fn alpha() -> Prior {
        Prior::Concentration { concentration: 1.0 }
    }
    pub fn beta() -> Prior {
        Prior::power_law(1.0, Some(5.0))
    }
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            k: defaults::k(),
            d: defaults::d(),
            v: defaults::v(),
            lambda: defaults::lambda(),
            alpha: defaults::alpha(),
            beta: defaults::beta(),
            seed: 0,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.d == 0 || self.v == 0 {
            return Err(Error::InvalidConfig("k, d and v must all be at least 1".into()));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!("lambda must be positive, got {}", self.lambda)));
        }
        self.alpha.resolve(self.k)?;
        self.beta.resolve(self.v)?;
        Ok(())
    }

    pub fn alpha_vector(&self) -> Result<Vec<f64>> {
        self.alpha.resolve(self.k)
    }

    pub fn beta_vector(&self) -> Result<Vec<f64>> {
        self.beta.resolve(self.v)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// A simulated corpus together with the parameters that generated it.
#[derive(Debug, Clone)]
pub struct GroundTruthCorpus {
    pub dtm: DocumentTermMatrix,
    pub model: TopicModel,
    pub config: SimulationConfig,
}

/// β_v = magnitude · v^(−exponent) for ranks v = 1..V.
pub fn power_law_beta(v: usize, exponent: f64, magnitude: f64) -> Vec<f64> {
    (1..=v).map(|r| magnitude * (r as f64).powf(-exponent)).collect()
}

/// Expected aggregate term counts, `(total_tokens / Σβ) · β`.
pub fn expected_term_frequencies(config: &SimulationConfig, total_tokens: f64) -> Result<Vec<f64>> {
    config.validate()?;
    if !(total_tokens > 0.0) {
        return Err(Error::InvalidConfig("total_tokens must be positive".into()));
    }
    let beta = config.beta_vector()?;
    let sum: f64 = beta.iter().sum();
    Ok(beta.into_iter().map(|b| total_tokens * b / sum).collect())
}

/// Log-log OLS fit of frequency against rank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZipfFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Sorts descending, drops zeros and regresses ln(frequency) on ln(rank).
pub fn zipf_fit(term_frequencies: &[f64]) -> Result<ZipfFit> {
    let mut f: Vec<f64> = term_frequencies.iter().copied().filter(|&x| x > 0.0).collect();
    if f.len() < 3 {
        return Err(Error::InvalidConfig("zipf fit needs at least 3 positive frequencies".into()));
    }
    f.sort_unstable_by(|a, b| b.total_cmp(a));
    let n = f.len() as f64;
    let xs: Vec<f64> = (1..=f.len()).map(|r| (r as f64).ln()).collect();
    let ys: Vec<f64> = f.iter().map(|x| x.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_resid: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    // A flat profile is fit exactly by the zero-slope line.
    let r2 = if syy > 0.0 { 1.0 - ss_resid / syy } else { 1.0 };
    Ok(ZipfFit { slope, intercept, r2 })
}

/// Draws from Dirichlet(params) via normalized Gamma variates.
///
/// Works in log space, using Gamma(a) = Gamma(a + 1) · U^(1/a), so that very
/// small shape parameters do not underflow the whole vector to zero.
pub fn sample_dirichlet<R: Rng + ?Sized>(params: &[f64], rng: &mut R) -> Vec<f64> {
    let mut logs: Vec<f64> = params
        .iter()
        .map(|&a| {
            let g = Gamma::new(a + 1.0, 1.0).expect("shape validated positive").sample(rng);
            let u: f64 = rng.random::<f64>();
            // u in [0, 1); 1 - u in (0, 1]
            g.ln() + (1.0 - u).ln() / a
        })
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for l in logs.iter_mut() {
        *l = (*l - max).exp();
        total += *l;
    }
    for l in logs.iter_mut() {
        *l /= total;
    }
    logs
}

/// Cumulative weights for inverse-CDF categorical sampling.
pub(crate) fn cumulative(weights: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

/// One uniform draw against cumulative weights.
pub(crate) fn sample_cumulative<R: Rng + ?Sized>(cdf: &[f64], rng: &mut R) -> usize {
    let total = *cdf.last().expect("non-empty weights");
    let u = rng.random::<f64>() * total;
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// Draws n ≥ 1 from Poisson(λ) conditioned on being positive.
pub fn zero_truncated_poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<u64> {
    let poisson = Poisson::new(lambda).map_err(|e| Error::InvalidConfig(format!("lambda {lambda}: {e}")))?;
    loop {
        let n = poisson.sample(rng) as u64;
        if n >= 1 {
            return Ok(n);
        }
    }
}

/// Zero-padded synthetic term labels `t00001..`.
pub fn synthetic_vocabulary(v: usize) -> Vec<String> {
    let width = v.to_string().len().max(5);
    (1..=v).map(|i| format!("t{i:0width$}")).collect()
}

fn synthetic_doc_ids(d: usize) -> Vec<String> {
    let width = d.to_string().len().max(5);
    (1..=d).map(|i| format!("d{i:0width$}")).collect()
}

struct SimulatedDoc {
    theta: Vec<f64>,
    counts: Vec<(u32, u32)>,
}

fn simulate_document(
    config: &SimulationConfig,
    alpha: &[f64],
    topic_cdfs: &[Vec<f64>],
    d: usize,
) -> Result<SimulatedDoc> {
    let mut rng = substream(config.seed, Domain::Document, d as u64);
    let theta = sample_dirichlet(alpha, &mut rng);
    let n = zero_truncated_poisson(config.lambda, &mut rng)?;
    let theta_cdf = cumulative(&theta);
    let mut words: Vec<u32> = (0..n)
        .map(|_| {
            let z = sample_cumulative(&theta_cdf, &mut rng);
            sample_cumulative(&topic_cdfs[z], &mut rng) as u32
        })
        .collect();
    words.sort_unstable();
    let mut counts: Vec<(u32, u32)> = Vec::new();
    for w in words {
        match counts.last_mut() {
            Some((t, c)) if *t == w => *c += 1,
            _ => counts.push((w, 1)),
        }
    }
    Ok(SimulatedDoc { theta, counts })
}

/// Simulates a corpus. Output is a pure function of `config` (including its
/// seed) and does not depend on the number of worker threads.
pub fn simulate_corpus(config: &SimulationConfig) -> Result<GroundTruthCorpus> {
    config.validate()?;
    let alpha = config.alpha_vector()?;
    let beta = config.beta_vector()?;

    let phi_rows: Vec<Vec<f64>> = (0..config.k)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(config.seed, Domain::TopicWords, k as u64);
            sample_dirichlet(&beta, &mut rng)
        })
        .collect();
    let topic_cdfs: Vec<Vec<f64>> = phi_rows.iter().map(|p| cumulative(p)).collect();

    let docs: Vec<SimulatedDoc> = (0..config.d)
        .into_par_iter()
        .map(|d| simulate_document(config, &alpha, &topic_cdfs, d))
        .collect::<Result<_>>()?;

    let mut theta = Matrix::zeros(config.d, config.k);
    let mut rows = Vec::with_capacity(config.d);
    for (d, doc) in docs.into_iter().enumerate() {
        theta.row_mut(d).copy_from_slice(&doc.theta);
        rows.push(doc.counts);
    }
    let phi = Matrix::from_rows(phi_rows)?;
    let dtm = DocumentTermMatrix::from_rows(synthetic_doc_ids(config.d), synthetic_vocabulary(config.v), rows)?;
    let model = TopicModel::new(theta, phi)?;
    Ok(GroundTruthCorpus {
        dtm,
        model,
        config: config.clone(),
    })
}
