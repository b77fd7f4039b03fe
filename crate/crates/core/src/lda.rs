//! Collapsed Gibbs sampling for latent Dirichlet allocation.
//!
//! Θ and Φ are integrated out; each token's topic is resampled from
//!
//! ```text
//! p(z = k | rest) ∝ (C_dk + α) · (C_kv + β) / (C_k + Vβ)
//! ```
//!
//! with the token's own assignment removed from the counts. The returned
//! estimates average the per-sweep posterior means over retained sweeps.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::DocumentTermMatrix;
use crate::error::{Error, Result};
use crate::model::{Matrix, TopicModel};
use crate::rng::{substream, Domain};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsConfig {
    pub k: usize,
    #[serde(default = "defaults::alpha")]
    pub alpha: f64,
    #[serde(default = "defaults::beta")]
    pub beta: f64,
    #[serde(default = "defaults::burn_in")]
    pub burn_in: usize,
    #[serde(default = "defaults::samples")]
    pub samples: usize,
    #[serde(default = "defaults::thin")]
    pub thin: usize,
    #[serde(default)]
    pub seed: u64,
}

mod defaults {
    pub fn alpha() -> f64 {
        0.1
    }
    pub fn beta() -> f64 {
        0.01
    }
    pub fn burn_in() -> usize {
        200
    }
    pub fn samples() -> usize {
        50
    }
    pub fn thin() -> usize {
        2
    }
}

impl GibbsConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            alpha: defaults::alpha(),
            beta: defaults::beta(),
            burn_in: defaults::burn_in(),
            samples: defaults::samples(),
            thin: defaults::thin(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) || !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidConfig("alpha and beta must be positive".into()));
        }
        if self.samples == 0 || self.thin == 0 {
            return Err(Error::InvalidConfig("samples and thin must be at least 1".into()));
        }
        Ok(())
    }

    /// Total number of full sweeps performed.
    pub fn total_sweeps(&self) -> usize {
        self.burn_in + self.samples * self.thin
    }
}

/// Topic assignments and their sufficient statistics.
#[derive(Debug, Clone)]
pub struct GibbsState {
    /// Start of each document's tokens in `words`/`topics`; length D + 1.
    doc_offsets: Vec<usize>,
    words: Vec<u32>,
    topics: Vec<u32>,
    k: usize,
    /// C_dk, row-major D × K.
    doc_topic: Vec<u32>,
    /// C_kv stored term-major (V × K) so one token touches one contiguous row.
    term_topic: Vec<u32>,
    /// C_k.
    topic_totals: Vec<u64>,
}

impl GibbsState {
    pub fn num_topics(&self) -> usize {
        self.k
    }

    pub fn num_docs(&self) -> usize {
        self.doc_offsets.len() - 1
    }

    pub fn num_terms(&self) -> usize {
        self.term_topic.len() / self.k
    }

    /// `(term, topic)` pairs of document `d`.
    pub fn assignments(&self, d: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let r = self.doc_offsets[d]..self.doc_offsets[d + 1];
        self.words[r.clone()]
            .iter()
            .zip(&self.topics[r])
            .map(|(&w, &z)| (w as usize, z as usize))
    }

    pub fn doc_topic_count(&self, d: usize, k: usize) -> u32 {
        self.doc_topic[d * self.k + k]
    }

    pub fn topic_term_count(&self, k: usize, v: usize) -> u32 {
        self.term_topic[v * self.k + k]
    }

    pub fn topic_totals(&self) -> &[u64] {
        &self.topic_totals
    }

    /// Recounts from the assignments and compares with the maintained counts.
    pub fn check_consistency(&self) -> Result<()> {
        let mut doc_topic = vec![0u32; self.doc_topic.len()];
        let mut term_topic = vec![0u32; self.term_topic.len()];
        let mut totals = vec![0u64; self.k];
        for d in 0..self.num_docs() {
            for (w, z) in self.assignments(d) {
                doc_topic[d * self.k + z] += 1;
                term_topic[w * self.k + z] += 1;
                totals[z] += 1;
            }
        }
        if doc_topic != self.doc_topic || term_topic != self.term_topic || totals != self.topic_totals {
            return Err(Error::InvalidCorpus("gibbs counts diverged from assignments".into()));
        }
        Ok(())
    }

    /// Posterior means θ_dk = (C_dk + α)/(n_d + Kα), φ_kv = (C_kv + β)/(C_k + Vβ),
    /// added into `theta` and `phi`.
    fn accumulate_means(&self, alpha: f64, beta: f64, theta: &mut Matrix, phi: &mut Matrix) {
        let k = self.k;
        let kalpha = k as f64 * alpha;
        for d in 0..self.num_docs() {
            let n = (self.doc_offsets[d + 1] - self.doc_offsets[d]) as f64;
            let denom = n + kalpha;
            let counts = &self.doc_topic[d * k..(d + 1) * k];
            for (t, &c) in theta.row_mut(d).iter_mut().zip(counts) {
                *t += (f64::from(c) + alpha) / denom;
            }
        }
        let vbeta = self.num_terms() as f64 * beta;
        let denoms: Vec<f64> = self.topic_totals.iter().map(|&c| c as f64 + vbeta).collect();
        let data = phi.as_mut_slice();
        let v_count = self.num_terms();
        for (v, counts) in self.term_topic.chunks_exact(k).enumerate() {
            for (topic, &c) in counts.iter().enumerate() {
                data[topic * v_count + v] += (f64::from(c) + beta) / denoms[topic];
            }
        }
    }

    /// Current posterior-mean point estimate.
    pub fn point_estimate(&self, alpha: f64, beta: f64) -> Result<TopicModel> {
        let mut theta = Matrix::zeros(self.num_docs(), self.k);
        let mut phi = Matrix::zeros(self.k, self.num_terms());
        self.accumulate_means(alpha, beta, &mut theta, &mut phi);
        TopicModel::new(theta, phi)
    }
}

/// A single Gibbs chain over one corpus.
pub struct GibbsSampler {
    state: GibbsState,
    config: GibbsConfig,
    rng: ChaCha8Rng,
    weights: Vec<f64>,
}

impl GibbsSampler {
    /// Validates the configuration and assigns every token a uniformly random topic.
    pub fn new(dtm: &DocumentTermMatrix, config: &GibbsConfig) -> Result<Self> {
        config.validate()?;
        let total = dtm.total_tokens();
        if config.k as u64 > total {
            return Err(Error::InvalidConfig(format!(
                "k = {} exceeds the corpus's {total} tokens",
                config.k
            )));
        }
        if config.k > u32::MAX as usize {
            return Err(Error::InvalidConfig("k too large".into()));
        }
        let k = config.k;
        let v = dtm.num_terms();
        let mut rng = substream(config.seed, Domain::Gibbs, 0);

        let mut doc_offsets = Vec::with_capacity(dtm.num_docs() + 1);
        let mut words = Vec::with_capacity(total as usize);
        doc_offsets.push(0);
        for d in 0..dtm.num_docs() {
            for (term, c) in dtm.row_iter(d) {
                words.extend(std::iter::repeat_n(term as u32, c as usize));
            }
            doc_offsets.push(words.len());
        }

        let mut doc_topic = vec![0u32; dtm.num_docs() * k];
        let mut term_topic = vec![0u32; v * k];
        let mut topic_totals = vec![0u64; k];
        let mut topics = Vec::with_capacity(words.len());
        for d in 0..dtm.num_docs() {
            for &w in &words[doc_offsets[d]..doc_offsets[d + 1]] {
                let z = rng.random_range(0..k);
                topics.push(z as u32);
                doc_topic[d * k + z] += 1;
                term_topic[w as usize * k + z] += 1;
                topic_totals[z] += 1;
            }
        }

        Ok(Self {
            state: GibbsState {
                doc_offsets,
                words,
                topics,
                k,
                doc_topic,
                term_topic,
                topic_totals,
            },
            config: config.clone(),
            rng,
            weights: vec![0.0; k],
        })
    }

    pub fn state(&self) -> &GibbsState {
        &self.state
    }

    /// Resamples every token's topic once, in corpus order.
    pub fn sweep(&mut self) {
        let GibbsSampler {
            state,
            config,
            rng,
            weights,
        } = self;
        let k = state.k;
        let alpha = config.alpha;
        let beta = config.beta;
        let vbeta = state.num_terms() as f64 * beta;
        for d in 0..state.num_docs() {
            let dt = &mut state.doc_topic[d * k..(d + 1) * k];
            for i in state.doc_offsets[d]..state.doc_offsets[d + 1] {
                let w = state.words[i] as usize;
                let old = state.topics[i] as usize;
                let tt = &mut state.term_topic[w * k..(w + 1) * k];
                dt[old] -= 1;
                tt[old] -= 1;
                state.topic_totals[old] -= 1;

                let mut acc = 0.0;
                for t in 0..k {
                    acc += (f64::from(dt[t]) + alpha) * (f64::from(tt[t]) + beta)
                        / (state.topic_totals[t] as f64 + vbeta);
                    weights[t] = acc;
                }
                let u = rng.random::<f64>() * acc;
                let new = weights.partition_point(|&c| c <= u).min(k - 1);

                state.topics[i] = new as u32;
                dt[new] += 1;
                tt[new] += 1;
                state.topic_totals[new] += 1;
            }
        }
        debug_assert!(state.check_consistency().is_ok());
    }

    /// Runs burn-in, then averages posterior means over every `thin`-th of
    /// the remaining `samples · thin` sweeps.
    pub fn run(mut self) -> Result<TopicModel> {
        for _ in 0..self.config.burn_in {
            self.sweep();
        }
        let mut theta = Matrix::zeros(self.state.num_docs(), self.state.k);
        let mut phi = Matrix::zeros(self.state.k, self.state.num_terms());
        for _ in 0..self.config.samples {
            for _ in 0..self.config.thin {
                self.sweep();
            }
            self.state
                .accumulate_means(self.config.alpha, self.config.beta, &mut theta, &mut phi);
        }
        let scale = 1.0 / self.config.samples as f64;
        theta.as_mut_slice().iter_mut().for_each(|x| *x *= scale);
        phi.as_mut_slice().iter_mut().for_each(|x| *x *= scale);
        TopicModel::new(theta, phi)
    }
}

/// Fits LDA to `dtm`. Deterministic given `config.seed`.
pub fn fit_lda(dtm: &DocumentTermMatrix, config: &GibbsConfig) -> Result<TopicModel> {
    GibbsSampler::new(dtm, config)?.run()
}
