//! Goodness-of-fit metrics for probabilistic topic models.
//!
//! The central measures are a coefficient of determination (R²) built from
//! squared Euclidean distances between observed document count vectors and
//! their expected values under the model, and McFadden's pseudo-R² against
//! a single-multinomial null. Around them sit a sparse document-term matrix
//! type, a seeded simulator that draws corpora with known parameters from the
//! LDA generative process, a collapsed Gibbs LDA trainer, and a sweep harness.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod experiments;
pub mod goodness;
pub mod lda;
pub mod model;
pub mod rng;
pub mod simgen;
pub mod sum;

pub use corpus::{build_dtm, load_dtm, mean_document, save_dtm, DocumentTermMatrix, IngestOptions};
pub use error::{Error, Result};
pub use goodness::{
    fitted_values, log_likelihood_full, log_likelihood_null, mcfadden_r2, r_squared, FitReport,
    LikelihoodReport,
};
pub use experiments::{run_k_sweep, run_property_sweep, SweepResult, SweepSpec};
pub use lda::{fit_lda, GibbsConfig};
pub use model::{Matrix, TopicModel};
pub use simgen::{
    expected_term_frequencies, power_law_beta, simulate_corpus, zipf_fit, GroundTruthCorpus, Prior,
    SimulationConfig,
};
