//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for data or validation
//! errors. Every run prints its fully resolved configuration as JSON to
//! stderr before doing any work, and writes the same JSON next to its primary
//! output as `<output>.provenance.json`.

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::corpus::{self, IngestOptions};
use crate::error::{Error, Result};
use crate::experiments::{provenance_path, SweepPlan};
use crate::goodness::{mcfadden_r2, r_squared, FitReport, LikelihoodReport};
use crate::lda::{fit_lda, GibbsConfig};
use crate::model::{load_model_for, save_phi, save_theta};
use crate::simgen::{simulate_corpus, SimulationConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "topicfit", version, about = "R-squared and McFadden's pseudo-R-squared for topic models")]
pub struct Cli {
    /// Worker threads for evaluation, simulation and sweeps (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a corpus with known topic parameters.
    Simulate(SimulateArgs),
    /// Build a document-term matrix from `id<TAB>text` lines.
    Ingest(IngestArgs),
    /// Fit LDA by collapsed Gibbs sampling.
    Fit(FitArgs),
    /// Score a model against a corpus.
    Evaluate(EvaluateArgs),
    /// Run a property sweep or an estimated-K sweep.
    Sweep(SweepArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub truth_theta: Option<PathBuf>,
    #[arg(long)]
    pub truth_phi: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Stopword file, one token per line. Defaults to the bundled snowball list.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub min_df: usize,
    #[arg(long)]
    pub no_lowercase: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    #[arg(long)]
    pub dtm: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    pub beta: f64,
    #[arg(long, default_value_t = 200)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = 2)]
    pub thin: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub theta: PathBuf,
    #[arg(long)]
    pub phi: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub dtm: PathBuf,
    #[arg(long)]
    pub theta: PathBuf,
    #[arg(long)]
    pub phi: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Optional CSV of squared residuals per document.
    #[arg(long)]
    pub per_doc: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Write 0 in the elapsed_ms column so reruns are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
}

/// Combined metrics written by `evaluate`.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct EvaluationReport {
    pub documents: usize,
    pub terms: usize,
    pub topics: usize,
    #[serde(flatten)]
    pub fit: FitReport,
    #[serde(flatten)]
    pub likelihood: LikelihoodReport,
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_USAGE;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Ingest(a) => ingest(a),
        Command::Fit(a) => fit(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Sweep(a) => sweep(a),
    }
}

/// Prints the resolved configuration and records it next to `primary`.
fn announce(command: &str, resolved: serde_json::Value, primary: &Path) -> Result<()> {
    let doc = json!({ "command": command, "config": resolved });
    let text = serde_json::to_string_pretty(&doc)?;
    eprintln!("{text}");
    let side = provenance_path(primary);
    fs::write(&side, text + "\n").map_err(|e| Error::io(&side, e))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let cfg = SimulationConfig::load(&a.config)?;
    announce("simulate", json!({ "args": a, "simulation": cfg }), &a.out)?;
    let sim = simulate_corpus(&cfg)?;
    corpus::save_dtm(&sim.dtm, &a.out)?;
    if let Some(p) = &a.truth_theta {
        save_theta(&sim.model, sim.dtm.doc_ids(), p)?;
    }
    if let Some(p) = &a.truth_phi {
        save_phi(&sim.model, sim.dtm.vocabulary(), p)?;
    }
    log::info!(
        "simulated {} documents, {} tokens",
        sim.dtm.num_docs(),
        sim.dtm.total_tokens()
    );
    Ok(())
}

fn ingest(a: &IngestArgs) -> Result<()> {
    let stopwords = match &a.stopwords {
        Some(p) => corpus::load_stopwords(p)?,
        None => corpus::parse_stopwords(corpus::DEFAULT_STOPWORDS),
    };
    let options = IngestOptions {
        stopwords,
        min_doc_frequency: a.min_df,
        lowercase: !a.no_lowercase,
    };
    options.validate()?;
    announce(
        "ingest",
        json!({ "args": a, "stopword_count": options.stopwords.len(), "lowercase": options.lowercase }),
        &a.out,
    )?;
    let docs = corpus::load_documents(&a.input)?;
    let out = corpus::build_dtm(&docs, &options)?;
    if !out.dropped_docs.is_empty() {
        eprintln!("warning: dropped {} empty documents", out.dropped_docs.len());
    }
    corpus::save_dtm(&out.dtm, &a.out)
}

fn fit(a: &FitArgs) -> Result<()> {
    let cfg = GibbsConfig {
        k: a.k,
        alpha: a.alpha,
        beta: a.beta,
        burn_in: a.burn_in,
        samples: a.samples,
        thin: a.thin,
        seed: a.seed,
    };
    cfg.validate()?;
    announce("fit", json!({ "args": a, "gibbs": cfg }), &a.theta)?;
    let dtm = corpus::load_dtm(&a.dtm)?;
    let model = fit_lda(&dtm, &cfg)?;
    save_theta(&model, dtm.doc_ids(), &a.theta)?;
    save_phi(&model, dtm.vocabulary(), &a.phi)
}

fn evaluate(a: &EvaluateArgs) -> Result<()> {
    announce("evaluate", json!({ "args": a }), &a.out)?;
    let dtm = corpus::load_dtm(&a.dtm)?;
    let model = load_model_for(dtm.doc_ids(), dtm.vocabulary(), &a.theta, &a.phi)?;
    let fit = r_squared(&dtm, &model)?;
    let likelihood = mcfadden_r2(&dtm, &model)?;
    if let Some(p) = &a.per_doc {
        let file = fs::File::create(p).map_err(|e| Error::io(p, e))?;
        let mut out = BufWriter::new(file);
        let write = |out: &mut BufWriter<fs::File>| -> std::io::Result<()> {
            writeln!(out, "doc_id,squared_residual")?;
            for (id, r) in dtm.doc_ids().iter().zip(&fit.per_doc_resid) {
                writeln!(out, "{id},{r}")?;
            }
            out.flush()
        };
        write(&mut out).map_err(|e| Error::io(p, e))?;
    }
    let report = EvaluationReport {
        documents: dtm.num_docs(),
        terms: dtm.num_terms(),
        topics: model.num_topics(),
        fit,
        likelihood,
    };
    write_json(&report, &a.out)
}

fn sweep(a: &SweepArgs) -> Result<()> {
    let text = fs::read_to_string(&a.spec).map_err(|e| Error::io(&a.spec, e))?;
    let plan = SweepPlan::from_json(&text)?;
    let base_dir = a.spec.parent().unwrap_or(Path::new("."));
    let side = provenance_path(&a.out);
    // The sweep's own provenance sidecar records per-cell configs, so the
    // resolved plan goes in a separate file.
    let plan_path = a.out.with_file_name(format!(
        "{}.plan.json",
        a.out.file_name().unwrap_or_default().to_string_lossy()
    ));
    let doc = json!({ "command": "sweep", "config": { "args": a, "plan": plan } });
    let text = serde_json::to_string_pretty(&doc)?;
    eprintln!("{text}");
    fs::write(&plan_path, text + "\n").map_err(|e| Error::io(&plan_path, e))?;
    let result = plan.run(base_dir)?;
    result.save(&a.out, !a.no_timing)?;
    log::info!("wrote {} rows; cell configs in {}", result.rows.len(), side.display());
    Ok(())
}
