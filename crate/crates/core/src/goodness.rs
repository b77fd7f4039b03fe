//! Goodness of fit for topic models.
//!
//! The fitted value of document d is its expected count vector under the
//! model, f_d = n_d · θ_d Φ. R² compares the squared Euclidean distances of
//! observations from their fitted values against their distances from the
//! mean document ȳ:
//!
//! ```text
//! SS_tot   = Σ_d ‖y_d − ȳ‖²
//! SS_resid = Σ_d ‖y_d − f_d‖²
//! R²       = 1 − SS_resid / SS_tot
//! ```
//!
//! McFadden's pseudo-R² is `1 − ln L_full / ln L_restricted`, where the
//! restricted model draws every token from one multinomial proportional to
//! corpus-wide term frequencies. Both log-likelihoods omit the multinomial
//! coefficient, so they are Σ w_dv ln p_dv over observed entries. The ratio
//! is therefore not the same number one gets with the coefficient included.
//!
//! Per-document work runs in parallel; per-document partial sums are
//! combined by a fixed-shape pairwise reduction, so results do not depend on
//! the number of threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{mean_document, DocumentTermMatrix};
use crate::error::{Error, Result};
use crate::model::TopicModel;
use crate::sum::{pairwise_sum, Compensated};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub ss_tot: f64,
    pub ss_resid: f64,
    pub r_squared: f64,
    /// Squared residual ‖y_d − f_d‖² per document.
    #[serde(skip)]
    pub per_doc_resid: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodReport {
    pub log_l_full: f64,
    pub log_l_restricted: f64,
    pub mcfadden_r2: f64,
}

fn check_dimensions(dtm: &DocumentTermMatrix, model: &TopicModel) -> Result<()> {
    if model.theta.rows() != dtm.num_docs() {
        return Err(Error::DimensionMismatch(format!(
            "theta has {} rows but the corpus has {} documents",
            model.theta.rows(),
            dtm.num_docs()
        )));
    }
    if model.phi.cols() != dtm.num_terms() {
        return Err(Error::DimensionMismatch(format!(
            "phi has {} columns but the vocabulary has {} terms",
            model.phi.cols(),
            dtm.num_terms()
        )));
    }
    Ok(())
}

/// Writes the mixture p_d = θ_d Φ into `out`.
fn mixture_into(model: &TopicModel, d: usize, out: &mut [f64]) {
    out.fill(0.0);
    for (k, &w) in model.theta.row(d).iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (o, &p) in out.iter_mut().zip(model.phi.row(k)) {
            *o += w * p;
        }
    }
}

/// p_dv = Σ_k θ_dk φ_kv for a single entry.
fn mixture_at(model: &TopicModel, d: usize, v: usize) -> f64 {
    model
        .theta
        .row(d)
        .iter()
        .enumerate()
        .map(|(k, &w)| w * model.phi.get(k, v))
        .sum()
}

/// Fitted values f_d = n_d · θ_d Φ for document `d`.
pub fn fitted_values(dtm: &DocumentTermMatrix, model: &TopicModel, d: usize) -> Result<Vec<f64>> {
    check_dimensions(dtm, model)?;
    if d >= dtm.num_docs() {
        return Err(Error::DimensionMismatch(format!(
            "document index {d} out of range for {} documents",
            dtm.num_docs()
        )));
    }
    let mut f = vec![0.0; dtm.num_terms()];
    mixture_into(model, d, &mut f);
    let n = dtm.doc_lengths()[d] as f64;
    f.iter_mut().for_each(|x| *x *= n);
    Ok(f)
}

/// (‖y_d − f_d‖², ‖y_d − ȳ‖²) for one document, using caller-owned scratch space.
fn doc_squares(
    dtm: &DocumentTermMatrix,
    model: &TopicModel,
    mean: &[f64],
    d: usize,
    fitted: &mut [f64],
    observed: &mut [f64],
) -> (f64, f64) {
    mixture_into(model, d, fitted);
    let n = dtm.doc_lengths()[d] as f64;
    observed.fill(0.0);
    for (v, c) in dtm.row_iter(d) {
        observed[v] = f64::from(c);
    }
    let mut resid = Compensated::default();
    let mut tot = Compensated::default();
    for ((&y, &p), &m) in observed.iter().zip(fitted.iter()).zip(mean) {
        let r = y - n * p;
        resid.add(r * r);
        let t = y - m;
        tot.add(t * t);
    }
    (resid.value(), tot.value())
}

/// Sums of squares and R² of `model` against the observed counts.
///
/// Negative R² is returned as is. A corpus whose documents are all identical
/// has SS_tot = 0 and is rejected.
pub fn r_squared(dtm: &DocumentTermMatrix, model: &TopicModel) -> Result<FitReport> {
    check_dimensions(dtm, model)?;
    let mean = mean_document(dtm);
    let v = dtm.num_terms();
    let parts: Vec<(f64, f64)> = (0..dtm.num_docs())
        .into_par_iter()
        .map_init(
            || (vec![0.0; v], vec![0.0; v]),
            |(fitted, observed), d| doc_squares(dtm, model, &mean, d, fitted, observed),
        )
        .collect();
    let (per_doc_resid, per_doc_tot): (Vec<f64>, Vec<f64>) = parts.into_iter().unzip();
    let ss_resid = pairwise_sum(&per_doc_resid);
    let ss_tot = pairwise_sum(&per_doc_tot);
    if ss_tot == 0.0 {
        return Err(Error::DegenerateCorpus(
            "total sum of squares is zero (all documents identical)".into(),
        ));
    }
    Ok(FitReport {
        ss_tot,
        ss_resid,
        r_squared: 1.0 - ss_resid / ss_tot,
        per_doc_resid,
    })
}

/// Σ_d Σ_v w_dv ln(Σ_k θ_dk φ_kv) over observed entries.
pub fn log_likelihood_full(dtm: &DocumentTermMatrix, model: &TopicModel) -> Result<f64> {
    check_dimensions(dtm, model)?;
    let per_doc: Vec<f64> = (0..dtm.num_docs())
        .into_par_iter()
        .map(|d| {
            let mut acc = Compensated::default();
            for (v, c) in dtm.row_iter(d) {
                let p = mixture_at(model, d, v);
                if !(p > 0.0) {
                    return Err(Error::ZeroProbability { doc: d, term: v });
                }
                acc.add(f64::from(c) * p.ln());
            }
            Ok(acc.value())
        })
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&per_doc))
}

/// Log-likelihood under a single multinomial with q_v = (Σ_d w_dv) / (Σ_d n_d).
pub fn log_likelihood_null(dtm: &DocumentTermMatrix) -> f64 {
    let total = dtm.total_tokens() as f64;
    let per_term: Vec<f64> = dtm
        .term_totals()
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let c = c as f64;
            c * (c / total).ln()
        })
        .collect();
    pairwise_sum(&per_term)
}

/// McFadden's pseudo-R², 1 − ln L_full / ln L_restricted.
pub fn mcfadden_r2(dtm: &DocumentTermMatrix, model: &TopicModel) -> Result<LikelihoodReport> {
    let log_l_full = log_likelihood_full(dtm, model)?;
    let log_l_restricted = log_likelihood_null(dtm);
    if log_l_restricted == 0.0 {
        return Err(Error::DegenerateCorpus(
            "null log-likelihood is zero (corpus uses a single term)".into(),
        ));
    }
    Ok(LikelihoodReport {
        log_l_full,
        log_l_restricted,
        mcfadden_r2: 1.0 - log_l_full / log_l_restricted,
    })
}
