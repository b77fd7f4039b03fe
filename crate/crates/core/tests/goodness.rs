mod common;

use common::{dtm_from_dense, hand_oracle, model_from_dense, rel_close, DenseOracle};
use proptest::prelude::*;
use topicfit::{
    fitted_values, log_likelihood_full, log_likelihood_null, mcfadden_r2, r_squared, DocumentTermMatrix, Matrix,
    TopicModel,
};

#[test]
fn hand_corpus_matches_oracle() {
    let oracle = hand_oracle();
    let (tot, resid, r2) = oracle.r_squared();
    assert_eq!((tot, resid, r2), (4.0, 1.0, 0.75));

    let dtm = dtm_from_dense(&oracle.y);
    let model = model_from_dense(&oracle.theta, &oracle.phi);
    let fit = r_squared(&dtm, &model).unwrap();
    assert!((fit.r_squared - r2).abs() < 1e-9);
    assert!((fit.ss_tot - tot).abs() < 1e-9);
    assert!((fit.ss_resid - resid).abs() < 1e-9);

    let lik = mcfadden_r2(&dtm, &model).unwrap();
    assert!((lik.log_l_full - oracle.log_l_full()).abs() < 1e-9);
    assert!((lik.log_l_restricted - oracle.log_l_null()).abs() < 1e-9);
    assert!((lik.mcfadden_r2 - oracle.mcfadden()).abs() < 1e-9);
}

#[test]
fn perfect_fit_gives_one() {
    // Documents proportional to their own topic's φ.
    let y = vec![vec![2.0, 2.0, 0.0], vec![0.0, 1.0, 3.0], vec![4.0, 4.0, 0.0]];
    let theta = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]];
    let phi = vec![vec![0.5, 0.5, 0.0], vec![0.0, 0.25, 0.75]];
    let dtm = dtm_from_dense(&y);
    let rep = r_squared(&dtm, &model_from_dense(&theta, &phi)).unwrap();
    assert_eq!(rep.ss_resid, 0.0);
    assert_eq!(rep.r_squared, 1.0);
    assert!(rep.per_doc_resid.iter().all(|&r| r == 0.0));
}

#[test]
fn corpus_frequency_model_gives_zero_on_equal_lengths() {
    let y = vec![vec![3.0, 1.0, 0.0], vec![0.0, 2.0, 2.0], vec![1.0, 1.0, 2.0]];
    let dtm = dtm_from_dense(&y);
    let totals = dtm.term_totals();
    let n = dtm.total_tokens() as f64;
    let phi = vec![totals.iter().map(|&c| c as f64 / n).collect::<Vec<_>>()];
    let theta = vec![vec![1.0]; 3];
    let model = model_from_dense(&theta, &phi);
    let rep = r_squared(&dtm, &model).unwrap();
    assert!(rep.r_squared.abs() < 1e-9, "{}", rep.r_squared);
    // p_d = q for every document, so the two likelihoods coincide.
    let lik = mcfadden_r2(&dtm, &model).unwrap();
    assert!(lik.mcfadden_r2.abs() < 1e-12);
}

#[test]
fn single_document_null_equals_unsmoothed_full() {
    let y = vec![vec![3.0, 1.0, 4.0]];
    let dtm = dtm_from_dense(&y);
    let model = model_from_dense(&[vec![1.0]], &[vec![3.0 / 8.0, 1.0 / 8.0, 0.5]]);
    let full = log_likelihood_full(&dtm, &model).unwrap();
    assert!((full - log_likelihood_null(&dtm)).abs() < 1e-12);
    // One document has no spread around the mean.
    assert!(r_squared(&dtm, &model).is_err());
}

#[test]
fn single_term_single_document_likelihood_is_zero() {
    let dtm = dtm_from_dense(&[vec![7.0]]);
    let model = model_from_dense(&[vec![1.0]], &[vec![1.0]]);
    assert_eq!(log_likelihood_full(&dtm, &model).unwrap(), 0.0);
    assert_eq!(log_likelihood_null(&dtm), 0.0);
}

fn arb_case() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    (2usize..=50, 2usize..=100, 1usize..=6).prop_flat_map(|(d, v, k)| {
        let y = prop::collection::vec(prop::collection::vec(0u32..6, v), d);
        let theta = prop::collection::vec(prop::collection::vec(0.01f64..1.0, k), d);
        let phi = prop::collection::vec(prop::collection::vec(0.001f64..1.0, v), k);
        (y, theta, phi).prop_map(|(y, theta, phi)| {
            let y: Vec<Vec<f64>> = y
                .into_iter()
                .map(|mut r| {
                    if r.iter().all(|&c| c == 0) {
                        r[0] = 1;
                    }
                    r.into_iter().map(f64::from).collect()
                })
                .collect();
            let norm = |rows: Vec<Vec<f64>>| {
                rows.into_iter()
                    .map(|r| {
                        let s: f64 = r.iter().sum();
                        r.into_iter().map(|x| x / s).collect::<Vec<f64>>()
                    })
                    .collect::<Vec<_>>()
            };
            (y, norm(theta), norm(phi))
        })
    })
}

fn build(y: &[Vec<f64>], theta: &[Vec<f64>], phi: &[Vec<f64>]) -> Option<(DocumentTermMatrix, TopicModel)> {
    let dtm = dtm_from_dense(y);
    let model = TopicModel::new(
        Matrix::from_rows(theta.to_vec()).ok()?,
        Matrix::from_rows(phi.to_vec()).ok()?,
    )
    .ok()?;
    Some((dtm, model))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sparse_matches_dense_oracle((y, theta, phi) in arb_case()) {
        let Some((dtm, model)) = build(&y, &theta, &phi) else { return Ok(()) };
        let oracle = DenseOracle::from_parts(&dtm, &model);
        let (tot, resid, r2) = oracle.r_squared();
        prop_assume!(tot > 0.0);
        let rep = r_squared(&dtm, &model).unwrap();
        prop_assert!(rel_close(rep.ss_tot, tot, 1e-9));
        prop_assert!(rel_close(rep.ss_resid, resid, 1e-9));
        prop_assert!(rel_close(rep.r_squared, r2, 1e-9));
        prop_assert!(rep.r_squared <= 1.0);
        prop_assert_eq!(rep.r_squared, 1.0 - rep.ss_resid / rep.ss_tot);
        let per_doc: f64 = rep.per_doc_resid.iter().sum();
        prop_assert!(rel_close(per_doc, rep.ss_resid, 1e-12));

        let lik = mcfadden_r2(&dtm, &model).unwrap();
        prop_assert!(rel_close(lik.log_l_full, oracle.log_l_full(), 1e-9));
        prop_assert!(rel_close(lik.log_l_restricted, oracle.log_l_null(), 1e-9));
        prop_assert!(lik.log_l_full < 0.0);
        prop_assert!(lik.mcfadden_r2 < 1.0);
        prop_assert_eq!(lik.mcfadden_r2, 1.0 - lik.log_l_full / lik.log_l_restricted);
    }

    #[test]
    fn fitted_values_sum_to_length((y, theta, phi) in arb_case()) {
        let Some((dtm, model)) = build(&y, &theta, &phi) else { return Ok(()) };
        let dense = DenseOracle::from_parts(&dtm, &model).fitted();
        for d in 0..dtm.num_docs() {
            let f = fitted_values(&dtm, &model, d).unwrap();
            let n = dtm.doc_lengths()[d] as f64;
            prop_assert!((f.iter().sum::<f64>() - n).abs() <= 1e-6 * n);
            prop_assert!(f.iter().all(|&x| x >= 0.0));
            for (a, b) in f.iter().zip(&dense[d]) {
                prop_assert!(rel_close(*a, *b, 1e-12));
            }
        }
    }

    #[test]
    fn permutation_invariance((y, theta, phi) in arb_case(), salt in any::<u64>()) {
        let Some((dtm, model)) = build(&y, &theta, &phi) else { return Ok(()) };
        let Ok(base) = r_squared(&dtm, &model) else { return Ok(()) };
        let base_lik = mcfadden_r2(&dtm, &model).unwrap();

        let mut docs: Vec<usize> = (0..dtm.num_docs()).collect();
        let mut terms: Vec<usize> = (0..dtm.num_terms()).collect();
        // Deterministic shuffle driven by the salt.
        let mut s = salt | 1;
        for i in (1..docs.len()).rev() {
            s ^= s << 13; s ^= s >> 7; s ^= s << 17;
            docs.swap(i, (s % (i as u64 + 1)) as usize);
        }
        for i in (1..terms.len()).rev() {
            s ^= s << 13; s ^= s >> 7; s ^= s << 17;
            terms.swap(i, (s % (i as u64 + 1)) as usize);
        }
        let dtm2 = dtm.permute_docs(&docs).unwrap().permute_terms(&terms).unwrap();
        let model2 = TopicModel::new(model.theta.permute_rows(&docs), model.phi.permute_cols(&terms)).unwrap();
        let rep = r_squared(&dtm2, &model2).unwrap();
        let lik = mcfadden_r2(&dtm2, &model2).unwrap();
        prop_assert!(rel_close(rep.r_squared, base.r_squared, 1e-9));
        prop_assert!(rel_close(rep.ss_tot, base.ss_tot, 1e-9));
        prop_assert!(rel_close(rep.ss_resid, base.ss_resid, 1e-9));
        prop_assert!(rel_close(lik.log_l_full, base_lik.log_l_full, 1e-9));
        prop_assert!(rel_close(lik.mcfadden_r2, base_lik.mcfadden_r2, 1e-9));
    }
}

#[test]
fn thread_count_does_not_change_metrics() {
    let sim = topicfit::simulate_corpus(&topicfit::SimulationConfig {
        k: 5,
        d: 200,
        v: 300,
        lambda: 60.0,
        seed: 17,
        ..Default::default()
    })
    .unwrap();
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| (r_squared(&sim.dtm, &sim.model).unwrap(), mcfadden_r2(&sim.dtm, &sim.model).unwrap()))
    };
    let (a, la) = run(1);
    let (b, lb) = run(8);
    assert_eq!(a, b);
    assert_eq!(la, lb);
}
