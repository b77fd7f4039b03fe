mod common;

use common::pearson;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use topicfit::simgen::{sample_dirichlet, zero_truncated_poisson};
use topicfit::{expected_term_frequencies, simulate_corpus, zipf_fit, Prior, SimulationConfig};

#[test]
fn dirichlet_marginal_means() {
    let alpha = [0.5, 1.0, 2.0, 0.05];
    let s: f64 = alpha.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 10_000;
    let mut sums = [0.0; 4];
    for _ in 0..n {
        let x = sample_dirichlet(&alpha, &mut rng);
        assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(x.iter().all(|&p| p >= 0.0));
        for (a, b) in sums.iter_mut().zip(&x) {
            *a += b;
        }
    }
    for (i, &a) in alpha.iter().enumerate() {
        let mean = a / s;
        let var = a * (s - a) / (s * s * (s + 1.0));
        let se = (var / n as f64).sqrt();
        let got = sums[i] / n as f64;
        assert!((got - mean).abs() < 3.0 * se, "component {i}: {got} vs {mean} (se {se})");
    }
}

#[test]
fn truncated_poisson_mean() {
    // E[n | n ≥ 1] = λ / (1 - e^-λ)
    let lambda = 2.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 20_000;
    let draws: Vec<u64> = (0..n).map(|_| zero_truncated_poisson(lambda, &mut rng).unwrap()).collect();
    assert!(draws.iter().all(|&x| x >= 1));
    let mean = draws.iter().sum::<u64>() as f64 / n as f64;
    let want = lambda / (1.0 - (-lambda).exp());
    let var = want * (1.0 + lambda - want);
    assert!((mean - want).abs() < 4.0 * (var / n as f64).sqrt(), "{mean} vs {want}");
}

#[test]
fn two_term_frequencies_converge() {
    let config = SimulationConfig {
        k: 1,
        d: 1,
        v: 2,
        lambda: 8.0,
        alpha: Prior::Symmetric(1.0),
        beta: Prior::Vector(vec![3.0, 1.0]),
        seed: 0,
    };
    let want = expected_term_frequencies(&config, 8.0).unwrap();
    assert_eq!(want, vec![6.0, 2.0]);

    // One topic per replicate; average the per-token share of the first term.
    let reps = 20_000u64;
    let mut share = 0.0;
    for seed in 0..reps {
        let sim = simulate_corpus(&SimulationConfig { seed, ..config.clone() }).unwrap();
        let t = sim.dtm.term_totals();
        share += t[0] as f64 / (t[0] + t[1]) as f64;
    }
    let got = 8.0 * share / reps as f64;
    assert!((got - 6.0).abs() / 6.0 < 0.01, "{got}");
    assert!(((8.0 - got) - 2.0).abs() / 2.0 < 0.03);
}

#[test]
fn power_law_profile_is_recovered() {
    let config = SimulationConfig {
        k: 50,
        d: 2000,
        v: 100,
        lambda: 200.0,
        seed: 3,
        ..Default::default()
    };
    let sim = simulate_corpus(&config).unwrap();
    let totals: Vec<f64> = sim.dtm.term_totals().iter().map(|&c| c as f64).collect();
    let expected = expected_term_frequencies(&config, sim.dtm.total_tokens() as f64).unwrap();
    assert!(pearson(&totals, &expected) > 0.99);
    let fit = zipf_fit(&totals).unwrap();
    assert!((-1.2..=-0.8).contains(&fit.slope), "{}", fit.slope);
}

#[test]
fn tokens_are_conserved() {
    let sim = simulate_corpus(&SimulationConfig {
        k: 7,
        d: 300,
        v: 400,
        lambda: 30.0,
        seed: 21,
        ..Default::default()
    })
    .unwrap();
    let dtm = &sim.dtm;
    assert_eq!(dtm.num_docs(), 300);
    assert_eq!(dtm.num_terms(), 400);
    let mut total = 0u64;
    for d in 0..dtm.num_docs() {
        let row: u64 = dtm.row_iter(d).map(|(_, c)| u64::from(c)).sum();
        assert_eq!(row, dtm.doc_lengths()[d]);
        assert!(row >= 1);
        total += row;
    }
    assert_eq!(total, dtm.total_tokens());
    assert_eq!(dtm.term_totals().iter().sum::<u64>(), total);
    sim.model.theta.check_row_stochastic("theta").unwrap();
    sim.model.phi.check_row_stochastic("phi").unwrap();
}

#[test]
fn default_document_length() {
    let config = SimulationConfig::default();
    assert_eq!((config.k, config.d, config.v, config.lambda), (50, 2000, 5000, 500.0));
    let sim = simulate_corpus(&config).unwrap();
    let mean = sim.dtm.total_tokens() as f64 / sim.dtm.num_docs() as f64;
    assert!((mean - 500.0).abs() <= 1.5, "{mean}");
}

#[test]
fn ground_truth_fits_its_own_corpus() {
    let sim = simulate_corpus(&SimulationConfig {
        k: 10,
        d: 400,
        v: 500,
        lambda: 150.0,
        seed: 8,
        ..Default::default()
    })
    .unwrap();
    let r2 = topicfit::r_squared(&sim.dtm, &sim.model).unwrap().r_squared;
    assert!(r2 > 0.0 && r2 <= 1.0, "{r2}");
    let lik = topicfit::mcfadden_r2(&sim.dtm, &sim.model).unwrap();
    assert!(lik.log_l_full > lik.log_l_restricted);
}
