//! Monte Carlo checks of the test's distributional behaviour. Seeds are
//! fixed so every run is reproducible.

use std::f64::consts::PI;

use lsts::empirical::{distance_process, limit_sup_samples, quantile};
use lsts::exec::Execution;
use lsts::harness::{cells, run_experiment, ExperimentConfig};
use lsts::models::{simulate, ModelSpec};
use lsts::sieve::{Estimator, TestConfig};
use lsts::spectral::{local_periodogram, make_grid};

#[test]
fn p_values_are_roughly_uniform_under_white_noise() {
    let cfg = ExperimentConfig {
        runs: 300,
        replicates: 200,
        seed: 11,
        ..ExperimentConfig::new(ModelSpec::white_noise(), 128, 16)
    };
    let report = run_experiment(&cfg).unwrap();
    let mut bins = [0usize; 10];
    for &p in &report.p_values {
        bins[((p * 10.0) as usize).min(9)] += 1;
    }
    for (i, &count) in bins.iter().enumerate() {
        let freq = count as f64 / report.p_values.len() as f64;
        assert!((0.04..=0.18).contains(&freq), "decile {i}: {freq} ({bins:?})");
    }
}

#[test]
fn white_noise_statistic_matches_limit_quantile() {
    let (t, n) = (512, 32);
    let grid = make_grid(t, n).unwrap();
    let sups: Vec<f64> = (0..500u64)
        .map(|seed| {
            let x = simulate(&ModelSpec::white_noise(), t, seed).unwrap();
            distance_process(&local_periodogram(&x, &grid).unwrap()).sup_stat()
        })
        .collect();
    let omegas: Vec<f64> = (1..=grid.n_freqs()).map(|k| k as f64 / grid.n_freqs() as f64).collect();
    let limit = limit_sup_samples(|_| 1.0 / (2.0 * PI), grid.m_blocks(), &omegas, 50_000, 5, Execution::Parallel);
    let (empirical, theory) = (quantile(&sups, 0.95), quantile(&limit, 0.95));
    assert!((empirical - theory).abs() / theory < 0.15, "empirical {empirical}, limit {theory}");
}

#[test]
fn tv_ar_cell_has_power() {
    let cell = cells::find("T128-N16-alt2").unwrap();
    let report = run_experiment(&cell.experiment(21)).unwrap();
    assert!(report.rate_at(0.05).unwrap().rate >= 0.30, "{}", report.to_text());
}

#[test]
fn ar_level_cell_is_near_reference() {
    let cell = cells::find("T128-N16-ar0.5").unwrap();
    let report = run_experiment(&cell.experiment(22)).unwrap();
    let rate = report.rate_at(0.05).unwrap().rate;
    assert!((rate - cell.reference[0]).abs() <= 0.03, "{rate} vs {}", cell.reference[0]);
}

#[test]
fn both_estimators_hold_level_and_detect_scaled_noise() {
    for estimator in [Estimator::Local, Estimator::Pre] {
        let null = ExperimentConfig {
            runs: 200,
            replicates: 200,
            estimator,
            seed: 31,
            ..ExperimentConfig::new(ModelSpec::ar1(0.5), 128, 16)
        };
        let level = run_experiment(&null).unwrap().rate_at(0.05).unwrap().rate;
        assert!(level <= 0.09, "{estimator:?} level {level}");
        let power = run_experiment(&ExperimentConfig { model: ModelSpec::ScaledNoise, ..null }).unwrap().rate_at(0.05).unwrap().rate;
        assert!(power >= 0.4, "{estimator:?} power {power}");
    }
}

#[test]
fn rejections_grow_with_sample_size() {
    let rate = |t: usize, n: usize| {
        let cfg = ExperimentConfig { runs: 200, replicates: 200, seed: 41, ..ExperimentConfig::new(ModelSpec::TvAr1Sqrt, t, n) };
        run_experiment(&cfg).unwrap().rate_at(0.05).unwrap().rate
    };
    let (small, large) = (rate(64, 8), rate(256, 16));
    assert!(large > small + 0.1, "T=64 {small}, T=256 {large}");
}

#[test]
fn test_config_default_is_usable() {
    let x = simulate(&ModelSpec::white_noise(), 256, 1).unwrap();
    let result = lsts::sieve::run_test(&x, &TestConfig { replicates: 49, ..TestConfig::default() }).unwrap();
    assert_eq!(result.window, Some(32));
    assert!((0.0..=1.0).contains(&result.p_value));
}
