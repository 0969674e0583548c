//! Acceptance gate. Runs every criterion at its pinned tolerance, prints
//! one PASS/FAIL line each and exits non-zero if any fails.
//!
//! `cargo test -p lsts --test acceptance` (add `-- C3 C7` to run a subset).

use std::f64::consts::PI;
use std::time::Instant;

use lsts::empirical::{distance_process, limit_sup_samples, quantile};
use lsts::exec::{with_thread_count, Execution};
use lsts::harness::{run_experiment, ExperimentConfig, ExperimentReport};
use lsts::models::{simulate, true_distance, ModelSpec};
use lsts::sieve::{levinson_durbin, run_test, sample_autocovariance, Estimator, TestConfig};
use lsts::spectral::{
    local_periodogram, local_periodogram_at, make_grid, pre_periodogram, pre_periodogram_matrix,
    stationary_periodogram, stationary_periodogram_all,
};
use nalgebra::{DMatrix, DVector};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn experiment(model: ModelSpec, t_len: usize, window: usize, runs: usize, alpha: f64, seed: u64) -> ExperimentReport {
    let cfg = ExperimentConfig {
        runs,
        replicates: 200,
        alphas: vec![alpha],
        seed,
        ..ExperimentConfig::new(model, t_len, window)
    };
    run_experiment(&cfg).expect("experiment")
}

fn rate(report: &ExperimentReport) -> f64 {
    report.rates[0].rate
}

// 1. AR(1) phi = 0.5, T=128, N=16, 500 runs, 5%: rate in [0.004, 0.064].
fn c1_level_ar05() -> Outcome {
    let r = experiment(ModelSpec::ar1(0.5), 128, 16, 500, 0.05, 0xC1);
    let v = rate(&r);
    outcome((0.004..=0.064).contains(&v), format!("rate {v:.3} (se {:.3}), target [0.004, 0.064], reference 0.034", r.rates[0].std_error))
}

// 2. White noise, T=256, N=16, 500 runs, 10%: rate in [0.045, 0.125].
fn c2_level_white() -> Outcome {
    let r = experiment(ModelSpec::ar1(0.0), 256, 16, 500, 0.10, 0xC2);
    let v = rate(&r);
    let (lo, hi) = (0.085 - 0.04, 0.085 + 0.04);
    outcome((lo..=hi).contains(&v), format!("rate {v:.3}, target [{lo:.3}, {hi:.3}], reference 0.085"))
}

// 3. (1 + t/T) Z_t, T=128, N=16, 200 runs, 5%: rate >= 0.55.
fn c3_power_scaled() -> Outcome {
    let v = rate(&experiment(ModelSpec::ScaledNoise, 128, 16, 200, 0.05, 0xC3));
    outcome(v >= 0.55, format!("rate {v:.3}, target >= 0.55, reference 0.686"))
}

// 4. Piecewise AR(1), T=256, N=16, 200 runs, 5%: rate >= 0.50.
fn c4_power_piecewise() -> Outcome {
    let v = rate(&experiment(ModelSpec::PiecewiseAr1, 256, 16, 200, 0.05, 0xC4));
    outcome(v >= 0.50, format!("rate {v:.3}, target >= 0.50, reference 0.640"))
}

// 5. Piecewise AR(1), T=128, matched seeds, 200 runs: pre rate at least
// 0.15 below the local (N=8) rate.
fn c5_estimator_ranking() -> Outcome {
    let base = ExperimentConfig {
        runs: 200,
        replicates: 200,
        alphas: vec![0.05],
        seed: 0xC5,
        ..ExperimentConfig::new(ModelSpec::PiecewiseAr1, 128, 8)
    };
    let local = rate(&run_experiment(&base).unwrap());
    let pre = rate(&run_experiment(&ExperimentConfig { estimator: Estimator::Pre, ..base }).unwrap());
    outcome(local - pre >= 0.15, format!("local {local:.3}, pre {pre:.3}, gap {:.3} (target >= 0.15)", local - pre))
}

// 6. (1 + t/T) Z_t, T=256, N in {8, 16, 32}: 5% rates within 0.10.
fn c6_window_robustness() -> Outcome {
    let rates: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&n| rate(&experiment(ModelSpec::ScaledNoise, 256, n, 200, 0.05, 0xC6)))
        .collect();
    let spread = rates.iter().cloned().fold(f64::MIN, f64::max) - rates.iter().cloned().fold(f64::MAX, f64::min);
    outcome(spread <= 0.10, format!("rates N=8/16/32: {rates:.3?}, spread {spread:.3} (target <= 0.10)"))
}

// 7. Oracle equivalence on a fixed battery of random series.
fn c7_oracle_equivalence() -> Outcome {
    let mut worst_spectral = 0.0f64;
    let mut worst_cumsum = 0.0f64;
    let mut worst_levinson = 0.0f64;
    for seed in 0..40u64 {
        for &(t, n) in &[(16usize, 4usize), (24, 6), (32, 8), (48, 12), (64, 8), (64, 16)] {
            let x = simulate(&ModelSpec::ar1(0.4), t, seed).unwrap();
            let v = x.values();
            let grid = make_grid(t, n).unwrap();
            let lp = local_periodogram(&x, &grid).unwrap();
            for j in 1..=grid.m_blocks() {
                for k in 1..=n / 2 {
                    let lambda = 2.0 * PI * k as f64 / n as f64;
                    let (mut re, mut im) = (0.0, 0.0);
                    for s in 0..n {
                        let val = v[n * (j - 1) + s];
                        re += val * (lambda * s as f64).cos();
                        im -= val * (lambda * s as f64).sin();
                    }
                    let naive = (re * re + im * im) / (2.0 * PI * n as f64);
                    worst_spectral = worst_spectral.max((lp.get(j - 1, k - 1) - naive).abs());
                    worst_spectral = worst_spectral.max((local_periodogram_at(&x, n, grid.midpoint(j), lambda) - naive).abs());
                }
            }
            let jm = pre_periodogram_matrix(&x);
            let sp = stationary_periodogram_all(&x);
            for k in 1..=t / 2 {
                let lambda = 2.0 * PI * k as f64 / t as f64;
                let (mut re, mut im) = (0.0, 0.0);
                for (i, val) in v.iter().enumerate() {
                    re += val * (lambda * (i + 1) as f64).cos();
                    im -= val * (lambda * (i + 1) as f64).sin();
                }
                let naive = (re * re + im * im) / (2.0 * PI * t as f64);
                worst_spectral = worst_spectral.max((sp[k - 1] - naive).abs());
                worst_spectral = worst_spectral.max((stationary_periodogram(&x, k).unwrap() - naive).abs());
                for time in [1, t / 3, t / 2, t] {
                    let mut acc = 0.0;
                    for lag in -2 * t as i64..=2 * t as i64 {
                        let a = (time as f64 + 0.5 + lag as f64 / 2.0).floor() as i64;
                        let b = (time as f64 + 0.5 - lag as f64 / 2.0).floor() as i64;
                        if a >= 1 && a <= t as i64 && b >= 1 && b <= t as i64 {
                            acc += v[(a - 1) as usize] * v[(b - 1) as usize] * (lambda * lag as f64).cos();
                        }
                    }
                    let naive = acc / (2.0 * PI);
                    worst_spectral = worst_spectral.max((jm.get(time - 1, k - 1) - naive).abs());
                    worst_spectral = worst_spectral.max((pre_periodogram(&x, time, lambda).unwrap() - naive).abs());
                }
            }
            let d = distance_process(&lp);
            let m = grid.m_blocks();
            for jv in 1..=m {
                for kw in 1..=n / 2 {
                    let (mut head, mut all) = (0.0, 0.0);
                    for j in 1..=m {
                        for k in 1..=kw {
                            all += lp.get(j - 1, k - 1);
                            if j <= jv {
                                head += lp.get(j - 1, k - 1);
                            }
                        }
                    }
                    let naive = head / t as f64 - jv as f64 / m as f64 * all / t as f64;
                    worst_cumsum = worst_cumsum.max((d.at(jv, kw) - naive).abs());
                }
            }
        }
        let x = simulate(&ModelSpec::StationaryAr { coeffs: vec![0.5, -0.3], sigma: 1.0 }, 256, seed).unwrap();
        let p = 10;
        let gamma = sample_autocovariance(x.values(), p);
        let ld = levinson_durbin(&gamma, p).unwrap();
        for order in 1..=p {
            let toeplitz = DMatrix::from_fn(order, order, |r, c| gamma[r.abs_diff(c)]);
            let rhs = DVector::from_fn(order, |r, _| gamma[r + 1]);
            let direct = toeplitz.lu().solve(&rhs).unwrap();
            for (a, b) in ld[order - 1].iter().zip(direct.iter()) {
                worst_levinson = worst_levinson.max((a - b).abs());
            }
        }
    }
    outcome(
        worst_spectral <= 1e-10 && worst_cumsum <= 1e-12 && worst_levinson <= 1e-9,
        format!("max errors: spectral {worst_spectral:.1e} (<=1e-10), cumsum {worst_cumsum:.1e} (<=1e-12), Levinson {worst_levinson:.1e} (<=1e-9)"),
    )
}

// 8. Algebraic invariants.
fn c8_algebraic_invariants() -> Outcome {
    let mut edges_zero = true;
    for seed in 0..20 {
        let x = simulate(&ModelSpec::PiecewiseAr1, 128, seed).unwrap();
        let d = distance_process(&local_periodogram(&x, &make_grid(128, 16).unwrap()).unwrap());
        for k in 1..=8 {
            edges_zero &= d.at(8, k) == 0.0 && d.eval(1.0, k as f64 / 8.0) == 0.0;
        }
        for j in 0..=8 {
            edges_zero &= d.eval(j as f64 / 8.0, 0.0) == 0.0;
        }
    }
    let mut worst_distance = 0.0f64;
    for model in [ModelSpec::ar1(0.5), ModelSpec::ar1(-0.9), ModelSpec::ma1(0.9), ModelSpec::white_noise()] {
        for i in 0..=20 {
            for k in 0..=20 {
                worst_distance = worst_distance.max(true_distance(&model, i as f64 / 20.0, k as f64 / 20.0).abs());
            }
        }
    }
    let mut worst_parseval = 0.0f64;
    for seed in 0..20 {
        let x = simulate(&ModelSpec::TvAr1Sqrt, 64, seed).unwrap();
        for &u in &[0.0, 0.13, 0.5, 0.77, 1.0] {
            let n = 8;
            let start = (u * 64.0f64).floor() as i64 - 3;
            let energy: f64 = (start..start + 8)
                .filter(|&i| (1..=64).contains(&i))
                .map(|i| x.values()[(i - 1) as usize].powi(2))
                .sum::<f64>()
                / n as f64;
            let total: f64 = (1..=n).map(|k| local_periodogram_at(&x, n, u, 2.0 * PI * k as f64 / n as f64)).sum();
            worst_parseval = worst_parseval.max((2.0 * PI / n as f64 * total - energy).abs());
        }
    }
    outcome(
        edges_zero && worst_distance <= 1e-8 && worst_parseval <= 1e-10,
        format!("edges exactly zero: {edges_zero}; stationary |D| max {worst_distance:.1e} (<=1e-8); Parseval {worst_parseval:.1e} (<=1e-10)"),
    )
}

// 9. White noise, T=512: bootstrap 95% critical value (B=1000), averaged
// over 20 series, within 15% of the Gaussian-limit 95% quantile on the
// same grid.
fn c9_limit_cross_check() -> Outcome {
    let t_len = 512;
    let window = lsts::sieve::default_window(t_len).unwrap();
    let grid = make_grid(t_len, window).unwrap();
    let crits: Vec<f64> = (0..20u64)
        .map(|s| {
            let x = simulate(&ModelSpec::white_noise(), t_len, 0xC9_0000 + s).unwrap();
            let cfg = TestConfig { window: Some(window), replicates: 1000, alpha: 0.05, seed: s, ..TestConfig::default() };
            run_test(&x, &cfg).unwrap().critical_value
        })
        .collect();
    let mean_crit = crits.iter().sum::<f64>() / crits.len() as f64;
    let omegas: Vec<f64> = (1..=grid.n_freqs()).map(|k| k as f64 / grid.n_freqs() as f64).collect();
    let flat = |_: f64| 1.0 / (2.0 * PI);
    let sups = limit_sup_samples(flat, grid.m_blocks(), &omegas, 100_000, 0xC9, Execution::Parallel);
    let q95 = quantile(&sups, 0.95);
    let rel = (mean_crit - q95).abs() / q95;
    outcome(rel <= 0.15, format!("N={window} M={}: mean bootstrap critical value {mean_crit:.4}, limit quantile {q95:.4}, rel diff {rel:.3} (<=0.15)", grid.m_blocks()))
}

// 10. Determinism under any thread count.
fn c10_determinism() -> Outcome {
    let x = simulate(&ModelSpec::TvAr1Sqrt, 256, 10).unwrap();
    let mut same = true;
    for estimator in [Estimator::Local, Estimator::Pre] {
        let cfg = TestConfig { window: Some(16), replicates: 200, estimator, seed: 10, ..TestConfig::default() };
        let seq = run_test(&x, &TestConfig { execution: Execution::Sequential, ..cfg.clone() }).unwrap();
        for threads in [1, 2, 3, 8] {
            same &= with_thread_count(threads, || run_test(&x, &cfg).unwrap()) == seq;
        }
        same &= run_test(&x, &cfg).unwrap() == seq;
    }
    let cfg = ExperimentConfig { runs: 60, replicates: 99, seed: 10, ..ExperimentConfig::new(ModelSpec::ScaledNoise, 128, 16) };
    let strip = |mut r: ExperimentReport| {
        r.wall_time_secs = 0.0;
        r.config.execution = Execution::Parallel;
        r
    };
    let seq = strip(run_experiment(&ExperimentConfig { execution: Execution::Sequential, ..cfg.clone() }).unwrap());
    for threads in [1, 2, 5] {
        same &= strip(with_thread_count(threads, || run_experiment(&cfg).unwrap())) == seq;
    }
    same &= simulate(&ModelSpec::ar1(0.5), 128, 7).unwrap() == simulate(&ModelSpec::ar1(0.5), 128, 7).unwrap();
    outcome(same, format!("run_test (local, pre) and run_experiment identical across sequential and 1/2/3/5/8 threads: {same}"))
}

type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("C1", "level AR(1) phi=0.5 T=128 N=16 5%", c1_level_ar05),
        ("C2", "level white noise T=256 N=16 10%", c2_level_white),
        ("C3", "power (1+t/T)Z_t T=128 N=16 5%", c3_power_scaled),
        ("C4", "power piecewise AR(1) T=256 N=16 5%", c4_power_piecewise),
        ("C5", "pre-periodogram loses power vs local", c5_estimator_ranking),
        ("C6", "robustness to N at T=256", c6_window_robustness),
        ("C7", "oracle equivalence", c7_oracle_equivalence),
        ("C8", "algebraic invariants", c8_algebraic_invariants),
        ("C9", "bootstrap vs Gaussian limit quantile", c9_limit_cross_check),
        ("C10", "determinism across thread counts", c10_determinism),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| f == id) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("[{verdict}] {id:<3} {name}: {} ({:.1}s)", o.detail, start.elapsed().as_secs_f64());
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
