//! AR-sieve bootstrap: Yule–Walker fitting, Whittle-AIC order selection,
//! pseudo-series generation and the bootstrap stationarity test.

use std::f64::consts::PI;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::empirical::{distance_process, pre_distance_process};
use crate::exec::{map_indexed, Execution};
use crate::models::ar_transfer_sq;
use crate::rng::{standard_normals, Stream};
use crate::spectral::{local_periodogram, stationary_periodogram_all, SpectralGrid};
use crate::{Error, Result, TimeSeries};

/// Fitted AR(p) model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArFit {
    pub order: usize,
    /// `a_1..a_p` in `X_t = sum_j a_j X_{t-j} + z_t`.
    pub coeffs: Vec<f64>,
    /// Residual variance, mean-centred, divided by `T - p`.
    pub sigma2: f64,
    /// `(p, criterion)` for every candidate order examined.
    pub aic_trace: Vec<(usize, f64)>,
}

/// Biased sample autocovariances `gamma(0..=max_lag)` of the mean-centred series.
pub fn sample_autocovariance(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = x.iter().map(|v| v - mean).collect();
    (0..=max_lag)
        .map(|h| c[..n - h].iter().zip(&c[h..]).map(|(a, b)| a * b).sum::<f64>() / n as f64)
        .collect()
}

/// Levinson–Durbin recursion on `gamma(0..=p_max)`.
///
/// Returns the coefficient vector for every order `1..=p_max` (index
/// `p - 1`). Fails if a reflection coefficient reaches the unit circle,
/// which only happens for a singular autocovariance sequence.
pub fn levinson_durbin(autocov: &[f64], p_max: usize) -> Result<Vec<Vec<f64>>> {
    let g0 = autocov[0];
    if g0 <= 0.0 {
        return Err(Error::DegenerateSeries);
    }
    let mut path = Vec::with_capacity(p_max);
    let mut phi: Vec<f64> = Vec::with_capacity(p_max);
    let mut err = g0;
    for m in 1..=p_max {
        let acc: f64 = autocov[m] - phi.iter().enumerate().map(|(j, a)| a * autocov[m - 1 - j]).sum::<f64>();
        let kappa = acc / err;
        if !kappa.is_finite() || kappa.abs() >= 1.0 {
            return Err(Error::DegenerateSeries);
        }
        let prev = phi.clone();
        for j in 0..prev.len() {
            phi[j] = prev[j] - kappa * prev[prev.len() - 1 - j];
        }
        phi.push(kappa);
        err *= 1.0 - kappa * kappa;
        path.push(phi.clone());
    }
    Ok(path)
}

// Relative floor below which gamma(0) counts as zero.
const DEGENERATE_REL: f64 = 1e-14;

fn checked_autocov(x: &[f64], p_max: usize) -> Result<Vec<f64>> {
    let gamma = sample_autocovariance(x, p_max);
    let scale = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    if gamma[0] <= DEGENERATE_REL * scale || gamma[0] == 0.0 {
        return Err(Error::DegenerateSeries);
    }
    Ok(gamma)
}

/// Mean-centred residual variance over `t = p+1..=T`, divisor `T - p`.
pub fn residual_variance(x: &[f64], coeffs: &[f64]) -> f64 {
    let p = coeffs.len();
    let resid: Vec<f64> = (p..x.len())
        .map(|t| x[t] - coeffs.iter().enumerate().map(|(j, a)| a * x[t - 1 - j]).sum::<f64>())
        .collect();
    let n = resid.len() as f64;
    let mean = resid.iter().sum::<f64>() / n;
    resid.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / n
}

fn check_order(t: usize, p: usize) -> Result<()> {
    if p == 0 || 2 * p >= t {
        return Err(Error::BadOrderRange { p_min: p, p_max: p, t });
    }
    Ok(())
}

/// Yule–Walker AR(p) fit.
pub fn yule_walker(x: &TimeSeries, p: usize) -> Result<ArFit> {
    check_order(x.len(), p)?;
    let gamma = checked_autocov(x.values(), p)?;
    let coeffs = levinson_durbin(&gamma, p)?.pop().expect("p >= 1");
    let sigma2 = residual_variance(x.values(), &coeffs);
    if sigma2 <= 0.0 {
        return Err(Error::DegenerateSeries);
    }
    Ok(ArFit { order: p, coeffs, sigma2, aic_trace: Vec::new() })
}

/// `sigma^2 / (2 pi |1 - sum_j a_j e^{-i lambda j}|^2)`.
pub fn ar_spectral_density(fit: &ArFit, lambda: f64) -> f64 {
    fit.sigma2 / (2.0 * PI * ar_transfer_sq(&fit.coeffs, lambda))
}

/// Whittle criterion `(1/T) sum_k [log f(l_k) + I(l_k)/f(l_k)] + p/T` over
/// `l_k = 2 pi k / T`, `k = 1..=floor(T/2)`, given `I(l_k)` in `periodogram`.
pub fn whittle_aic(fit: &ArFit, periodogram: &[f64], t_len: usize) -> f64 {
    let t = t_len as f64;
    let sum: f64 = periodogram
        .iter()
        .enumerate()
        .map(|(i, &pg)| {
            let f = ar_spectral_density(fit, 2.0 * PI * (i + 1) as f64 / t);
            f.ln() + pg / f
        })
        .sum();
    sum / t + fit.order as f64 / t
}

/// Fits every order in `p_min..=p_max` and returns the Whittle-AIC
/// minimiser; ties go to the smaller order.
pub fn aic_select(x: &TimeSeries, p_min: usize, p_max: usize) -> Result<ArFit> {
    let t = x.len();
    if p_min == 0 || p_min > p_max || 4 * p_max >= t {
        return Err(Error::BadOrderRange { p_min, p_max, t });
    }
    let gamma = checked_autocov(x.values(), p_max)?;
    let path = levinson_durbin(&gamma, p_max)?;
    let periodogram = stationary_periodogram_all(x);
    let mut best: Option<ArFit> = None;
    let mut best_aic = f64::INFINITY;
    let mut trace = Vec::with_capacity(p_max - p_min + 1);
    for p in p_min..=p_max {
        let coeffs = path[p - 1].clone();
        let sigma2 = residual_variance(x.values(), &coeffs);
        if sigma2 <= 0.0 {
            return Err(Error::DegenerateSeries);
        }
        let fit = ArFit { order: p, coeffs, sigma2, aic_trace: Vec::new() };
        let aic = whittle_aic(&fit, &periodogram, t);
        trace.push((p, aic));
        if aic < best_aic {
            best_aic = aic;
            best = Some(fit);
        }
    }
    let mut fit = best.ok_or(Error::DegenerateSeries)?;
    fit.aic_trace = trace;
    Ok(fit)
}

/// Pseudo-series from the fitted recursion with the given standard normal
/// innovations (scaled by `sqrt(sigma2)` here): the first `p` values are
/// copied from `x`, then `X*_t = sum_j a_j X*_{t-j} + sigma Z*_t`.
pub fn bootstrap_with_innovations(x: &TimeSeries, fit: &ArFit, innovations: &[f64]) -> TimeSeries {
    let p = fit.order;
    let t_len = x.len();
    let sigma = fit.sigma2.sqrt();
    let mut out = Vec::with_capacity(t_len);
    out.extend_from_slice(&x.values()[..p.min(t_len)]);
    for t in p..t_len {
        let ar: f64 = fit.coeffs.iter().enumerate().map(|(j, a)| a * out[t - 1 - j]).sum();
        out.push(ar + sigma * innovations[t - p]);
    }
    TimeSeries::from_finite(out)
}

/// One AR-sieve bootstrap pseudo-series, deterministic in `seed`.
pub fn bootstrap_replicate(x: &TimeSeries, fit: &ArFit, seed: u64) -> TimeSeries {
    let z = standard_normals(seed, Stream::Bootstrap, x.len().saturating_sub(fit.order));
    bootstrap_with_innovations(x, fit, &z)
}

/// Which spectral estimator the distance process is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    #[default]
    Local,
    Pre,
}

impl std::str::FromStr for Estimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "local" => Ok(Self::Local),
            "pre" => Ok(Self::Pre),
            other => Err(Error::InvalidParameter(format!("unknown estimator '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    /// Block length `N`; chosen by [`default_window`] when `None`.
    pub window: Option<usize>,
    /// Bootstrap replicates `B`.
    pub replicates: usize,
    pub alpha: f64,
    /// AIC search range; [`default_order_range`] when `None`.
    pub order_range: Option<(usize, usize)>,
    pub estimator: Estimator,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            window: None,
            replicates: 200,
            alpha: 0.05,
            order_range: None,
            estimator: Estimator::Local,
            seed: 0,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// `sqrt(T) sup |D_T|` of the observed series.
    pub statistic: f64,
    /// Bootstrap sup-statistics in replicate order.
    pub replicates: Vec<f64>,
    pub critical_value: f64,
    pub p_value: f64,
    pub reject: bool,
    pub alpha: f64,
    pub estimator: Estimator,
    /// Sample size after truncation to a multiple of `N`.
    pub t_len: usize,
    /// Observations dropped from the tail.
    pub truncated: usize,
    /// `N` and `M`; `None` for the pre-periodogram estimator.
    pub window: Option<usize>,
    pub blocks: Option<usize>,
    pub fit: ArFit,
    pub seed: u64,
}

impl TestResult {
    /// Critical value `(D*)_{floor((1 - alpha) B)}` from the stored replicates.
    pub fn critical_value_at(&self, alpha: f64) -> f64 {
        critical_value(&self.replicates, alpha)
    }

    pub fn rejects_at(&self, alpha: f64) -> bool {
        self.statistic > self.critical_value_at(alpha)
    }
}

/// 1-based rank `floor((1 - alpha) B)`, clamped to `1..=B`.
pub fn order_statistic_index(alpha: f64, replicates: usize) -> usize {
    // the nudge keeps e.g. 0.95 * 200 from flooring to 189
    (((1.0 - alpha) * replicates as f64 + 1e-9).floor() as usize).clamp(1, replicates)
}

pub fn critical_value(replicates: &[f64], alpha: f64) -> f64 {
    let mut sorted = replicates.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted[order_statistic_index(alpha, sorted.len()) - 1]
}

/// `(1 + #{replicates >= statistic}) / (B + 1)`.
pub fn bootstrap_p_value(statistic: f64, replicates: &[f64]) -> f64 {
    let exceed = replicates.iter().filter(|&&r| r >= statistic).count();
    (1 + exceed) as f64 / (replicates.len() + 1) as f64
}

/// Block length for a series of length `t_len`: the even `N` with
/// `sqrt(T) <= N <= T^(3/4)` that wastes the fewest observations, ties
/// broken by closeness to `T^(5/8)`.
pub fn default_window(t_len: usize) -> Result<usize> {
    let t = t_len as f64;
    let lo = (t.sqrt().ceil() as usize).max(4);
    let hi = t.powf(0.75).floor() as usize;
    let target = t.powf(0.625);
    (lo..=hi)
        .filter(|n| n % 2 == 0 && t_len / n >= 2)
        .min_by(|a, b| {
            let key = |n: &usize| (t_len % n, (*n as f64 - target).abs());
            let (ra, da) = key(a);
            let (rb, db) = key(b);
            ra.cmp(&rb).then(da.total_cmp(&db))
        })
        .ok_or(Error::TooShort { len: t_len, min: 16 })
}

/// `(1, min(ceil(10 log10 T), floor(T/8)))`.
pub fn default_order_range(t_len: usize) -> (usize, usize) {
    let by_log = (10.0 * (t_len as f64).log10()).ceil() as usize;
    (1, by_log.min(t_len / 8).max(1))
}

fn sup_statistic(x: &TimeSeries, grid: Option<&SpectralGrid>) -> Result<f64> {
    match grid {
        Some(g) => Ok(distance_process(&local_periodogram(x, g)?).sup_stat()),
        None => Ok(pre_distance_process(x)?.sup_stat()),
    }
}

/// Bootstrap test of the null hypothesis that the time-varying spectrum
/// does not depend on time.
///
/// Replicate `i` draws its innovations from seed `cfg.seed ^ i`, so the
/// result is identical for any thread count.
pub fn run_test(x: &TimeSeries, cfg: &TestConfig) -> Result<TestResult> {
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0,1), got {}", cfg.alpha)));
    }
    if cfg.replicates == 0 {
        return Err(Error::InvalidParameter("replicates must be positive".into()));
    }
    let (series, grid) = match cfg.estimator {
        Estimator::Local => {
            let n = match cfg.window {
                Some(n) => n,
                None => default_window(x.len())?,
            };
            if n < 4 || n % 2 != 0 {
                return Err(Error::BadWindow(n));
            }
            let usable = n * (x.len() / n);
            if usable < x.len() {
                warn!("truncating series from {} to {} observations (N = {n})", x.len(), usable);
            }
            let grid = SpectralGrid::new(usable, n)?;
            (x.truncated(usable), Some(grid))
        }
        Estimator::Pre => (x.clone(), None),
    };
    let t_len = series.len();
    let (p_min, p_max) = cfg.order_range.unwrap_or_else(|| default_order_range(t_len));
    let fit = aic_select(&series, p_min, p_max)?;
    let statistic = sup_statistic(&series, grid.as_ref())?;

    let replicates: Vec<f64> = map_indexed(cfg.execution, cfg.replicates, |i| {
        let pseudo = bootstrap_replicate(&series, &fit, cfg.seed ^ i as u64);
        sup_statistic(&pseudo, grid.as_ref())
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let critical_value = critical_value(&replicates, cfg.alpha);
    let p_value = bootstrap_p_value(statistic, &replicates);
    Ok(TestResult {
        statistic,
        reject: statistic > critical_value,
        critical_value,
        p_value,
        replicates,
        alpha: cfg.alpha,
        estimator: cfg.estimator,
        t_len,
        truncated: x.len() - t_len,
        window: grid.map(|g| g.n_window()),
        blocks: grid.map(|g| g.m_blocks()),
        fit,
        seed: cfg.seed,
    })
}
