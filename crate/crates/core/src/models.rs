//! Generative models, Gaussian simulation and closed-form time-varying
//! spectra used as oracles.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::quadrature::{integrate, integrate_with_breaks};
use crate::rng::{standard_normals, Stream};
use crate::{Error, Result};

/// Smallest series length accepted by [`simulate`].
pub const MIN_SIM_LENGTH: usize = 8;

/// Warm-up steps discarded before a stationary recursion is observed.
pub const BURN_IN: usize = 1000;

const CAUSAL_MARGIN: f64 = 1e-9;

/// A univariate, finite-valued time series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimeSeries {
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { values })
    }

    pub(crate) fn from_finite(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.values
    }

    /// First differences `x_t - x_{t-1}`; one observation shorter.
    pub fn difference(&self) -> TimeSeries {
        Self::from_finite(self.values.windows(2).map(|w| w[1] - w[0]).collect())
    }

    /// The first `len` observations.
    pub fn truncated(&self, len: usize) -> TimeSeries {
        Self::from_finite(self.values[..len.min(self.len())].to_vec())
    }
}

impl AsRef<[f64]> for TimeSeries {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Gaussian (locally) stationary models.
///
/// The four time-varying variants are the standard power alternatives:
///
/// | variant        | recursion                                                  |
/// |----------------|------------------------------------------------------------|
/// | `ScaledNoise`  | `X_t = (1 + t/T) Z_t`                                      |
/// | `TvAr1Sqrt`    | `X_t = -0.9 sqrt(t/T) X_{t-1} + Z_t`                       |
/// | `PiecewiseAr1` | `X_t = 0.5 X_{t-1} + Z_t` for `t <= T/2`, `-0.5` after     |
/// | `TvMa1Lag`     | `X_t = Z_t + 0.8 cos(1.5 - cos(4 pi t/T)) Z_{t-q}`         |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    /// `X_t = sum_j a_j X_{t-j} + sigma Z_t`.
    StationaryAr { coeffs: Vec<f64>, sigma: f64 },
    /// `X_t = sigma (Z_t + sum_j theta_j Z_{t-j})`.
    StationaryMa { coeffs: Vec<f64>, sigma: f64 },
    ScaledNoise,
    TvAr1Sqrt,
    PiecewiseAr1,
    TvMa1Lag { q: usize },
}

impl ModelSpec {
    pub fn white_noise() -> Self {
        Self::StationaryMa { coeffs: Vec::new(), sigma: 1.0 }
    }

    pub fn ar1(phi: f64) -> Self {
        Self::StationaryAr { coeffs: vec![phi], sigma: 1.0 }
    }

    pub fn ma1(theta: f64) -> Self {
        Self::StationaryMa { coeffs: vec![theta], sigma: 1.0 }
    }

    pub fn is_stationary(&self) -> bool {
        matches!(self, Self::StationaryAr { .. } | Self::StationaryMa { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::StationaryAr { coeffs, sigma } => {
                check_sigma(*sigma)?;
                check_coeffs(coeffs)?;
                let modulus = min_root_modulus(coeffs);
                if modulus <= 1.0 + CAUSAL_MARGIN {
                    return Err(Error::NonCausal(modulus));
                }
                Ok(())
            }
            Self::StationaryMa { coeffs, sigma } => {
                check_sigma(*sigma)?;
                check_coeffs(coeffs)
            }
            Self::TvMa1Lag { q } if *q == 0 => Err(Error::BadLag),
            _ => Ok(()),
        }
    }

    /// Short human-readable name.
    pub fn label(&self) -> String {
        fn list(c: &[f64]) -> String {
            c.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",")
        }
        match self {
            Self::StationaryAr { coeffs, sigma } => format!("AR[{}] sigma={sigma}", list(coeffs)),
            Self::StationaryMa { coeffs, sigma } if coeffs.is_empty() => format!("white noise sigma={sigma}"),
            Self::StationaryMa { coeffs, sigma } => format!("MA[{}] sigma={sigma}", list(coeffs)),
            Self::ScaledNoise => "(1+t/T) Z_t".into(),
            Self::TvAr1Sqrt => "-0.9 sqrt(t/T) AR(1)".into(),
            Self::PiecewiseAr1 => "piecewise AR(1) 0.5 | -0.5".into(),
            Self::TvMa1Lag { q } => format!("tvMA lag {q}"),
        }
    }

    // Points in rescaled time where the spectrum jumps.
    fn u_breaks(&self) -> &'static [f64] {
        match self {
            Self::PiecewiseAr1 => &[0.5],
            _ => &[],
        }
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::BadSigma(sigma))
    }
}

fn check_coeffs(coeffs: &[f64]) -> Result<()> {
    if coeffs.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter("coefficients must be finite".into()))
    }
}

/// Smallest modulus among the roots of `1 - sum_j a_j z^j`, via the
/// eigenvalues of the companion matrix. Infinite for an empty or all-zero
/// coefficient vector.
pub fn min_root_modulus(coeffs: &[f64]) -> f64 {
    let p = coeffs.iter().rposition(|&c| c != 0.0).map_or(0, |i| i + 1);
    if p == 0 {
        return f64::INFINITY;
    }
    let mut companion = DMatrix::<f64>::zeros(p, p);
    for (j, &a) in coeffs[..p].iter().enumerate() {
        companion[(0, j)] = a;
    }
    for i in 1..p {
        companion[(i, i - 1)] = 1.0;
    }
    let spectral_radius = companion
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max);
    if spectral_radius == 0.0 {
        f64::INFINITY
    } else {
        1.0 / spectral_radius
    }
}

/// Simulates `t_len` observations driven by i.i.d. standard normal
/// innovations. Deterministic in `(model, t_len, seed)`.
pub fn simulate(model: &ModelSpec, t_len: usize, seed: u64) -> Result<TimeSeries> {
    model.validate()?;
    if t_len < MIN_SIM_LENGTH {
        return Err(Error::TooShort { len: t_len, min: MIN_SIM_LENGTH });
    }
    let n = t_len as f64;
    let values = match model {
        ModelSpec::StationaryAr { coeffs, sigma } => {
            let z = standard_normals(seed, Stream::Simulation, BURN_IN + t_len);
            let mut x = vec![0.0; BURN_IN + t_len];
            for t in 0..x.len() {
                let ar: f64 = coeffs
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j < t)
                    .map(|(j, a)| a * x[t - 1 - j])
                    .sum();
                x[t] = ar + sigma * z[t];
            }
            x.split_off(BURN_IN)
        }
        ModelSpec::StationaryMa { coeffs, sigma } => {
            let z = standard_normals(seed, Stream::Simulation, BURN_IN + t_len);
            (BURN_IN..BURN_IN + t_len)
                .map(|t| {
                    let ma: f64 = coeffs.iter().enumerate().map(|(j, th)| th * z[t - 1 - j]).sum();
                    sigma * (z[t] + ma)
                })
                .collect()
        }
        ModelSpec::ScaledNoise => {
            let z = standard_normals(seed, Stream::Simulation, t_len);
            (1..=t_len).map(|t| (1.0 + t as f64 / n) * z[t - 1]).collect()
        }
        ModelSpec::TvAr1Sqrt => {
            let z = standard_normals(seed, Stream::Simulation, t_len);
            let mut prev = 0.0;
            (1..=t_len)
                .map(|t| {
                    prev = -0.9 * (t as f64 / n).sqrt() * prev + z[t - 1];
                    prev
                })
                .collect()
        }
        ModelSpec::PiecewiseAr1 => {
            let z = standard_normals(seed, Stream::Simulation, BURN_IN + t_len);
            let mut prev = 0.0;
            for &e in &z[..BURN_IN] {
                prev = 0.5 * prev + e;
            }
            (1..=t_len)
                .map(|t| {
                    let phi = if t <= t_len / 2 { 0.5 } else { -0.5 };
                    prev = phi * prev + z[BURN_IN + t - 1];
                    prev
                })
                .collect()
        }
        ModelSpec::TvMa1Lag { q } => {
            // z[i] holds Z_{i + 1 - q}
            let z = standard_normals(seed, Stream::Simulation, q + t_len);
            (1..=t_len)
                .map(|t| {
                    let b = tv_ma_coefficient(t as f64 / n);
                    z[t + q - 1] + b * z[t - 1]
                })
                .collect()
        }
    };
    Ok(TimeSeries::from_finite(values))
}

fn tv_ma_coefficient(u: f64) -> f64 {
    0.8 * (1.5 - (4.0 * PI * u).cos()).cos()
}

// |1 - sum_j a_j e^{-i lambda j}|^2
pub(crate) fn ar_transfer_sq(coeffs: &[f64], lambda: f64) -> f64 {
    let (mut re, mut im) = (1.0, 0.0);
    for (j, a) in coeffs.iter().enumerate() {
        let w = lambda * (j + 1) as f64;
        re -= a * w.cos();
        im += a * w.sin();
    }
    re * re + im * im
}

fn ma_transfer_sq(coeffs: &[f64], lambda: f64) -> f64 {
    let (mut re, mut im) = (1.0, 0.0);
    for (j, th) in coeffs.iter().enumerate() {
        let w = lambda * (j + 1) as f64;
        re += th * w.cos();
        im -= th * w.sin();
    }
    re * re + im * im
}

/// Closed-form time-varying spectral density `f(u, lambda)`.
pub fn true_spectral_density(model: &ModelSpec, u: f64, lambda: f64) -> f64 {
    let two_pi = 2.0 * PI;
    match model {
        ModelSpec::StationaryAr { coeffs, sigma } => sigma * sigma / (two_pi * ar_transfer_sq(coeffs, lambda)),
        ModelSpec::StationaryMa { coeffs, sigma } => sigma * sigma * ma_transfer_sq(coeffs, lambda) / two_pi,
        ModelSpec::ScaledNoise => (1.0 + u).powi(2) / two_pi,
        ModelSpec::TvAr1Sqrt => 1.0 / (two_pi * ar_transfer_sq(&[-0.9 * u.sqrt()], lambda)),
        ModelSpec::PiecewiseAr1 => {
            let phi = if u <= 0.5 { 0.5 } else { -0.5 };
            1.0 / (two_pi * ar_transfer_sq(&[phi], lambda))
        }
        ModelSpec::TvMa1Lag { q } => {
            let b = tv_ma_coefficient(u);
            let w = lambda * *q as f64;
            ((1.0 + b * w.cos()).powi(2) + (b * w.sin()).powi(2)) / two_pi
        }
    }
}

const INNER_TOL: f64 = 1e-13;
const OUTER_TOL: f64 = 1e-11;

/// Distance between the time-localised integrated spectrum and its
/// time-averaged counterpart:
///
/// `D(v, w) = (1/2pi) [ int_0^v int_0^{pi w} f du dl - v int_0^{pi w} int_0^1 f du dl ]`.
///
/// Zero for every stationary model and on the edges `v = 1`, `w = 0`.
pub fn true_distance(model: &ModelSpec, v: f64, omega: f64) -> f64 {
    let upper = PI * omega;
    if upper == 0.0 {
        return 0.0;
    }
    let band = |u: f64| integrate(|l| true_spectral_density(model, u, l), 0.0, upper, INNER_TOL);
    let breaks = model.u_breaks();
    let head = integrate_with_breaks(band, 0.0, v, breaks, OUTER_TOL);
    let whole = if v == 1.0 {
        head
    } else {
        integrate_with_breaks(band, 0.0, 1.0, breaks, OUTER_TOL)
    };
    (head - v * whole) / (2.0 * PI)
}
