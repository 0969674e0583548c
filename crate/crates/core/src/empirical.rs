//! Empirical spectral distance processes and their sup-statistics.
//!
//! `D_T(v, w)` depends on `(v, w)` only through `floor(vM)` and
//! `floor(wN/2)`, so the process is stored at the grid corners
//! `(j/M, 2k/N)` and the supremum over `[0,1]^2` is the maximum over that
//! matrix (the remaining corners `v = 0` or `w = 0` are identically zero).

use std::f64::consts::PI;
use std::io::{self, Write};

use crate::exec::{map_indexed, Execution};
use crate::quadrature::integrate;
use crate::rng::{derive_seed, standard_normals, Stream};
use crate::spectral::{pre_periodogram_matrix, LocalPeriodogramMatrix, SpectralGrid};
use crate::{Error, Result, TimeSeries};

/// Minimum series length for [`pre_distance_process`].
pub const MIN_PRE_LENGTH: usize = 8;

/// A matrix surface over rescaled time (rows) and frequency (columns).
pub trait Surface {
    fn n_rows(&self) -> usize;
    fn n_cols(&self) -> usize;
    /// Value at 0-based row `j` and column `k`.
    fn value(&self, j: usize, k: usize) -> f64;
    fn row_label(&self, j: usize) -> f64;
    fn col_label(&self, k: usize) -> f64;

    /// Writes the surface as CSV: a header of column labels, then one row
    /// per time point led by its row label.
    fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "u\\lambda")?;
        for k in 0..self.n_cols() {
            write!(out, ",{}", self.col_label(k))?;
        }
        writeln!(out)?;
        for j in 0..self.n_rows() {
            write!(out, "{}", self.row_label(j))?;
            for k in 0..self.n_cols() {
                write!(out, ",{}", self.value(j, k))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

// values[j][k] = scale * (C(j,k) - (j/rows) C(rows,k)) with C the 2-D
// cumulative sum of the entries.
fn centred_cumulative(rows: usize, cols: usize, scale: f64, entry: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut cum = vec![0.0; rows * cols];
    for j in 0..rows {
        let mut run = 0.0;
        for k in 0..cols {
            run += entry(j, k);
            let above = if j > 0 { cum[(j - 1) * cols + k] } else { 0.0 };
            cum[j * cols + k] = above + run;
        }
    }
    let total = cum[(rows - 1) * cols..].to_vec();
    let mut values = vec![0.0; rows * cols];
    for j in 0..rows {
        let frac = (j + 1) as f64 / rows as f64;
        for k in 0..cols {
            values[j * cols + k] = scale * (cum[j * cols + k] - frac * total[k]);
        }
    }
    values
}

fn sup_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// `D_T` from the local periodogram at the grid corners `(j/M, 2k/N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceProcess {
    values: Vec<f64>,
    grid: SpectralGrid,
    sup_stat: f64,
}

impl DistanceProcess {
    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    /// `D_T(j/M, 2k/N)` for 1-based `j`, `k`.
    pub fn at(&self, j: usize, k: usize) -> f64 {
        self.values[(j - 1) * self.grid.n_freqs() + (k - 1)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `sqrt(T) * max |D_T|`.
    pub fn sup_stat(&self) -> f64 {
        self.sup_stat
    }

    /// `D_T(v, w)` at an arbitrary point of the unit square.
    pub fn eval(&self, v: f64, omega: f64) -> f64 {
        let j = ((v * self.grid.m_blocks() as f64).floor() as usize).min(self.grid.m_blocks());
        let k = ((omega * self.grid.n_freqs() as f64).floor() as usize).min(self.grid.n_freqs());
        if j == 0 || k == 0 {
            0.0
        } else {
            self.at(j, k)
        }
    }
}

impl Surface for DistanceProcess {
    fn n_rows(&self) -> usize {
        self.grid.m_blocks()
    }
    fn n_cols(&self) -> usize {
        self.grid.n_freqs()
    }
    fn value(&self, j: usize, k: usize) -> f64 {
        self.values[j * self.grid.n_freqs() + k]
    }
    fn row_label(&self, j: usize) -> f64 {
        self.grid.midpoint(j + 1)
    }
    fn col_label(&self, k: usize) -> f64 {
        self.grid.frequency(k + 1)
    }
}

pub fn distance_process(periodogram: &LocalPeriodogramMatrix) -> DistanceProcess {
    let grid = *periodogram.grid();
    let t = grid.t_len() as f64;
    let values = centred_cumulative(grid.m_blocks(), grid.n_freqs(), 1.0 / t, |j, k| periodogram.get(j, k));
    let sup_stat = t.sqrt() * sup_abs(&values);
    DistanceProcess { values, grid, sup_stat }
}

/// Pre-periodogram analogue of [`DistanceProcess`] on the `(j/T, 2k/T)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PreDistanceProcess {
    values: Vec<f64>,
    t_len: usize,
    n_freqs: usize,
    sup_stat: f64,
}

impl PreDistanceProcess {
    pub fn t_len(&self) -> usize {
        self.t_len
    }

    pub fn n_freqs(&self) -> usize {
        self.n_freqs
    }

    /// Value at `(j/T, 2k/T)` for 1-based `j`, `k`.
    pub fn at(&self, j: usize, k: usize) -> f64 {
        self.values[(j - 1) * self.n_freqs + (k - 1)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sup_stat(&self) -> f64 {
        self.sup_stat
    }
}

impl Surface for PreDistanceProcess {
    fn n_rows(&self) -> usize {
        self.t_len
    }
    fn n_cols(&self) -> usize {
        self.n_freqs
    }
    fn value(&self, j: usize, k: usize) -> f64 {
        self.values[j * self.n_freqs + k]
    }
    fn row_label(&self, j: usize) -> f64 {
        (j + 1) as f64 / self.t_len as f64
    }
    fn col_label(&self, k: usize) -> f64 {
        2.0 * PI * (k + 1) as f64 / self.t_len as f64
    }
}

pub fn pre_distance_process(x: &TimeSeries) -> Result<PreDistanceProcess> {
    if x.len() < MIN_PRE_LENGTH {
        return Err(Error::TooShort { len: x.len(), min: MIN_PRE_LENGTH });
    }
    let j_matrix = pre_periodogram_matrix(x);
    let t_len = x.len();
    let n_freqs = j_matrix.n_freqs();
    let t = t_len as f64;
    let values = centred_cumulative(t_len, n_freqs, 1.0 / (t * t), |j, k| j_matrix.get(j, k));
    let sup_stat = t.sqrt() * sup_abs(&values);
    Ok(PreDistanceProcess { values, t_len, n_freqs, sup_stat })
}

const COV_TOL: f64 = 1e-12;

/// Covariance of the Gaussian limit under stationarity with spectral
/// density `f`:
/// `(min(v1, v2) - v1 v2) / (2 pi) * int_0^{pi min(w1, w2)} f(l)^2 dl`.
pub fn limit_covariance_h0<F: Fn(f64) -> f64>(f: F, v1: f64, omega1: f64, v2: f64, omega2: f64) -> f64 {
    let bridge = v1.min(v2) - v1 * v2;
    if bridge == 0.0 {
        return 0.0;
    }
    let upper = PI * omega1.min(omega2);
    bridge / (2.0 * PI) * integrate(|l| f(l).powi(2), 0.0, upper, COV_TOL)
}

/// Draws of `max |G|` for the H0 Gaussian limit restricted to the points
/// `(j/rows, omegas[k])`, `j = 1..=rows`.
///
/// The covariance factorises into a Brownian bridge in `v` and a Gaussian
/// process with variance `(1/2pi) int_0^{pi w} f^2` in `w`, so each draw is
/// a bridge-corrected Brownian sheet built from independent increments.
/// `omegas` must be increasing in `(0, 1]`.
pub fn limit_sup_samples<F: Fn(f64) -> f64>(
    f: F,
    rows: usize,
    omegas: &[f64],
    draws: usize,
    seed: u64,
    execution: Execution,
) -> Vec<f64> {
    let cols = omegas.len();
    let mut prev = 0.0;
    let mut edge = 0.0;
    let increment_sd: Vec<f64> = omegas
        .iter()
        .map(|&w| {
            let piece = integrate(|l| f(l).powi(2), PI * prev, PI * w, COV_TOL) / (2.0 * PI);
            prev = w;
            edge += piece;
            (piece / rows as f64).sqrt()
        })
        .collect();
    map_indexed(execution, draws, |i| {
        let z = standard_normals(derive_seed(seed, i as u64), Stream::LimitProcess, rows * cols);
        let mut sheet = vec![0.0; rows * cols];
        for j in 0..rows {
            let mut run = 0.0;
            for k in 0..cols {
                run += increment_sd[k] * z[j * cols + k];
                let above = if j > 0 { sheet[(j - 1) * cols + k] } else { 0.0 };
                sheet[j * cols + k] = above + run;
            }
        }
        let last = &sheet[(rows - 1) * cols..];
        let mut sup = 0.0_f64;
        for j in 0..rows {
            let v = (j + 1) as f64 / rows as f64;
            for k in 0..cols {
                sup = sup.max((sheet[j * cols + k] - v * last[k]).abs());
            }
        }
        sup
    })
}

/// Empirical `q`-quantile as the order statistic `ceil(q n)`.
pub fn quantile(samples: &[f64], q: f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let idx = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[idx - 1]
}
