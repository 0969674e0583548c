//! Local periodogram over the block/frequency grid, the pre-periodogram and
//! the full-sample periodogram.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::{Error, Result, TimeSeries};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn forward_fft(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

/// Decomposition `T = N * M` into `M` disjoint blocks of even length `N`.
///
/// Block `j` (1-based) has midpoint `u_j = (N(j-1) + N/2) / T`; the block
/// frequencies are `lambda_k = 2 pi k / N` for `k = 1..=N/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SpectralGrid {
    t_len: usize,
    n_window: usize,
    m_blocks: usize,
}

impl SpectralGrid {
    pub fn new(t_len: usize, n_window: usize) -> Result<Self> {
        if n_window < 4 || !n_window.is_multiple_of(2) {
            return Err(Error::BadWindow(n_window));
        }
        if !t_len.is_multiple_of(n_window) {
            return Err(Error::NonDivisible { t: t_len, n: n_window });
        }
        let m_blocks = t_len / n_window;
        if m_blocks < 2 {
            return Err(Error::TooFewBlocks(m_blocks));
        }
        Ok(Self { t_len, n_window, m_blocks })
    }

    pub fn t_len(&self) -> usize {
        self.t_len
    }

    pub fn n_window(&self) -> usize {
        self.n_window
    }

    pub fn m_blocks(&self) -> usize {
        self.m_blocks
    }

    /// Number of frequencies per block, `N/2`.
    pub fn n_freqs(&self) -> usize {
        self.n_window / 2
    }

    /// Midpoint index `t_j` of block `j` (1-based).
    pub fn block_center(&self, j: usize) -> usize {
        self.n_window * (j - 1) + self.n_window / 2
    }

    /// Midpoint `u_j` of block `j` (1-based).
    pub fn midpoint(&self, j: usize) -> f64 {
        self.block_center(j) as f64 / self.t_len as f64
    }

    /// Fourier frequency `lambda_k` (1-based).
    pub fn frequency(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.n_window as f64
    }

    pub fn midpoints(&self) -> Vec<f64> {
        (1..=self.m_blocks).map(|j| self.midpoint(j)).collect()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (1..=self.n_freqs()).map(|k| self.frequency(k)).collect()
    }
}

pub fn make_grid(t_len: usize, n_window: usize) -> Result<SpectralGrid> {
    SpectralGrid::new(t_len, n_window)
}

/// `M x N/2` matrix of `I_N(u_j, lambda_k)`, row-major by block.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPeriodogramMatrix {
    values: Vec<f64>,
    grid: SpectralGrid,
}

impl LocalPeriodogramMatrix {
    /// Builds a matrix from raw row-major entries, mainly for tests and
    /// externally computed periodograms.
    pub fn from_values(grid: SpectralGrid, values: Vec<f64>) -> Result<Self> {
        let expected = grid.m_blocks() * grid.n_freqs();
        if values.len() != expected {
            return Err(Error::LengthMismatch { series: values.len(), grid: expected });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { values, grid })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    /// Entry for block `j` and frequency `k`, both 0-based.
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[j * self.grid.n_freqs() + k]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let w = self.grid.n_freqs();
        &self.values[j * w..(j + 1) * w]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Local periodogram of every block at every block frequency.
///
/// With midpoints on the grid each block is the `j`-th disjoint stretch of
/// `N` observations, so no zero padding is needed here.
pub fn local_periodogram(x: &TimeSeries, grid: &SpectralGrid) -> Result<LocalPeriodogramMatrix> {
    if x.len() != grid.t_len() {
        return Err(Error::LengthMismatch { series: x.len(), grid: grid.t_len() });
    }
    let n = grid.n_window();
    let half = grid.n_freqs();
    let scale = 1.0 / (2.0 * PI * n as f64);
    let fft = forward_fft(n);
    let mut buf = vec![Complex64::default(); n];
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let mut values = Vec::with_capacity(grid.m_blocks() * half);
    for block in x.values().chunks_exact(n) {
        for (b, &v) in buf.iter_mut().zip(block) {
            *b = Complex64::new(v, 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        values.extend(buf[1..=half].iter().map(|c| c.norm_sqr() * scale));
    }
    Ok(LocalPeriodogramMatrix { values, grid: *grid })
}

// floor(u T), treating u T within rounding distance of an integer as that
// integer so that u = t / T maps back to t.
fn floor_scaled(u: f64, t_len: i64) -> i64 {
    let scaled = u * t_len as f64;
    let nearest = scaled.round();
    if (scaled - nearest).abs() <= 1e-9 * (t_len as f64).max(1.0) {
        nearest as i64
    } else {
        scaled.floor() as i64
    }
}

/// Local periodogram `I_N(u, lambda)` at an arbitrary rescaled time `u`,
/// by direct summation. Observations outside `1..=T` count as zero.
pub fn local_periodogram_at(x: &TimeSeries, n_window: usize, u: f64, lambda: f64) -> f64 {
    let t_len = x.len() as i64;
    let start = floor_scaled(u, t_len) - n_window as i64 / 2 + 1;
    let (mut re, mut im) = (0.0, 0.0);
    for s in 0..n_window as i64 {
        let idx = start + s;
        if idx < 1 || idx > t_len {
            continue;
        }
        let v = x.values()[(idx - 1) as usize];
        let w = lambda * s as f64;
        re += v * w.cos();
        im -= v * w.sin();
    }
    (re * re + im * im) / (2.0 * PI * n_window as f64)
}

// Index pair (a, b) = (floor(t + 1/2 + k/2), floor(t + 1/2 - k/2)) for
// integer t, evaluated exactly.
fn lag_pair(t: i64, k: i64) -> (i64, i64) {
    (t + (1 + k).div_euclid(2), t + (1 - k).div_euclid(2))
}

/// Pre-periodogram `J_T(t/T, lambda)` for a 1-based time index `t`.
///
/// Sums `x_a x_b cos(lambda k)` over every lag `k` in `-2T..=2T` whose
/// index pair lies inside the sample; the sine terms cancel pairwise.
pub fn pre_periodogram(x: &TimeSeries, t: usize, lambda: f64) -> Result<f64> {
    let len = x.len();
    if t == 0 || t > len {
        return Err(Error::OutOfRange { index: t, len });
    }
    let big = len as i64;
    let v = x.values();
    let mut acc = 0.0;
    for k in -2 * big..=2 * big {
        let (a, b) = lag_pair(t as i64, k);
        if (1..=big).contains(&a) && (1..=big).contains(&b) {
            acc += v[(a - 1) as usize] * v[(b - 1) as usize] * (lambda * k as f64).cos();
        }
    }
    Ok(acc / (2.0 * PI))
}

/// `T x floor(T/2)` matrix of `J_T(j/T, 2 pi k / T)`, row-major by time.
#[derive(Debug, Clone, PartialEq)]
pub struct PrePeriodogramMatrix {
    values: Vec<f64>,
    t_len: usize,
    n_freqs: usize,
}

impl PrePeriodogramMatrix {
    pub fn t_len(&self) -> usize {
        self.t_len
    }

    pub fn n_freqs(&self) -> usize {
        self.n_freqs
    }

    /// Entry for time `j` and frequency `k`, both 0-based.
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[j * self.n_freqs + k]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.n_freqs..(j + 1) * self.n_freqs]
    }
}

/// Pre-periodogram at every time point and every full-sample Fourier
/// frequency `2 pi k / T`, `k = 1..=floor(T/2)`.
///
/// At those frequencies `cos(lambda k)` is periodic in `k` with period `T`,
/// so the lag products are folded modulo `T` and each row is a single
/// length-`T` transform.
pub fn pre_periodogram_matrix(x: &TimeSeries) -> PrePeriodogramMatrix {
    let len = x.len();
    let n_freqs = len / 2;
    let big = len as i64;
    let v = x.values();
    let fft = forward_fft(len.max(1));
    let mut buf = vec![Complex64::default(); len];
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let mut values = Vec::with_capacity(len * n_freqs);
    for t in 1..=big {
        buf.iter_mut().for_each(|c| *c = Complex64::default());
        for k in -2 * big..=2 * big {
            let (a, b) = lag_pair(t, k);
            if (1..=big).contains(&a) && (1..=big).contains(&b) {
                buf[k.rem_euclid(big) as usize].re += v[(a - 1) as usize] * v[(b - 1) as usize];
            }
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        values.extend(buf[1..=n_freqs].iter().map(|c| c.re / (2.0 * PI)));
    }
    PrePeriodogramMatrix { values, t_len: len, n_freqs }
}

/// Full-sample periodogram `(1/2 pi T) |sum_t x_t e^{-i lambda t}|^2` at
/// `lambda = 2 pi k / T`, `1 <= k <= floor(T/2)`.
pub fn stationary_periodogram(x: &TimeSeries, k: usize) -> Result<f64> {
    let len = x.len();
    if k == 0 || k > len / 2 {
        return Err(Error::OutOfRange { index: k, len: len / 2 });
    }
    let lambda = 2.0 * PI * k as f64 / len as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for (i, v) in x.values().iter().enumerate() {
        let w = lambda * (i + 1) as f64;
        re += v * w.cos();
        im -= v * w.sin();
    }
    Ok((re * re + im * im) / (2.0 * PI * len as f64))
}

/// [`stationary_periodogram`] for all `k = 1..=floor(T/2)` via one FFT.
pub fn stationary_periodogram_all(x: &TimeSeries) -> Vec<f64> {
    let len = x.len();
    if len < 2 {
        return Vec::new();
    }
    let mut buf: Vec<Complex64> = x.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward_fft(len).process(&mut buf);
    let scale = 1.0 / (2.0 * PI * len as f64);
    buf[1..=len / 2].iter().map(|c| c.norm_sqr() * scale).collect()
}
