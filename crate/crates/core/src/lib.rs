//! Kolmogorov–Smirnov type test for second-order stationarity of locally
//! stationary time series.
//!
//! The statistic is the supremum of an empirical spectral distance process
//! built from local periodograms over a block/frequency grid. Its null
//! distribution is approximated with an AR-sieve bootstrap.
//!
//! Module map:
//!
//! - [`models`]: generative models, simulation and true spectra.
//! - [`spectral`]: local periodogram, pre-periodogram, full-sample periodogram.
//! - [`empirical`]: distance processes, sup-statistics, the H0 limit oracle.
//! - [`sieve`]: Yule–Walker fitting, Whittle AIC, bootstrap test.
//! - [`harness`]: Monte Carlo rejection-rate experiments.
//!
//! ```
//! use lsts::models::{simulate, ModelSpec};
//! use lsts::sieve::{run_test, TestConfig};
//!
//! let x = simulate(&ModelSpec::ar1(0.5), 128, 7).unwrap();
//! let cfg = TestConfig { window: Some(16), replicates: 99, ..TestConfig::default() };
//! let result = run_test(&x, &cfg).unwrap();
//! assert!(result.p_value > 0.0 && result.p_value <= 1.0);
//! ```

pub mod empirical;
mod error;
pub mod exec;
pub mod harness;
pub mod models;
pub mod quadrature;
pub mod rng;
pub mod sieve;
pub mod spectral;

pub use error::{Error, Result};
pub use models::TimeSeries;
