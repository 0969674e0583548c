//! `lsts` command-line front end.

mod input;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lsts::empirical::{distance_process, pre_distance_process, Surface};
use lsts::harness::{cells, run_experiment};
use lsts::models::{simulate, ModelSpec};
use lsts::sieve::{run_test, Estimator, TestConfig};
use lsts::spectral::{local_periodogram, SpectralGrid};
use lsts::TimeSeries;

use crate::report::Envelope;

/// Minimum observations for `test` and `surface` after differencing and
/// truncation.
const MIN_OBSERVATIONS: usize = 32;

#[derive(Parser, Debug)]
#[command(name = "lsts", version, about = "Bootstrap Kolmogorov-Smirnov test for stationarity of locally stationary time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Test a CSV series for stationarity.
    Test(TestArgs),
    /// Simulate a model and write one value per line.
    Simulate(SimulateArgs),
    /// Estimate rejection rates for a named reference cell.
    Bench(BenchArgs),
    /// Export the empirical distance surface as CSV.
    Surface(SurfaceArgs),
}

#[derive(Args, Debug)]
struct SeriesArgs {
    /// Input CSV file, or `-` for stdin.
    #[arg(long, short)]
    input: PathBuf,
    /// Column to read: header name or 0-based index.
    #[arg(long)]
    column: Option<String>,
    /// Apply first differences before testing.
    #[arg(long)]
    diff: bool,
    /// Block length N (even); chosen automatically when omitted.
    #[arg(long = "N")]
    window: Option<usize>,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Local)]
    estimator: EstimatorArg,
}

#[derive(Args, Debug)]
struct TestArgs {
    #[command(flatten)]
    series: SeriesArgs,
    /// Bootstrap replicates.
    #[arg(long = "B", default_value_t = 200)]
    replicates: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    p_min: Option<usize>,
    #[arg(long)]
    p_max: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// white, ar1, ma1, ar, ma, alt1, alt2, alt3 or alt4.
    #[arg(long)]
    model: String,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    /// Comma-separated coefficients for `ar` / `ma`.
    #[arg(long)]
    coeffs: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Lag of the alt4 model.
    #[arg(long, default_value_t = 1)]
    q: usize,
    #[arg(long = "T")]
    t_len: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Cell name, e.g. T128-N16-ar0.5; may be repeated.
    #[arg(long)]
    cell: Vec<String>,
    /// List every supported cell and exit.
    #[arg(long)]
    list: bool,
    /// Override the number of Monte Carlo runs.
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long = "B", default_value_t = 200)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct SurfaceArgs {
    #[command(flatten)]
    series: SeriesArgs,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Text,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum EstimatorArg {
    Local,
    Pre,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Local => Estimator::Local,
            EstimatorArg::Pre => Estimator::Pre,
        }
    }
}

#[derive(Debug)]
enum CliError {
    /// I/O or parse failure (exit 2).
    Input(String),
    /// Invalid configuration (exit 3).
    Config(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Config(_) => 3,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<lsts::Error> for CliError {
    fn from(e: lsts::Error) -> Self {
        match e {
            lsts::Error::NonFinite(_) => CliError::Input(e.to_string()),
            lsts::Error::BadWindow(n) => CliError::Config(format!("--N: N must be even and at least 4, got {n}")),
            other => CliError::Config(other.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(v) = std::env::var("LSTS_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                lsts::exec::init_thread_pool(n);
            }
            _ => {
                eprintln!("error: LSTS_THREADS must be a positive integer, got '{v}'");
                return ExitCode::from(3);
            }
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Test(a) => cmd_test(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Surface(a) => cmd_surface(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Input(m) | CliError::Config(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(e.code())
        }
    }
}

fn open_output(path: Option<&PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn check_window(window: Option<usize>) -> CliResult<()> {
    match window {
        Some(n) if n % 2 != 0 => Err(CliError::Config(format!("--N: N must be even, got {n}"))),
        Some(n) if n < 4 => Err(CliError::Config(format!("--N: N must be at least 4, got {n}"))),
        _ => Ok(()),
    }
}

fn load_series(args: &SeriesArgs) -> CliResult<TimeSeries> {
    check_window(args.window)?;
    let raw = input::read_column(&args.input, args.column.as_deref())?;
    let mut x = TimeSeries::new(raw).map_err(|e| CliError::Input(e.to_string()))?;
    if args.diff {
        x = x.difference();
    }
    let usable = match (Estimator::from(args.estimator), args.window) {
        (Estimator::Local, Some(n)) => n * (x.len() / n),
        _ => x.len(),
    };
    if usable < MIN_OBSERVATIONS {
        return Err(CliError::Config(format!(
            "series too short: {usable} usable observations, need at least {MIN_OBSERVATIONS}"
        )));
    }
    Ok(x)
}

fn cmd_test(a: TestArgs) -> CliResult<()> {
    if a.format == Format::Csv {
        return Err(CliError::Config("--format: test supports json or text".into()));
    }
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(CliError::Config(format!("--alpha: must lie in (0,1), got {}", a.alpha)));
    }
    if a.replicates == 0 {
        return Err(CliError::Config("--B: must be positive".into()));
    }
    let x = load_series(&a.series)?;
    let order_range = match (a.p_min, a.p_max) {
        (None, None) => None,
        (lo, hi) => {
            let (dlo, dhi) = lsts::sieve::default_order_range(x.len());
            let (lo, hi) = (lo.unwrap_or(dlo), hi.unwrap_or(dhi));
            if lo == 0 || lo > hi {
                return Err(CliError::Config(format!("--p-min/--p-max: invalid range {lo}..={hi}")));
            }
            Some((lo, hi))
        }
    };
    let cfg = TestConfig {
        window: a.series.window,
        replicates: a.replicates,
        alpha: a.alpha,
        order_range,
        estimator: a.series.estimator.into(),
        seed: a.seed,
        ..TestConfig::default()
    };
    let start = Instant::now();
    let result = run_test(&x, &cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    let mut out = open_output(None)?;
    match a.format {
        Format::Json => {
            let env = Envelope::new("test", &cfg, report::TestSummary::from(&result), elapsed, a.seed);
            env.write_json(&mut out)?;
        }
        _ => report::write_test_text(&mut out, &result)?,
    }
    out.flush()?;
    Ok(())
}

fn parse_coeffs(s: Option<&str>) -> CliResult<Vec<f64>> {
    let Some(s) = s else { return Ok(Vec::new()) };
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::Config(format!("--coeffs: cannot parse '{t}'"))))
        .collect()
}

fn model_from_args(a: &SimulateArgs) -> CliResult<ModelSpec> {
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| CliError::Config(format!("--{flag} is required for model {}", a.model)));
    let sigma = a.sigma;
    let model = match a.model.as_str() {
        "white" => ModelSpec::StationaryMa { coeffs: vec![], sigma },
        "ar1" => ModelSpec::StationaryAr { coeffs: vec![need(a.phi, "phi")?], sigma },
        "ma1" => ModelSpec::StationaryMa { coeffs: vec![need(a.theta, "theta")?], sigma },
        "ar" => ModelSpec::StationaryAr { coeffs: parse_coeffs(a.coeffs.as_deref())?, sigma },
        "ma" => ModelSpec::StationaryMa { coeffs: parse_coeffs(a.coeffs.as_deref())?, sigma },
        "alt1" => ModelSpec::ScaledNoise,
        "alt2" => ModelSpec::TvAr1Sqrt,
        "alt3" => ModelSpec::PiecewiseAr1,
        "alt4" => ModelSpec::TvMa1Lag { q: a.q },
        other => return Err(CliError::Config(format!("--model: unknown model '{other}'"))),
    };
    model.validate().map_err(|e| CliError::Config(format!("--model: {e}")))?;
    Ok(model)
}

fn cmd_simulate(a: SimulateArgs) -> CliResult<()> {
    let model = model_from_args(&a)?;
    let x = simulate(&model, a.t_len, a.seed).map_err(|e| CliError::Config(format!("--T: {e}")))?;
    let mut out = open_output(a.output.as_ref())?;
    for v in x.values() {
        writeln!(out, "{v}")?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> CliResult<()> {
    let mut out = open_output(None)?;
    if a.list {
        for c in cells::all() {
            writeln!(
                out,
                "{:<18} {:<12} T={:<4} N={:<3} ref5={:.3} ref10={:.3}  {}",
                c.name,
                c.group,
                c.t_len,
                if c.estimator == Estimator::Pre { "-".to_string() } else { c.window.to_string() },
                c.reference[0],
                c.reference[1],
                c.model.label()
            )?;
        }
        out.flush()?;
        return Ok(());
    }
    if a.cell.is_empty() {
        return Err(CliError::Config("--cell: at least one cell is required (see --list)".into()));
    }
    if a.replicates == 0 {
        return Err(CliError::Config("--B: must be positive".into()));
    }
    let selected: Vec<_> = a
        .cell
        .iter()
        .map(|name| cells::find(name).ok_or_else(|| CliError::Config(format!("--cell: unknown cell '{name}'"))))
        .collect::<CliResult<_>>()?;
    let mut rows = Vec::new();
    let start = Instant::now();
    for cell in &selected {
        let mut cfg = cell.experiment(a.seed);
        cfg.replicates = a.replicates;
        if let Some(r) = a.runs {
            cfg.runs = r;
        }
        let report = run_experiment(&cfg)?;
        rows.push(report::BenchRow::new(cell, report));
    }
    let elapsed = start.elapsed().as_secs_f64();
    match a.format {
        Format::Json => {
            let cfg = serde_json::json!({ "cells": a.cell, "replicates": a.replicates, "runs": a.runs });
            Envelope::new("bench", &cfg, &rows, elapsed, a.seed).write_json(&mut out)?;
        }
        _ => report::write_bench_text(&mut out, &rows)?,
    }
    out.flush()?;
    Ok(())
}

fn cmd_surface(a: SurfaceArgs) -> CliResult<()> {
    let x = load_series(&a.series)?;
    let mut out = open_output(a.output.as_ref())?;
    match Estimator::from(a.series.estimator) {
        Estimator::Local => {
            let n = match a.series.window {
                Some(n) => n,
                None => lsts::sieve::default_window(x.len())?,
            };
            let usable = n * (x.len() / n);
            if usable < x.len() {
                log::warn!("truncating series from {} to {usable} observations (N = {n})", x.len());
            }
            let grid = SpectralGrid::new(usable, n)?;
            let d = distance_process(&local_periodogram(&x.truncated(usable), &grid)?);
            d.write_csv(&mut out)?;
        }
        Estimator::Pre => pre_distance_process(&x)?.write_csv(&mut out)?,
    }
    out.flush()?;
    Ok(())
}
