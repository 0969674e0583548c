//! JSON envelope and text renderings shared by the subcommands.

use std::io::{self, Write};

use lsts::harness::cells::ReferenceCell;
use lsts::harness::ExperimentReport;
use lsts::sieve::{Estimator, TestResult};
use serde::Serialize;

/// Common JSON shape of every report: `{command, config, results, timing, seed}`.
#[derive(Serialize)]
pub struct Envelope<'a, C: Serialize, R: Serialize> {
    pub command: &'a str,
    pub config: C,
    pub results: R,
    pub timing: Timing,
    pub seed: u64,
}

#[derive(Serialize)]
pub struct Timing {
    pub wall_time_secs: f64,
}

impl<'a, C: Serialize, R: Serialize> Envelope<'a, C, R> {
    pub fn new(command: &'a str, config: C, results: R, wall_time_secs: f64, seed: u64) -> Self {
        Self { command, config, results, timing: Timing { wall_time_secs }, seed }
    }

    pub fn write_json<W: Write>(&self, out: &mut W) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut *out, self)?;
        writeln!(out)
    }
}

#[derive(Serialize)]
pub struct TestSummary<'a> {
    pub statistic: f64,
    pub critical_value: f64,
    pub p_value: f64,
    pub reject: bool,
    pub decision: &'static str,
    pub alpha: f64,
    pub estimator: Estimator,
    pub t_len: usize,
    pub truncated: usize,
    pub window: Option<usize>,
    pub blocks: Option<usize>,
    pub ar_order: usize,
    pub ar_coeffs: &'a [f64],
    pub sigma2: f64,
    pub replicates: &'a [f64],
}

fn decision(reject: bool) -> &'static str {
    if reject {
        "reject"
    } else {
        "fail to reject"
    }
}

impl<'a> From<&'a TestResult> for TestSummary<'a> {
    fn from(r: &'a TestResult) -> Self {
        Self {
            statistic: r.statistic,
            critical_value: r.critical_value,
            p_value: r.p_value,
            reject: r.reject,
            decision: decision(r.reject),
            alpha: r.alpha,
            estimator: r.estimator,
            t_len: r.t_len,
            truncated: r.truncated,
            window: r.window,
            blocks: r.blocks,
            ar_order: r.fit.order,
            ar_coeffs: &r.fit.coeffs,
            sigma2: r.fit.sigma2,
            replicates: &r.replicates,
        }
    }
}

pub fn write_test_text<W: Write>(out: &mut W, r: &TestResult) -> io::Result<()> {
    let dash = || "-".to_string();
    writeln!(out, "statistic       {:.6}", r.statistic)?;
    writeln!(out, "critical value  {:.6}  (alpha = {}, B = {})", r.critical_value, r.alpha, r.replicates.len())?;
    writeln!(out, "p-value         {:.4}", r.p_value)?;
    writeln!(out, "decision        {}", decision(r.reject))?;
    writeln!(
        out,
        "T = {}  N = {}  M = {}  p = {}  estimator = {:?}",
        r.t_len,
        r.window.map_or_else(dash, |n| n.to_string()),
        r.blocks.map_or_else(dash, |m| m.to_string()),
        r.fit.order,
        r.estimator
    )?;
    if r.truncated > 0 {
        writeln!(out, "dropped {} trailing observations", r.truncated)?;
    }
    Ok(())
}

#[derive(Serialize)]
pub struct BenchRow {
    pub cell: String,
    pub model: String,
    pub reference: Vec<(f64, f64)>,
    pub report: ExperimentReport,
}

impl BenchRow {
    pub fn new(cell: &ReferenceCell, report: ExperimentReport) -> Self {
        let reference = report
            .config
            .alphas
            .iter()
            .filter_map(|&a| {
                if (a - 0.05).abs() < 1e-12 {
                    Some((a, cell.reference[0]))
                } else if (a - 0.10).abs() < 1e-12 {
                    Some((a, cell.reference[1]))
                } else {
                    None
                }
            })
            .collect();
        Self { cell: cell.name.clone(), model: cell.model.label(), reference, report }
    }
}

pub fn write_bench_text<W: Write>(out: &mut W, rows: &[BenchRow]) -> io::Result<()> {
    writeln!(
        out,
        "{:<18} {:>5} {:>4} {:>4} {:>5} {:>6} {:>9} {:>8} {:>17}",
        "cell", "T", "N", "M", "runs", "alpha", "reference", "rate", "95% CI"
    )?;
    for row in rows {
        let c = &row.report.config;
        let (n, m) = match c.estimator {
            Estimator::Local => (c.window.to_string(), (c.t_len / c.window).to_string()),
            Estimator::Pre => ("-".into(), "-".into()),
        };
        for r in &row.report.rates {
            let reference = row
                .reference
                .iter()
                .find(|(a, _)| (a - r.alpha).abs() < 1e-12)
                .map_or_else(|| "-".to_string(), |(_, v)| format!("{v:.3}"));
            let lo = (r.rate - 1.96 * r.std_error).max(0.0);
            let hi = (r.rate + 1.96 * r.std_error).min(1.0);
            writeln!(
                out,
                "{:<18} {:>5} {:>4} {:>4} {:>5} {:>6.2} {:>9} {:>8.3} {:>17}",
                row.cell,
                c.t_len,
                n,
                m,
                c.runs,
                r.alpha,
                reference,
                r.rate,
                format!("[{lo:.3}, {hi:.3}]")
            )?;
        }
    }
    Ok(())
}
