//! Rate studies, complexity curves, baseline comparisons and their CSV
//! reports.
//!
//! Cost is the number of function evaluations `n`. Every study is
//! deterministic given its master seed: cell `p` draws from
//! `rng.split(p)` and replicate `r` inside it from `.split(r)`.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algorithms::{
    app_cells_per_axis, classical_mc_avg_error, empirical_app_error, empirical_haber_error,
    haber_avg_error, haber_avg_error_for_axis, int_cells_per_axis, linear_rule_avg_error,
    midpoint_rule, pc_avg_error, pc_avg_error_for_axis,
};
use crate::constants::{c_app, ProblemConstants};
use crate::error::{Error, Result};
use crate::geometry::CubePartition;
use crate::rng::RngStream;
use crate::{default_quad_order, MAX_DIM};

/// Rows with fewer evaluations are left out of complexity-exponent fits.
pub const MIN_FIT_CARDINALITY: u64 = 100;

/// Default number of replicates per rate-study cell.
pub const DEFAULT_REPLICATES: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Int,
    App,
}

impl Problem {
    pub fn as_str(&self) -> &'static str {
        match self {
            Problem::Int => "int",
            Problem::App => "app",
        }
    }

    /// Exponent of `ε` in the cost of the optimal algorithms:
    /// `−2/(1 + 1/d)` for integration, `−2d` for approximation.
    pub fn complexity_exponent(&self, d: usize) -> f64 {
        let d = d as f64;
        match self {
            Problem::Int => -2.0 / (1.0 + 1.0 / d),
            Problem::App => -2.0 * d,
        }
    }

    /// Exponent of `n` in the exact average error.
    pub fn error_exponent(&self, d: usize) -> f64 {
        let d = d as f64;
        match self {
            Problem::Int => -(0.5 + 0.5 / d),
            Problem::App => -0.5 / d,
        }
    }

    pub fn analytic_error(&self, d: usize, p: usize) -> Result<f64> {
        match self {
            Problem::Int => haber_avg_error(d, p),
            Problem::App => pc_avg_error(d, p),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "int" => Ok(Problem::Int),
            "app" => Ok(Problem::App),
            other => Err(Error::InvalidArgument(format!("unknown problem '{other}' (expected int or app)"))),
        }
    }
}

/// Formats with at most 12 significant digits.
pub fn fmt_sig12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let rounded: f64 = format!("{v:.11e}").parse().unwrap_or(v);
    let a = rounded.abs();
    if (1e-5..1e15).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// A report row with a fixed CSV schema.
pub trait CsvRecord {
    fn header() -> &'static [&'static str];
    fn record(&self) -> Vec<String>;
}

pub fn write_csv_to<R: CsvRecord, W: Write>(rows: &[R], out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(R::header())?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `rows` under their header; an empty slice gives a header-only file.
pub fn write_csv<R: CsvRecord>(rows: &[R], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv_to(rows, file).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

impl CsvRecord for ProblemConstants {
    fn header() -> &'static [&'static str] {
        &["d", "c_int", "c_app", "method", "accuracy"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.d.to_string(),
            fmt_sig12(self.c_int),
            fmt_sig12(self.c_app),
            self.method.as_str().to_string(),
            fmt_sig12(self.accuracy),
        ]
    }
}

/// Analytic error of one algorithm at one partition size.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTableRow {
    pub problem: Problem,
    pub d: usize,
    pub p: usize,
    pub n: usize,
    pub analytic_error: f64,
}

impl CsvRecord for ErrorTableRow {
    fn header() -> &'static [&'static str] {
        &["problem", "d", "p", "n", "analytic_error"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.problem.to_string(),
            self.d.to_string(),
            self.p.to_string(),
            self.n.to_string(),
            fmt_sig12(self.analytic_error),
        ]
    }
}

fn cell_count(d: usize, p: usize) -> Result<usize> {
    Ok(CubePartition::new(d, p)?.len())
}

fn check_p_list(p_list: &[usize]) -> Result<()> {
    if p_list.is_empty() {
        return Err(Error::InvalidArgument("p list is empty".into()));
    }
    if p_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!("p list {p_list:?} must be strictly ascending")));
    }
    Ok(())
}

pub fn error_table(problem: Problem, d: usize, p_list: &[usize]) -> Result<Vec<ErrorTableRow>> {
    check_p_list(p_list)?;
    p_list
        .iter()
        .map(|&p| {
            Ok(ErrorTableRow {
                problem,
                d,
                p,
                n: cell_count(d, p)?,
                analytic_error: problem.analytic_error(d, p)?,
            })
        })
        .collect()
}

/// Analytic versus empirical error at one partition size.
#[derive(Debug, Clone, PartialEq)]
pub struct RateStudyRow {
    pub problem: Problem,
    pub d: usize,
    pub p: usize,
    pub n: usize,
    pub analytic_error: f64,
    pub empirical_error: f64,
    pub stderr: f64,
    pub replicates: usize,
}

impl RateStudyRow {
    /// `|empirical − analytic| ≤ sigmas·stderr + allowance`.
    pub fn agrees(&self, sigmas: f64, allowance: f64) -> bool {
        (self.empirical_error - self.analytic_error).abs() <= sigmas * self.stderr + allowance
    }
}

impl CsvRecord for RateStudyRow {
    fn header() -> &'static [&'static str] {
        &["problem", "d", "p", "n", "analytic_error", "empirical_error", "stderr", "replicates"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.problem.to_string(),
            self.d.to_string(),
            self.p.to_string(),
            self.n.to_string(),
            fmt_sig12(self.analytic_error),
            fmt_sig12(self.empirical_error),
            fmt_sig12(self.stderr),
            self.replicates.to_string(),
        ]
    }
}

/// Knobs shared by the empirical studies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyOptions {
    pub quad_order: usize,
    /// Grid points per axis for the L2 estimate; `None` means `8p`.
    pub grid_m: Option<usize>,
}

impl StudyOptions {
    pub fn for_dimension(d: usize) -> Self {
        Self {
            quad_order: default_quad_order(d),
            grid_m: None,
        }
    }
}

/// One row per `p`, each with the exact error and an empirical estimate.
pub fn rate_study(
    problem: Problem,
    d: usize,
    p_list: &[usize],
    replicates: usize,
    rng: &RngStream,
    options: StudyOptions,
) -> Result<Vec<RateStudyRow>> {
    check_p_list(p_list)?;
    p_list
        .iter()
        .map(|&p| {
            let n = cell_count(d, p)?;
            let stream = rng.split(p as u64);
            let est = match problem {
                Problem::Int => empirical_haber_error(d, p, replicates, &stream, options.quad_order)?,
                Problem::App => {
                    let m = options.grid_m.unwrap_or(8 * p);
                    empirical_app_error(d, p, m, replicates, &stream)?
                }
            };
            Ok(RateStudyRow {
                problem,
                d,
                p,
                n,
                analytic_error: problem.analytic_error(d, p)?,
                empirical_error: est.value,
                stderr: est.stderr,
                replicates,
            })
        })
        .collect()
}

/// Least-squares line `log y = slope·log x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual in log space.
    pub max_residual: f64,
}

/// Fits `log y` against `log x` for positive `(x, y)` pairs.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!("slope fit needs >= 3 rows, got {}", points.len())));
    }
    if let Some(bad) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::InvalidArgument(format!("log-log fit needs positive values, got {bad:?}")));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let spread = logs.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max)
        - logs.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    if sxx <= 0.0 || spread <= 1e-12 {
        return Err(Error::InvalidArgument("degenerate abscissae in slope fit".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = logs
        .iter()
        .map(|(x, y)| (y - (slope * x + intercept)).abs())
        .fold(0.0, f64::max);
    Ok(SlopeFit {
        slope,
        intercept,
        max_residual,
    })
}

/// Slope of analytic error versus `n` over a rate study or error table.
pub fn fit_error_rows(rows: &[(usize, f64)]) -> Result<SlopeFit> {
    let pts: Vec<(f64, f64)> = rows.iter().map(|&(n, e)| (n as f64, e)).collect();
    fit_loglog_slope(&pts)
}

/// Cardinality needed for error `ε` and the error achieved there.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityRow {
    pub epsilon: f64,
    pub n: u64,
    pub achieved_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityCurve {
    pub problem: Problem,
    pub d: usize,
    pub rows: Vec<ComplexityRow>,
}

/// CSV view of one complexity row with its curve's labels.
pub struct ComplexityRecord<'a> {
    pub problem: Problem,
    pub d: usize,
    pub row: &'a ComplexityRow,
}

impl CsvRecord for ComplexityRecord<'_> {
    fn header() -> &'static [&'static str] {
        &["problem", "d", "epsilon", "n", "achieved_error"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.problem.to_string(),
            self.d.to_string(),
            fmt_sig12(self.row.epsilon),
            self.row.n.to_string(),
            fmt_sig12(self.row.achieved_error),
        ]
    }
}

impl ComplexityCurve {
    pub fn records(&self) -> Vec<ComplexityRecord<'_>> {
        self.rows
            .iter()
            .map(|row| ComplexityRecord {
                problem: self.problem,
                d: self.d,
                row,
            })
            .collect()
    }

    /// Slope of `log n(ε)` against `log ε`.
    ///
    /// Rows with `n <` [`MIN_FIT_CARDINALITY`] are dropped because the
    /// ceiling makes small cardinalities lumpy; if fewer than three
    /// distinct cardinalities survive, all rows are used.
    pub fn exponent_fit(&self) -> Result<SlopeFit> {
        let large: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.n >= MIN_FIT_CARDINALITY)
            .map(|r| (r.epsilon, r.n as f64))
            .collect();
        let mut distinct: Vec<u64> = self.rows.iter().filter(|r| r.n >= MIN_FIT_CARDINALITY).map(|r| r.n).collect();
        distinct.dedup();
        if distinct.len() >= 3 {
            return fit_loglog_slope(&large);
        }
        let all: Vec<(f64, f64)> = self.rows.iter().map(|r| (r.epsilon, r.n as f64)).collect();
        fit_loglog_slope(&all)
    }

    pub fn all_within_tolerance(&self) -> bool {
        self.rows.iter().all(|r| r.achieved_error <= r.epsilon)
    }
}

/// `ε` halved repeatedly from `start` while it stays `≥ stop`.
pub fn halving_sequence(start: f64, stop: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut e = start;
    while e >= stop {
        out.push(e);
        e /= 2.0;
    }
    out
}

/// Rows `(ε, n(ε), exact error at n(ε))` for descending `ε`.
pub fn complexity_curve(problem: Problem, d: usize, eps_list: &[f64]) -> Result<ComplexityCurve> {
    if !(1..=MAX_DIM).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    if eps_list.is_empty() {
        return Err(Error::InvalidArgument("epsilon list is empty".into()));
    }
    let max_eps = c_app(d, default_quad_order(d))?.sqrt();
    if let Some(bad) = eps_list.iter().find(|&&e| !(e > 0.0 && e <= max_eps)) {
        return Err(Error::InvalidArgument(format!("epsilon {bad} outside (0, {max_eps:.6}]")));
    }
    if eps_list.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::InvalidArgument("epsilon list must be strictly descending".into()));
    }
    let rows = eps_list
        .iter()
        .map(|&epsilon| {
            let (n, achieved_error) = match problem {
                Problem::Int => {
                    let p = int_cells_per_axis(epsilon, d)?;
                    (pow_count(p, d)?, haber_avg_error_for_axis(d, p)?)
                }
                Problem::App => {
                    let p = app_cells_per_axis(epsilon, d)?;
                    (pow_count(p, d)?, pc_avg_error_for_axis(d, p)?)
                }
            };
            Ok(ComplexityRow {
                epsilon,
                n,
                achieved_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComplexityCurve { problem, d, rows })
}

fn pow_count(p: u64, d: usize) -> Result<u64> {
    p.checked_pow(d as u32)
        .ok_or_else(|| Error::Sizing(format!("cardinality {p}^{d} overflows")))
}

/// Stratified rule versus classical Monte Carlo at equal `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct McComparison {
    pub d: usize,
    pub p: usize,
    pub n: usize,
    pub haber_error: f64,
    pub classical_error: f64,
    pub ratio: f64,
    /// `n^{1/(2d)}`.
    pub expected_ratio: f64,
}

impl CsvRecord for McComparison {
    fn header() -> &'static [&'static str] {
        &["d", "p", "n", "haber_error", "classical_error", "ratio", "expected_ratio"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.d.to_string(),
            self.p.to_string(),
            self.n.to_string(),
            fmt_sig12(self.haber_error),
            fmt_sig12(self.classical_error),
            fmt_sig12(self.ratio),
            fmt_sig12(self.expected_ratio),
        ]
    }
}

pub fn mc_comparison(d: usize, p: usize) -> Result<McComparison> {
    let n = cell_count(d, p)?;
    let haber_error = haber_avg_error(d, p)?;
    let classical_error = classical_mc_avg_error(d, n)?;
    Ok(McComparison {
        d,
        p,
        n,
        haber_error,
        classical_error,
        ratio: classical_error / haber_error,
        expected_ratio: (n as f64).powf(1.0 / (2.0 * d as f64)),
    })
}

/// Deterministic midpoint rule versus the stratified rule. Report only:
/// nothing is claimed about which is smaller.
#[derive(Debug, Clone, PartialEq)]
pub struct MidpointComparison {
    pub d: usize,
    pub p: usize,
    pub n: usize,
    pub midpoint_error: f64,
    pub haber_error: f64,
    pub ratio: f64,
}

impl CsvRecord for MidpointComparison {
    fn header() -> &'static [&'static str] {
        &["d", "p", "n", "midpoint_error", "haber_error", "ratio"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.d.to_string(),
            self.p.to_string(),
            self.n.to_string(),
            fmt_sig12(self.midpoint_error),
            fmt_sig12(self.haber_error),
            fmt_sig12(self.ratio),
        ]
    }
}

pub fn midpoint_vs_haber(d: usize, p: usize, quad_order: usize) -> Result<MidpointComparison> {
    let partition = CubePartition::new(d, p)?;
    let midpoint_error = linear_rule_avg_error(&midpoint_rule(&partition), quad_order)?;
    let haber_error = haber_avg_error(d, p)?;
    Ok(MidpointComparison {
        d,
        p,
        n: partition.len(),
        midpoint_error,
        haber_error,
        ratio: midpoint_error / haber_error,
    })
}

/// Study configuration as read from JSON. Absent fields fall back to the
/// caller's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub problem: Option<Problem>,
    pub d: Option<usize>,
    pub p_list: Option<Vec<usize>>,
    pub epsilon_list: Option<Vec<f64>>,
    pub replicates: Option<usize>,
    pub master_seed: Option<u64>,
    pub quad_order: Option<usize>,
    pub grid_m: Option<usize>,
}

impl StudyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: PathBuf::from(path),
            source,
        })?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}
