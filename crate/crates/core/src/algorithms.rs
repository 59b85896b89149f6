//! Stratified Monte Carlo quadrature, piecewise-constant approximation,
//! classical Monte Carlo and midpoint baselines, and their average errors.
//!
//! For `n = p^d` the exact average errors are
//!
//! - stratified quadrature: `√c_int(d) / n^{1/2 + 1/(2d)}`,
//! - piecewise-constant approximation: `√c_app(d) / n^{1/(2d)}`,
//! - classical Monte Carlo: `√(c_int(d) / n)`.
//!
//! The empirical estimators check these without using them.

use rayon::prelude::*;

use crate::constants::{c_app, c_int};
use crate::error::{Error, Result};
use crate::geometry::{distance, sample_uniform, CubePartition, Point};
use crate::kernel::{kernel_double_integral_with_order, kernel_raw, mean_embedding_raw};
use crate::quadrature::GaussLegendre;
use crate::rng::RngStream;
use crate::sampler::FieldSampler;
use crate::{default_quad_order, MAX_DIM};

/// Most points an empirical estimator may sample jointly.
pub const MAX_FIELD_POINTS: usize = 4096;

/// Fewest replicates accepted by the empirical estimators.
pub const MIN_REPLICATES: usize = 30;

/// Nodes and weights of a linear integration rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    dim: usize,
    nodes: Vec<Point>,
    weights: Vec<f64>,
    randomized: bool,
}

impl QuadratureRule {
    pub fn new(dim: usize, nodes: Vec<Point>, weights: Vec<f64>, randomized: bool) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::LengthMismatch {
                expected: nodes.len(),
                got: weights.len(),
            });
        }
        if let Some(bad) = nodes.iter().find(|x| x.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.dim(),
            });
        }
        Ok(Self {
            dim,
            nodes,
            weights,
            randomized,
        })
    }

    /// The rule with no nodes; it always returns 0.
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            nodes: Vec::new(),
            weights: Vec::new(),
            randomized: false,
        }
    }

    fn equal_weights(dim: usize, nodes: Vec<Point>, randomized: bool) -> Self {
        let w = 1.0 / nodes.len() as f64;
        let weights = vec![w; nodes.len()];
        Self {
            dim,
            nodes,
            weights,
            randomized,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_randomized(&self) -> bool {
        self.randomized
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i f_i`.
    pub fn apply(&self, fvalues: &[f64]) -> Result<f64> {
        if fvalues.len() != self.nodes.len() {
            return Err(Error::LengthMismatch {
                expected: self.nodes.len(),
                got: fvalues.len(),
            });
        }
        Ok(self.weights.iter().zip(fvalues).map(|(w, f)| w * f).sum())
    }
}

/// Stratified Monte Carlo: one uniform node per cell, weights `1/n`.
pub fn haber_rule(partition: &CubePartition, rng: &mut RngStream) -> QuadratureRule {
    QuadratureRule::equal_weights(partition.dim(), partition.sample_stratified(rng), true)
}

/// `n` i.i.d. uniform nodes on `[0,1]^d`, weights `1/n`.
pub fn classical_mc_rule(n: usize, d: usize, rng: &mut RngStream) -> Result<QuadratureRule> {
    if n < 1 {
        return Err(Error::InvalidArgument("classical Monte Carlo needs n >= 1".into()));
    }
    if d < 1 {
        return Err(Error::Sizing("dimension must be >= 1".into()));
    }
    Ok(QuadratureRule::equal_weights(d, sample_uniform(n, d, rng), true))
}

/// Cell centers as nodes, weights `1/n`.
pub fn midpoint_rule(partition: &CubePartition) -> QuadratureRule {
    QuadratureRule::equal_weights(partition.dim(), partition.centers().to_vec(), false)
}

pub fn apply_quadrature(rule: &QuadratureRule, fvalues: &[f64]) -> Result<f64> {
    rule.apply(fvalues)
}

/// `Σ_i 1_{U_i}(x) f(x_i)` with `x_i` the cell centers.
#[derive(Debug, Clone)]
pub struct PiecewiseConstantApprox {
    partition: CubePartition,
    values: Vec<f64>,
}

impl PiecewiseConstantApprox {
    pub fn new(partition: CubePartition, values: Vec<f64>) -> Result<Self> {
        if values.len() != partition.len() {
            return Err(Error::LengthMismatch {
                expected: partition.len(),
                got: values.len(),
            });
        }
        Ok(Self { partition, values })
    }

    pub fn partition(&self) -> &CubePartition {
        &self.partition
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn evaluate(&self, x: &Point) -> Result<f64> {
        Ok(self.values[self.partition.locate(x)?])
    }
}

pub fn build_pc_approx(partition: &CubePartition, fvalues: Vec<f64>) -> Result<PiecewiseConstantApprox> {
    PiecewiseConstantApprox::new(partition.clone(), fvalues)
}

/// Squared average error of a fixed-node rule:
/// `∫∫K − 2 Σ w_i ∫K(u,x_i)du + Σ w_i w_j K(x_i,x_j)`.
pub fn linear_rule_mse(rule: &QuadratureRule, quad_order: usize) -> Result<f64> {
    let gl = GaussLegendre::cached(quad_order)?;
    let kdi = kernel_double_integral_with_order(rule.dim(), quad_order)?;
    Ok(rule_mse_raw(rule, &gl, kdi))
}

fn rule_mse_raw(rule: &QuadratureRule, gl: &GaussLegendre, kdi: f64) -> f64 {
    let nodes = rule.nodes();
    let w = rule.weights();
    let mut cross = 0.0;
    for (x, wi) in nodes.iter().zip(w) {
        cross += wi * mean_embedding_raw(x.coords(), gl);
    }
    let mut quad = 0.0;
    for i in 0..nodes.len() {
        quad += w[i] * w[i] * nodes[i].norm();
        for j in 0..i {
            quad += 2.0 * w[i] * w[j] * kernel_raw(nodes[i].coords(), nodes[j].coords());
        }
    }
    kdi - 2.0 * cross + quad
}

/// Average error over the field of the deterministic rule with these
/// nodes and weights.
pub fn linear_rule_avg_error(rule: &QuadratureRule, quad_order: usize) -> Result<f64> {
    Ok(linear_rule_mse(rule, quad_order)?.max(0.0).sqrt())
}

fn check_dim(d: usize) -> Result<()> {
    if !(1..=MAX_DIM).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    Ok(())
}

fn check_p(p: usize) -> Result<()> {
    if p < 1 {
        return Err(Error::Sizing("cells per axis p must be >= 1".into()));
    }
    Ok(())
}

// n^{1/2+1/(2d)} = p^{(d+1)/2}, n^{1/(2d)} = p^{1/2}
fn haber_error_for_p(d: usize, p: f64) -> Result<f64> {
    Ok(c_int(d, default_quad_order(d))?.sqrt() / p.powf((d as f64 + 1.0) / 2.0))
}

fn pc_error_for_p(d: usize, p: f64) -> Result<f64> {
    Ok(c_app(d, default_quad_order(d))?.sqrt() / p.sqrt())
}

/// `√c_int(d) / n^{1/2 + 1/(2d)}` with `n = p^d`.
pub fn haber_avg_error(d: usize, p: usize) -> Result<f64> {
    check_dim(d)?;
    check_p(p)?;
    haber_error_for_p(d, p as f64)
}

/// `√c_app(d) / n^{1/(2d)}` with `n = p^d`.
pub fn pc_avg_error(d: usize, p: usize) -> Result<f64> {
    check_dim(d)?;
    check_p(p)?;
    pc_error_for_p(d, p as f64)
}

/// `√(c_int(d) / n)`.
pub fn classical_mc_avg_error(d: usize, n: usize) -> Result<f64> {
    check_dim(d)?;
    if n < 1 {
        return Err(Error::InvalidArgument("classical Monte Carlo needs n >= 1".into()));
    }
    Ok((c_int(d, default_quad_order(d))? / n as f64).sqrt())
}

/// `√(Σ_i ∫_{U_i} ‖x − x_i‖ dx)`, integrated cell by cell.
pub fn pc_avg_error_exact_sum(partition: &CubePartition, quad_order: usize) -> Result<f64> {
    let gl = GaussLegendre::cached(quad_order)?;
    let d = partition.dim();
    let total: f64 = (0..partition.len())
        .map(|i| {
            let c = partition.center(i).coords();
            let (lo, hi) = partition.cell_bounds(i);
            let mut s = 0.0;
            // 2^d sub-boxes meeting at the center
            for mask in 0..(1usize << d) {
                let (sub_lo, sub_hi): (Vec<f64>, Vec<f64>) = (0..d)
                    .map(|a| if mask >> a & 1 == 0 { (lo[a], c[a]) } else { (c[a], hi[a]) })
                    .unzip();
                s += gl.integrate_box(&sub_lo, &sub_hi, |x| distance(x, c));
            }
            s
        })
        .sum();
    Ok(total.sqrt())
}

/// `⌈x⌉` after nudging `x` down by `1e-12` relative, so analytically
/// integral arguments are not bumped by rounding.
fn nudged_ceil(x: f64) -> f64 {
    (x * (1.0 - 1e-12)).ceil().max(1.0)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!("error bound must be positive, got {eps}")));
    }
    Ok(())
}

fn count_from_axis(p: f64, d: usize) -> Result<u64> {
    if p > u64::MAX as f64 {
        return Err(Error::Sizing(format!("cells per axis {p:e} overflows")));
    }
    (p as u64)
        .checked_pow(d as u32)
        .ok_or_else(|| Error::Sizing(format!("cardinality {p}^{d} overflows")))
}

/// Cells per axis `⌈(ε⁻² c_int)^{1/(d+1)}⌉` for the stratified rule.
pub fn int_cells_per_axis(eps: f64, d: usize) -> Result<u64> {
    check_eps(eps)?;
    check_dim(d)?;
    let x = (c_int(d, default_quad_order(d))? / (eps * eps)).powf(1.0 / (d as f64 + 1.0));
    count_from_axis(nudged_ceil(x), 1)
}

/// Cells per axis `⌈ε⁻² c_app⌉` for the piecewise-constant approximation.
pub fn app_cells_per_axis(eps: f64, d: usize) -> Result<u64> {
    check_eps(eps)?;
    check_dim(d)?;
    let x = c_app(d, default_quad_order(d))? / (eps * eps);
    count_from_axis(nudged_ceil(x), 1)
}

/// Cardinality `n^Int(ε)` guaranteeing stratified-rule error `≤ ε`.
pub fn n_int_for_epsilon(eps: f64, d: usize) -> Result<u64> {
    count_from_axis(int_cells_per_axis(eps, d)? as f64, d)
}

/// Cardinality `n^App(ε)` guaranteeing approximation error `≤ ε`.
pub fn n_app_for_epsilon(eps: f64, d: usize) -> Result<u64> {
    count_from_axis(app_cells_per_axis(eps, d)? as f64, d)
}

/// Stratified-rule error at `p` cells per axis (no partition is built).
pub fn haber_avg_error_for_axis(d: usize, p: u64) -> Result<f64> {
    check_dim(d)?;
    haber_error_for_p(d, p as f64)
}

/// Approximation error at `p` cells per axis (no partition is built).
pub fn pc_avg_error_for_axis(d: usize, p: u64) -> Result<f64> {
    check_dim(d)?;
    pc_error_for_p(d, p as f64)
}

/// A root-mean-square estimate with its delta-method standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    /// `√mean(s)` with standard error `sd(s) / (√R · 2√mean(s))`.
    pub fn from_squared_errors(samples: &[f64]) -> Self {
        let r = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / r;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (r - 1.0);
        let se_mean = (var / r).sqrt();
        let value = mean.max(0.0).sqrt();
        let stderr = if value > 0.0 { se_mean / (2.0 * value) } else { 0.0 };
        Self { value, stderr }
    }
}

fn check_replicates(replicates: usize) -> Result<()> {
    if replicates < MIN_REPLICATES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_REPLICATES} replicates, got {replicates}"
        )));
    }
    Ok(())
}

/// Empirical average error of the stratified rule.
///
/// Each replicate draws fresh nodes from `rng.split(r)` and computes the
/// exact error over the field for those nodes; the mean of these squared
/// errors estimates the squared average error.
pub fn empirical_haber_error(
    d: usize,
    p: usize,
    replicates: usize,
    rng: &RngStream,
    quad_order: usize,
) -> Result<Estimate> {
    check_dim(d)?;
    check_replicates(replicates)?;
    let partition = CubePartition::new(d, p)?;
    let gl = GaussLegendre::cached(quad_order)?;
    let kdi = kernel_double_integral_with_order(d, quad_order)?;
    let sq: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let rule = haber_rule(&partition, &mut rng.split(r));
            rule_mse_raw(&rule, &gl, kdi)
        })
        .collect();
    Ok(Estimate::from_squared_errors(&sq))
}

/// Midpoint evaluation grid of `grid_m` points per axis, built cell by cell.
///
/// Returns the sample points (centers first, then grid points that are not
/// centers) and, for every grid point, `(point index, cell index)`.
struct AppGrid {
    points: Vec<Point>,
    grid: Vec<(usize, usize)>,
}

fn check_grid(p: usize, grid_m: usize) -> Result<usize> {
    if grid_m < 2 * p {
        return Err(Error::InvalidArgument(format!("grid_m = {grid_m} is too coarse; need >= 2p = {}", 2 * p)));
    }
    if !grid_m.is_multiple_of(p) {
        return Err(Error::InvalidArgument(format!(
            "grid_m = {grid_m} must be a multiple of p = {p} so grid points avoid cell boundaries"
        )));
    }
    Ok(grid_m / p)
}

fn app_grid(partition: &CubePartition, grid_m: usize) -> Result<AppGrid> {
    let d = partition.dim();
    let p = partition.cells_per_axis();
    let q = check_grid(p, grid_m)?;
    let total = grid_m
        .checked_pow(d as u32)
        .ok_or_else(|| Error::Sizing("grid too large".into()))?;
    let centers_on_grid = q % 2 == 1;
    let extra = if centers_on_grid { partition.len() } else { 0 };
    if partition.len() + total - extra > MAX_FIELD_POINTS {
        return Err(Error::Sizing(format!(
            "{} centers plus {grid_m}^{d} grid points exceed {MAX_FIELD_POINTS} jointly sampled points",
            partition.len()
        )));
    }
    let mut points: Vec<Point> = partition.centers().to_vec();
    let mut grid = Vec::with_capacity(total);
    let m = grid_m as f64;
    let mut k = vec![0usize; d];
    for _ in 0..total {
        let cell = k.iter().fold(0, |acc, &ka| acc * p + ka / q);
        let at_center = centers_on_grid && k.iter().all(|&ka| ka % q == q / 2);
        if at_center {
            grid.push((cell, cell));
        } else {
            let coords = k.iter().map(|&ka| (ka as f64 + 0.5) / m).collect();
            points.push(Point::from_unchecked(coords));
            grid.push((points.len() - 1, cell));
        }
        for a in (0..d).rev() {
            k[a] += 1;
            if k[a] < grid_m {
                break;
            }
            k[a] = 0;
        }
    }
    Ok(AppGrid { points, grid })
}

/// Empirical L2 error of the piecewise-constant approximation.
///
/// Each replicate samples the field jointly at the cell centers and at the
/// `grid_m^d` midpoint grid, and averages the squared residuals over the
/// grid. The estimator's expectation is [`app_grid_expectation`], which
/// differs from the continuum value by the grid's discretization error.
pub fn empirical_app_error(
    d: usize,
    p: usize,
    grid_m: usize,
    replicates: usize,
    rng: &RngStream,
) -> Result<Estimate> {
    check_dim(d)?;
    check_replicates(replicates)?;
    let partition = CubePartition::new(d, p)?;
    let grid = app_grid(&partition, grid_m)?;
    let sampler = FieldSampler::new(grid.points)?;
    let sq: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let f = sampler.draw_values(&mut rng.split(r));
            let s: f64 = grid.grid.iter().map(|&(g, c)| (f[g] - f[c]).powi(2)).sum();
            s / grid.grid.len() as f64
        })
        .collect();
    Ok(Estimate::from_squared_errors(&sq))
}

/// Grid average of `‖x − center(x)‖`: the exact expectation of the squared
/// error that [`empirical_app_error`] estimates.
pub fn app_grid_expectation(d: usize, p: usize, grid_m: usize) -> Result<f64> {
    check_dim(d)?;
    let partition = CubePartition::new(d, p)?;
    let q = check_grid(p, grid_m)?;
    let total = grid_m
        .checked_pow(d as u32)
        .ok_or_else(|| Error::Sizing("grid too large".into()))?;
    let m = grid_m as f64;
    let mut k = vec![0usize; d];
    let mut x = vec![0.0; d];
    let mut sum = 0.0;
    for _ in 0..total {
        let cell = k.iter().fold(0, |acc, &ka| acc * p + ka / q);
        for a in 0..d {
            x[a] = (k[a] as f64 + 0.5) / m;
        }
        sum += distance(&x, partition.center(cell).coords());
        for a in (0..d).rev() {
            k[a] += 1;
            if k[a] < grid_m {
                break;
            }
            k[a] = 0;
        }
    }
    Ok(sum / total as f64)
}

/// Secondary check of the stratified rule by full field simulation.
///
/// Each replicate samples the field at fresh nodes and at a `grid_m^d`
/// midpoint grid, and compares the rule with the grid mean. The grid mean
/// is only a Riemann sum of the integral, so the estimate carries a
/// discretization bias.
pub fn empirical_haber_error_simulated(
    d: usize,
    p: usize,
    grid_m: usize,
    replicates: usize,
    rng: &RngStream,
) -> Result<Estimate> {
    check_dim(d)?;
    check_replicates(replicates)?;
    let partition = CubePartition::new(d, p)?;
    let total = grid_m
        .checked_pow(d as u32)
        .filter(|&t| t + partition.len() <= MAX_FIELD_POINTS)
        .ok_or_else(|| Error::Sizing(format!("grid {grid_m}^{d} too large for joint sampling")))?;
    if grid_m < 1 {
        return Err(Error::InvalidArgument("grid_m must be >= 1".into()));
    }
    let m = grid_m as f64;
    let grid: Vec<Point> = (0..total)
        .map(|mut i| {
            let mut c = vec![0.0; d];
            for a in (0..d).rev() {
                c[a] = ((i % grid_m) as f64 + 0.5) / m;
                i /= grid_m;
            }
            Point::from_unchecked(c)
        })
        .collect();
    let sq: Result<Vec<f64>> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut stream = rng.split(r);
            let rule = haber_rule(&partition, &mut stream);
            let mut pts = rule.nodes().to_vec();
            pts.extend(grid.iter().cloned());
            let f = FieldSampler::new(pts)?.draw_values(&mut stream);
            let (node_vals, grid_vals) = f.split_at(rule.len());
            let integral = grid_vals.iter().sum::<f64>() / total as f64;
            Ok((rule.apply(node_vals)? - integral).powi(2))
        })
        .collect();
    Ok(Estimate::from_squared_errors(&sq?))
}
