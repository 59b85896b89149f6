//! The two problem constants
//!
//! - `c_int(d) = ∫_D ∫_D ‖x − y‖/2 dx dy`
//! - `c_app(d) = ∫_D ‖x‖/2 dx`
//!
//! computed by tensor Gauss–Legendre quadrature on `D = [0,1]^d`. `c_int`
//! uses the difference-distribution reduction
//! `∫∫‖x−y‖ = 2^d ∫_{[0,1]^d} ‖u‖ Π(1 − u_i) du`, so both integrands are
//! smooth except for the norm's corner singularity at the origin.
//!
//! Values are memoized per `(d, order)`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{distance, norm};
use crate::quadrature::GaussLegendre;
use crate::rng::RngStream;
use crate::MAX_DIM;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Which {
    Int,
    App,
}

fn check_dim(d: usize) -> Result<()> {
    if !(1..=MAX_DIM).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    Ok(())
}

type Cache = Mutex<HashMap<(Which, usize, usize), f64>>;

fn memoized(which: Which, d: usize, order: usize) -> Result<f64> {
    check_dim(d)?;
    if order < 2 {
        return Err(Error::InvalidOrder(order));
    }
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&v) = cache.lock().unwrap().get(&(which, d, order)) {
        return Ok(v);
    }
    let rule = GaussLegendre::cached(order)?;
    let lo = vec![0.0; d];
    let hi = vec![1.0; d];
    let value = match which {
        Which::App => rule.integrate_box(&lo, &hi, norm) / 2.0,
        Which::Int => {
            let scale = (1u64 << d) as f64;
            scale * rule.integrate_box(&lo, &hi, |u| norm(u) * u.iter().map(|x| 1.0 - x).product::<f64>())
                / 2.0
        }
    };
    cache.lock().unwrap().insert((which, d, order), value);
    Ok(value)
}

/// `∫_{[0,1]^d} ‖x‖/2 dx`.
pub fn c_app(d: usize, quad_order: usize) -> Result<f64> {
    memoized(Which::App, d, quad_order)
}

/// `∫_{[0,1]^d} ∫_{[0,1]^d} ‖x − y‖/2 dx dy`.
pub fn c_int(d: usize, quad_order: usize) -> Result<f64> {
    memoized(Which::Int, d, quad_order)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    DeterministicQuadrature,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::DeterministicQuadrature => "deterministic-quadrature",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

/// Both constants for one dimension with an absolute accuracy estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemConstants {
    pub d: usize,
    pub c_int: f64,
    pub c_app: f64,
    /// Larger of the two deviations from the doubled-order rule.
    pub accuracy: f64,
    pub method: Method,
}

impl ProblemConstants {
    pub fn compute(d: usize, quad_order: usize) -> Result<Self> {
        let c_int = c_int(d, quad_order)?;
        let c_app = c_app(d, quad_order)?;
        let fine = 2 * quad_order;
        let accuracy = (c_int - self::c_int(d, fine)?)
            .abs()
            .max((c_app - self::c_app(d, fine)?).abs());
        Ok(Self {
            d,
            c_int,
            c_app,
            accuracy,
            method: Method::DeterministicQuadrature,
        })
    }

    pub fn for_dimension(d: usize) -> Result<Self> {
        Self::compute(d, crate::default_quad_order(d))
    }
}

/// Plain Monte Carlo estimates of both constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate_int: f64,
    pub estimate_app: f64,
    pub stderr_int: f64,
    pub stderr_app: f64,
}

/// Monte Carlo cross-check: `samples` i.i.d. pairs `(x, y)` uniform on `D²`.
pub fn mc_cross_check(d: usize, samples: usize, rng: &mut RngStream) -> Result<McEstimate> {
    check_dim(d)?;
    if samples < 100 {
        return Err(Error::InvalidArgument(format!("mc_cross_check needs >= 100 samples, got {samples}")));
    }
    let mut x = vec![0.0; d];
    let mut y = vec![0.0; d];
    let (mut s_int, mut ss_int, mut s_app, mut ss_app) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..samples {
        for v in x.iter_mut().chain(y.iter_mut()) {
            *v = rng.uniform();
        }
        let a = distance(&x, &y) / 2.0;
        let b = norm(&x) / 2.0;
        s_int += a;
        ss_int += a * a;
        s_app += b;
        ss_app += b * b;
    }
    let n = samples as f64;
    let se = |s: f64, ss: f64| {
        let mean = s / n;
        let var = ((ss - n * mean * mean) / (n - 1.0)).max(0.0);
        (mean, (var / n).sqrt())
    };
    let (estimate_int, stderr_int) = se(s_int, ss_int);
    let (estimate_app, stderr_app) = se(s_app, ss_app);
    Ok(McEstimate {
        estimate_int,
        estimate_app,
        stderr_int,
        stderr_app,
    })
}
