//! Gauss–Legendre rules on `[0,1]` and their tensor products over boxes.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights mapped to `[0,1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the `order`-point rule by Newton iteration on `P_order`.
    pub fn new(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidOrder(order));
        }
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // map [-1,1] -> [0,1]
            nodes[i] = 0.5 * (1.0 - x);
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Ok(Self { nodes, weights })
    }

    /// Shared, lazily built rule of the given order.
    pub fn cached(order: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(rule) = cache.lock().unwrap().get(&order) {
            return Ok(Arc::clone(rule));
        }
        let rule = Arc::new(Self::new(order)?);
        cache
            .lock()
            .unwrap()
            .entry(order)
            .or_insert_with(|| Arc::clone(&rule));
        Ok(rule)
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over `[lo, hi]`.
    pub fn integrate_1d(&self, lo: f64, hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let h = hi - lo;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(lo + h * x))
            .sum::<f64>()
            * h
    }

    /// Tensor-product rule over the box `Π [lo_a, hi_a]`.
    ///
    /// `f` receives a reused coordinate buffer of length `lo.len()`.
    pub fn integrate_box(&self, lo: &[f64], hi: &[f64], mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        let d = lo.len();
        debug_assert_eq!(d, hi.len());
        let q = self.order();
        let widths: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| b - a).collect();
        let volume: f64 = widths.iter().product();
        if volume == 0.0 {
            return 0.0;
        }
        let mut idx = vec![0usize; d];
        let mut x: Vec<f64> = (0..d).map(|a| lo[a] + widths[a] * self.nodes[0]).collect();
        let mut sum = 0.0;
        loop {
            let w: f64 = idx.iter().map(|&i| self.weights[i]).product();
            sum += w * f(&x);
            // odometer, last axis fastest
            let mut a = d;
            loop {
                if a == 0 {
                    return sum * volume;
                }
                a -= 1;
                idx[a] += 1;
                if idx[a] < q {
                    x[a] = lo[a] + widths[a] * self.nodes[idx[a]];
                    break;
                }
                idx[a] = 0;
                x[a] = lo[a] + widths[a] * self.nodes[0];
            }
        }
    }

    /// Integrates over `[0,1]^d`, splitting every axis at the matching
    /// coordinate of `split` (when strictly inside) so that kinks of the
    /// integrand through `split` fall on sub-box faces.
    pub fn integrate_unit_cube_split(&self, split: &[f64], mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        let d = split.len();
        let mut cuts: Vec<Vec<f64>> = Vec::with_capacity(d);
        for &s in split {
            if s > 0.0 && s < 1.0 {
                cuts.push(vec![0.0, s, 1.0]);
            } else {
                cuts.push(vec![0.0, 1.0]);
            }
        }
        let mut total = 0.0;
        let mut pieces = vec![0usize; d];
        let mut lo = vec![0.0; d];
        let mut hi = vec![0.0; d];
        loop {
            for a in 0..d {
                lo[a] = cuts[a][pieces[a]];
                hi[a] = cuts[a][pieces[a] + 1];
            }
            total += self.integrate_box(&lo, &hi, &mut f);
            let mut a = d;
            loop {
                if a == 0 {
                    return total;
                }
                a -= 1;
                pieces[a] += 1;
                if pieces[a] + 1 < cuts[a].len() {
                    break;
                }
                pieces[a] = 0;
            }
        }
    }
}

/// Returns `(P_n(x), P_n'(x))`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_order_below_two() {
        assert!(matches!(GaussLegendre::new(1), Err(Error::InvalidOrder(1))));
        assert!(GaussLegendre::new(0).is_err());
    }

    #[test]
    fn weights_sum_to_one_and_nodes_are_sorted() {
        for order in [2, 3, 7, 16, 32, 64] {
            let gl = GaussLegendre::new(order).unwrap();
            let s: f64 = gl.weights().iter().sum();
            assert!((s - 1.0).abs() < 1e-14, "order {order}: {s}");
            assert!(gl.nodes().windows(2).all(|w| w[0] < w[1]));
            assert!(gl.nodes().iter().all(|&x| x > 0.0 && x < 1.0));
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let gl = GaussLegendre::new(5).unwrap();
        for k in 0..10 {
            let v = gl.integrate_1d(0.0, 1.0, |x| x.powi(k));
            assert!((v - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "degree {k}");
        }
    }

    #[test]
    fn box_rule_matches_product_of_1d_integrals() {
        let gl = GaussLegendre::new(6).unwrap();
        let v = gl.integrate_box(&[0.0, 0.5, -1.0], &[1.0, 1.0, 1.0], |x| x[0] * x[1] * x[1] * (1.0 + x[2]));
        // ∫x dx = 1/2 ; ∫_{.5}^1 y² = 7/24 ; ∫_{-1}^1 (1+z) = 2
        assert!((v - 0.5 * 7.0 / 24.0 * 2.0).abs() < 1e-14);
    }

    #[test]
    fn split_rule_integrates_kinks_exactly() {
        let gl = GaussLegendre::new(4).unwrap();
        // ∫_0^1 |x - 0.3| dx = (0.09 + 0.49)/2
        let v = gl.integrate_unit_cube_split(&[0.3], |x| (x[0] - 0.3).abs());
        assert!((v - 0.29).abs() < 1e-15);
    }
}
