//! The isotropic Wiener covariance `K(x,y) = (‖x‖ + ‖y‖ − ‖x−y‖)/2` and
//! the kernel integrals entering exact average errors.

use crate::constants;
use crate::error::{Error, Result};
use crate::geometry::{distance, norm, Point};
use crate::quadrature::GaussLegendre;

fn check_dims(x: &Point, y: &Point) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    Ok(())
}

#[inline]
pub(crate) fn kernel_raw(x: &[f64], y: &[f64]) -> f64 {
    (norm(x) + norm(y) - distance(x, y)) / 2.0
}

/// `K(x,y)` with Euclidean norms.
pub fn kernel_eval(x: &Point, y: &Point) -> Result<f64> {
    check_dims(x, y)?;
    Ok(kernel_raw(x.coords(), y.coords()))
}

/// `E(f(x) − f(y))² = ‖x − y‖`.
pub fn increment_variance(x: &Point, y: &Point) -> Result<f64> {
    check_dims(x, y)?;
    Ok(distance(x.coords(), y.coords()))
}

/// Symmetric Gram matrix of `K` over a point set, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    size: usize,
    entries: Vec<f64>,
}

impl CovarianceMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.size).map(|i| self.entry(i, i)).sum()
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.size).map(|i| self.entry(i, i)).fold(0.0, f64::max)
    }

    /// Builds a matrix from row-major entries; `entries.len()` must be `size²`.
    pub fn from_row_major(size: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != size * size {
            return Err(Error::LengthMismatch {
                expected: size * size,
                got: entries.len(),
            });
        }
        Ok(Self { size, entries })
    }
}

/// `entry(i,j) = K(points_i, points_j)`. Duplicate points are allowed.
pub fn covariance_matrix(points: &[Point]) -> Result<CovarianceMatrix> {
    let first = points
        .first()
        .ok_or_else(|| Error::Sizing("covariance matrix of an empty point set".into()))?;
    let d = first.dim();
    if let Some(bad) = points.iter().find(|p| p.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: bad.dim(),
        });
    }
    let size = points.len();
    let norms: Vec<f64> = points.iter().map(Point::norm).collect();
    let mut entries = vec![0.0; size * size];
    for i in 0..size {
        entries[i * size + i] = norms[i];
        for j in 0..i {
            let k = (norms[i] + norms[j] - distance(points[i].coords(), points[j].coords())) / 2.0;
            entries[i * size + j] = k;
            entries[j * size + i] = k;
        }
    }
    Ok(CovarianceMatrix { size, entries })
}

/// `∫_D K(u,x) du` by tensor Gauss–Legendre of `quad_order` points per axis.
///
/// Each axis is split at `x_a` so the kink of `‖u − x‖` lies on sub-box
/// faces; the remaining singularities sit at sub-box corners.
pub fn kernel_mean_embedding(x: &Point, quad_order: usize) -> Result<f64> {
    let rule = GaussLegendre::cached(quad_order)?;
    Ok(mean_embedding_raw(x.coords(), &rule))
}

pub(crate) fn mean_embedding_raw(x: &[f64], rule: &GaussLegendre) -> f64 {
    let nx = norm(x);
    rule.integrate_unit_cube_split(x, |u| (norm(u) + nx - distance(u, x)) / 2.0)
}

/// `∫_D ∫_D K(x,y) dx dy = 2·c_app(d) − c_int(d)`, at the default order.
pub fn kernel_double_integral(d: usize) -> Result<f64> {
    kernel_double_integral_with_order(d, crate::default_quad_order(d))
}

pub fn kernel_double_integral_with_order(d: usize, quad_order: usize) -> Result<f64> {
    Ok(2.0 * constants::c_app(d, quad_order)? - constants::c_int(d, quad_order)?)
}
