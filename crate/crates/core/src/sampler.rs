//! Exact joint Gaussian sampling of the isotropic Wiener field at finitely
//! many points.
//!
//! The covariance is only positive semidefinite (the origin has variance
//! zero, duplicate points give equal rows), so factorization goes through a
//! ladder:
//!
//! 1. Cholesky that accepts zero pivots whose remaining column vanishes,
//! 2. Cholesky of `cov + δI` for `δ = 1e-12·trace/size`, ×10 up to
//!    `1e-6·trace/size`, kept only if the reconstruction bound holds,
//! 3. symmetric eigendecomposition with negative eigenvalues clamped to 0.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::kernel::{covariance_matrix, CovarianceMatrix};
use crate::rng::RngStream;

/// Relative reconstruction bound `‖LLᵀ − cov‖_max ≤ RECON_TOL·(1 + max diag)`.
pub const RECON_TOL: f64 = 1e-8;

/// Eigenvalues below `−CLAMP_TOL·‖cov‖` are reported as kernel violations.
pub const CLAMP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FactorMethod {
    Cholesky,
    /// Cholesky of `cov + jitter·I`.
    Jittered(f64),
    EigenClamped,
}

/// A square factor `L` with `L Lᵀ ≈ cov`, stored row-major.
#[derive(Debug, Clone)]
pub struct Factor {
    size: usize,
    rows: Vec<f64>,
    lower: bool,
    method: FactorMethod,
}

impl Factor {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn method(&self) -> FactorMethod {
        self.method
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i * self.size + j]
    }

    /// `L z`.
    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.size);
        (0..self.size)
            .map(|i| {
                let row = &self.rows[i * self.size..(i + 1) * self.size];
                let end = if self.lower { i + 1 } else { self.size };
                row[..end].iter().zip(&z[..end]).map(|(l, z)| l * z).sum()
            })
            .collect()
    }

    /// `max |(L Lᵀ − cov)_ij|`.
    pub fn reconstruction_error(&self, cov: &CovarianceMatrix) -> f64 {
        let n = self.size;
        let mut worst = 0.0f64;
        for i in 0..n {
            let ri = &self.rows[i * n..(i + 1) * n];
            for j in 0..=i {
                let rj = &self.rows[j * n..(j + 1) * n];
                let s: f64 = ri.iter().zip(rj).map(|(a, b)| a * b).sum();
                worst = worst.max((s - cov.entry(i, j)).abs());
            }
        }
        worst
    }
}

/// Factorizes a symmetric positive semidefinite matrix.
pub fn factorize(cov: &CovarianceMatrix) -> Result<Factor> {
    let n = cov.size();
    let bound = RECON_TOL * (1.0 + cov.max_diagonal());
    if let Some(rows) = semidefinite_cholesky(cov.entries(), n, 0.0) {
        return Ok(Factor {
            size: n,
            rows,
            lower: true,
            method: FactorMethod::Cholesky,
        });
    }
    let scale = cov.trace() / n as f64;
    let mut jitter = 1e-12 * scale;
    while jitter <= 1e-6 * scale * (1.0 + 1e-9) {
        if let Some(rows) = semidefinite_cholesky(cov.entries(), n, jitter) {
            let factor = Factor {
                size: n,
                rows,
                lower: true,
                method: FactorMethod::Jittered(jitter),
            };
            if factor.reconstruction_error(cov) <= bound {
                return Ok(factor);
            }
        }
        jitter *= 10.0;
    }
    eigen_factor(cov)
}

/// Cholesky of `a + jitter·I` that tolerates zero pivots.
///
/// A pivot within rounding of zero is accepted when the rest of its
/// column is also zero; that row of the factor becomes zero past the
/// diagonal. Returns `None` on a negative pivot or a non-vanishing column.
fn semidefinite_cholesky(a: &[f64], n: usize, jitter: f64) -> Option<Vec<f64>> {
    let max_diag = (0..n).map(|i| a[i * n + i]).fold(0.0, f64::max) + jitter;
    let pivot_tol = 64.0 * n as f64 * f64::EPSILON * max_diag.max(f64::MIN_POSITIVE);
    let col_tol = 1e-10 * max_diag.max(f64::MIN_POSITIVE);
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let rj = j * n;
        let sq: f64 = l[rj..rj + j].iter().map(|v| v * v).sum();
        let r = a[rj + j] + jitter - sq;
        if r > pivot_tol {
            let ljj = r.sqrt();
            l[rj + j] = ljj;
            for i in j + 1..n {
                let ri = i * n;
                let dot: f64 = l[ri..ri + j].iter().zip(&l[rj..rj + j]).map(|(x, y)| x * y).sum();
                l[ri + j] = (a[ri + j] - dot) / ljj;
            }
        } else if r >= -pivot_tol {
            for i in j + 1..n {
                let ri = i * n;
                let dot: f64 = l[ri..ri + j].iter().zip(&l[rj..rj + j]).map(|(x, y)| x * y).sum();
                if (a[ri + j] - dot).abs() > col_tol {
                    return None;
                }
            }
        } else {
            return None;
        }
    }
    Some(l)
}

fn eigen_factor(cov: &CovarianceMatrix) -> Result<Factor> {
    let n = cov.size();
    let m = DMatrix::from_row_slice(n, n, cov.entries());
    let norm = m.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let eig = m.symmetric_eigen();
    let mut rows = vec![0.0; n * n];
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda < -CLAMP_TOL * norm {
            return Err(Error::KernelViolation(format!(
                "eigenvalue {lambda:.3e} below clamping tolerance (matrix norm {norm:.3e})"
            )));
        }
        let s = lambda.max(0.0).sqrt();
        for i in 0..n {
            rows[i * n + k] = eig.eigenvectors[(i, k)] * s;
        }
    }
    let factor = Factor {
        size: n,
        rows,
        lower: false,
        method: FactorMethod::EigenClamped,
    };
    let err = factor.reconstruction_error(cov);
    if err > RECON_TOL * (1.0 + cov.max_diagonal()) {
        return Err(Error::KernelViolation(format!(
            "eigen factor reconstruction error {err:.3e}"
        )));
    }
    Ok(factor)
}

/// One joint draw of the field at a point set.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub points: Vec<Point>,
    pub values: Vec<f64>,
}

impl FieldSample {
    /// CSV with columns `x_1..x_d,value`.
    pub fn write_csv_to<W: Write>(&self, out: W) -> std::result::Result<(), csv::Error> {
        let d = self.points.first().map_or(0, Point::dim);
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=d).map(|a| format!("x_{a}")).collect();
        header.push("value".into());
        w.write_record(&header)?;
        for (p, v) in self.points.iter().zip(&self.values) {
            let mut rec: Vec<String> = p.coords().iter().map(|c| crate::experiments::fmt_sig12(*c)).collect();
            rec.push(crate::experiments::fmt_sig12(*v));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.write_csv_to(file).map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Factorized covariance of a fixed point set, for repeated draws.
#[derive(Debug, Clone)]
pub struct FieldSampler {
    points: Vec<Point>,
    factor: Factor,
}

impl FieldSampler {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let cov = covariance_matrix(&points)?;
        let factor = factorize(&cov)?;
        Ok(Self { points, factor })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn factor(&self) -> &Factor {
        &self.factor
    }

    /// Field values `L z` for a fresh standard normal vector `z`.
    pub fn draw_values(&self, rng: &mut RngStream) -> Vec<f64> {
        let mut z = vec![0.0; self.factor.size()];
        rng.fill_normal(&mut z);
        self.factor.apply(&z)
    }

    pub fn draw(&self, rng: &mut RngStream) -> FieldSample {
        FieldSample {
            points: self.points.clone(),
            values: self.draw_values(rng),
        }
    }
}

/// One joint draw of the field at `points`.
pub fn sample_field(points: &[Point], rng: &mut RngStream) -> Result<FieldSample> {
    Ok(FieldSampler::new(points.to_vec())?.draw(rng))
}
