//! The unit cube, its partition into `p^d` equal subcubes, and stratified
//! point draws.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::MAX_DIM;

/// Largest number of cells a partition may hold.
pub const MAX_CELLS: usize = 1_000_000;

/// A location in `[0,1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    /// Builds a point, checking `d >= 1` and that every coordinate is in `[0,1]`.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Sizing("a point needs at least one coordinate".into()));
        }
        if let Some(c) = coords.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(Error::OutOfDomain(format!("coordinate {c} in {coords:?}")));
        }
        Ok(Self(coords))
    }

    /// Constructor for coordinates already known to lie in the cube.
    pub(crate) fn from_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!(coords.iter().all(|c| (0.0..=1.0).contains(c)));
        Self(coords)
    }

    pub fn origin(d: usize) -> Self {
        Self(vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Partition of `[0,1]^d` into `n = p^d` congruent cubes
/// `U_i = x_i + [−1/(2p), 1/(2p)]^d`.
///
/// Cells are enumerated lexicographically by their per-axis index
/// `(k_1, …, k_d)`, first axis most significant.
#[derive(Debug, Clone)]
pub struct CubePartition {
    d: usize,
    p: usize,
    n: usize,
    centers: Vec<Point>,
}

impl CubePartition {
    /// Builds the partition; fails for `d` outside `1..=5`, `p < 1`, or
    /// more than [`MAX_CELLS`] cells.
    pub fn new(d: usize, p: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&d) {
            return Err(Error::Sizing(format!("dimension d={d} outside 1..={MAX_DIM}")));
        }
        if p < 1 {
            return Err(Error::Sizing("cells per axis p must be >= 1".into()));
        }
        let n = p
            .checked_pow(d as u32)
            .filter(|&n| n <= MAX_CELLS)
            .ok_or_else(|| Error::Sizing(format!("p^d = {p}^{d} exceeds {MAX_CELLS} cells")))?;
        let pf = p as f64;
        let centers = (0..n)
            .map(|i| {
                let coords = cell_multi_index(i, d, p)
                    .into_iter()
                    .map(|k| (k as f64 + 0.5) / pf)
                    .collect();
                Point::from_unchecked(coords)
            })
            .collect();
        Ok(Self { d, p, n, centers })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn cells_per_axis(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn centers(&self) -> &[Point] {
        &self.centers
    }

    pub fn center(&self, i: usize) -> &Point {
        &self.centers[i]
    }

    pub fn half_width(&self) -> f64 {
        0.5 / self.p as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (self.p as f64).powi(-(self.d as i32))
    }

    /// Per-axis indices `(k_1, …, k_d)` of cell `i`.
    pub fn multi_index(&self, i: usize) -> Vec<usize> {
        cell_multi_index(i, self.d, self.p)
    }

    /// Lower and upper corners of cell `i`.
    pub fn cell_bounds(&self, i: usize) -> (Vec<f64>, Vec<f64>) {
        let pf = self.p as f64;
        let k = self.multi_index(i);
        let lo = k.iter().map(|&k| k as f64 / pf).collect();
        let hi = k.iter().map(|&k| (k + 1) as f64 / pf).collect();
        (lo, hi)
    }

    /// Index of the cell containing `x`. A coordinate `k/p` with `0 < k < p`
    /// belongs to cell `k` along that axis.
    pub fn locate(&self, x: &Point) -> Result<usize> {
        if x.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.dim(),
            });
        }
        self.locate_coords(x.coords())
    }

    pub(crate) fn locate_coords(&self, x: &[f64]) -> Result<usize> {
        let pf = self.p as f64;
        let mut idx = 0usize;
        for &c in x {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::OutOfDomain(format!("coordinate {c}")));
            }
            let k = ((c * pf).floor() as usize).min(self.p - 1);
            idx = idx * self.p + k;
        }
        Ok(idx)
    }

    /// One independent uniform point in each cell, in cell order.
    pub fn sample_stratified(&self, rng: &mut RngStream) -> Vec<Point> {
        let pf = self.p as f64;
        (0..self.n)
            .map(|i| {
                let coords = cell_multi_index(i, self.d, self.p)
                    .into_iter()
                    .map(|k| (k as f64 + rng.uniform()) / pf)
                    .map(|c| c.clamp(0.0, 1.0))
                    .collect();
                Point::from_unchecked(coords)
            })
            .collect()
    }
}

fn cell_multi_index(mut i: usize, d: usize, p: usize) -> Vec<usize> {
    let mut k = vec![0; d];
    for a in (0..d).rev() {
        k[a] = i % p;
        i /= p;
    }
    k
}

/// Draws `n` i.i.d. uniform points on `[0,1]^d`.
pub fn sample_uniform(n: usize, d: usize, rng: &mut RngStream) -> Vec<Point> {
    (0..n)
        .map(|_| Point::from_unchecked((0..d).map(|_| rng.uniform()).collect()))
        .collect()
}
