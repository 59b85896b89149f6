//! Average-case integration and L2 approximation on the unit cube `[0,1]^d`
//! under the isotropic Wiener measure (Brownian motion in Lévy's sense).
//!
//! The field has mean zero and covariance `K(x,y) = (‖x‖ + ‖y‖ − ‖x−y‖)/2`.
//! The crate provides
//!
//! - the cube partition into `n = p^d` congruent cells ([`geometry`]),
//! - kernel evaluation and kernel integrals ([`kernel`]),
//! - exact joint Gaussian sampling of the field ([`sampler`]),
//! - the two problem constants `∫∫‖x−y‖/2` and `∫‖x‖/2` ([`constants`]),
//! - stratified Monte Carlo quadrature, piecewise-constant approximation,
//!   baselines and their exact/empirical average errors ([`algorithms`]),
//! - rate studies, complexity curves and CSV reports ([`experiments`]).

pub mod algorithms;
pub mod constants;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod kernel;
pub mod quadrature;
pub mod rng;
pub mod sampler;

pub use error::{Error, Result};
pub use geometry::{CubePartition, Point};
pub use rng::RngStream;

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 5;

/// Default Gauss–Legendre order per axis for a given dimension.
pub fn default_quad_order(d: usize) -> usize {
    if d <= 3 {
        32
    } else {
        16
    }
}
