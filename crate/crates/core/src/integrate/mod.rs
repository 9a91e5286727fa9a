//! Weighted volume and surface integrals over the shape families.
//!
//! Quadrature reduces every integral to products of one-dimensional integrals
//! whose endpoint singularities are carried by `x^alpha` Gauss rules. The
//! Monte Carlo engine in [`monte_carlo`] is the independent oracle.

pub mod gauss;
pub mod monte_carlo;
mod quadrature;
pub(crate) mod reduce;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use gauss::{cached_rule, gauss_weighted_nodes, GaussRule};
pub use monte_carlo::{mc_surface, mc_surface_pieces, mc_volume};
pub use quadrature::{weighted_surface, weighted_surface_pieces, weighted_volume, PieceEstimate};

/// Environment variable overriding the default refinement depth.
pub const QUAD_DEPTH_ENV: &str = "ISOWEIGHT_QUAD_DEPTH";

/// Controls the quadrature engine.
///
/// Each refinement level doubles the number of nodes per one-dimensional
/// integral; the estimate stops once two consecutive levels agree to `rel_tol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub nodes_per_axis: usize,
    pub max_refinement_depth: usize,
    pub rel_tol: f64,
}

impl QuadratureSpec {
    pub fn new(nodes_per_axis: usize, max_refinement_depth: usize, rel_tol: f64) -> Result<Self> {
        let spec = Self {
            nodes_per_axis,
            max_refinement_depth,
            rel_tol,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_axis < 2 {
            return Err(Error::InvalidParameter(format!(
                "nodes_per_axis must be >= 2, got {}",
                self.nodes_per_axis
            )));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must lie in (0, 1), got {}",
                self.rel_tol
            )));
        }
        if self.max_refinement_depth > 12 {
            return Err(Error::InvalidParameter(format!(
                "max_refinement_depth above 12 is not supported, got {}",
                self.max_refinement_depth
            )));
        }
        Ok(())
    }

    /// Default spec, with the depth taken from `ISOWEIGHT_QUAD_DEPTH` when set.
    pub fn from_env() -> Self {
        let mut spec = Self::default();
        if let Some(depth) = std::env::var(QUAD_DEPTH_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
        {
            spec.max_refinement_depth = depth.min(12);
        }
        spec
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes_per_axis: 16,
            max_refinement_depth: 5,
            rel_tol: 1e-10,
        }
    }
}

/// Controls the Monte Carlo engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McSpec {
    pub sample_count: u64,
    pub seed: u64,
}

impl McSpec {
    pub fn new(sample_count: u64, seed: u64) -> Result<Self> {
        if sample_count < 1000 {
            return Err(Error::InvalidParameter(format!(
                "sample_count must be >= 1000, got {sample_count}"
            )));
        }
        Ok(Self { sample_count, seed })
    }
}

impl Default for McSpec {
    fn default() -> Self {
        Self {
            sample_count: 1_000_000,
            seed: 0x5eed,
        }
    }
}

/// A numerical integral with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimate {
    pub value: f64,
    pub abs_error_est: f64,
    pub evaluations: u64,
    /// False when refinement stopped at the depth limit before meeting `rel_tol`.
    #[serde(default = "default_true")]
    pub converged: bool,
}

fn default_true() -> bool {
    true
}

impl IntegralEstimate {
    pub fn exact_zero() -> Self {
        Self {
            value: 0.0,
            abs_error_est: 0.0,
            evaluations: 0,
            converged: true,
        }
    }

    /// `abs_error_est / |value|`, or 0 for an exact zero.
    pub fn rel_error(&self) -> f64 {
        if self.value == 0.0 {
            if self.abs_error_est == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.abs_error_est / self.value.abs()
        }
    }

    /// Sum of independent estimates; errors add linearly.
    pub fn sum<'a>(parts: impl IntoIterator<Item = &'a IntegralEstimate>) -> Self {
        parts.into_iter().fold(Self::exact_zero(), |acc, p| Self {
            value: acc.value + p.value,
            abs_error_est: acc.abs_error_est + p.abs_error_est,
            evaluations: acc.evaluations + p.evaluations,
            converged: acc.converged && p.converged,
        })
    }
}
