//! Monomial-weighted isoperimetric quotients.
//!
//! For exponent vectors `A`, `B` the toolkit evaluates the weighted perimeter
//! `P_A(Omega) = int_{boundary} x^A` and volume `m_B(Omega) = int_Omega x^B` on
//! parametric shape families, forms the scale-invariant quotient
//! `P_A / m_B^sigma`, classifies when its infimum vanishes, and runs the
//! limiting sweeps and Sobolev checks built on top of it.

pub mod error;
pub mod integrate;
pub mod isoperimetry;
pub mod limits;
pub mod shapes;
pub mod sobolev;
pub mod weight;

pub use error::{Error, Result};
pub use integrate::{IntegralEstimate, McSpec, QuadratureSpec};
pub use shapes::{BoundaryPiece, ShapeFamily};
pub use weight::{ExponentVector, WeightPair};
