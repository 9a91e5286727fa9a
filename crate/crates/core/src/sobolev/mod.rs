//! Weighted Sobolev side: best constants, grid functions, mollified indicators,
//! the coarea chain and the one-dimensional integration-by-parts inequality.

pub mod coarea;
pub mod constants;
pub mod grid;
pub mod ibp;
pub mod mollify;

pub use coarea::{coarea_lower_bound_check, CoareaCheck, LevelSet};
pub use constants::{best_constant, best_constant_p1};
pub use grid::{GridFunction, GridSpec};
pub use ibp::{ibp_inequality_check, ibp_random_suite, IbpCheck, IbpSuite};
pub use mollify::{grid_for, mollification_study, mollified_indicator, MollificationRow, MollificationStudy, MollifierSpec};

use crate::error::{Error, Result};
use crate::weight::WeightPair;

/// `int |grad u| x^A / (int |u|^{1/sigma} x^B)^sigma` on the grid.
pub fn functional_quotient(u: &GridFunction, pair: &WeightPair) -> Result<f64> {
    if u.ndim() != pair.n {
        return Err(Error::DimensionMismatch {
            expected: pair.n,
            got: u.ndim(),
        });
    }
    let num = u.weighted_total_variation(pair.a_vec.as_slice());
    let den = u.weighted_lp(1.0 / pair.sigma, pair.b_vec.as_slice()).powf(pair.sigma);
    if !(den > 0.0) {
        return Err(Error::DegenerateShape("u has zero weighted norm".into()));
    }
    Ok(num / den)
}
