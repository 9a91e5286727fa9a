//! Closed-form best constants of the weighted Sobolev inequalities.

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::weight::ExponentVector;

fn homogeneous_dim(a: &ExponentVector) -> f64 {
    a.len() as f64 + a.sum()
}

/// `C_1 = D (prod Gamma((a_j+1)/2) / (2^k Gamma(1 + D/2)))^{1/D}`.
pub fn best_constant_p1(a: &ExponentVector) -> f64 {
    let d = homogeneous_dim(a);
    let k = a.positive_count() as i32;
    let num: f64 = a.as_slice().iter().map(|aj| gamma(0.5 * (aj + 1.0))).product();
    d * (num / (2f64.powi(k) * gamma(1.0 + 0.5 * d))).powf(1.0 / d)
}

/// `C_{p,N} = C_1 D^{1/D - 1 - 1/p} ((p-1)/(D-p))^{1/p'} (p' Gamma(D) / (Gamma(D/p) Gamma(D/p')))^{1/D}`
/// with `p' = p/(p-1)`, for `1 < p < D`.
pub fn best_constant(p: f64, a: &ExponentVector) -> Result<f64> {
    let d = homogeneous_dim(a);
    if !(p > 1.0 && p < d) {
        return Err(Error::InvalidParameter(format!("need 1 < p < D = {d}, got p = {p}")));
    }
    let pp = p / (p - 1.0);
    let c1 = best_constant_p1(a);
    let ratio = pp * gamma(d) / (gamma(d / p) * gamma(d / pp));
    Ok(c1 * d.powf(1.0 / d - 1.0 - 1.0 / p) * ((p - 1.0) / (d - p)).powf(1.0 / pp) * ratio.powf(1.0 / d))
}
