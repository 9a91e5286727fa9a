//! The one-dimensional weighted inequality `int |y|^b v <= (1/a) int |y|^a |v'|`
//! for `a = b + 1`, evaluated exactly on piecewise-linear `v`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IbpCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `int_{y0}^{y1} |y|^e (alpha + beta y) dy` for `y0 <= y1` of equal sign.
fn signed_moment(y0: f64, y1: f64, e: f64, alpha: f64, beta: f64) -> f64 {
    if y0 >= 0.0 {
        alpha * (y1.powf(e + 1.0) - y0.powf(e + 1.0)) / (e + 1.0)
            + beta * (y1.powf(e + 2.0) - y0.powf(e + 2.0)) / (e + 2.0)
    } else {
        // substitute y = -s
        signed_moment(-y1, -y0, e, alpha, -beta)
    }
}

/// Splits `[y0, y1]` at the origin and integrates each half exactly.
fn segment_moment(y0: f64, y1: f64, e: f64, alpha: f64, beta: f64) -> f64 {
    if y0 < 0.0 && y1 > 0.0 {
        signed_moment(y0, 0.0, e, alpha, beta) + signed_moment(0.0, y1, e, alpha, beta)
    } else {
        signed_moment(y0, y1, e, alpha, beta)
    }
}

/// Evaluates both sides for the piecewise-linear interpolant of `(y, v)`.
///
/// `v` must be nonnegative and vanish at both ends; `a = b + 1 > 0`.
pub fn ibp_inequality_check(y: &[f64], v: &[f64], a: f64, b: f64) -> Result<IbpCheck> {
    if y.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            got: v.len(),
        });
    }
    if !(a > 0.0 && (a - b - 1.0).abs() <= 1e-12) {
        return Err(Error::Hypothesis(format!("need a = b + 1 > 0, got a = {a}, b = {b}")));
    }
    if let Some(bad) = v.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::Precondition(format!("v must be nonnegative, found {bad}")));
    }
    if y.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition("sample points must increase strictly".into()));
    }
    if v.first().is_some_and(|x| *x != 0.0) || v.last().is_some_and(|x| *x != 0.0) {
        return Err(Error::Precondition("v must vanish at both ends of its support".into()));
    }
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for (ys, vs) in y.windows(2).zip(v.windows(2)) {
        let slope = (vs[1] - vs[0]) / (ys[1] - ys[0]);
        let intercept = vs[0] - slope * ys[0];
        lhs += segment_moment(ys[0], ys[1], b, intercept, slope);
        rhs += slope.abs() * segment_moment(ys[0], ys[1], a, 1.0, 0.0);
    }
    rhs /= a;
    let tol = 1e-12 * lhs.abs().max(rhs.abs());
    Ok(IbpCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + tol,
    })
}

/// Summary of [`ibp_random_suite`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IbpSuite {
    pub cases: usize,
    pub failures: usize,
    /// Largest `lhs / rhs` seen.
    pub worst_ratio: f64,
    pub seed: u64,
}

/// Runs the check on `count` random nonnegative piecewise-linear `v` with
/// 3 to 12 knots in `[-3, 3]` and `a` uniform in `(0, 4]`.
pub fn ibp_random_suite(count: usize, seed: u64) -> Result<IbpSuite> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..count {
        let knots = rng.gen_range(3..=12usize);
        let mut y: Vec<f64> = (0..knots).map(|_| rng.gen_range(-3.0..3.0)).collect();
        y.sort_by(f64::total_cmp);
        y.dedup();
        if y.len() < 3 {
            continue;
        }
        let mut v: Vec<f64> = (0..y.len()).map(|_| rng.gen_range(0.0..2.0)).collect();
        let last = v.len() - 1;
        v[0] = 0.0;
        v[last] = 0.0;
        let a = 4.0 * (1.0 - rng.gen::<f64>());
        let c = ibp_inequality_check(&y, &v, a, a - 1.0)?;
        if !c.holds {
            failures += 1;
        }
        if c.rhs > 0.0 {
            worst_ratio = worst_ratio.max(c.lhs / c.rhs);
        }
    }
    Ok(IbpSuite {
        cases: count,
        failures,
        worst_ratio,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn tent_is_sharp() {
        let c = ibp_inequality_check(&[-1.0, 0.0, 1.0], &[0.0, 1.0, 0.0], 1.0, 0.0).unwrap();
        assert_relative_eq!(c.lhs, 1.0, max_relative = 1e-15);
        assert_relative_eq!(c.rhs, 1.0, max_relative = 1e-15);
        assert!(c.holds);
    }

    #[test]
    fn bump_and_zero() {
        let y: Vec<f64> = (0..=200).map(|k| -2.0 + 0.02 * k as f64).collect();
        let mut v: Vec<f64> = y.iter().map(|t| (-t * t).exp() - (-4.0f64).exp()).collect();
        *v.first_mut().unwrap() = 0.0;
        *v.last_mut().unwrap() = 0.0;
        assert!(ibp_inequality_check(&y, &v, 2.0, 1.0).unwrap().holds);
        let z = ibp_inequality_check(&y, &vec![0.0; y.len()], 2.0, 1.0).unwrap();
        assert_eq!((z.lhs, z.rhs, z.holds), (0.0, 0.0, true));
    }

    #[test]
    fn off_centre_segment() {
        // v = tent on [1, 3] peaking at 2, b = 1: int y v = 2
        let c = ibp_inequality_check(&[1.0, 2.0, 3.0], &[0.0, 1.0, 0.0], 2.0, 1.0).unwrap();
        assert_relative_eq!(c.lhs, 2.0, max_relative = 1e-14);
        // rhs = (1/2)(int_1^2 y^2 + int_2^3 y^2) = (1/2)(26/3)
        assert_relative_eq!(c.rhs, 13.0 / 3.0, max_relative = 1e-14);
        // b = -1/2 on the unit tent: lhs = 2 int_0^1 y^{-1/2} (1 - y) = 8/3, rhs = 2 * 2 int_0^1 y^{1/2} = 8/3
        let c = ibp_inequality_check(&[-1.0, 0.0, 1.0], &[0.0, 1.0, 0.0], 0.5, -0.5).unwrap();
        assert_relative_eq!(c.lhs, 8.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(c.rhs, 8.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn random_suite_holds() {
        let s = ibp_random_suite(200, 7).unwrap();
        assert_eq!(s.failures, 0);
        assert!(s.worst_ratio <= 1.0 + 1e-12 && s.worst_ratio > 0.1);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ibp_inequality_check(&[-1.0, 0.0, 1.0], &[0.0, 1.0, 0.0], 0.0, -1.0).is_err());
        assert!(ibp_inequality_check(&[-1.0, 0.0, 1.0], &[0.0, 1.0, 0.0], 2.0, 0.0).is_err());
        assert!(ibp_inequality_check(&[-1.0, 0.0, 1.0], &[0.0, -1.0, 0.0], 1.0, 0.0).is_err());
        assert!(ibp_inequality_check(&[-1.0, 0.0, 1.0], &[0.0, 1.0, 1.0], 1.0, 0.0).is_err());
    }
}
