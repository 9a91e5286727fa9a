//! Gauss rules on `[0, 1]` for the weight `x^alpha`, built by Golub-Welsch
//! from the Jacobi-polynomial recurrence.
//!
//! The normalisation `int_0^1 x^alpha dx = 1/(alpha+1)` is elementary, so no
//! Gamma function enters the rules. That keeps quadrature results independent
//! of the closed forms they are checked against.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// An `n`-point rule: `int_0^1 x^alpha f(x) dx ~ sum w_k f(x_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub alpha: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

const MAX_QL_SWEEPS: usize = 60;

/// Returns `(node, weight)` pairs of the `n`-point rule for `int_0^1 x^alpha f(x) dx`.
///
/// The rule is exact for polynomials of degree `2n - 1`. `alpha` may be any
/// value above `-1`.
pub fn gauss_weighted_nodes(n: usize, alpha: f64) -> Result<Vec<(f64, f64)>> {
    Ok(cached_rule(n, alpha)?.pairs().collect())
}

/// Shared, memoised rule.
pub fn cached_rule(n: usize, alpha: f64) -> Result<Arc<GaussRule>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (n, alpha.to_bits());
    if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&key) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(build_rule(n, alpha)?);
    cache
        .lock()
        .expect("rule cache poisoned")
        .insert(key, rule.clone());
    Ok(rule)
}

fn build_rule(n: usize, alpha: f64) -> Result<GaussRule> {
    if n == 0 {
        return Err(Error::InvalidParameter("a Gauss rule needs n >= 1".into()));
    }
    if !alpha.is_finite() || alpha <= -1.0 {
        return Err(Error::InvalidParameter(format!(
            "weight exponent must be finite and > -1, got {alpha}"
        )));
    }
    // Jacobi matrix for P_k^{(0, alpha)} on [-1, 1], shifted to [0, 1].
    let b = alpha;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    for (k, d) in diag.iter_mut().enumerate() {
        let kf = k as f64;
        let s = 2.0 * kf + b;
        let x = if k == 0 {
            b / (b + 2.0)
        } else {
            b * b / (s * (s + 2.0))
        };
        *d = 0.5 * (1.0 + x);
    }
    for k in 1..n {
        let kf = k as f64;
        let s = 2.0 * kf + b;
        let num = 4.0 * kf * kf * (kf + b) * (kf + b);
        let den = s * s * (s + 1.0) * (s - 1.0);
        off[k - 1] = 0.5 * (num / den).sqrt();
    }
    let mut first_row = vec![0.0; n];
    first_row[0] = 1.0;
    implicit_ql(&mut diag, &mut off, &mut first_row)?;

    let mu0 = 1.0 / (alpha + 1.0);
    let mut pairs: Vec<(f64, f64)> = diag
        .into_iter()
        .zip(first_row.into_iter().map(|z| mu0 * z * z))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    if pairs
        .iter()
        .any(|(x, w)| !(*x > 0.0 && *x < 1.0) || !(*w > 0.0) || !w.is_finite())
    {
        return Err(Error::Quadrature(format!(
            "rule with n = {n}, alpha = {alpha} lost accuracy (node outside (0,1) or nonpositive weight)"
        )));
    }
    let (nodes, weights) = pairs.into_iter().unzip();
    Ok(GaussRule {
        alpha,
        nodes,
        weights,
    })
}

/// Symmetric tridiagonal eigenproblem by implicit QL, tracking only the first
/// component of every eigenvector. `off[i]` couples rows `i` and `i + 1`.
fn implicit_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_QL_SWEEPS {
                return Err(Error::Quadrature(
                    "tridiagonal eigen-iteration failed to converge".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let bb = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * bb;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - bb;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn small_rules() {
        let r = gauss_weighted_nodes(1, 0.0).unwrap();
        assert_relative_eq!(r[0].0, 0.5, epsilon = 1e-15);
        assert_relative_eq!(r[0].1, 1.0, epsilon = 1e-15);

        let r = gauss_weighted_nodes(1, 1.0).unwrap();
        assert_relative_eq!(r[0].0, 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(r[0].1, 0.5, epsilon = 1e-15);

        let r = gauss_weighted_nodes(2, 0.0).unwrap();
        let s3 = 3f64.sqrt();
        assert_relative_eq!(r[0].0, (3.0 - s3) / 6.0, epsilon = 1e-15);
        assert_relative_eq!(r[1].0, (3.0 + s3) / 6.0, epsilon = 1e-15);
        assert_relative_eq!(r[0].1, 0.5, epsilon = 1e-15);
        assert_relative_eq!(r[1].1, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn moment_exactness() {
        for &alpha in &[0.0, 0.3, 1.0, 2.5, 7.0, -0.5] {
            for n in [1usize, 2, 5, 12, 33] {
                let rule = gauss_weighted_nodes(n, alpha).unwrap();
                for j in 0..2 * n {
                    let q: f64 = rule.iter().map(|(x, w)| w * x.powi(j as i32)).sum();
                    let exact = 1.0 / (alpha + j as f64 + 1.0);
                    assert!(
                        (q - exact).abs() <= 1e-12 * exact.max(1e-3),
                        "n={n} alpha={alpha} j={j}: {q} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(gauss_weighted_nodes(0, 0.0).is_err());
        assert!(gauss_weighted_nodes(3, -1.0).is_err());
        assert!(gauss_weighted_nodes(3, f64::INFINITY).is_err());
    }

    #[test]
    fn weights_positive_nodes_inside() {
        let rule = cached_rule(64, 3.7).unwrap();
        assert!(rule.pairs().all(|(x, w)| x > 0.0 && x < 1.0 && w > 0.0));
        assert!(rule.nodes.windows(2).all(|p| p[0] < p[1]));
    }
}
