//! Exponent vectors, monomial weights `|x_1|^{a_1} ... |x_N|^{a_N}` and the
//! scalars derived from a pair of exponent vectors.
//!
//! Coordinate indices are zero-based throughout the library API. The command
//! line front end converts to one-based axis numbers at its boundary.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A nonnegative exponent vector.
///
/// Vectors built through [`ExponentVector::new`] or parsing have at least two
/// entries. Index-dropped vectors ([`ExponentVector::drop_index`],
/// [`ExponentVector::drop_two`]) describe transverse coordinates and may be
/// shorter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ExponentVector(Vec<f64>);

impl ExponentVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::InvalidExponents(format!(
                "need at least 2 entries, got {}",
                entries.len()
            )));
        }
        Self::reduced(entries)
    }

    /// Builds a vector of any length, still checking every entry.
    pub(crate) fn reduced(entries: Vec<f64>) -> Result<Self> {
        if let Some(bad) = entries.iter().find(|e| !e.is_finite() || **e < 0.0) {
            return Err(Error::InvalidExponents(format!(
                "entries must be finite and nonnegative, found {bad}"
            )));
        }
        Ok(Self(entries))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Number of strictly positive entries.
    pub fn positive_count(&self) -> usize {
        self.0.iter().filter(|e| **e > 0.0).count()
    }

    pub fn get(&self, i: usize) -> Result<f64> {
        self.0.get(i).copied().ok_or(Error::IndexOutOfRange {
            index: i,
            dim: self.len(),
        })
    }

    /// The vector with entry `i` removed.
    pub fn drop_index(&self, i: usize) -> Result<Self> {
        self.get(i)?;
        let mut v = self.0.clone();
        v.remove(i);
        Ok(Self(v))
    }

    /// The vector with entries `i` and `k` removed.
    pub fn drop_two(&self, i: usize, k: usize) -> Result<Self> {
        self.get(i)?;
        self.get(k)?;
        if i == k {
            return Err(Error::InvalidParameter(format!(
                "drop_two needs distinct indices, got {i} twice"
            )));
        }
        let v = self
            .0
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i && *j != k)
            .map(|(_, e)| *e)
            .collect();
        Ok(Self(v))
    }

    /// Evaluates `prod |x_j|^{e_j}` with `0^0 = 1`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        eval_weight(x, self.as_slice())
    }
}

impl From<ExponentVector> for Vec<f64> {
    fn from(e: ExponentVector) -> Self {
        e.0
    }
}

impl TryFrom<Vec<f64>> for ExponentVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl FromStr for ExponentVector {
    type Err = Error;

    /// Parses a comma separated list such as `"1.5,0,2"`.
    fn from_str(s: &str) -> Result<Self> {
        let entries = s
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                tok.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("not a number: {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// `prod_j |x_j|^{e_j}`; a factor with `e_j = 0` contributes 1 even at `x_j = 0`.
pub fn eval_weight(x: &[f64], e: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), e.len());
    x.iter()
        .zip(e)
        .map(|(xi, ei)| if *ei == 0.0 { 1.0 } else { xi.abs().powf(*ei) })
        .product()
}

/// True iff `x_i > 0` for every `i` with `a_i > 0`.
pub fn in_admissible_cone(x: &[f64], a: &ExponentVector) -> bool {
    x.iter()
        .zip(a.as_slice())
        .all(|(xi, ai)| *ai == 0.0 || *xi > 0.0)
}

/// The exponent pair `(A, B)` together with every derived scalar.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightPair {
    pub a_vec: ExponentVector,
    pub b_vec: ExponentVector,
    pub n: usize,
    /// `sum A`
    pub a: f64,
    /// `sum B`
    pub b: f64,
    /// `(N + a - 1) / (N + b)`, the dilation-balancing exponent.
    pub sigma: f64,
    /// Homogeneous dimension `N + a`.
    pub d: f64,
    /// Number of strictly positive entries of `A`.
    pub k: usize,
}

impl WeightPair {
    pub fn new(a_vec: ExponentVector, b_vec: ExponentVector) -> Result<Self> {
        if a_vec.len() != b_vec.len() {
            return Err(Error::DimensionMismatch {
                expected: a_vec.len(),
                got: b_vec.len(),
            });
        }
        if a_vec.len() < 2 {
            return Err(Error::InvalidExponents("dimension must be at least 2".into()));
        }
        let n = a_vec.len();
        let a = a_vec.sum();
        let b = b_vec.sum();
        let nf = n as f64;
        Ok(Self {
            n,
            a,
            b,
            sigma: (nf + a - 1.0) / (nf + b),
            d: nf + a,
            k: a_vec.positive_count(),
            a_vec,
            b_vec,
        })
    }

    /// Pair with `B = A`.
    pub fn equal(a_vec: ExponentVector) -> Result<Self> {
        Self::new(a_vec.clone(), a_vec)
    }

    pub fn from_slices(a: &[f64], b: &[f64]) -> Result<Self> {
        Self::new(ExponentVector::new(a.to_vec())?, ExponentVector::new(b.to_vec())?)
    }

    pub fn a_i(&self, i: usize) -> f64 {
        self.a_vec.as_slice()[i]
    }

    pub fn b_i(&self, i: usize) -> f64 {
        self.b_vec.as_slice()[i]
    }

    /// `a - a_i`
    pub fn a_bar(&self, i: usize) -> f64 {
        self.a - self.a_i(i)
    }

    /// `b - b_i`
    pub fn b_bar(&self, i: usize) -> f64 {
        self.b - self.b_i(i)
    }

    /// Exponent `(N + b) / (N + a - 1)` applied to `|u|` in the functional quotient.
    pub fn lebesgue_exponent(&self) -> f64 {
        1.0 / self.sigma
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(v: &[f64]) -> ExponentVector {
        ExponentVector::reduced(v.to_vec()).unwrap()
    }

    #[test]
    fn weight_examples() {
        assert_eq!(eval_weight(&[1.0, 1.0, 1.0], &[0.3, 2.0, 7.0]), 1.0);
        assert_eq!(eval_weight(&[0.0, 5.0], &[1.0, 0.0]), 0.0);
        assert_eq!(eval_weight(&[-2.0, 3.0], &[1.0, 2.0]), 18.0);
        // 0^0 = 1
        assert_eq!(eval_weight(&[0.0, 2.0], &[0.0, 1.0]), 2.0);
    }

    #[test]
    fn drop_examples() {
        let e = ev(&[1.0, 2.0, 3.0]);
        assert_eq!(e.drop_index(1).unwrap().as_slice(), &[1.0, 3.0]);
        assert_eq!(e.drop_two(0, 2).unwrap().as_slice(), &[2.0]);
        assert_eq!(e.drop_index(1).unwrap().sum(), 4.0);
        assert!(matches!(
            e.drop_index(3),
            Err(Error::IndexOutOfRange { index: 3, dim: 3 })
        ));
        assert!(e.drop_two(1, 1).is_err());
    }

    #[test]
    fn admissible_cone_examples() {
        assert!(in_admissible_cone(&[-3.0, -1.0], &ev(&[0.0, 0.0])));
        assert!(!in_admissible_cone(&[-1.0, 5.0], &ev(&[1.0, 0.0])));
        assert!(in_admissible_cone(&[2.0, 3.0], &ev(&[1.0, 1.0])));
    }

    #[test]
    fn parse_and_validate() {
        let e: ExponentVector = "1.5, 0,2".parse().unwrap();
        assert_eq!(e.as_slice(), &[1.5, 0.0, 2.0]);
        assert!("1".parse::<ExponentVector>().is_err());
        assert!("1,-2".parse::<ExponentVector>().is_err());
        assert!("1,x".parse::<ExponentVector>().is_err());
        assert!(ExponentVector::new(vec![1.0, f64::NAN]).is_err());
        assert_eq!(e.to_string().parse::<ExponentVector>().unwrap(), e);
    }

    #[test]
    fn pair_scalars() {
        let p = WeightPair::from_slices(&[1.0, 1.0], &[0.0, 0.0]).unwrap();
        assert_eq!(p.a, 2.0);
        assert_eq!(p.sigma, 1.5);
        assert_eq!(p.d, 4.0);
        assert_eq!(p.k, 2);
        assert!(WeightPair::from_slices(&[1.0, 1.0], &[0.0, 0.0, 0.0]).is_err());
    }

    fn exps(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..5.0, n)
    }

    proptest! {
        #[test]
        fn weight_is_multiplicative_and_even(
            (x, e, i) in (2usize..6).prop_flat_map(|n| (
                prop::collection::vec(-3.0f64..3.0, n), exps(n), 0..n))
        ) {
            let full = eval_weight(&x, &e);
            let mut xb = x.clone();
            let xi = xb.remove(i);
            let mut eb = e.clone();
            let ei = eb.remove(i);
            let split = eval_weight(&xb, &eb) * if ei == 0.0 { 1.0 } else { xi.abs().powf(ei) };
            prop_assert!((full - split).abs() <= 1e-12 * full.abs().max(1e-300));
            let mut flipped = x.clone();
            flipped[i] = -flipped[i];
            prop_assert_eq!(eval_weight(&flipped, &e), full);
        }

        #[test]
        fn equal_weights_sigma_below_one(a in (2usize..7).prop_flat_map(exps)) {
            let p = WeightPair::equal(ExponentVector::new(a).unwrap()).unwrap();
            prop_assert!(p.sigma < 1.0 && p.sigma > 0.0);
            prop_assert!(p.d > p.n as f64 - 1.0);
        }
    }
}
