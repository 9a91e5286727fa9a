//! Isoperimetric quotients, the existence classification, and the exact
//! constants available in closed form.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::integrate::{weighted_surface_pieces, weighted_volume, IntegralEstimate, PieceEstimate, QuadratureSpec};
use crate::shapes::{closed_form_orthant_ball_mass, ShapeFamily};
use crate::weight::{ExponentVector, WeightPair};

/// Slack used when testing the classification inequalities.
pub const CONDITION_TOL: f64 = 1e-12;

/// Weighted perimeter, weighted volume and their scale-invariant quotient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientReport {
    pub perimeter: IntegralEstimate,
    pub volume: IntegralEstimate,
    /// `perimeter / volume^sigma`
    pub quotient: f64,
    pub sigma: f64,
    pub shape_params: Value,
    /// `relerr(P) + sigma * relerr(m)`
    pub combined_rel_error: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub perimeter_pieces: Vec<PieceEstimate>,
}

impl QuotientReport {
    /// Builds a report from two estimates, rejecting an empty or non-finite volume.
    pub fn from_estimates(
        perimeter: IntegralEstimate,
        volume: IntegralEstimate,
        sigma: f64,
        shape_params: Value,
    ) -> Result<Self> {
        if !(volume.value.is_finite() && volume.value > 0.0) {
            return Err(Error::DegenerateShape(format!(
                "weighted volume must be positive and finite, got {}",
                volume.value
            )));
        }
        if !perimeter.value.is_finite() {
            return Err(Error::DegenerateShape("non-finite weighted perimeter".into()));
        }
        Ok(Self {
            quotient: perimeter.value / volume.value.powf(sigma),
            combined_rel_error: perimeter.rel_error() + sigma * volume.rel_error(),
            perimeter,
            volume,
            sigma,
            shape_params,
            perimeter_pieces: Vec::new(),
        })
    }

    /// Default comparison tolerance: `max(1e-6, 3 * combined_rel_error)`, relative.
    pub fn tolerance(&self) -> f64 {
        comparison_tolerance(self.combined_rel_error)
    }

    /// Report for a union of pieces split along hyperplanes where the perimeter
    /// weight vanishes, so both perimeters and volumes add.
    pub fn union(pieces: &[QuotientReport]) -> Result<Self> {
        let first = pieces
            .first()
            .ok_or_else(|| Error::InvalidParameter("union of zero pieces".into()))?;
        if pieces.iter().any(|p| (p.sigma - first.sigma).abs() > 1e-15) {
            return Err(Error::InvalidParameter("pieces use different exponents".into()));
        }
        let perimeter = IntegralEstimate::sum(pieces.iter().map(|p| &p.perimeter));
        let volume = IntegralEstimate::sum(pieces.iter().map(|p| &p.volume));
        let params = Value::Array(pieces.iter().map(|p| p.shape_params.clone()).collect());
        Self::from_estimates(perimeter, volume, first.sigma, serde_json::json!({ "union": params }))
    }
}

pub fn comparison_tolerance(combined_rel_error: f64) -> f64 {
    (3.0 * combined_rel_error).max(1e-6)
}

fn check_pair_dim(shape: &ShapeFamily, pair: &WeightPair) -> Result<()> {
    if shape.dim() != pair.n {
        return Err(Error::DimensionMismatch {
            expected: shape.dim(),
            got: pair.n,
        });
    }
    Ok(())
}

/// `P_A(shape) / m_B(shape)^sigma` by quadrature, with per-piece perimeter terms.
pub fn quotient(shape: &ShapeFamily, pair: &WeightPair, q: &QuadratureSpec) -> Result<QuotientReport> {
    check_pair_dim(shape, pair)?;
    let (pieces, volume) = rayon::join(
        || weighted_surface_pieces(shape, &pair.a_vec, q),
        || weighted_volume(shape, &pair.b_vec, q),
    );
    let pieces = pieces?;
    let perimeter = IntegralEstimate::sum(pieces.iter().map(|p| &p.estimate));
    let params = serde_json::to_value(shape).expect("shapes always serialise");
    let mut report = QuotientReport::from_estimates(perimeter, volume?, pair.sigma, params)?;
    report.perimeter_pieces = pieces;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExistenceStatus {
    /// The isoperimetric constant vanishes.
    Zero,
    /// The constant is positive.
    Positive,
    /// The conditions hold but `a - b > 1`; no verdict is available.
    OutsideScope,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolatedSide {
    /// `a_i - sigma b_i < 0`
    Lower,
    /// `a_i - sigma b_i > sigma`
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExistenceVerdict {
    pub status: ExistenceStatus,
    /// Zero-based index of the first violated coordinate.
    pub witness_index: Option<usize>,
    pub violated_side: Option<ViolatedSide>,
    pub sigma: f64,
    pub a_minus_b: f64,
    pub basis: String,
}

/// `a_i - sigma b_i`, the quantity bounded in the classification.
pub fn margin(pair: &WeightPair, i: usize) -> f64 {
    pair.a_i(i) - pair.sigma * pair.b_i(i)
}

/// Side on which coordinate `i` violates `0 <= a_i - sigma b_i <= sigma`, if any.
pub fn violation(pair: &WeightPair, i: usize) -> Option<ViolatedSide> {
    let m = margin(pair, i);
    if m < -CONDITION_TOL {
        Some(ViolatedSide::Lower)
    } else if m > pair.sigma + CONDITION_TOL {
        Some(ViolatedSide::Upper)
    } else {
        None
    }
}

/// Existence classification; boundary equalities count as satisfied.
pub fn classify_existence(pair: &WeightPair) -> ExistenceVerdict {
    let a_minus_b = pair.a - pair.b;
    let witness = (0..pair.n).find_map(|i| violation(pair, i).map(|side| (i, side)));
    let (status, witness_index, violated_side, basis) = match witness {
        Some((i, side)) => {
            let basis = match side {
                ViolatedSide::Lower => format!(
                    "a_i - sigma*b_i < 0 at coordinate {}: balls translated along that axis send the quotient to 0",
                    i + 1
                ),
                ViolatedSide::Upper => format!(
                    "a_i - sigma*b_i > sigma at coordinate {}: thin cone slabs around that facet send the quotient to 0",
                    i + 1
                ),
            };
            (ExistenceStatus::Zero, Some(i), Some(side), basis)
        }
        None if a_minus_b <= 1.0 + CONDITION_TOL => (
            ExistenceStatus::Positive,
            None,
            None,
            "0 <= a_i - sigma*b_i <= sigma for every i and a - b <= 1: the inequality holds".to_string(),
        ),
        None => (
            ExistenceStatus::OutsideScope,
            None,
            None,
            "0 <= a_i - sigma*b_i <= sigma for every i but a - b > 1: not decided".to_string(),
        ),
    };
    ExistenceVerdict {
        status,
        witness_index,
        violated_side,
        sigma: pair.sigma,
        a_minus_b,
        basis,
    }
}

/// The alternative form of the condition at coordinate `i`, written with the
/// index-dropped sums `a - a_i` and `b - b_i`.
pub fn alternative_condition(pair: &WeightPair, i: usize) -> bool {
    let n = pair.n as f64;
    let (ai, bi) = (pair.a_i(i), pair.b_i(i));
    let (abar, bbar) = (pair.a_bar(i), pair.b_bar(i));
    let lower = ai - (n + abar - 1.0) / (n + bbar) * bi >= -CONDITION_TOL;
    let upper = ai / (bi + 1.0) <= (n + abar - 1.0) / (n + bbar - 1.0) + CONDITION_TOL;
    lower && upper
}

/// Whether the two forms of the condition agree at every coordinate.
pub fn conditions_equivalent(pair: &WeightPair) -> bool {
    (0..pair.n).all(|i| violation(pair, i).is_none() == alternative_condition(pair, i))
}

/// The exact constant `a_i` when `a_j = b_j` for `j != i` and `a_i = b_i + 1`.
pub fn theorem2_constant(pair: &WeightPair, i: usize) -> Result<f64> {
    if i >= pair.n {
        return Err(Error::IndexOutOfRange { index: i, dim: pair.n });
    }
    let tol = 1e-12;
    if let Some(j) = (0..pair.n).find(|j| *j != i && (pair.a_i(*j) - pair.b_i(*j)).abs() > tol) {
        return Err(Error::Hypothesis(format!(
            "need a_j = b_j away from coordinate {}, but a_{} = {} and b_{} = {}",
            i + 1,
            j + 1,
            pair.a_i(j),
            j + 1,
            pair.b_i(j)
        )));
    }
    if (pair.a_i(i) - pair.b_i(i) - 1.0).abs() > tol {
        return Err(Error::Hypothesis(format!(
            "need a_{0} = b_{0} + 1, got a_{0} = {1}, b_{0} = {2}",
            i + 1,
            pair.a_i(i),
            pair.b_i(i)
        )));
    }
    Ok(pair.a_i(i))
}

/// Mass of the unit ball in the admissible cone (coordinates with `a_j > 0`
/// positive, the others of either sign).
pub fn admissible_ball_mass(a: &ExponentVector) -> f64 {
    let free = a.len() - a.positive_count();
    2f64.powi(free as i32) * closed_form_orthant_ball_mass(a, 1.0)
}

/// `P(B_1^A) / m(B_1^A)^{(D-1)/D} = D m(B_1^A)^{1/D}`, the equal-weight optimum.
pub fn ball_constant(a: &ExponentVector) -> f64 {
    let d = a.len() as f64 + a.sum();
    d * admissible_ball_mass(a).powf(1.0 / d)
}

/// Outcome of the orthant-splitting comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionCheck {
    pub whole_quotient: f64,
    pub min_piece_quotient: f64,
    pub tolerance: f64,
    pub holds: bool,
}

/// Checks `whole >= min(pieces) - tol` for a shape split into cone pieces.
pub fn orthant_reduction_check(
    pieces: &[QuotientReport],
    whole: &QuotientReport,
    pair: &WeightPair,
) -> Result<ReductionCheck> {
    if pair.a - pair.b > 1.0 + CONDITION_TOL {
        return Err(Error::Precondition(format!(
            "orthant reduction needs a - b <= 1, got {}",
            pair.a - pair.b
        )));
    }
    let min_piece = pieces
        .iter()
        .min_by(|x, y| x.quotient.total_cmp(&y.quotient))
        .ok_or_else(|| Error::InvalidParameter("no pieces given".into()))?;
    let rel = whole.combined_rel_error + min_piece.combined_rel_error;
    let tolerance = comparison_tolerance(rel) * min_piece.quotient;
    Ok(ReductionCheck {
        whole_quotient: whole.quotient,
        min_piece_quotient: min_piece.quotient,
        tolerance,
        holds: whole.quotient >= min_piece.quotient - tolerance,
    })
}
