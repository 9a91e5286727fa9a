//! Quotient sweeps along one-parameter shape families and log-log power-law fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::QuadratureSpec;
use crate::isoperimetry::{quotient, theorem2_constant, QuotientReport};
use crate::shapes::ShapeFamily;
use crate::weight::WeightPair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    /// Offset of a translated ball.
    T,
    /// Aperture of a cone slab.
    Eps,
}

/// Geometric schedule `start * ratio^k`, `k = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSchedule {
    pub parameter: SweepParameter,
    pub start: f64,
    pub ratio: f64,
    pub count: usize,
}

impl SweepSchedule {
    pub fn new(parameter: SweepParameter, start: f64, ratio: f64, count: usize) -> Result<Self> {
        if !(start.is_finite() && start > 0.0) {
            return Err(Error::InvalidParameter(format!("schedule start must be > 0, got {start}")));
        }
        if !(ratio.is_finite() && ratio > 0.0 && ratio != 1.0) {
            return Err(Error::InvalidParameter(format!(
                "schedule ratio must be positive and != 1, got {ratio}"
            )));
        }
        if count < 5 {
            return Err(Error::InvalidParameter(format!("schedule needs >= 5 points, got {count}")));
        }
        Ok(Self {
            parameter,
            start,
            ratio,
            count,
        })
    }

    /// Schedule with `count` points spanning `[first, last]` geometrically.
    pub fn spanning(parameter: SweepParameter, first: f64, last: f64, count: usize) -> Result<Self> {
        if count < 2 || !(first > 0.0 && last > 0.0) {
            return Err(Error::InvalidParameter("spanning schedule needs positive endpoints".into()));
        }
        let ratio = (last / first).powf(1.0 / (count - 1) as f64);
        Self::new(parameter, first, ratio, count)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count)
            .map(|k| self.start * self.ratio.powi(k as i32))
            .collect()
    }
}

/// The family whose free parameter a schedule drives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilyTemplate {
    TranslatedBall { dim: usize, axis: usize, radius: f64 },
    ConeSlab { dim: usize, axis: usize, radius: f64 },
}

impl FamilyTemplate {
    pub fn parameter(&self) -> SweepParameter {
        match self {
            Self::TranslatedBall { .. } => SweepParameter::T,
            Self::ConeSlab { .. } => SweepParameter::Eps,
        }
    }

    pub fn axis(&self) -> usize {
        match self {
            Self::TranslatedBall { axis, .. } | Self::ConeSlab { axis, .. } => *axis,
        }
    }

    pub fn instantiate(&self, value: f64) -> Result<ShapeFamily> {
        match *self {
            Self::TranslatedBall { dim, axis, radius } => ShapeFamily::translated_ball(dim, axis, value, radius),
            Self::ConeSlab { dim, axis, radius } => ShapeFamily::cone_slab(dim, axis, value, radius),
        }
    }
}

/// One evaluated schedule point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub param: f64,
    pub report: QuotientReport,
}

/// Evaluates the quotient at every schedule value, in parallel.
pub fn sweep(
    template: &FamilyTemplate,
    schedule: &SweepSchedule,
    pair: &WeightPair,
    q: &QuadratureSpec,
) -> Result<Vec<SweepPoint>> {
    if template.parameter() != schedule.parameter {
        return Err(Error::InvalidParameter(format!(
            "schedule drives {:?} but the family's parameter is {:?}",
            schedule.parameter,
            template.parameter()
        )));
    }
    schedule
        .values()
        .into_par_iter()
        .map(|param| {
            let shape = template.instantiate(param)?;
            let report = quotient(&shape, pair, q).map_err(|e| match e {
                Error::DegenerateShape(msg) => Error::DegenerateShape(format!("at parameter {param}: {msg}")),
                other => other,
            })?;
            Ok(SweepPoint { param, report })
        })
        .collect()
}

/// Least-squares line through `(log param, log quotient)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    /// `log` of the prefactor.
    pub intercept: f64,
    /// Standard error of the exponent.
    pub stderr: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Fits `y = exp(intercept) * x^exponent` by ordinary least squares in log-log space.
pub fn fit_power_law_xy(x: &[f64], y: &[f64]) -> Result<PowerLawFit> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(Error::InvalidParameter(format!("fit needs >= 3 points, got {}", x.len())));
    }
    if let Some(bad) = x.iter().chain(y).find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InvalidParameter(format!("fit needs positive values, got {bad}")));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(u, v)| (u - mx) * (v - my)).sum();
    let syy: f64 = ly.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("fit needs distinct parameter values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(u, v)| (v - intercept - slope * u).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - sse / syy).clamp(0.0, 1.0) };
    let stderr = if x.len() > 2 { (sse / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(PowerLawFit {
        exponent: slope,
        intercept,
        stderr,
        r_squared,
        points: x.len(),
    })
}

/// Fit of quotient against parameter over all points.
pub fn fit_power_law(points: &[SweepPoint]) -> Result<PowerLawFit> {
    let x: Vec<f64> = points.iter().map(|p| p.param).collect();
    let y: Vec<f64> = points.iter().map(|p| p.report.quotient).collect();
    fit_power_law_xy(&x, &y)
}

/// The last half of the schedule (at least three points).
pub fn tail(points: &[SweepPoint]) -> &[SweepPoint] {
    let keep = (points.len() - points.len() / 2).max(3).min(points.len());
    &points[points.len() - keep..]
}

/// Fit over [`tail`].
pub fn fit_tail(points: &[SweepPoint]) -> Result<PowerLawFit> {
    fit_power_law(tail(points))
}

/// Asymptotic rate of the quotient: `a_i - sigma b_i` for translated balls
/// (`t -> infinity`), `a_i - sigma (b_i + 1)` for cone slabs (`eps -> 0`).
pub fn predicted_exponent(pair: &WeightPair, i: usize, parameter: SweepParameter) -> Result<f64> {
    if i >= pair.n {
        return Err(Error::IndexOutOfRange { index: i, dim: pair.n });
    }
    Ok(match parameter {
        SweepParameter::T => pair.a_i(i) - pair.sigma * pair.b_i(i),
        SweepParameter::Eps => pair.a_i(i) - pair.sigma * (pair.b_i(i) + 1.0),
    })
}

/// Perimeter contribution of one boundary piece along the schedule tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermTrend {
    pub label: String,
    /// Share of the total perimeter at the asymptotic end of the schedule.
    pub share_at_end: f64,
    /// Fitted exponent of `piece / m^sigma` over the tail, when the piece is nonzero there.
    pub exponent: Option<f64>,
}

/// Which perimeter term governs the tail of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub dominant: String,
    pub dominant_share: f64,
    /// True when every other term holds less than `threshold` of the perimeter
    /// at the asymptotic end and its share shrinks along the tail.
    pub lower_order_subdominant: bool,
    pub threshold: f64,
    pub terms: Vec<TermTrend>,
}

/// Share threshold used by [`dominance`].
pub const SUBDOMINANT_SHARE: f64 = 0.05;

/// Identifies the dominant perimeter piece on the tail and flags schedules
/// where lower-order pieces still matter.
pub fn dominance(points: &[SweepPoint]) -> Result<DominanceReport> {
    let tail = tail(points);
    let last = tail
        .last()
        .ok_or_else(|| Error::InvalidParameter("empty sweep".into()))?;
    let first = &tail[0];
    let labels: Vec<String> = last.report.perimeter_pieces.iter().map(|p| p.label.clone()).collect();
    if labels.is_empty() {
        return Err(Error::InvalidParameter("sweep reports carry no perimeter pieces".into()));
    }
    let share = |pt: &SweepPoint, k: usize| pt.report.perimeter_pieces[k].estimate.value / pt.report.perimeter.value;
    let mut terms = Vec::with_capacity(labels.len());
    for (k, label) in labels.iter().enumerate() {
        let vals: Vec<f64> = tail
            .iter()
            .map(|p| p.report.perimeter_pieces[k].estimate.value / p.report.volume.value.powf(p.report.sigma))
            .collect();
        let exponent = if vals.iter().all(|v| *v > 0.0) {
            let x: Vec<f64> = tail.iter().map(|p| p.param).collect();
            Some(fit_power_law_xy(&x, &vals)?.exponent)
        } else {
            None
        };
        terms.push(TermTrend {
            label: label.clone(),
            share_at_end: share(last, k),
            exponent,
        });
    }
    let (dk, dom) = terms
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.share_at_end.total_cmp(&y.1.share_at_end))
        .expect("nonempty");
    let lower_order_subdominant = terms.iter().enumerate().all(|(k, t)| {
        k == dk || (t.share_at_end < SUBDOMINANT_SHARE && t.share_at_end <= share(first, k) + 1e-15)
    });
    Ok(DominanceReport {
        dominant: dom.label.clone(),
        dominant_share: dom.share_at_end,
        lower_order_subdominant,
        threshold: SUBDOMINANT_SHARE,
        terms,
    })
}

/// Two-point extrapolation `2 f(h) - f(2h)`, removing an error linear in `h`.
pub fn richardson_linear(f_h: f64, f_2h: f64) -> f64 {
    2.0 * f_h - f_2h
}

/// Limit of `P_A(cone slab) / m_B(cone slab)` as the aperture shrinks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactConstantCheck {
    pub axis: usize,
    pub eps: f64,
    pub ratio_at_eps: f64,
    pub ratio_at_2eps: f64,
    pub extrapolated: f64,
    pub expected: f64,
    pub rel_error: f64,
    pub within_tolerance: bool,
    pub tolerance: f64,
    /// `(b_i + 1)(1 + eps^2)^{3/2}`, reported for comparison only.
    pub upper_expansion: f64,
}

/// Extrapolates the unnormalised ratio `P_A / m_B` on cone slabs at `eps` and
/// `2 eps` and compares it with the exact constant `a_i`.
pub fn exact_constant_limit(
    pair: &WeightPair,
    axis: usize,
    eps: f64,
    tolerance: f64,
    q: &QuadratureSpec,
) -> Result<ExactConstantCheck> {
    let expected = theorem2_constant(pair, axis)?;
    let ratio = |e: f64| -> Result<f64> {
        let shape = ShapeFamily::cone_slab(pair.n, axis, e, 1.0)?;
        let r = quotient(&shape, pair, q)?;
        Ok(r.perimeter.value / r.volume.value)
    };
    let (r1, r2) = rayon::join(|| ratio(eps), || ratio(2.0 * eps));
    let (r1, r2) = (r1?, r2?);
    let extrapolated = richardson_linear(r1, r2);
    let rel_error = (extrapolated - expected).abs() / expected;
    Ok(ExactConstantCheck {
        axis,
        eps,
        ratio_at_eps: r1,
        ratio_at_2eps: r2,
        extrapolated,
        expected,
        rel_error,
        within_tolerance: rel_error <= tolerance,
        tolerance,
        upper_expansion: (pair.b_i(axis) + 1.0) * (1.0 + eps * eps).powf(1.5),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pair(a: &[f64], b: &[f64]) -> WeightPair {
        WeightPair::from_slices(a, b).unwrap()
    }

    #[test]
    fn schedules() {
        let s = SweepSchedule::new(SweepParameter::Eps, 0.1, 0.5, 5).unwrap();
        assert_eq!(s.values(), vec![0.1, 0.05, 0.025, 0.0125, 0.00625]);
        assert!(SweepSchedule::new(SweepParameter::T, 10.0, 2.0, 4).is_err());
        assert!(SweepSchedule::new(SweepParameter::T, 10.0, 1.0, 6).is_err());
        assert!(SweepSchedule::new(SweepParameter::T, -1.0, 2.0, 6).is_err());
        let s = SweepSchedule::spanning(SweepParameter::T, 10.0, 1e4, 12).unwrap();
        let v = s.values();
        assert_relative_eq!(v[11], 1e4, max_relative = 1e-13);
    }

    #[test]
    fn synthetic_fits() {
        let x: Vec<f64> = (0..8).map(|k| 10f64 * 2f64.powi(k)).collect();
        let y: Vec<f64> = x.iter().map(|t| 5.0 * t.powf(-1.0 / 3.0)).collect();
        let f = fit_power_law_xy(&x, &y).unwrap();
        assert_relative_eq!(f.exponent, -1.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(f.intercept, 5f64.ln(), max_relative = 1e-12);
        assert!(f.stderr < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
        let c = fit_power_law_xy(&x, &vec![2.5; x.len()]).unwrap();
        assert!(c.exponent.abs() < 1e-14);
        assert!(fit_power_law_xy(&x, &vec![0.0; x.len()]).is_err());
        assert!(fit_power_law_xy(&x[..2], &y[..2]).is_err());
    }

    #[test]
    fn predicted_rates() {
        assert_relative_eq!(
            predicted_exponent(&pair(&[0.0, 0.0], &[1.0, 0.0]), 0, SweepParameter::T).unwrap(),
            -1.0 / 3.0
        );
        assert_eq!(predicted_exponent(&pair(&[1.0, 0.0], &[0.0, 0.0]), 0, SweepParameter::Eps).unwrap(), 0.0);
        assert_eq!(predicted_exponent(&pair(&[2.0, 0.0], &[0.0, 0.0]), 0, SweepParameter::Eps).unwrap(), 0.5);
        assert_eq!(
            predicted_exponent(&pair(&[0.0, 0.0], &[2.0, 0.0]), 0, SweepParameter::T).unwrap(),
            -0.5
        );
    }

    #[test]
    fn mismatched_schedule_rejected() {
        let t = FamilyTemplate::ConeSlab {
            dim: 2,
            axis: 0,
            radius: 1.0,
        };
        let s = SweepSchedule::new(SweepParameter::T, 10.0, 2.0, 5).unwrap();
        assert!(sweep(&t, &s, &pair(&[2.0, 0.0], &[0.0, 0.0]), &QuadratureSpec::default()).is_err());
    }

    #[test]
    fn translated_ball_sweep_decreases() {
        let t = FamilyTemplate::TranslatedBall {
            dim: 2,
            axis: 0,
            radius: 1.0,
        };
        let s = SweepSchedule::new(SweepParameter::T, 10.0, 2.0, 6).unwrap();
        let pts = sweep(&t, &s, &pair(&[0.0, 0.0], &[1.0, 0.0]), &QuadratureSpec::default()).unwrap();
        assert!(pts.windows(2).all(|w| w[1].report.quotient < w[0].report.quotient));
    }
}
