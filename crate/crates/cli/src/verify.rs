//! `verify <check>`: measured against predicted values, pass or fail.

use isoweight::integrate::weighted_volume;
use isoweight::isoperimetry::{ball_constant, classify_existence, comparison_tolerance, quotient};
use isoweight::limits::{
    dominance, exact_constant_limit, fit_tail, predicted_exponent, sweep, FamilyTemplate, SweepParameter,
    SweepSchedule,
};
use isoweight::shapes::{closed_form_orthant_ball_mass, corpus, parse_shape};
use isoweight::sobolev::{
    best_constant_p1, coarea_lower_bound_check, functional_quotient, grid_for, ibp_inequality_check,
    ibp_random_suite, mollification_study, mollified_indicator, MollifierSpec,
};
use isoweight::{ExponentVector, QuadratureSpec, ShapeFamily, WeightPair};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Check, VerifyArgs};
use crate::commands::{resolve_pair, with_args};
use crate::output::{num, Outcome, Table};
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
struct Quantity {
    name: String,
    measured: f64,
    predicted: f64,
    /// Absolute or relative, as named by `error_kind`.
    error: f64,
    error_kind: &'static str,
    tolerance: f64,
    pass: bool,
}

impl Quantity {
    fn absolute(name: &str, measured: f64, predicted: f64, tolerance: f64) -> Self {
        let error = (measured - predicted).abs();
        Self {
            name: name.into(),
            measured,
            predicted,
            error,
            error_kind: "absolute",
            tolerance,
            pass: error <= tolerance,
        }
    }

    fn relative(name: &str, measured: f64, predicted: f64, tolerance: f64) -> Self {
        let error = (measured - predicted).abs() / predicted.abs();
        Self {
            name: name.into(),
            measured,
            predicted,
            error,
            error_kind: "relative",
            tolerance,
            pass: error <= tolerance,
        }
    }

    /// Passes when `measured >= bound`, up to `tolerance` relative.
    fn at_least(name: &str, measured: f64, bound: f64, tolerance: f64) -> Self {
        let error = ((bound - measured) / bound.abs()).max(0.0);
        Self {
            name: name.into(),
            measured,
            predicted: bound,
            error,
            error_kind: "shortfall",
            tolerance,
            pass: error <= tolerance,
        }
    }

    fn flag(name: &str, ok: bool) -> Self {
        Self {
            name: name.into(),
            measured: if ok { 1.0 } else { 0.0 },
            predicted: 1.0,
            error: if ok { 0.0 } else { 1.0 },
            error_kind: "flag",
            tolerance: 0.0,
            pass: ok,
        }
    }
}

struct Verdict {
    args: Value,
    quantities: Vec<Quantity>,
    details: Value,
}

pub fn run(v: &VerifyArgs, q: &QuadratureSpec, seed: u64, config: Value) -> Result<Outcome, CliError> {
    let verdict = match v.check {
        Check::Lemma31 => lemma31(v, q)?,
        Check::Lemma32 => lemma32(v, q)?,
        Check::Lemma33 => lemma33(v, q)?,
        Check::Lemma34 => lemma34(v, q)?,
        Check::Thm12 => thm12(v, q)?,
        Check::ThmA => thm_a(v, q)?,
        Check::Ibp => ibp(v, seed)?,
    };
    let pass = verdict.quantities.iter().all(|x| x.pass);
    let mut table = Table::new(&[
        "check",
        "quantity",
        "measured",
        "predicted",
        "error",
        "error_kind",
        "tolerance",
        "pass",
    ]);
    for x in &verdict.quantities {
        table.push(vec![
            v.check.name().into(),
            x.name.clone(),
            num(x.measured),
            num(x.predicted),
            num(x.error),
            x.error_kind.into(),
            num(x.tolerance),
            x.pass.to_string(),
        ]);
    }
    let mut args = verdict.args;
    args["check"] = json!(v.check.name());
    Ok(Outcome {
        config: with_args(config, args),
        result: json!({
            "check": v.check.name(),
            "pass": pass,
            "quantities": verdict.quantities,
            "details": verdict.details,
        }),
        table,
        passed: Some(pass),
    })
}

fn exps(given: &Option<ExponentVector>, default: &[f64]) -> Result<ExponentVector, CliError> {
    match given {
        Some(e) => Ok(e.clone()),
        None => Ok(ExponentVector::new(default.to_vec())?),
    }
}

fn pair_of(v: &VerifyArgs, a: &[f64], b: &[f64]) -> Result<WeightPair, CliError> {
    resolve_pair(v.n, &exps(&v.a, a)?, &exps(&v.b, b)?)
}

fn axis_of(v: &VerifyArgs, n: usize) -> Result<usize, CliError> {
    let i = v.i.unwrap_or(1);
    if i == 0 || i > n {
        return Err(CliError::Usage(format!("--i must lie in 1..={n}, got {i}")));
    }
    Ok(i - 1)
}

fn pair_args(pair: &WeightPair) -> Value {
    json!({ "N": pair.n, "A": pair.a_vec, "B": pair.b_vec })
}

fn points_json(points: &[isoweight::limits::SweepPoint]) -> Value {
    points
        .iter()
        .map(|p| json!({ "param": p.param, "quotient": p.report.quotient, "relerr": p.report.combined_rel_error }))
        .collect()
}

/// Translated balls: fitted rate in `t` against `a_i - sigma b_i`.
fn lemma31(v: &VerifyArgs, q: &QuadratureSpec) -> Result<Verdict, CliError> {
    let pair = pair_of(v, &[0.0, 0.0], &[1.0, 0.0])?;
    let i = axis_of(v, pair.n)?;
    let tol = v.tol.unwrap_or(0.05);
    let count = v.count.unwrap_or(12);
    let template = FamilyTemplate::TranslatedBall {
        dim: pair.n,
        axis: i,
        radius: 1.0,
    };
    let schedule = SweepSchedule::spanning(SweepParameter::T, 10.0, 1e4, count)?;
    let points = sweep(&template, &schedule, &pair, q)?;
    let fit = fit_tail(&points)?;
    let predicted = predicted_exponent(&pair, i, SweepParameter::T)?;
    let mut args = pair_args(&pair);
    args["i"] = json!(i + 1);
    args["tol"] = json!(tol);
    args["schedule"] = serde_json::to_value(schedule).expect("schedule");
    Ok(Verdict {
        args,
        quantities: vec![Quantity::absolute("tail_exponent", fit.exponent, predicted, tol)],
        details: json!({
            "classification": classify_existence(&pair),
            "fit": fit,
            "points": points_json(&points),
        }),
    })
}

/// Cone slabs: tail decreasing, fitted rate against `a_i - sigma (b_i + 1)`,
/// and the lateral cone term leading.
fn lemma32(v: &VerifyArgs, q: &QuadratureSpec) -> Result<Verdict, CliError> {
    let pair = pair_of(v, &[2.0, 0.0], &[0.0, 0.0])?;
    let i = axis_of(v, pair.n)?;
    let tol = v.tol.unwrap_or(0.05);
    let count = v.count.unwrap_or(10);
    let template = FamilyTemplate::ConeSlab {
        dim: pair.n,
        axis: i,
        radius: 1.0,
    };
    let schedule = SweepSchedule::spanning(SweepParameter::Eps, 0.1, 1e-4, count)?;
    let points = sweep(&template, &schedule, &pair, q)?;
    let fit = fit_tail(&points)?;
    let predicted = predicted_exponent(&pair, i, SweepParameter::Eps)?;
    let dom = dominance(&points)?;
    let tail = isoweight::limits::tail(&points);
    let decreasing = tail.windows(2).all(|w| w[1].report.quotient < w[0].report.quotient);
    let mut args = pair_args(&pair);
    args["i"] = json!(i + 1);
    args["tol"] = json!(tol);
    args["schedule"] = serde_json::to_value(schedule).expect("schedule");
    Ok(Verdict {
        args,
        quantities: vec![
            Quantity::flag("tail_strictly_decreasing", decreasing),
            Quantity::flag("lateral_cone_term_dominates", dom.dominant.starts_with("A1")),
            Quantity::absolute("tail_exponent", fit.exponent, predicted, tol),
        ],
        details: json!({
            "classification": classify_existence(&pair),
            "fit": fit,
            "dominance": dom,
            "points": points_json(&points),
        }),
    })
}

fn shape_or(v: &VerifyArgs, dim: usize) -> Result<ShapeFamily, CliError> {
    match &v.shape {
        Some(s) => Ok(parse_shape(s, dim)?),
        None => Ok(ShapeFamily::orthant_ball(dim, 1.0)?),
    }
}

/// Mollified indicators: errors in `int u_eps x^B` and `int |grad u_eps| x^A`
/// shrink at least linearly in `eps`.
fn lemma33(v: &VerifyArgs, q: &QuadratureSpec) -> Result<Verdict, CliError> {
    let pair = pair_of(v, &[1.0, 0.0], &[1.0, 1.0])?;
    let shape = shape_or(v, pair.n)?;
    let min_rate = v.tol.unwrap_or(0.9);
    let cells = v.cells.unwrap_or(8.0);
    let eps = [0.1, 0.05, 0.025];
    let study = mollification_study(&shape, &pair.b_vec, &pair.a_vec, &eps, cells, q)?;
    let mut args = pair_args(&pair);
    args["shape"] = serde_json::to_value(&shape).expect("shape");
    args["eps"] = json!(eps);
    args["cells"] = json!(cells);
    args["tol"] = json!(min_rate);
    Ok(Verdict {
        args,
        quantities: vec![
            Quantity::at_least("volume_rate", study.volume_rate.exponent, min_rate, 0.0),
            Quantity::at_least("perimeter_rate", study.perimeter_rate.exponent, min_rate, 0.0),
        ],
        details: serde_json::to_value(&study).expect("study"),
    })
}

/// Coarea chain on a mollified indicator.
fn lemma34(v: &VerifyArgs, q: &QuadratureSpec) -> Result<Verdict, CliError> {
    let pair = pair_of(v, &[0.0, 0.0], &[0.0, 0.0])?;
    let shape = shape_or(v, pair.n)?;
    let eps = v.eps.unwrap_or(0.05);
    let cells = v.cells.unwrap_or(8.0);
    let levels = v.levels.unwrap_or(32);
    let m = MollifierSpec::new(eps)?;
    let u = mollified_indicator(&shape, &m, &grid_for(&shape, &m, eps / cells)?)?;
    let check = coarea_lower_bound_check(&u, &pair, levels)?;
    let fq = functional_quotient(&u, &pair)?;
    let shape_q = quotient(&shape, &pair, q)?.quotient;
    let mut args = pair_args(&pair);
    args["shape"] = serde_json::to_value(&shape).expect("shape");
    args["eps"] = json!(eps);
    args["cells"] = json!(cells);
    args["levels"] = json!(levels);
    Ok(Verdict {
        args,
        quantities: vec![Quantity::at_least(
            "gradient_integral_over_minkowski_bound",
            check.lhs,
            check.minkowski_rhs,
            check.tolerance,
        )],
        details: json!({
            "coarea": check,
            "functional_quotient": fq,
            "shape_quotient": shape_q,
        }),
    })
}

/// Limit of `P_A / m_B` on thin cone slabs against the exact constant `a_i`.
fn thm12(v: &VerifyArgs, q: &QuadratureSpec) -> Result<Verdict, CliError> {
    let pair = pair_of(v, &[1.0, 0.0], &[0.0, 0.0])?;
    let i = axis_of(v, pair.n)?;
    let eps = v.eps.unwrap_or(1e-3);
    let tol = v.tol.unwrap_or(0.01);
    let check = exact_constant_limit(&pair, i, eps, tol, q)?;
    let mut args = pair_args(&pair);
    args["i"] = json!(i + 1);
    args["eps"] = json!(eps);
    args["tol"] = json!(tol);
    Ok(Verdict {
        args,
        quantities: vec![Quantity::relative("limit", check.extrapolated, check.expected, tol)],
        details: serde_json::to_value(&check).expect("check"),
    })
}

/// Equal weights: the closed-form constant, the ball mass, and the corpus
/// lower bound.
fn thm_a(v: &VerifyArgs, q: &QuadratureSpec) -> Result<Verdict, CliError> {
    let a = exps(&v.a, &[1.0, 1.0])?;
    if let Some(b) = &v.b {
        if b != &a {
            return Err(CliError::Usage("thmA takes B = A; omit --B".into()));
        }
    }
    let pair = resolve_pair(v.n, &a, &a)?;
    let tol = v.tol.unwrap_or(1e-6);
    let c1 = ball_constant(&a);
    let mut quantities = vec![Quantity::relative("best_constant_p1", best_constant_p1(&a), c1, 1e-10)];
    let orthant = ShapeFamily::orthant_ball(pair.n, 1.0)?;
    let mass = weighted_volume(&orthant, &a, q)?;
    quantities.push(Quantity::relative(
        "orthant_ball_mass",
        mass.value,
        closed_form_orthant_ball_mass(&a, 1.0),
        tol,
    ));
    let mut rows = Vec::new();
    let mut worst: Option<(f64, f64, String)> = None;
    for shape in corpus(pair.n) {
        let r = quotient(&shape, &pair, q)?;
        let slack = comparison_tolerance(r.combined_rel_error);
        let label = serde_json::to_string(&shape).expect("shape");
        if worst.as_ref().is_none_or(|w| r.quotient < w.0) {
            worst = Some((r.quotient, slack, label.clone()));
        }
        rows.push(json!({ "shape": shape, "quotient": r.quotient, "relerr": r.combined_rel_error }));
    }
    let (min_q, slack, _) = worst.expect("corpus is nonempty");
    quantities.push(Quantity::at_least("corpus_min_quotient", min_q, c1, slack));
    if a.positive_count() == a.len() {
        // the admissible cone is the orthant, so the orthant ball is optimal
        let r = quotient(&orthant, &pair, q)?;
        quantities.push(Quantity::relative(
            "orthant_ball_quotient",
            r.quotient,
            c1,
            comparison_tolerance(r.combined_rel_error),
        ));
    }
    let mut args = pair_args(&pair);
    args["tol"] = json!(tol);
    Ok(Verdict {
        args,
        quantities,
        details: json!({ "ball_constant": c1, "corpus": rows }),
    })
}

fn ibp(v: &VerifyArgs, seed: u64) -> Result<Verdict, CliError> {
    let cases = v.cases.unwrap_or(1000);
    let tent = ibp_inequality_check(&[-1.0, 0.0, 1.0], &[0.0, 1.0, 0.0], 1.0, 0.0)?;
    let suite = ibp_random_suite(cases, seed)?;
    Ok(Verdict {
        args: json!({ "cases": cases, "seed": seed }),
        quantities: vec![
            Quantity::absolute("tent_rhs_minus_lhs", tent.rhs - tent.lhs, 0.0, 1e-8),
            Quantity::absolute("random_failures", suite.failures as f64, 0.0, 0.0),
        ],
        details: json!({ "tent": tent, "random": suite }),
    })
}
