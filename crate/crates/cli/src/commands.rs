//! The non-verification subcommands.

use std::path::Path;

use isoweight::integrate::{mc_surface, mc_volume};
use isoweight::isoperimetry::{ball_constant, classify_existence, quotient};
use isoweight::limits::{
    dominance, fit_power_law_xy, fit_tail, predicted_exponent, sweep, FamilyTemplate, SweepSchedule,
};
use isoweight::shapes::parse_shape_tokens;
use isoweight::sobolev::{best_constant, best_constant_p1};
use isoweight::{Error, ExponentVector, McSpec, QuadratureSpec, WeightPair};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::args::{Family, PairArgs};
use crate::output::{num, opt, Outcome, Table};
use crate::CliError;

/// Builds the pair, checking `--N` against the vector lengths.
pub fn resolve_pair(n: Option<usize>, a: &ExponentVector, b: &ExponentVector) -> Result<WeightPair, CliError> {
    if let Some(n) = n {
        if a.len() != n || b.len() != n {
            return Err(CliError::Usage(format!(
                "--N {n} does not match |A| = {} and |B| = {}",
                a.len(),
                b.len()
            )));
        }
    }
    Ok(WeightPair::new(a.clone(), b.clone())?)
}

fn pair_json(pair: &WeightPair) -> Value {
    json!({ "N": pair.n, "A": pair.a_vec, "B": pair.b_vec })
}

pub fn classify(args: &PairArgs, config: Value) -> Result<Outcome, CliError> {
    let pair = resolve_pair(args.n, &args.a, &args.b)?;
    let v = classify_existence(&pair);
    let witness = v.witness_index.map(|i| i + 1);
    let mut table = Table::new(&["status", "witness_index", "violated_side", "sigma", "a_minus_b"]);
    let result = json!({
        "status": v.status,
        "witness_index": witness,
        "violated_side": v.violated_side,
        "sigma": v.sigma,
        "a_minus_b": v.a_minus_b,
        "basis": v.basis,
    });
    table.push(vec![
        result["status"].as_str().unwrap_or_default().to_string(),
        opt(witness),
        v.violated_side
            .map(|s| serde_json::to_value(s).expect("enum").as_str().unwrap_or_default().to_string())
            .unwrap_or_default(),
        num(v.sigma),
        num(v.a_minus_b),
    ]);
    Ok(Outcome {
        config: with_args(config, pair_json(&pair)),
        result,
        table,
        passed: None,
    })
}

pub fn quotient_cmd(
    args: &PairArgs,
    mc: bool,
    shape: &[String],
    q: &QuadratureSpec,
    mc_spec: &McSpec,
    config: Value,
) -> Result<Outcome, CliError> {
    let pair = resolve_pair(args.n, &args.a, &args.b)?;
    let shape = parse_shape_tokens(shape, pair.n)?;
    let report = quotient(&shape, &pair, q)?;
    let mut table = Table::new(&[
        "method",
        "perimeter",
        "perimeter_err",
        "volume",
        "volume_err",
        "quotient",
        "relerr",
    ]);
    table.push(vec![
        "quadrature".into(),
        num(report.perimeter.value),
        num(report.perimeter.abs_error_est),
        num(report.volume.value),
        num(report.volume.abs_error_est),
        num(report.quotient),
        num(report.combined_rel_error),
    ]);
    let mut result = json!({ "shape": shape, "quadrature": report });
    let mut cfg_args = pair_json(&pair);
    cfg_args["shape"] = serde_json::to_value(&shape).expect("shape");
    cfg_args["mc"] = json!(mc);
    if mc {
        let p = mc_surface(&shape, &pair.a_vec, mc_spec)?;
        let m = mc_volume(&shape, &pair.b_vec, mc_spec)?;
        let report = isoweight::isoperimetry::QuotientReport::from_estimates(
            p,
            m,
            pair.sigma,
            serde_json::to_value(&shape).expect("shape"),
        )?;
        table.push(vec![
            "monte-carlo".into(),
            num(report.perimeter.value),
            num(report.perimeter.abs_error_est),
            num(report.volume.value),
            num(report.volume.abs_error_est),
            num(report.quotient),
            num(report.combined_rel_error),
        ]);
        result["monte_carlo"] = serde_json::to_value(&report).expect("report");
    }
    Ok(Outcome {
        config: with_args(config, cfg_args),
        result,
        table,
        passed: None,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn sweep_cmd(
    family: Family,
    args: &PairArgs,
    axis: usize,
    eps_start: Option<f64>,
    t_start: Option<f64>,
    ratio: Option<f64>,
    count: usize,
    radius: f64,
    q: &QuadratureSpec,
    config: Value,
) -> Result<Outcome, CliError> {
    let pair = resolve_pair(args.n, &args.a, &args.b)?;
    if axis == 0 || axis > pair.n {
        return Err(CliError::Usage(format!("--axis must lie in 1..={}, got {axis}", pair.n)));
    }
    let i = axis - 1;
    let (template, start, ratio) = match family {
        Family::ConeSlab => {
            if t_start.is_some() {
                return Err(CliError::Usage("--t-start applies to tball sweeps".into()));
            }
            let t = FamilyTemplate::ConeSlab {
                dim: pair.n,
                axis: i,
                radius,
            };
            (t, eps_start.unwrap_or(0.1), ratio.unwrap_or(0.5))
        }
        Family::Tball => {
            if eps_start.is_some() {
                return Err(CliError::Usage("--eps-start applies to cone-slab sweeps".into()));
            }
            let t = FamilyTemplate::TranslatedBall {
                dim: pair.n,
                axis: i,
                radius,
            };
            (t, t_start.unwrap_or(10.0), ratio.unwrap_or(2.0))
        }
    };
    let schedule = SweepSchedule::new(template.parameter(), start, ratio, count)?;
    let points = sweep(&template, &schedule, &pair, q)?;
    let mut table = Table::new(&["param", "perimeter", "volume", "quotient", "relerr"]);
    let rows: Vec<Value> = points
        .iter()
        .map(|p| {
            let r = &p.report;
            table.push(vec![
                num(p.param),
                num(r.perimeter.value),
                num(r.volume.value),
                num(r.quotient),
                num(r.combined_rel_error),
            ]);
            json!({
                "param": p.param,
                "perimeter": r.perimeter.value,
                "perimeter_err": r.perimeter.abs_error_est,
                "volume": r.volume.value,
                "volume_err": r.volume.abs_error_est,
                "quotient": r.quotient,
                "relerr": r.combined_rel_error,
            })
        })
        .collect();
    let fit = fit_tail(&points)?;
    let predicted = predicted_exponent(&pair, i, template.parameter())?;
    let dom = match family {
        Family::ConeSlab => Some(dominance(&points)?),
        Family::Tball => None,
    };
    let mut cfg_args = pair_json(&pair);
    cfg_args["family"] = serde_json::to_value(family).expect("family");
    cfg_args["axis"] = json!(axis);
    cfg_args["schedule"] = serde_json::to_value(schedule).expect("schedule");
    cfg_args["R"] = json!(radius);
    Ok(Outcome {
        config: with_args(config, cfg_args),
        result: json!({
            "points": rows,
            "tail_fit": fit,
            "predicted_exponent": predicted,
            "dominance": dom,
        }),
        table,
        passed: None,
    })
}

#[derive(Debug, Deserialize)]
struct SweepRow {
    param: f64,
    quotient: f64,
}

pub fn fit_cmd(input: &Path, tail: bool, config: Value) -> Result<Outcome, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(input)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", input.display())))?;
    let rows: Vec<SweepRow> = reader
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Usage(format!("{}: {e}", input.display())))?;
    let used = if tail {
        let keep = (rows.len() - rows.len() / 2).max(3).min(rows.len());
        &rows[rows.len() - keep..]
    } else {
        &rows[..]
    };
    let x: Vec<f64> = used.iter().map(|r| r.param).collect();
    let y: Vec<f64> = used.iter().map(|r| r.quotient).collect();
    let fit = fit_power_law_xy(&x, &y)?;
    let mut table = Table::new(&["exponent", "stderr", "intercept", "r_squared", "points"]);
    table.push(vec![
        num(fit.exponent),
        num(fit.stderr),
        num(fit.intercept),
        num(fit.r_squared),
        fit.points.to_string(),
    ]);
    Ok(Outcome {
        config: with_args(config, json!({ "input": input, "tail": tail })),
        result: serde_json::to_value(fit).expect("fit"),
        table,
        passed: None,
    })
}

pub fn sobolev_const(a: &ExponentVector, p: f64, config: Value) -> Result<Outcome, CliError> {
    let d = a.len() as f64 + a.sum();
    let (constant, ball) = if p == 1.0 {
        (best_constant_p1(a), Some(ball_constant(a)))
    } else {
        (best_constant(p, a)?, None)
    };
    let mut table = Table::new(&["p", "D", "constant", "ball_constant"]);
    table.push(vec![num(p), num(d), num(constant), opt(ball)]);
    Ok(Outcome {
        config: with_args(config, json!({ "A": a, "N": a.len(), "p": p })),
        result: json!({ "p": p, "D": d, "constant": constant, "ball_constant": ball }),
        table,
        passed: None,
    })
}

pub fn with_args(mut config: Value, args: Value) -> Value {
    config["args"] = args;
    config
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Quadrature(_) | Error::DegenerateShape(_) | Error::Io(_) => CliError::Failure(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}
