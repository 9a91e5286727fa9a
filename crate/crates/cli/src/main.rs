//! `isoweight`: batch front end for the weighted isoperimetry toolkit.
//!
//! Exit status 0 on success, 1 when a verification fails or a computation
//! breaks down, 2 on bad flags.

mod args;
mod commands;
mod output;
mod verify;

use std::process::ExitCode;

use clap::Parser;
use isoweight::{McSpec, QuadratureSpec};
use serde_json::json;

use args::{Cli, Command};
use output::{emit, render, Outcome};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let c = &cli.common;
    let q = QuadratureSpec::new(c.nodes, c.quad_depth, c.rel_tol)?;
    let mc = McSpec::new(c.samples, c.seed)?;
    let mut config = json!({
        "format": c.format,
        "out": c.out,
        "quadrature": q,
    });
    match &cli.command {
        Command::Classify(p) => {
            config["command"] = json!("classify");
            commands::classify(p, config)
        }
        Command::Quotient { pair, mc: use_mc, shape } => {
            config["command"] = json!("quotient");
            if *use_mc {
                config["mc"] = json!(mc);
            }
            commands::quotient_cmd(pair, *use_mc, shape, &q, &mc, config)
        }
        Command::Sweep {
            family,
            pair,
            axis,
            eps_start,
            t_start,
            ratio,
            count,
            radius,
        } => {
            config["command"] = json!("sweep");
            commands::sweep_cmd(*family, pair, *axis, *eps_start, *t_start, *ratio, *count, *radius, &q, config)
        }
        Command::Fit { input, tail } => {
            config["command"] = json!("fit");
            commands::fit_cmd(input, *tail, config)
        }
        Command::SobolevConst { a, p } => {
            config["command"] = json!("sobolev-const");
            commands::sobolev_const(a, *p, config)
        }
        Command::Verify(v) => {
            config["command"] = json!("verify");
            verify::run(v, &q, c.seed, config)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let bytes = match render(&outcome, cli.common.format) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = emit(&bytes, cli.common.out.as_deref()) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(1);
    }
    match outcome.passed {
        Some(false) => ExitCode::from(1),
        _ => ExitCode::SUCCESS,
    }
}
