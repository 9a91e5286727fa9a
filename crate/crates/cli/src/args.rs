//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use isoweight::integrate::QUAD_DEPTH_ENV;
use isoweight::ExponentVector;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "isoweight", version, about = "Monomial-weighted isoperimetric quotients")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Flags accepted by every subcommand.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Gauss nodes per one-dimensional integral at the coarsest level.
    #[arg(long, default_value_t = 16, global = true)]
    pub nodes: usize,
    /// Refinement levels, each doubling the node count.
    #[arg(long, env = QUAD_DEPTH_ENV, default_value_t = 5, global = true)]
    pub quad_depth: usize,
    #[arg(long, default_value_t = 1e-10, global = true)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 0x5eed, global = true)]
    pub seed: u64,
    /// Monte Carlo sample count where sampling is used.
    #[arg(long, default_value_t = 1_000_000, global = true)]
    pub samples: u64,
}

#[derive(Debug, Clone, Args)]
pub struct PairArgs {
    /// Dimension; inferred from --A when omitted.
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long = "A", allow_hyphen_values = true)]
    pub a: ExponentVector,
    #[arg(long = "B", allow_hyphen_values = true)]
    pub b: ExponentVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    ConeSlab,
    Tball,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Check {
    #[value(name = "lemma31")]
    Lemma31,
    #[value(name = "lemma32")]
    Lemma32,
    #[value(name = "lemma33")]
    Lemma33,
    #[value(name = "lemma34")]
    Lemma34,
    #[value(name = "thm12")]
    Thm12,
    #[value(name = "thmA")]
    ThmA,
    #[value(name = "ibp")]
    Ibp,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Self::Lemma31 => "lemma31",
            Self::Lemma32 => "lemma32",
            Self::Lemma33 => "lemma33",
            Self::Lemma34 => "lemma34",
            Self::Thm12 => "thm12",
            Self::ThmA => "thmA",
            Self::Ibp => "ibp",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether the isoperimetric constant of (A, B) vanishes.
    Classify(PairArgs),
    /// Weighted perimeter, volume and quotient of one shape.
    ///
    /// The shape follows the pair flags, e.g.
    /// `quotient --A 1,1 --B 1,1 orthant-ball --R 1`.
    Quotient {
        #[command(flatten)]
        pair: PairArgs,
        /// Also estimate both integrals by Monte Carlo.
        #[arg(long)]
        mc: bool,
        #[arg(required = true, num_args = 1.., trailing_var_arg = true, allow_hyphen_values = true)]
        shape: Vec<String>,
    },
    /// Quotients along a geometric schedule of translated balls or cone slabs.
    Sweep {
        #[arg(long, value_enum)]
        family: Family,
        #[command(flatten)]
        pair: PairArgs,
        /// One-based axis.
        #[arg(long, default_value_t = 1)]
        axis: usize,
        #[arg(long)]
        eps_start: Option<f64>,
        #[arg(long)]
        t_start: Option<f64>,
        /// Defaults to 0.5 for cone slabs and 2 for translated balls.
        #[arg(long)]
        ratio: Option<f64>,
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Ball radius for translated balls, outer radius for cone slabs.
        #[arg(long = "R", default_value_t = 1.0)]
        radius: f64,
    },
    /// Log-log power-law fit of a sweep CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
        /// Fit only the last half of the rows.
        #[arg(long)]
        tail: bool,
    },
    /// Best Sobolev constant for exponent p.
    SobolevConst {
        #[arg(long = "A", allow_hyphen_values = true)]
        a: ExponentVector,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
    },
    /// Run a named numerical check and report pass or fail.
    Verify(VerifyArgs),
}

/// Every flag is optional; each check fills in its own defaults.
#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub check: Check,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long = "A", allow_hyphen_values = true)]
    pub a: Option<ExponentVector>,
    #[arg(long = "B", allow_hyphen_values = true)]
    pub b: Option<ExponentVector>,
    /// One-based axis.
    #[arg(long)]
    pub i: Option<usize>,
    /// Aperture for thm12, mollifier radius for lemma34.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Acceptance tolerance of the check.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Schedule length for lemma31 and lemma32.
    #[arg(long)]
    pub count: Option<usize>,
    /// Superlevel sets sampled by lemma34.
    #[arg(long)]
    pub levels: Option<usize>,
    /// Random cases for ibp.
    #[arg(long)]
    pub cases: Option<usize>,
    /// Grid cells per mollifier radius for lemma33 and lemma34.
    #[arg(long)]
    pub cells: Option<f64>,
    /// Shape for lemma33 and lemma34, e.g. "orthant-ball --R 1".
    #[arg(long, allow_hyphen_values = true)]
    pub shape: Option<String>,
}
