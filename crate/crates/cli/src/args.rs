//! Command-line surface of the `infty` binary.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Parser, Debug, Clone)]
#[command(name = "infty", version, about = "Exact cohomology and Hodge decompositions of finite homotopy algebras")]
pub struct Cli {
    /// Algebra description file (JSON).
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Weight cap; overrides the algebra file's caps.
    #[arg(long, global = true)]
    pub cap: Option<usize>,
    /// Inclusive degree range `a..b`; overrides the algebra file's caps.
    #[arg(long, global = true, value_parser = parse_degree_range)]
    pub degrees: Option<(i64, i64)>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Square-zero, C∞ and unit conditions.
    Check,
    /// Cohomology dimensions of one theory over the degree window.
    Cohomology(CohomologyArgs),
    /// Hodge decomposition of a theory.
    Hodge(HodgeArgs),
    /// Identity suites.
    Verify(VerifyArgs),
    /// Noncommutative differential forms on the algebra file's alphabet.
    Forms(FormsArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Cohomology(_) => "cohomology",
            Command::Hodge(_) => "hodge",
            Command::Verify(_) => "verify",
            Command::Forms(_) => "forms",
        }
    }

    /// Flags of the subcommand as strings, for the report echo.
    pub fn echo_args(&self) -> BTreeMap<String, String> {
        let value = match self {
            Command::Check => serde_json::Value::Null,
            Command::Cohomology(a) => serde_json::to_value(a).expect("args serialise"),
            Command::Hodge(a) => serde_json::to_value(a).expect("args serialise"),
            Command::Verify(a) => serde_json::to_value(a).expect("args serialise"),
            Command::Forms(a) => serde_json::to_value(a).expect("args serialise"),
        };
        let mut out = BTreeMap::new();
        if let serde_json::Value::Object(map) = value {
            for (k, v) in map {
                match v {
                    serde_json::Value::Null => {}
                    serde_json::Value::String(s) => {
                        out.insert(k, s);
                    }
                    other => {
                        out.insert(k, other.to_string());
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Theory {
    Bar,
    Hochschild,
    Harrison,
    Ce,
    Cyclic,
    Tsygan,
    Connes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Coeff {
    Dual,
    Adjoint,
    Trivial,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CohomologyArgs {
    #[arg(long, value_enum)]
    pub theory: Theory,
    #[arg(long, value_enum, default_value_t = Coeff::Dual)]
    pub coeff: Coeff,
    /// Unit-normalised subcomplex (hochschild, cyclic, connes).
    #[arg(long)]
    pub normalised: bool,
    /// Restrict to one Hodge summand (hochschild, cyclic, tsygan).
    #[arg(long)]
    pub j: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct HodgeArgs {
    #[arg(long, value_enum)]
    pub theory: Theory,
    #[arg(long, value_enum, default_value_t = Coeff::Dual)]
    pub coeff: Coeff,
    /// Inclusive summand range `a..b` to report.
    #[arg(long, value_parser = parse_index_range)]
    pub j: Option<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Identities,
    Cartan,
    Les,
    Poincare,
    Zeta,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Seed of the random vector fields in the Cartan suite.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormsOp {
    /// de Rham differential of a 0-form.
    D0,
    /// Lie derivative along the Euler field.
    Euler,
    /// ζ of the closed 2-form dα for a 1-form α.
    Zeta,
    /// Bilinear form of an order-zero 2-form on U.
    Bilinear,
    /// The comparison identities p∘j = n! and j∘d = d∘sym.
    Pj,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryArg {
    Ass,
    Com,
    Lie,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormArg {
    Zero,
    One,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FormsArgs {
    #[arg(long, value_enum)]
    pub op: FormsOp,
    #[arg(long, value_enum, default_value_t = GeometryArg::Ass)]
    pub geometry: GeometryArg,
    /// Form degree of the input for `euler`.
    #[arg(long, value_enum, default_value_t = FormArg::Zero)]
    pub form: FormArg,
    /// Linear combination of words: comma-separated terms, each an optional
    /// rational coefficient followed by generator names, e.g. `"x y, -1/2 y x"`.
    /// For 1-forms the first letter carries the `d`.
    #[arg(long)]
    pub word: Option<String>,
    /// Highest order for `pj`.
    #[arg(long, default_value_t = 3)]
    pub max_order: usize,
}

fn parse_range(text: &str) -> Result<(i64, i64), String> {
    let (a, b) = text
        .split_once("..=")
        .or_else(|| text.split_once(".."))
        .ok_or_else(|| format!("`{text}` is not a range `a..b`"))?;
    let lo = a.trim().parse::<i64>().map_err(|e| format!("`{a}`: {e}"))?;
    let hi = b.trim().parse::<i64>().map_err(|e| format!("`{b}`: {e}"))?;
    if lo > hi {
        return Err(format!("range `{text}` is empty"));
    }
    Ok((lo, hi))
}

/// `a..b` or `a..=b`, both inclusive; a single integer `n` means `n..n`.
pub fn parse_degree_range(text: &str) -> Result<(i64, i64), String> {
    match text.trim().parse::<i64>() {
        Ok(n) => Ok((n, n)),
        Err(_) => parse_range(text),
    }
}

pub fn parse_index_range(text: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = parse_degree_range(text)?;
    if lo < 0 {
        return Err(format!("range `{text}` has a negative end"));
    }
    Ok((lo as usize, hi as usize))
}
