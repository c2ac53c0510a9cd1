//! The `cartan-forge` command line.
//!
//! [`run`] takes the full argument list and returns the exit code together
//! with everything that would have been printed, so the binary is a thin
//! wrapper and tests can drive every subcommand in-process.

mod commands;
mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::jet::{JetPoint, Mode};
pub use report::{Format, Report};

/// Exit code for a run whose checks all passed.
pub const EXIT_OK: i32 = 0;
/// Exit code for a failed verification.
pub const EXIT_FAILED: i32 = 1;
/// Exit code for bad usage or unreadable input.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "cartan-forge",
    version,
    about = "Equivalence of fourth-order linear differential operators by Cartan's method"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    options: Options,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Run the normalization and print the final structure equations and invariants.
    Derive,
    /// Evaluate the invariants of an operator at a jet point.
    Invariants,
    /// Test whether a map carries one operator to another.
    CheckEquiv,
    /// Compare the derivation with the bundled reference transcriptions.
    VerifyPaper,
    /// Run every property suite.
    Selftest,
}

#[derive(Clone, Debug, Args)]
pub struct Options {
    /// Equivalence notion.
    #[arg(long, global = true, value_parser = parse_mode)]
    pub mode: Option<Mode>,
    /// Operator file.
    #[arg(long, global = true, value_name = "FILE")]
    pub op: Option<PathBuf>,
    /// Second operator file (the target of check-equiv).
    #[arg(long, global = true, value_name = "FILE")]
    pub op2: Option<PathBuf>,
    /// Transformation file.
    #[arg(long, global = true, value_name = "FILE")]
    pub map: Option<PathBuf>,
    /// Jet point `x,u,p,q,r,s`.
    #[arg(long, global = true, value_parser = parse_point, allow_hyphen_values = true)]
    pub point: Option<JetPoint>,
    /// Random probes per check-equiv test.
    #[arg(long, global = true, default_value_t = 20)]
    pub samples: usize,
    /// Interval `a:b` for x samples and domain checks.
    #[arg(long, global = true, value_parser = parse_interval, default_value = "1:2", allow_hyphen_values = true)]
    pub interval: (f64, f64),
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse::<Mode>()
        .map_err(|_| format!("expected `direct` or `gauge`, got `{s}`"))
}

fn parse_point(s: &str) -> Result<JetPoint, String> {
    let values = s
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{}` is not a number", v.trim()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    JetPoint::from_slice(&values).ok_or_else(|| format!("expected six values x,u,p,q,r,s, got {}", values.len()))
}

fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected a:b")?;
    let a: f64 = a.trim().parse().map_err(|_| format!("`{a}` is not a number"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("`{b}` is not a number"))?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(format!("need finite a < b, got {a}:{b}"));
    }
    Ok((a, b))
}

/// What a run printed and how it ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn usage(message: impl Into<String>) -> Self {
        let mut stderr = message.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        Outcome {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr,
        }
    }
}

/// Runs the command line `args`, whose first item is the program name.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome::usage(text)
            } else {
                Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    commands::dispatch(cli.command, &cli.options)
}
