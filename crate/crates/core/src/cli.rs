//! The `invex` command line.
//!
//! Exit codes: 0 success, 1 input error, 2 cross-check disagreement or a
//! report that fails replay.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::alternative::{gordan, motzkin};
use crate::error::{Error, Result};
use crate::invexity::{certify_pair, PairKind, Sampler};
use crate::problem::{evaluate, fixture, Problem, FIXTURE_NAMES};
use crate::report::{analyze, read_matrix, read_report, to_stable_json, verify_report, write_report, AnalysisConfig};
use crate::tol::ToleranceConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_DISAGREEMENT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "invex", version, about = "Invexity certification for multiobjective programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full analysis: stationary points, weighting problems, pair
    /// certification and theorem cross-checks, written as a JSON report.
    Analyze {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Grid step for stationary points and optimality checks.
        #[arg(long, default_value_t = 0.05)]
        grid_step: f64,
        /// Grid step of the pair sampler.
        #[arg(long, default_value_t = 0.25)]
        pair_step: f64,
        /// Sample this many random points for pairs instead of a grid.
        #[arg(long)]
        random_pairs: Option<usize>,
        /// Seed of the random pair sampler.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Step of the weight-simplex grid for the weighting runs.
        #[arg(long, default_value_t = 0.1)]
        lambda_grid_step: f64,
        /// Kernels kept per kind in the report.
        #[arg(long, default_value_t = 200)]
        kernel_cap: usize,
        /// Record per-phase wall time (makes the report run-dependent).
        #[arg(long)]
        timings: bool,
        #[command(flatten)]
        tol: TolArgs,
        /// Write the report here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Certify a single pair.
    Pair {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Comma-separated coordinates of x.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Comma-separated coordinates of xbar.
        #[arg(long, allow_hyphen_values = true)]
        xbar: String,
        #[arg(long, default_value = "invex")]
        kind: PairKind,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Decide Gordan's alternative for A, or Motzkin's for (A, B).
    Alternative {
        a: PathBuf,
        b: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Replay every witness in a report.
    Verify { report: PathBuf },
    /// List the built-in fixtures.
    Fixtures,
}

#[derive(Debug, Args)]
struct ProblemArgs {
    /// Problem JSON file.
    #[arg(required_unless_present = "fixture")]
    path: Option<PathBuf>,
    /// Built-in fixture name instead of a file.
    #[arg(long, conflicts_with = "path")]
    fixture: Option<String>,
}

impl ProblemArgs {
    fn load(&self) -> Result<Problem> {
        match (&self.fixture, &self.path) {
            (Some(name), _) => fixture(name),
            (None, Some(path)) => Problem::load(path),
            (None, None) => Err(Error::InvalidProblem("no problem given".into())),
        }
    }
}

#[derive(Debug, Args)]
struct TolArgs {
    /// Constraint and LP row feasibility tolerance [default: 1e-8]
    #[arg(long)]
    tol_feas: Option<f64>,
    /// Stationarity residual tolerance [default: 1e-7]
    #[arg(long)]
    tol_stationary: Option<f64>,
    /// Minimum margin for a strict system to count as solvable [default: 1e-7]
    #[arg(long)]
    tol_strict: Option<f64>,
}

impl TolArgs {
    fn config(&self) -> Result<ToleranceConfig> {
        let mut tol = ToleranceConfig::default();
        for (slot, value, name) in [
            (&mut tol.feasibility, self.tol_feas, "--tol-feas"),
            (&mut tol.stationary, self.tol_stationary, "--tol-stationary"),
            (&mut tol.strict, self.tol_strict, "--tol-strict"),
        ] {
            if let Some(v) = value {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::InvalidProblem(format!("{name} must be positive, got {v}")));
                }
                *slot = v;
            }
        }
        Ok(tol)
    }
}

fn parse_point(text: &str, flag: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::InvalidProblem(format!("{flag}: `{t}` is not a real number")))
        })
        .collect()
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|source| Error::Io {
        context: "stdout".into(),
        source,
    })
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Analyze {
            problem,
            grid_step,
            pair_step,
            random_pairs,
            seed,
            lambda_grid_step,
            kernel_cap,
            timings,
            tol,
            output,
        } => {
            let problem = problem.load()?;
            for (name, v) in [("--grid-step", grid_step), ("--pair-step", pair_step), ("--lambda-grid-step", lambda_grid_step)] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::InvalidProblem(format!("{name} must be positive, got {v}")));
                }
            }
            let pair_sampler = match random_pairs {
                Some(count) => Sampler::Random { count, seed },
                None => Sampler::Grid { step: pair_step },
            };
            let config = AnalysisConfig {
                grid_step,
                pair_sampler,
                lambda_grid_step,
                seed,
                kernel_cap,
                record_timings: timings,
                tolerances: tol.config()?,
            };
            let report = analyze(&problem, &config)?;
            match output {
                Some(path) => write_report(&report, &path)?,
                None => emit(out, &to_stable_json(&report)?)?,
            }
            for check in report.crosscheck.checks() {
                let _ = writeln!(
                    err,
                    "{}: L = {}, R = {}{}",
                    check.kind,
                    check.lhs,
                    check.rhs,
                    if check.agreement { "" } else { "  DISAGREEMENT" }
                );
            }
            Ok(if report.crosscheck.agreement { EXIT_OK } else { EXIT_DISAGREEMENT })
        }
        Command::Pair {
            problem,
            x,
            xbar,
            kind,
            tol,
        } => {
            let problem = problem.load()?;
            let tol = tol.config()?;
            let p = evaluate(&problem, &parse_point(&x, "--x")?, &tol)?;
            let pbar = evaluate(&problem, &parse_point(&xbar, "--xbar")?, &tol)?;
            let verdict = certify_pair(kind, &pbar, &p, &tol)?;
            emit(out, &to_stable_json(&verdict)?)?;
            Ok(EXIT_OK)
        }
        Command::Alternative { a, b, tol } => {
            let tol = tol.config()?;
            let a = read_matrix(&a)?;
            let text = match b {
                Some(b) => to_stable_json(&motzkin(&a, &read_matrix(&b)?, &tol)?)?,
                None => to_stable_json(&gordan(&a, &tol)?)?,
            };
            emit(out, &text)?;
            Ok(EXIT_OK)
        }
        Command::Verify { report } => {
            let report = read_report(&report)?;
            let outcome = verify_report(&report)?;
            emit(out, &to_stable_json(&outcome)?)?;
            Ok(if outcome.passed() { EXIT_OK } else { EXIT_DISAGREEMENT })
        }
        Command::Fixtures => {
            for name in FIXTURE_NAMES {
                emit(out, &format!("{name}\n"))?;
            }
            Ok(EXIT_OK)
        }
    }
}
