//! Command-line front end: parses arguments, loads a [`RunConfig`], runs the
//! requested computation and maps outcomes to process exit codes.
//!
//! Exit codes: 0 success (or every verdict holds), 2 a check was violated,
//! 3 a check was inconclusive, 64 usage or configuration error,
//! 65 computation error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::conjugate::{self, ConjugateResult};
use crate::divergence::{self, DivergenceInstance, OmegaResult};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::quadrature::{IntegrationResult, Scheme};
use crate::surface::{self, AsInfinity, Lambda};
use crate::verify::{self, CheckId, InstanceFamily, VerdictCounts};

/// Usage or configuration error.
pub const EXIT_USAGE: i32 = 64;
/// Numerical failure during a computation.
pub const EXIT_COMPUTATION: i32 = 65;

/// Environment variable capping the number of worker threads.
pub const MAX_THREADS_VAR: &str = "LOGDIV_MAX_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "logdiv",
    version,
    about = "Mixed f-divergences and affine surface areas of log-concave functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Exponent denominator (overrides the configuration).
    #[arg(long)]
    n_w: Option<f64>,
    /// Require n = d, the setting of the closed-form constants.
    #[arg(long)]
    paper_n: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DivergenceKind {
    /// Mixed divergence of all configured functions.
    Mixed,
    /// Classical divergence of the first function.
    Classical,
    /// i-th mixed divergence of the first two functions.
    Ith,
    /// Mixed Kullback–Leibler divergence with the positive-part clamp.
    Kl,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a divergence of the configured functions and generators.
    Divergence {
        #[arg(value_enum)]
        kind: DivergenceKind,
        /// Index for `ith` (overrides the configuration).
        #[arg(long, allow_hyphen_values = true)]
        i: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate the mixed affine surface area as_λ (λ may be `inf` or `-inf`).
    Surface {
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        /// Evaluate the i-th surface area of the first two functions instead.
        #[arg(long, allow_hyphen_values = true)]
        i: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Legendre transform of one configured function's potential.
    Conjugate {
        /// Point y, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        at: Vec<f64>,
        /// Which configured function (0-based).
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[command(flatten)]
        common: Common,
    },
    /// The Ω invariant of the configured functions.
    Omega {
        #[command(flatten)]
        common: Common,
    },
    /// Run the inequality catalog on seeded instances.
    Verify {
        /// Check name; repeat to select several (default: all).
        #[arg(long = "check")]
        checks: Vec<String>,
        /// Instance family; repeat to select several (default: all).
        #[arg(long = "family")]
        families: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        dimension: Option<usize>,
        /// Directory receiving `reports.jsonl` (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optional JSON run configuration supplying defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Exponent denominator (default: the dimension).
        #[arg(long)]
        n_w: Option<f64>,
        /// Require n = d.
        #[arg(long)]
        paper_n: bool,
    },
    /// Tabulate as_λ over an evenly spaced λ range as CSV.
    Sweep {
        #[arg(long, allow_hyphen_values = true)]
        lambda_from: f64,
        #[arg(long, allow_hyphen_values = true)]
        lambda_to: f64,
        /// Number of intervals; the table has `steps + 1` rows.
        #[arg(long)]
        steps: usize,
        /// Tabulate the i-th surface area of the first two functions instead.
        #[arg(long, allow_hyphen_values = true)]
        i: Option<f64>,
        /// Directory receiving `sweep.csv` (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

/// Single-line record printed by `divergence` and finite-λ `surface`.
#[derive(Debug, Serialize)]
struct ValueRecord {
    command: &'static str,
    kind: String,
    value: f64,
    error: f64,
    evaluations: usize,
    scheme: Scheme,
}

impl ValueRecord {
    fn new(command: &'static str, kind: String, r: IntegrationResult) -> Self {
        ValueRecord {
            command,
            kind,
            value: r.value,
            error: r.error,
            evaluations: r.evaluations,
            scheme: r.scheme,
        }
    }
}

#[derive(Debug, Serialize)]
struct ExtremeRecord {
    command: &'static str,
    kind: String,
    #[serde(flatten)]
    result: AsInfinity,
}

#[derive(Debug, Serialize)]
struct ConjugateRecord {
    command: &'static str,
    at: Vec<f64>,
    #[serde(flatten)]
    result: ConjugateResult,
}

#[derive(Debug, Serialize)]
struct OmegaRecord {
    command: &'static str,
    #[serde(flatten)]
    result: OmegaResult,
}

#[derive(Debug, Serialize)]
struct SweepRow {
    lambda: f64,
    value: f64,
    error: f64,
    evals: usize,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) | Error::InvalidArgument(_) | Error::IndexOutOfRange(_) | Error::DimensionMismatch { .. } => {
                EXIT_USAGE
            }
            _ => EXIT_COMPUTATION,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_COMPUTATION,
        message: format!("cannot write {}: {e}", path.display()),
    }
}

/// Runs the tool on `args` (program name first) with the process streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the tool writing records to `out` and diagnostics to `err`; returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return 0;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    if let Err(f) = configure_threads() {
        let _ = writeln!(err, "error: {}", f.message);
        return f.code;
    }
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Applies `LOGDIV_MAX_THREADS` to the global worker pool (once per process).
fn configure_threads() -> std::result::Result<(), Failure> {
    let Ok(raw) = std::env::var(MAX_THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| Failure {
        code: EXIT_USAGE,
        message: format!("{MAX_THREADS_VAR} must be a positive integer, got {raw:?}"),
    })?;
    // A pool that already exists (repeated in-process runs) keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn load(common: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&common.config)?;
    if common.n_w.is_some() {
        cfg.n_w = common.n_w;
    }
    cfg.paper_n |= common.paper_n;
    cfg.validate()?;
    Ok(cfg)
}

fn emit<T: Serialize>(out: &mut dyn Write, record: &T) -> std::result::Result<(), Failure> {
    let line = serde_json::to_string(record).map_err(|e| Failure {
        code: EXIT_COMPUTATION,
        message: e.to_string(),
    })?;
    writeln!(out, "{line}").map_err(|e| io_failure(Path::new("<stdout>"), e))
}

fn parse_lambda(raw: Option<&str>, cfg: &RunConfig) -> Result<Lambda> {
    match raw {
        Some(s) => s.parse(),
        None => cfg
            .lambda
            .map(Lambda::Finite)
            .ok_or_else(|| Error::Config("λ is required (--lambda or \"lambda\" in the configuration)".into())),
    }
}

fn index_i(flag: Option<f64>, cfg: &RunConfig) -> Result<f64> {
    flag.or(cfg.i)
        .ok_or_else(|| Error::Config("the index i is required (--i or \"i\" in the configuration)".into()))
}

fn first_two(cfg: &RunConfig) -> Result<(crate::function::LogConcaveFunction, crate::function::LogConcaveFunction)> {
    let fv = cfg.function_vector()?;
    if fv.len() < 2 {
        return Err(Error::Config("i-th quantities need two functions".into()));
    }
    Ok((fv[0].clone(), fv[1].clone()))
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> std::result::Result<i32, Failure> {
    match command {
        Command::Divergence { kind, i, common } => {
            let cfg = load(&common)?;
            let spec = cfg.spec();
            let fv = cfg.function_vector()?;
            let result = match kind {
                DivergenceKind::Mixed => {
                    let gens = cfg.generator_list(fv.len())?;
                    let n_w = cfg.n_w_for(fv.len())?;
                    divergence::mixed(&DivergenceInstance::with_weight(fv, gens, n_w)?, &spec)?
                }
                DivergenceKind::Classical => {
                    let gens = cfg.generator_list(fv.len())?;
                    divergence::classical(gens[0], &fv[0], &spec)?
                }
                DivergenceKind::Ith => {
                    let (p1, p2) = first_two(&cfg)?;
                    let gens = cfg.generator_list(fv.len())?;
                    let n_w = cfg.n_w_for(cfg.dimension)?;
                    divergence::ith_mixed(gens[0], gens[1], &p1, &p2, index_i(i, &cfg)?, n_w, &spec)?
                }
                DivergenceKind::Kl => {
                    cfg.n_w_for(fv.len())?;
                    divergence::mixed_kl(&fv, &spec)?
                }
            };
            let name = format!("{kind:?}").to_ascii_lowercase();
            emit(out, &ValueRecord::new("divergence", name, result))?;
            Ok(0)
        }
        Command::Surface { lambda, i, common } => {
            let cfg = load(&common)?;
            let spec = cfg.spec();
            let lambda = parse_lambda(lambda.as_deref(), &cfg)?;
            let kind = lambda.to_string();
            match i.or(cfg.i) {
                Some(i) => {
                    let (p1, p2) = first_two(&cfg)?;
                    let n_w = cfg.n_w_for(cfg.dimension)?;
                    match lambda {
                        Lambda::Finite(l) => {
                            let r = surface::as_lambda_i(&p1, &p2, l, i, n_w, &spec)?;
                            emit(out, &ValueRecord::new("surface", kind, r))?;
                        }
                        Lambda::PlusInfinity => {
                            let result = surface::as_infinity_i(&p1, &p2, i, n_w)?;
                            emit(out, &ExtremeRecord { command: "surface", kind, result })?;
                        }
                        Lambda::MinusInfinity => {
                            let result = surface::as_minus_infinity_i(&p1, &p2, i, n_w)?;
                            emit(out, &ExtremeRecord { command: "surface", kind, result })?;
                        }
                    }
                }
                None => {
                    let fv = cfg.function_vector()?;
                    cfg.n_w_for(fv.len())?;
                    match lambda {
                        Lambda::Finite(l) => {
                            let r = surface::as_lambda(&fv, l, &spec)?;
                            emit(out, &ValueRecord::new("surface", kind, r))?;
                        }
                        Lambda::PlusInfinity => {
                            let result = surface::as_infinity(&fv)?;
                            emit(out, &ExtremeRecord { command: "surface", kind, result })?;
                        }
                        Lambda::MinusInfinity => {
                            let result = surface::as_minus_infinity(&fv)?;
                            emit(out, &ExtremeRecord { command: "surface", kind, result })?;
                        }
                    }
                }
            }
            Ok(0)
        }
        Command::Conjugate { at, index, common } => {
            let cfg = load(&common)?;
            let fv = cfg.function_vector()?;
            let f = fv
                .get(index)
                .ok_or_else(|| Error::Config(format!("no function at index {index}")))?;
            let result = conjugate::legendre(f, &Vector::from_column_slice(&at))?;
            emit(out, &ConjugateRecord { command: "conjugate", at, result })?;
            Ok(0)
        }
        Command::Omega { common } => {
            let cfg = load(&common)?;
            let fv = cfg.function_vector()?;
            cfg.n_w_for(fv.len())?;
            let result = divergence::omega(&fv, &cfg.spec())?;
            emit(out, &OmegaRecord { command: "omega", result })?;
            Ok(0)
        }
        Command::Verify {
            checks,
            families,
            seed,
            trials,
            dimension,
            out: out_dir,
            config,
            n_w,
            paper_n,
        } => {
            let mut cfg = match &config {
                Some(path) => RunConfig::load(path)?,
                None => RunConfig::new(dimension.unwrap_or(2)),
            };
            if let Some(d) = dimension {
                cfg.dimension = d;
            }
            if !checks.is_empty() {
                cfg.checks = checks.iter().map(|c| c.parse::<CheckId>()).collect::<Result<_>>()?;
            }
            if !families.is_empty() {
                cfg.families = families.iter().map(|f| f.parse::<InstanceFamily>()).collect::<Result<_>>()?;
            }
            cfg.trials = trials.or(cfg.trials);
            cfg.n_w = n_w.or(cfg.n_w);
            cfg.paper_n |= paper_n;
            let seed = seed.or(cfg.seed).unwrap_or(42);
            let suite = cfg.suite()?;
            let reports = verify::run_suite(&suite, seed)?;
            let mut text = String::new();
            for r in &reports {
                let line = serde_json::to_string(r).map_err(|e| Failure {
                    code: EXIT_COMPUTATION,
                    message: e.to_string(),
                })?;
                text.push_str(&line);
                text.push('\n');
            }
            match out_dir.or(cfg.output) {
                Some(dir) => write_file(&dir, "reports.jsonl", &text)?,
                None => out
                    .write_all(text.as_bytes())
                    .map_err(|e| io_failure(Path::new("<stdout>"), e))?,
            }
            let c = VerdictCounts::of(&reports);
            let _ = writeln!(
                err,
                "{} reports: {} holds, {} equality, {} violated, {} inconclusive",
                reports.len(),
                c.holds,
                c.equality,
                c.violated,
                c.inconclusive
            );
            Ok(verify::exit_code(&reports))
        }
        Command::Sweep {
            lambda_from,
            lambda_to,
            steps,
            i,
            out: out_dir,
            common,
        } => {
            let cfg = load(&common)?;
            let spec = cfg.spec();
            if steps == 0 || !lambda_from.is_finite() || !lambda_to.is_finite() {
                return Err(Error::Config("sweep needs finite λ bounds and at least one step".into()).into());
            }
            let lambdas: Vec<f64> = (0..=steps)
                .map(|k| lambda_from + (lambda_to - lambda_from) * k as f64 / steps as f64)
                .collect();
            let index = i.or(cfg.i);
            let pair = index.map(|_| first_two(&cfg)).transpose()?;
            let fv = cfg.function_vector()?;
            let n_w = match index {
                Some(_) => cfg.n_w_for(cfg.dimension)?,
                None => cfg.n_w_for(fv.len())?,
            };
            let rows = lambdas
                .par_iter()
                .map(|&lambda| {
                    let r = match (&pair, index) {
                        (Some((p1, p2)), Some(i)) => surface::as_lambda_i(p1, p2, lambda, i, n_w, &spec)?,
                        _ => surface::as_lambda(&fv, lambda, &spec)?,
                    };
                    Ok(SweepRow {
                        lambda,
                        value: r.value,
                        error: r.error,
                        evals: r.evaluations,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &rows {
                w.serialize(row).map_err(|e| io_failure(Path::new("<csv>"), e))?;
            }
            let bytes = w.into_inner().map_err(|e| io_failure(Path::new("<csv>"), e))?;
            let text = String::from_utf8(bytes).map_err(|e| io_failure(Path::new("<csv>"), e))?;
            match out_dir.or(cfg.output) {
                Some(dir) => write_file(&dir, "sweep.csv", &text)?,
                None => out
                    .write_all(text.as_bytes())
                    .map_err(|e| io_failure(Path::new("<stdout>"), e))?,
            }
            Ok(0)
        }
    }
}

fn write_file(dir: &Path, name: &str, text: &str) -> std::result::Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| io_failure(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors_exit_64() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run_with(["logdiv", "frobnicate"], &mut o, &mut e), EXIT_USAGE);
        assert_eq!(run_with(["logdiv", "verify", "--check", "nope"], &mut o, &mut e), EXIT_USAGE);
        assert_eq!(run_with(["logdiv", "--help"], &mut o, &mut e), 0);
    }
}
