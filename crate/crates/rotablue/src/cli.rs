//! Argument parsing and the four subcommands.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use rotablue_core::checks::run_suite;
use rotablue_core::pattern::validate_rho;
use rotablue_core::recurrence::Outcome;
use rotablue_core::{
    analyze, compare_oracle_vs_recursion, CascadePattern, Error, ModelParams, RecurrenceSolution,
    Tolerances,
};

use crate::report::{sweep_csv, sweep_pretty, SolutionReport, SweepRow, Verdict, VerifyReport};
use crate::simulate::{default_occasions, empirical_variance, PanelConfig, SimError};

/// Process exit codes, one per outcome class.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const ASSUMPTION_ONE: i32 = 2;
    pub const ASSUMPTION_TWO: i32 = 3;
    pub const NUMERICAL: i32 = 4;
    pub const CHECK_FAILED: i32 = 5;
    pub const OUTPUT: i32 = 6;
}

const AFTER_HELP: &str = "\
Exit codes:
  0  success
  1  usage or input error
  2  assumption I failed (a root of Q_p on [-1, 1] or repeated)
  3  assumption II failed (S rank deficient)
  4  numerical failure (a residual gate was exceeded)
  5  verification or simulation check failed
  6  output could not be written

Environment:
  ROTABLUE_THREADS  maximum number of worker threads for sweeps and simulations";

#[derive(Debug, Parser)]
#[command(
    name = "rotablue",
    version,
    about = "Recursive BLUE of the current mean for cascade rotation samples",
    after_help = AFTER_HELP
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute Q_p, its roots, both assumption checks and the recursion.
    Analyze(AnalyzeArgs),
    /// Compare the recursion with the finite-horizon BLUE and run the invariant checks.
    Verify(VerifyArgs),
    /// Monte Carlo check of the estimator variance and bias.
    Simulate(SimulateArgs),
    /// Run the analysis over a grid of rho values, one row per value.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct PatternArgs {
    /// Cascade pattern as a binary string, slot 1 first (e.g. 1101101).
    #[arg(long)]
    pub pattern: Option<String>,
    /// Scheme alias of alternating in/out run lengths (e.g. 2-2-2, 4-8-4).
    #[arg(long)]
    pub scheme: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output format [default: json, csv for sweep].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Distance from [-1, 1] below which a root counts as on it.
    #[arg(long, value_name = "TOL")]
    pub tol_root: Option<f64>,
    /// Relative singular-value cutoff for the rank of S.
    #[arg(long, value_name = "TOL")]
    pub tol_rank: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub pattern: PatternArgs,
    /// Serial correlation, in (-1, 1) and nonzero.
    #[arg(long, allow_negative_numbers = true)]
    pub rho: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub pattern: PatternArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub rho: f64,
    /// Oracle horizon T [default: max(50, 4 ceil(1 / (1 - max|d|)))].
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Shift a_1 by this amount before verifying (harness self-test).
    #[arg(long, hide = true, allow_negative_numbers = true)]
    pub corrupt_a1: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub pattern: PatternArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub rho: f64,
    /// Occasions per replication [default: burn-in plus the truncation length].
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Number of replications.
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,
    /// RNG seed; equal seeds give identical reports.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub pattern: PatternArgs,
    /// Grid as start:stop:step or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    pub rho_grid: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: exit::USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: if e.is_usage() {
                exit::USAGE
            } else {
                exit::NUMERICAL
            },
            message: format!("error[{}]: {e}", e.code()),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Core(e) => e.into(),
            SimError::InvalidConfig(_) => Failure::usage(format!("error[invalid-config]: {e}")),
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind::{DisplayHelp, DisplayVersion};
            if matches!(e.kind(), DisplayHelp | DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return exit::OK;
            }
            let _ = write!(stderr, "{e}");
            return exit::USAGE;
        }
    };
    let result = match &cli.command {
        Command::Analyze(a) => cmd_analyze(a, stdout),
        Command::Verify(a) => cmd_verify(a, stdout),
        Command::Simulate(a) => cmd_simulate(a, stdout),
        Command::Sweep(a) => cmd_sweep(a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "{}", f.message);
            f.code
        }
    }
}

fn parse_pattern(args: &PatternArgs) -> Result<CascadePattern, Failure> {
    let parsed = match (&args.pattern, &args.scheme) {
        (Some(p), _) => CascadePattern::parse(p),
        (None, Some(s)) => CascadePattern::from_scheme(s),
        (None, None) => return Err(Failure::usage("one of --pattern or --scheme is required")),
    };
    parsed.map_err(|e| Error::from(e).into())
}

fn params(args: &PatternArgs, rho: f64) -> Result<ModelParams, Failure> {
    let pattern = parse_pattern(args)?;
    ModelParams::new(pattern, rho).map_err(|e| Error::from(e).into())
}

fn tolerances(out: &OutputArgs) -> Result<Tolerances, Failure> {
    let mut tol = Tolerances::default();
    for (flag, value, slot) in [
        ("--tol-root", out.tol_root, &mut tol.root_interval),
        ("--tol-rank", out.tol_rank, &mut tol.rank_cutoff),
    ] {
        if let Some(v) = value {
            if !(v.is_finite() && v > 0.0) {
                return Err(Failure::usage(format!("{flag} must be a positive number")));
            }
            *slot = v;
        }
    }
    Ok(tol)
}

fn emit(out: &OutputArgs, stdout: &mut dyn Write, text: &str) -> Result<(), Failure> {
    let written = match &out.out {
        Some(path) => std::fs::write(path, text).map_err(|e| (path.display().to_string(), e)),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| ("stdout".into(), e)),
    };
    written.map_err(|(target, e)| Failure {
        code: exit::OUTPUT,
        message: format!("error[output]: cannot write {target}: {e}"),
    })
}

fn outcome_code(outcome: Outcome) -> i32 {
    match outcome {
        Outcome::Solved => exit::OK,
        Outcome::AssumptionOneFailed => exit::ASSUMPTION_ONE,
        Outcome::AssumptionTwoFailed => exit::ASSUMPTION_TWO,
    }
}

fn outcome_message(outcome: Outcome) -> &'static str {
    match outcome {
        Outcome::Solved => "",
        Outcome::AssumptionOneFailed => {
            "assumption I failed: Q_p has a root on [-1, 1] or a repeated root"
        }
        Outcome::AssumptionTwoFailed => "assumption II failed: S is rank deficient",
    }
}

/// Runs the analysis and insists on a solved outcome.
fn solved(params: &ModelParams, tol: &Tolerances) -> Result<RecurrenceSolution, Failure> {
    let analysis = analyze(params, tol)?;
    match analysis.outcome() {
        Outcome::Solved => Ok(analysis.solution.expect("solved analysis has a solution")),
        o => Err(Failure {
            code: outcome_code(o),
            message: outcome_message(o).into(),
        }),
    }
}

fn cmd_analyze(args: &AnalyzeArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let params = params(&args.pattern, args.rho)?;
    let tol = tolerances(&args.output)?;
    let analysis = analyze(&params, &tol)?;
    let report = SolutionReport::from_analysis(&analysis);
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
        Format::Pretty => report.to_pretty(),
    };
    emit(&args.output, stdout, &text)?;
    let outcome = analysis.outcome();
    if outcome != Outcome::Solved {
        return Err(Failure {
            code: outcome_code(outcome),
            message: outcome_message(outcome).into(),
        });
    }
    Ok(exit::OK)
}

fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let params = params(&args.pattern, args.rho)?;
    let tol = tolerances(&args.output)?;
    if args.horizon == Some(0) {
        return Err(Error::InvalidHorizon.into());
    }
    let mut solution = solved(&params, &tol)?;
    if let Some(delta) = args.corrupt_a1 {
        solution = solution.with_perturbed_a(1, delta);
    }
    let comparison = compare_oracle_vs_recursion(&solution, args.horizon)?;
    let checks = run_suite(&solution);
    let pass = comparison.pass && checks.iter().all(|c| c.pass);
    let report = VerifyReport {
        pattern: params.pattern().to_bit_string(),
        rho: params.rho(),
        oracle: (&comparison).into(),
        checks: checks.iter().map(Into::into).collect(),
        pass,
    };
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
        Format::Pretty => report.to_pretty(),
    };
    emit(&args.output, stdout, &text)?;
    Ok(if pass { exit::OK } else { exit::CHECK_FAILED })
}

fn cmd_simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let params = params(&args.pattern, args.rho)?;
    let tol = tolerances(&args.output)?;
    let solution = solved(&params, &tol)?;
    let occasions = args.horizon.unwrap_or_else(|| default_occasions(&solution));
    let cfg = PanelConfig::new(params, occasions, args.reps, args.seed);
    let report = empirical_variance(&cfg, &solution)?;
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
        Format::Pretty => report.to_pretty(),
    };
    emit(&args.output, stdout, &text)?;
    Ok(if report.pass && report.bias_pass {
        exit::OK
    } else {
        exit::CHECK_FAILED
    })
}

/// Parses `start:stop:step` or `a,b,c` and validates every value.
pub fn parse_rho_grid(text: &str) -> Result<Vec<f64>, String> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("cannot parse {s:?} as a number"))
    };
    let values = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err("grid range must be start:stop:step".into());
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if !(step.is_finite() && step != 0.0) {
            return Err("grid step must be a nonzero number".into());
        }
        let span = (stop - start) / step;
        if !span.is_finite() || span < -1e-9 {
            return Err("grid step points away from stop".into());
        }
        let count = (span + 1e-9).floor() as usize + 1;
        // snap to 12 decimals so that 0.1 steps land on the intended values
        (0..count)
            .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
            .collect()
    } else {
        text.split(',').map(num).collect::<Result<Vec<f64>, _>>()?
    };
    if values.is_empty() {
        return Err("grid is empty".into());
    }
    for &rho in &values {
        validate_rho(rho).map_err(|e| format!("error[{}]: {e}", e.code()))?;
    }
    Ok(values)
}

/// Analyzes one grid point; failures are recorded in the row.
pub fn sweep_row(pattern: &CascadePattern, rho: f64, tol: &Tolerances) -> SweepRow {
    let mut row = SweepRow {
        rho,
        assumption1: Verdict::NotEvaluated,
        assumption2: Verdict::NotEvaluated,
        pass: false,
        variance: None,
        a: Vec::new(),
        error: None,
    };
    let analysis = ModelParams::new(pattern.clone(), rho)
        .map_err(Error::from)
        .and_then(|params| analyze(&params, tol));
    match analysis {
        Ok(analysis) => {
            let report = SolutionReport::from_analysis(&analysis);
            row.assumption1 = report.assumption1;
            row.assumption2 = report.assumption2;
            row.variance = report.variance;
            row.a = report.a;
            row.pass = analysis.outcome() == Outcome::Solved
                && report.variance.is_some_and(|v| v > 0.0 && v <= 1.0);
            if !row.pass {
                row.error = Some(outcome_message(analysis.outcome()).into());
            }
        }
        Err(e) => row.error = Some(e.code().into()),
    }
    row
}

/// Runs every grid point (in parallel) and returns rows in grid order.
pub fn sweep(pattern: &CascadePattern, grid: &[f64], tol: &Tolerances) -> Vec<SweepRow> {
    crate::with_thread_cap(|| {
        grid.par_iter()
            .map(|&rho| sweep_row(pattern, rho, tol))
            .collect()
    })
}

fn cmd_sweep(args: &SweepArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let pattern = parse_pattern(&args.pattern)?;
    let tol = tolerances(&args.output)?;
    let grid = parse_rho_grid(&args.rho_grid).map_err(Failure::usage)?;
    let rows = sweep(&pattern, &grid, &tol);
    let text = match args.output.format.unwrap_or(Format::Csv) {
        Format::Json => serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n",
        Format::Csv => sweep_csv(&rows),
        Format::Pretty => sweep_pretty(&rows),
    };
    emit(&args.output, stdout, &text)?;
    Ok(exit::OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_ranges_and_lists() {
        let g = parse_rho_grid("0.1:0.9:0.1").unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g[2], 0.3);
        assert_eq!(g[8], 0.9);
        assert_eq!(parse_rho_grid("-0.5,0.5").unwrap(), vec![-0.5, 0.5]);
        assert_eq!(parse_rho_grid("0.9:0.1:-0.4").unwrap(), vec![0.9, 0.5, 0.1]);
    }

    #[test]
    fn grid_rejects_zero_and_out_of_range() {
        assert!(parse_rho_grid("-0.9:0.9:0.1").is_err());
        assert!(parse_rho_grid("0.5,1.0").is_err());
        assert!(parse_rho_grid("0.1:0.9:-0.1").is_err());
        assert!(parse_rho_grid("0.1:0.9").is_err());
        assert!(parse_rho_grid("a,b").is_err());
    }

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            exit::OK,
            exit::USAGE,
            exit::ASSUMPTION_ONE,
            exit::ASSUMPTION_TWO,
            exit::NUMERICAL,
            exit::CHECK_FAILED,
            exit::OUTPUT,
        ];
        for (i, a) in codes.iter().enumerate() {
            assert!(codes[i + 1..].iter().all(|b| a != b));
        }
    }

    #[test]
    fn help_mentions_environment_and_flags() {
        let mut out = Vec::new();
        let code = run(["rotablue", "--help"], &mut out, &mut Vec::new());
        assert_eq!(code, exit::OK);
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("ROTABLUE_THREADS"));
        let mut out = Vec::new();
        run(["rotablue", "sweep", "--help"], &mut out, &mut Vec::new());
        let text = String::from_utf8(out).unwrap();
        for flag in [
            "--pattern",
            "--scheme",
            "--rho-grid",
            "--format",
            "--out",
            "--tol-root",
            "--tol-rank",
        ] {
            assert!(text.contains(flag), "{flag}");
        }
    }
}
