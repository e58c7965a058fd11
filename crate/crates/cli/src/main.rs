use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

mod config;
mod error;
mod report;
mod suites;

use config::{EpsInput, RunConfig};
use error::CliError;
use report::{write_atomic, Format, Report, ReportConfig};
use suites::Suite;

#[derive(Parser)]
#[command(name = "cohframe", version, about = "Numerical verification suites for coherent-state frames")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one verification suite, or all of them.
    Verify(VerifyArgs),
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    /// Scale of the unlike closures.
    #[arg(long)]
    lambda: Option<f64>,
    /// Target deviation for the closure grids, in [1e-12, 1e-2].
    #[arg(long)]
    tol: Option<f64>,
    /// Vector count of the plane frame.
    #[arg(long)]
    n: Option<usize>,
    /// Plane frame gap; accepts expressions such as `sqrt2/35`.
    #[arg(long)]
    eps: Option<String>,
    /// Seed for sampled nodes and Monte Carlo.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo sample count.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    hbar: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Offset as `re,im`.
    #[arg(long, value_parser = parse_pair)]
    zeta: Option<[f64; 2]>,
    /// JSON settings file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Include wall-clock timings (makes the report run-dependent).
    #[arg(long)]
    timing: bool,
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let (a, b) = s.split_once(',').ok_or("expected re,im")?;
    let p = |t: &str| t.trim().parse::<f64>().map_err(|e| e.to_string());
    Ok([p(a)?, p(b)?])
}

fn verify(args: VerifyArgs) -> Result<bool, CliError> {
    let flags = RunConfig {
        lambda: args.lambda,
        tol: args.tol,
        n: args.n,
        eps: args.eps.map(EpsInput::Expr),
        seed: args.seed,
        samples: args.samples,
        hbar: args.hbar,
        alpha: args.alpha,
        zeta: args.zeta,
    };
    let file = match &args.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    let resolved = flags.over(file).resolve()?;

    let mut results = Vec::new();
    let mut details = BTreeMap::new();
    let mut frame = Vec::new();
    let mut timing = BTreeMap::new();
    for s in args.suite.expand() {
        let t = Instant::now();
        let out = suites::run(s, &resolved)?;
        timing.insert(s.name(), t.elapsed().as_secs_f64());
        results.extend(out.checks);
        for (k, v) in out.details {
            details.insert(format!("{}.{k}", s.name()), v);
        }
        frame.extend(out.frame);
    }
    let report = Report {
        config: ReportConfig { suite: args.suite.name(), resolved: &resolved },
        results,
        details,
        timing: args.timing.then_some(timing),
    };
    let bytes = match args.format {
        Format::Json => report.to_json()?,
        Format::Csv => report.to_csv(&frame)?,
    };
    match &args.out {
        Some(p) => write_atomic(p, &bytes)?,
        None => std::io::stdout().write_all(&bytes).map_err(|e| CliError::Output(e.to_string()))?,
    }
    for r in report.results.iter().filter(|r| !r.pass) {
        eprintln!("FAIL {}: {} = {:e}", r.suite, r.name, r.value);
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify(args) => match verify(args) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
    }
}
