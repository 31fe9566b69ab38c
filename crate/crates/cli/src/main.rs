//! `gevwave`: drive simulation runs, bound comparisons, constants tables,
//! and scaling sweeps from TOML configs.
//!
//! Exit codes: 0 success, 1 config/schema error, 2 numerical divergence,
//! 3 invariant violation (a bound exceeded the measurement, h1 > h2, or a
//! cross-check failed).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gevrey_waves::config::RunConfig;
use gevrey_waves::error::Error;
use gevrey_waves::runner;

#[derive(Parser)]
#[command(name = "gevwave", about = "Pseudo-spectral wave runs with analyticity-radius tracking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonRunArgs {
    /// Path to the TOML run configuration.
    config: PathBuf,
    /// Override the output directory of the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also emit gnuplot-ready column files.
    #[arg(long)]
    plot_data: bool,
    /// Print the run log and summary to stdout.
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a run: solve, record norms, compute bounds and the measured
    /// radius, write CSV reports.
    Run(CommonRunArgs),
    /// Run the monomial equation and compare the Wiener (h1) and L2 (h2)
    /// bound inputs pointwise.
    Compare(CommonRunArgs),
    /// Print the algebra and embedding constants for a given (n, p).
    Constants {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
    },
    /// Sweep nu over the configured grid for the sn traveling-wave family.
    Scaling(CommonRunArgs),
}

fn classify(err: &Error) -> u8 {
    match err {
        Error::Config(_)
        | Error::InvalidParameter(_)
        | Error::DivergentSum { .. }
        | Error::PeriodicityFit { .. }
        | Error::Undersampled { .. }
        | Error::SymmetryViolation { .. }
        | Error::Io(_) => 1,
        Error::Divergence { .. }
        | Error::EvalOverflow { .. }
        | Error::WeightOverflow { .. }
        | Error::SeriesDivergence { .. }
        | Error::EllipticOverflow(_)
        | Error::SumNotConverged { .. } => 2,
        Error::PreconditionViolated(_) | Error::CrossCheckFailed { .. } => 3,
    }
}

fn load_config(args: &CommonRunArgs) -> Result<(RunConfig, String), Error> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = RunConfig::from_toml_str(&text)?;
    if args.plot_data {
        cfg.output.plot_data = true;
    }
    Ok((cfg, text))
}

/// Exit status of a run: 0 pass, 2 diverged, 3 invariant failure.
fn cmd_run(args: &CommonRunArgs) -> Result<u8, Error> {
    let (cfg, echo) = load_config(args)?;
    let report = runner::execute_run(&cfg)?;
    let dir = runner::write_run_report(&cfg, &echo, &report, args.out.as_deref())?;
    if args.verbose {
        let log = std::fs::read_to_string(dir.join("run.log"))?;
        print!("{log}");
        let summary = std::fs::read_to_string(dir.join("summary.txt"))?;
        print!("{summary}");
    }
    let (code, word) = match (&report.diverged, report.all_pass()) {
        (Some((t, _)), _) => (2, format!("DIVERGED at t = {t}")),
        (None, true) => (0, "PASS".into()),
        (None, false) => (3, "FAIL".into()),
    };
    println!(
        "run {}: {word} ({} checks, outputs in {})",
        args.config.display(),
        report.verdicts.len(),
        dir.display()
    );
    Ok(code)
}

fn cmd_compare(args: &CommonRunArgs) -> Result<u8, Error> {
    let (cfg, _) = load_config(args)?;
    let outcome = runner::execute_compare(&cfg)?;
    let dir = runner::write_compare_outcome(&cfg, &outcome, args.out.as_deref())?;
    if args.verbose {
        let summary = std::fs::read_to_string(dir.join("compare_summary.txt"))?;
        print!("{summary}");
    }
    println!(
        "compare {}: {} (outputs in {})",
        args.config.display(),
        if outcome.all_pass() { "PASS" } else { "FAIL" },
        dir.display()
    );
    Ok(if outcome.all_pass() { 0 } else { 3 })
}

fn cmd_scaling(args: &CommonRunArgs) -> Result<u8, Error> {
    let (cfg, _) = load_config(args)?;
    let report = runner::execute_scaling(&cfg)?;
    let dir = runner::write_scaling_report(&cfg, &report, args.out.as_deref())?;
    if args.verbose {
        print!("{}", runner::scaling_csv(&report));
    }
    println!(
        "scaling {}: {} sweep points (outputs in {})",
        args.config.display(),
        report.rows.len(),
        dir.display()
    );
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Constants { n, p } => match runner::constants_table(*n, *p) {
            Ok(table) => {
                print!("{table}");
                Ok(0)
            }
            Err(e) => Err(e),
        },
        Command::Scaling(args) => cmd_scaling(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(classify(&e))
        }
    }
}
