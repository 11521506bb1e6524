//! Experiment driver for the drone-interference library: reads a TOML
//! config, runs the named experiment, and writes CSV tables with JSON
//! metadata sidecars. Identical config bytes and seed reproduce identical
//! output bytes regardless of thread count.

mod config;
mod error;
mod experiments;
mod output;

use clap::{Args, Parser, Subcommand};
use config::{FileConfig, KindTag};
use error::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_CODES: &str = "Exit codes:\n  \
    0  success\n  \
    1  invalid config, bad usage, or failed validation checks\n  \
    2  numerical failure (non-convergent quadrature, non-finite result)";

#[derive(Parser)]
#[command(
    name = "dronecell",
    version = env!("DRONECELL_GIT_DESCRIBE"),
    about = "Interferer geometry and rate experiments for a drone cellular network",
    after_help = format!("Environment:\n  DRONECELL_THREADS  \
        cap the compute thread pool (default: all cores; results do not depend on it)\n\n{EXIT_CODES}"),
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Net-displacement distributions against sampled trajectories.
    ///
    /// Writes displacement_dist_<model>_t<t>.csv per model and time with
    /// columns: distance_m (bin center, m), analytic_pdf_per_m (model law;
    /// point masses are spread over their bin, 1/m), empirical_pdf_per_m
    /// (histogram of sampled trajectory endpoints, 1/m).
    #[command(name = "displacement-dist")]
    DisplacementDist(RunArgs),

    /// Interferer density profiles against displaced-field realizations.
    ///
    /// Writes density_profile_<model>_t<t>.csv per model and time with
    /// columns: radius_m (bin center, m), analytic_rel (annulus-averaged
    /// intensity over the ambient density), empirical_rel (Monte Carlo
    /// annulus estimate over the ambient density). Radii cover
    /// [0, initial_distance + speed*t], capped at 2 km.
    #[command(name = "density-profile")]
    DensityProfile(RunArgs),

    /// Exclusion-ordering table: straight-line motion dominates.
    ///
    /// Writes theorem1_check.csv with columns: initial_distance_m (m),
    /// time_s (s), measure_<model> (expected interferer count within the
    /// reachable disc of radius initial_distance + speed*t, drones), and
    /// min_margin_rel (smallest relative margin of the straight-line
    /// measure over every other model; negative would break the ordering).
    #[command(name = "theorem1-check")]
    OrderingCheck(RunArgs),

    /// Ergodic rate over elapsed flight time.
    ///
    /// Writes average_rate.csv with columns: time_s (s) and
    /// rate_<model>_nats (ergodic downlink rate per configured model, nats
    /// per channel use).
    #[command(name = "average-rate")]
    AverageRate(RunArgs),

    /// Session-averaged rate over total session length.
    ///
    /// Writes session_rate.csv with columns: session_s (s) and
    /// rate_<model>_nats (time-average of the ergodic rate over the
    /// session, nats per channel use).
    #[command(name = "session-rate")]
    SessionRate(RunArgs),

    /// Every built-in consistency check against its pinned tolerance.
    ///
    /// Writes validate_all.csv with columns: check, measured, tolerance,
    /// passed, detail, and prints one PASS/FAIL line per check. Exits 1 if
    /// any check fails.
    #[command(name = "validate-all")]
    ValidateAll(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML); its `kind` must match this subcommand.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,

    /// Stream seed. Runs with equal seed and config bytes write identical
    /// tables, byte for byte.
    #[arg(long, value_name = "U64")]
    seed: u64,

    /// Directory for the CSV tables and their JSON sidecars.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests land on stdout and succeed; real
            // argument errors report as usage failures, never as 2.
            let code = u8::from(err.use_stderr());
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(failed) => {
            eprintln!("{failed} validation check(s) failed");
            ExitCode::from(1)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<usize, CliError> {
    init_threads()?;
    let (kind, args) = match &cli.command {
        Command::DisplacementDist(a) => (KindTag::DisplacementDist, a),
        Command::DensityProfile(a) => (KindTag::DensityProfile, a),
        Command::OrderingCheck(a) => (KindTag::OrderingCheck, a),
        Command::AverageRate(a) => (KindTag::AverageRate, a),
        Command::SessionRate(a) => (KindTag::SessionRate, a),
        Command::ValidateAll(a) => (KindTag::ValidateAll, a),
    };
    let raw = std::fs::read(&args.config).map_err(|e| {
        CliError::Usage(format!("cannot read config {}: {e}", args.config.display()))
    })?;
    let text = std::str::from_utf8(&raw).map_err(|_| {
        CliError::Usage(format!("config {} is not valid UTF-8", args.config.display()))
    })?;
    let cfg = FileConfig::parse(text)?;
    if cfg.kind() != kind {
        return Err(CliError::Usage(format!(
            "config declares kind \"{}\" but the \"{}\" command was invoked",
            cfg.kind().token(),
            kind.token()
        )));
    }
    cfg.validate()?;
    // The sidecars hash the raw config bytes; the resolved echo makes every
    // defaulted parameter visible next to the tables it produced.
    std::fs::create_dir_all(&args.out).map_err(|e| {
        CliError::Usage(format!("cannot create output directory {}: {e}", args.out.display()))
    })?;
    let echo = args.out.join("config_resolved.toml");
    std::fs::write(&echo, cfg.emit()?)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", echo.display())))?;
    let outcome = experiments::run_experiment(&cfg, args.seed, &args.out, &raw)?;
    println!("{} table(s) in {}", outcome.tables.len(), args.out.display());
    Ok(outcome.failed_checks)
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("DRONECELL_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::Usage(format!("DRONECELL_THREADS: expected a positive integer, got {raw:?}"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("DRONECELL_THREADS: {e}")))
}
