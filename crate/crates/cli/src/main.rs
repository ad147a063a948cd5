//! `antsel` — run antenna-selection sweep scenarios from JSON configs,
//! export synthetic channels, and inspect channel files.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error,
//! 3 channel-file format error, 4 numeric/singularity error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use antsel_core::channel::{ctf1, power_spread_db};
use antsel_core::error::Error;
use antsel_core::experiment::{csv, run_scenario, ScenarioConfig, SweepResult};

#[derive(Parser)]
#[command(name = "antsel", version, about = "Downlink transmit-antenna selection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep scenario and write its CSV artifacts.
    Run {
        /// JSON scenario config.
        #[arg(long)]
        config: PathBuf,
        /// Directory receiving `<name>_sweep.csv` and `<name>_trace.csv`.
        #[arg(long)]
        out_dir: PathBuf,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Cap the worker-thread count (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Generate the config's channel and save it as a channel file.
    GenChannel {
        /// JSON scenario config with a generative channel source.
        #[arg(long)]
        config: PathBuf,
        /// Output path for the binary channel file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the dimensions and power spread of a channel file.
    Inspect {
        /// Binary channel file to examine.
        #[arg(long)]
        channel: PathBuf,
    },
}

/// Map every library error to the documented process exit code.
fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::Io { .. } => 1,
        Error::Config { .. }
        | Error::Precondition(_)
        | Error::Dimension(_)
        | Error::ExhaustiveGuard { .. } => 2,
        Error::Format { .. } => 3,
        Error::Singular { .. } | Error::Numeric(_) | Error::Domain(_) | Error::Degenerate(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(exit_code_for(&error))
        }
    }
}

fn dispatch(command: Command) -> Result<(), Error> {
    match command {
        Command::Run {
            config,
            out_dir,
            seed,
            threads,
        } => run(&config, &out_dir, seed, threads),
        Command::GenChannel { config, out } => gen_channel(&config, &out),
        Command::Inspect { channel } => inspect(&channel),
    }
}

fn run(
    config_path: &Path,
    out_dir: &Path,
    seed: Option<u64>,
    threads: Option<usize>,
) -> Result<(), Error> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::config("--threads", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::config("--threads", e.to_string()))?;
    }
    let mut config = ScenarioConfig::load(config_path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }

    let started = Instant::now();
    let result = run_scenario(&config)?;
    let elapsed = started.elapsed().as_secs_f64();

    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let sweep_path = out_dir.join(format!("{}_sweep.csv", config.name));
    let trace_path = out_dir.join(format!("{}_trace.csv", config.name));
    csv::write_sweep_csv(&result, &sweep_path)?;
    csv::write_trace_csv(&result.rows, &trace_path)?;

    print_run_summary(&config, &result, elapsed);
    println!("wrote {}", sweep_path.display());
    println!("wrote {}", trace_path.display());
    Ok(())
}

/// Human-readable recap: rates land in the CSV; measured times belong
/// here (and only here, so the CSV stays byte-reproducible).
fn print_run_summary(config: &ScenarioConfig, result: &SweepResult, elapsed: f64) {
    println!(
        "scenario {}: {} rows ({} strategies x {} selection sizes) in {:.2} s",
        result.scenario,
        result.rows.len(),
        result.summaries.len(),
        config.effective_n_grid().len(),
        elapsed,
    );
    for summary in &result.summaries {
        let fmt = |n: Option<usize>| n.map_or("-".to_string(), |v| v.to_string());
        let solver_ms: f64 = result
            .rows
            .iter()
            .filter(|r| r.strategy == summary.strategy)
            .map(|r| r.solver_wall_ms)
            .sum();
        println!(
            "  {:<10} n90_dpc={:<4} n90_zf={:<4} solver {:.1} ms",
            summary.strategy.name(),
            fmt(summary.n90_dpc),
            fmt(summary.n90_zf),
            solver_ms,
        );
    }
}

fn gen_channel(config_path: &Path, out: &Path) -> Result<(), Error> {
    let config = ScenarioConfig::load(config_path)?;
    config.validate()?;
    let tensor = config.generate_channel()?;
    ctf1::save(&tensor, out)?;
    println!(
        "wrote {} (K={}, M={}, L={})",
        out.display(),
        tensor.users(),
        tensor.antennas(),
        tensor.subcarriers(),
    );
    Ok(())
}

fn inspect(channel: &Path) -> Result<(), Error> {
    let tensor = ctf1::load(channel)?;
    let spread = power_spread_db(&tensor.per_antenna_avg_power());
    println!(
        "{}: K={} users, M={} antennas, L={} subcarriers",
        channel.display(),
        tensor.users(),
        tensor.antennas(),
        tensor.subcarriers(),
    );
    println!("per-antenna power spread: {spread:.2} dB");
    Ok(())
}
