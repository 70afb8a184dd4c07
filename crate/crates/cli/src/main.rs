use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use birthflow_cli::commands::{cmd_mean, cmd_pmf, cmd_simulate, cmd_table};
use birthflow_cli::config::{FileConfig, Format, Mode, PerturbTarget, RunConfig};
use birthflow_cli::validate::cmd_validate;
use birthflow_cli::{CliError, Report};
use clap::{Args, Parser, Subcommand};

/// Occupancy laws of a linear birth-death system and its mean-matched
/// M(t)/M/inf approximation.
#[derive(Debug, Parser)]
#[command(name = "birthflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Kolmogorov distance over the (b, t) grid.
    Table,
    /// Both pmfs at one (b, t) with the distance and verdict.
    Pmf,
    /// Mean occupancy and matched intensity over the t grid.
    Mean,
    /// Monte Carlo histograms of both systems at one (b, t).
    Simulate,
    /// Cross-check inversion, the ODE oracle, the exact law and simulation.
    Validate,
}

#[derive(Debug, Args)]
struct Opts {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    b: Option<f64>,
    #[arg(long, global = true)]
    t: Option<f64>,
    #[arg(long, global = true)]
    mu: Option<f64>,
    #[arg(long, global = true)]
    n0: Option<u32>,
    #[arg(long, global = true, value_delimiter = ',')]
    b_grid: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    t_grid: Option<Vec<f64>>,
    #[arg(long, global = true)]
    tail_tol: Option<f64>,
    #[arg(long, global = true)]
    reps: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Admissibility threshold on the distance [default: 0.03].
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Scale one characteristic function to exercise the validator.
    #[arg(long, global = true, value_enum, hide = true)]
    perturb: Option<PerturbTarget>,
}

fn build_config(mode: Mode, opts: Opts) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::defaults(mode);
    if let Some(path) = &opts.config {
        config.apply_file(&FileConfig::load(path)?);
    }
    let Opts {
        b,
        t,
        mu,
        n0,
        b_grid,
        t_grid,
        tail_tol,
        reps,
        seed,
        out,
        format,
        threshold,
        perturb,
        config: _,
    } = opts;
    fn set<T>(slot: &mut T, value: Option<T>) {
        if let Some(v) = value {
            *slot = v;
        }
    }
    set(&mut config.params.b, b);
    set(&mut config.t, t);
    set(&mut config.params.mu, mu);
    set(&mut config.params.n0, n0);
    set(&mut config.b_grid, b_grid);
    set(&mut config.t_grid, t_grid);
    set(&mut config.tail_tol, tail_tol);
    set(&mut config.sim.replications, reps);
    set(&mut config.sim.seed, seed);
    set(&mut config.format, format);
    set(&mut config.threshold, threshold);
    if out.is_some() {
        config.out = out;
    }
    config.perturb = perturb;
    Ok(config)
}

fn run(cli: Cli) -> Result<Report, CliError> {
    let mode = match cli.command {
        Command::Table => Mode::Table,
        Command::Pmf => Mode::Pmf,
        Command::Mean => Mode::Mean,
        Command::Simulate => Mode::Simulate,
        Command::Validate => Mode::Validate,
    };
    let config = build_config(mode, cli.opts)?;
    let report = match mode {
        Mode::Table => cmd_table(&config)?,
        Mode::Pmf => cmd_pmf(&config)?,
        Mode::Mean => cmd_mean(&config)?,
        Mode::Simulate => cmd_simulate(&config)?,
        Mode::Validate => cmd_validate(&config)?,
    };
    match &config.out {
        Some(path) => std::fs::write(path, &report.body)?,
        None => std::io::stdout().write_all(report.body.as_bytes())?,
    }
    Ok(report)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(report) => {
            for note in &report.notes {
                eprintln!("{note}");
            }
            if report.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
