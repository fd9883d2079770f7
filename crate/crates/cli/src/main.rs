//! `cavex`: run cavity-filtered excitation simulations from TOML configs.
//!
//! Exit status is 0 on success, 2 for invalid input and 1 for numerical or
//! I/O failures.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cavex_core::config::{OutputFormat, RunConfig};
use cavex_core::experiment::{bloch_scan, simulate, Mechanism};
use cavex_core::sweep::{fock_convergence, run_sweep, SweepSpec};

#[derive(Parser)]
#[command(name = "cavex", version, about = "Cavity-filtered pulse excitation of a quantum-dot emitter")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run config (TOML). Defaults apply to every missing key.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Output format, overriding `output.formats`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Print the internal SI parameters to stderr before running.
    #[arg(long, global = true)]
    seed_check: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one pulse and write the trajectory and figures of merit.
    Simulate,
    /// Drive an ideal emitter and record Bloch vectors against pulse area.
    Bloch {
        #[arg(long, default_value = "cavity-filtered")]
        mechanism: Mechanism,
        /// Comma-separated pulse areas in units of pi.
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
        areas: Vec<f64>,
    },
    /// Run a sweep recipe. `--config` replaces the recipe's base config.
    Sweep { spec: PathBuf },
    /// Compare pi_e at n_max and n_max + 2.
    Convergence,
}

struct Failure {
    validation: bool,
    message: String,
}

impl From<cavex_core::error::Error> for Failure {
    fn from(e: cavex_core::error::Error) -> Self {
        Self {
            validation: e.is_validation(),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self {
            validation: false,
            message: e.to_string(),
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, Failure> {
    let config = match path {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    config.validate()?;
    Ok(config)
}

fn formats(common: &Common, config: &RunConfig) -> Vec<OutputFormat> {
    match common.format {
        Some(Format::Csv) => vec![OutputFormat::Csv],
        Some(Format::Json) => vec![OutputFormat::Json],
        None => config.output.formats.clone(),
    }
}

fn out_dir(common: &Common, config: &RunConfig) -> Result<PathBuf, Failure> {
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from(&config.output.directory));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn seed_check(common: &Common, config: &RunConfig) -> Result<(), Failure> {
    if common.seed_check {
        eprint!("{}", config.unit_dump()?);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let common = &cli.common;
    match cli.command {
        Command::Simulate => {
            let config = load_config(common.config.as_deref())?;
            seed_check(common, &config)?;
            let sim = simulate(&config)?;
            let dir = out_dir(common, &config)?;
            output::write_simulation(&dir, &formats(common, &config), &config, &sim)?;
            let m = sim.outcome.merit;
            println!(
                "pi_e = {:.6}  beta_c = {:.6}  eta_c = {:.6}  pulse_area = {:.4} pi",
                m.pi_e, m.beta_c, m.eta_c, sim.outcome.pulse_area_pi
            );
        }
        Command::Bloch { mechanism, areas } => {
            let config = load_config(common.config.as_deref())?;
            seed_check(common, &config)?;
            let points = bloch_scan(&config, mechanism, &areas)?;
            let dir = out_dir(common, &config)?;
            output::write_bloch(&dir, &formats(common, &config), &points)?;
            for p in &points {
                println!("area = {:.4} pi  rho_ee = {:.6}", p.area_pi, p.rho_ee);
            }
        }
        Command::Sweep { spec } => {
            let mut spec = SweepSpec::from_file(&spec)?;
            if let Some(p) = &common.config {
                spec.base = RunConfig::from_file(p)?;
            }
            spec.validate()?;
            seed_check(common, &spec.base)?;
            let result = run_sweep(&spec, common.workers)?;
            let dir = out_dir(common, &spec.base)?;
            output::write_sweep(&dir, &formats(common, &spec.base), &spec, &result)?;
            println!(
                "{} cells, max = {:.6}, {:.1} s",
                result.cells.len(),
                result.max_value(),
                result.metadata.wall_time_s
            );
        }
        Command::Convergence => {
            let config = load_config(common.config.as_deref())?;
            seed_check(common, &config)?;
            let report = fock_convergence(&config)?;
            let dir = out_dir(common, &config)?;
            output::write_json(&dir.join("convergence.json"), &report)?;
            println!(
                "n_max = {}: pi_e = {:.9}, n_max + 2: {:.9}, |delta| = {:.3e}",
                report.n_max, report.pi_e, report.pi_e_refined, report.delta
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(if f.validation { 2 } else { 1 })
        }
    }
}
