//! `icl-lab`: runs named in-context-learning experiments and writes
//! plot-ready CSV curves.
//!
//! ```text
//! icl-lab --command risk-curve --scenario tetrahedron --seed 7 --out curve.csv
//! icl-lab --config experiment.toml --n-trials 4000
//! ```
//!
//! Flags override config-file values; the fully resolved configuration is
//! echoed as `#` comment lines at the top of the output CSV, so every file
//! documents how to reproduce itself. Identical (config, seed) pairs produce
//! byte-identical output.

mod commands;
mod config;
mod emit;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;

use config::{load_config_file, Command, ConfigFile, ExperimentConfig};

#[derive(Debug, Parser)]
#[command(name = "icl-lab", version, about = "In-context learning risk laboratory")]
struct Args {
    /// TOML config file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Experiment to run.
    #[arg(long, value_enum)]
    command: Option<Command>,

    /// Scenario name (e.g. tetrahedron, tetrahedron-biased, octahedron,
    /// basis-6, early-ascent-2, zero-shot-2).
    #[arg(long)]
    scenario: Option<String>,

    /// Comma-separated prompt lengths, strictly increasing (e.g. 0,1,2,4,8).
    #[arg(long, value_delimiter = ',')]
    k_grid: Option<Vec<usize>>,

    /// Monte-Carlo trials per k.
    #[arg(long)]
    n_trials: Option<u64>,

    /// Master seed; every trial derives its own stream from it.
    #[arg(long)]
    seed: Option<u64>,

    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override the prior task noise sigma_mu.
    #[arg(long)]
    sigma_mu: Option<f64>,

    /// Override the prior task noise sigma_w.
    #[arg(long)]
    sigma_w: Option<f64>,

    /// In-context label noise scale (default 0: exact labels).
    #[arg(long)]
    tau_y: Option<f64>,

    /// Enforce unit-norm centers (strict validation).
    #[arg(long)]
    strict: bool,

    /// Retrieval target component, 1-based.
    #[arg(long)]
    alpha: Option<usize>,

    /// Ridge regularization parameter.
    #[arg(long)]
    lambda: Option<f64>,

    /// Envelope deviation parameter t (default k^(-1/4)).
    #[arg(long)]
    t_param: Option<f64>,

    /// Particles for the importance-sampling oracle.
    #[arg(long)]
    n_particles: Option<u64>,
}

impl Args {
    fn into_parts(self) -> (Option<PathBuf>, ConfigFile) {
        let flags = ConfigFile {
            command: self.command.map(|c| c.as_str().to_string()),
            scenario: self.scenario,
            k_grid: self.k_grid,
            n_trials: self.n_trials,
            seed: self.seed,
            out: self.out,
            sigma_mu: self.sigma_mu,
            sigma_w: self.sigma_w,
            tau_y: self.tau_y,
            strict: if self.strict { Some(true) } else { None },
            alpha: self.alpha,
            lambda: self.lambda,
            t_param: self.t_param,
            n_particles: self.n_particles,
        };
        (self.config, flags)
    }
}

fn run() -> Result<i32> {
    let (config_path, flags) = Args::parse().into_parts();
    let file = match &config_path {
        Some(path) => load_config_file(path)?,
        None => ConfigFile::default(),
    };
    let default_out = PathBuf::from(format!(
        "{}.csv",
        flags.command.as_deref().or(file.command.as_deref()).unwrap_or("output")
    ));
    let config = ExperimentConfig::resolve(file, flags, &default_out)?;
    let output = commands::run(&config)?;
    emit::write_csv(&config.out, &config.echo(), &output.rows)?;
    for line in &output.summary {
        println!("{line}");
    }
    println!("wrote {} rows to {}", output.rows.len(), config.out.display());
    Ok(output.exit_code)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
