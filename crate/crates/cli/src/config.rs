//! Experiment configuration: TOML file merged with command-line flags
//! (flags win), validated, and echoed verbatim into the output header.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use icl_lab::scenarios::{self, Scenario};

/// Experiment kinds; each produces one plot-ready CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[clap(rename_all = "kebab-case")]
pub enum Command {
    PosteriorTrace,
    RiskCurve,
    EarlyAscent,
    BoundedEfficacy,
    ZeroShot,
    RidgeCompare,
    DiscreteAscent,
    EnvelopeCheck,
    OracleCheck,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::PosteriorTrace => "posterior-trace",
            Command::RiskCurve => "risk-curve",
            Command::EarlyAscent => "early-ascent",
            Command::BoundedEfficacy => "bounded-efficacy",
            Command::ZeroShot => "zero-shot",
            Command::RidgeCompare => "ridge-compare",
            Command::DiscreteAscent => "discrete-ascent",
            Command::EnvelopeCheck => "envelope-check",
            Command::OracleCheck => "oracle-check",
        }
    }
}

impl FromStr for Command {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        use Command::*;
        Ok(match s {
            "posterior-trace" => PosteriorTrace,
            "risk-curve" => RiskCurve,
            "early-ascent" => EarlyAscent,
            "bounded-efficacy" => BoundedEfficacy,
            "zero-shot" => ZeroShot,
            "ridge-compare" => RidgeCompare,
            "discrete-ascent" => DiscreteAscent,
            "envelope-check" => EnvelopeCheck,
            "oracle-check" => OracleCheck,
            other => bail!(
                "unknown command '{other}'; valid commands: posterior-trace, risk-curve, \
                 early-ascent, bounded-efficacy, zero-shot, ridge-compare, discrete-ascent, \
                 envelope-check, oracle-check"
            ),
        })
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// On-disk configuration; every key is optional so flags can fill the rest.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub scenario: Option<String>,
    pub k_grid: Option<Vec<usize>>,
    pub n_trials: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub sigma_mu: Option<f64>,
    pub sigma_w: Option<f64>,
    pub tau_y: Option<f64>,
    pub strict: Option<bool>,
    pub alpha: Option<usize>,
    pub lambda: Option<f64>,
    pub t_param: Option<f64>,
    pub n_particles: Option<u64>,
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: Command,
    pub scenario_name: String,
    pub k_grid: Vec<usize>,
    pub n_trials: u64,
    pub seed: u64,
    pub out: PathBuf,
    pub sigma_mu: Option<f64>,
    pub sigma_w: Option<f64>,
    pub tau_y: Option<f64>,
    pub strict: bool,
    /// Retrieval target, 1-based as printed in outputs.
    pub alpha: Option<usize>,
    pub lambda: f64,
    pub t_param: Option<f64>,
    pub n_particles: u64,
}

pub const DEFAULT_K_GRID: [usize; 11] = [0, 1, 2, 4, 8, 16, 32, 64, 128, 256, 512];

const SCENARIO_NAMES: &str = "tetrahedron, tetrahedron-biased, tetrahedron-plain, octahedron, \
     hexahedron, icosahedron, dodecahedron, basis-<d>, early-ascent-<d>, zero-shot-<d>";

impl ExperimentConfig {
    /// Merges an optional config file with flag values (flags win) and
    /// validates the result.
    pub fn resolve(file: ConfigFile, flags: ConfigFile, default_out: &Path) -> Result<Self> {
        let command_str = flags
            .command
            .or(file.command)
            .context("missing required key 'command' (file or --command)")?;
        let command: Command = command_str.parse()?;
        let scenario_name = flags
            .scenario
            .or(file.scenario)
            .unwrap_or_else(|| default_scenario(command).to_string());
        let k_grid = flags.k_grid.or(file.k_grid).unwrap_or_else(|| DEFAULT_K_GRID.to_vec());
        if k_grid.is_empty() {
            bail!("k_grid must not be empty");
        }
        if !k_grid.windows(2).all(|w| w[0] < w[1]) {
            bail!("k_grid must be strictly increasing, got {k_grid:?}");
        }
        let n_trials = flags.n_trials.or(file.n_trials).unwrap_or(2000);
        if n_trials == 0 {
            bail!("n_trials must be at least 1");
        }
        let config = Self {
            command,
            scenario_name,
            k_grid,
            n_trials,
            seed: flags.seed.or(file.seed).unwrap_or(0),
            out: flags.out.or(file.out).unwrap_or_else(|| default_out.to_path_buf()),
            sigma_mu: flags.sigma_mu.or(file.sigma_mu),
            sigma_w: flags.sigma_w.or(file.sigma_w),
            tau_y: flags.tau_y.or(file.tau_y),
            strict: flags.strict.or(file.strict).unwrap_or(false),
            alpha: flags.alpha.or(file.alpha),
            lambda: flags.lambda.or(file.lambda).unwrap_or(1e-6),
            t_param: flags.t_param.or(file.t_param),
            n_particles: flags.n_particles.or(file.n_particles).unwrap_or(1_000_000),
        };
        // Fail early on unknown scenario names (discrete-ascent brings its
        // own token model and ignores the scenario); strictness is checked
        // when the scenario is actually built.
        if config.command != Command::DiscreteAscent {
            build_scenario(&config.scenario_name)?;
        }
        Ok(config)
    }

    /// Builds the scenario with noise/label overrides applied, validated at
    /// the configured strictness.
    pub fn scenario(&self) -> Result<Scenario> {
        let mut scenario = build_scenario(&self.scenario_name)?;
        if let Some(sigma_mu) = self.sigma_mu {
            scenario.prior.sigma_mu = sigma_mu;
        }
        if let Some(sigma_w) = self.sigma_w {
            scenario.prior.sigma_w = sigma_w;
        }
        if let Some(tau_y) = self.tau_y {
            scenario.source.tau_y = tau_y;
        }
        let report = scenario.prior.validate(self.strict);
        if !report.is_valid() {
            bail!(
                "scenario '{}' fails {} validation: {}",
                self.scenario_name,
                if self.strict { "strict" } else { "relaxed" },
                report.errors.join("; ")
            );
        }
        Ok(scenario)
    }

    /// Retrieval target as a 0-based index.
    pub fn alpha_index(&self, scenario: &Scenario) -> Result<usize> {
        if let Some(alpha) = self.alpha {
            if alpha == 0 || alpha > scenario.prior.n_components() {
                bail!(
                    "--alpha {} out of range 1..={}",
                    alpha,
                    scenario.prior.n_components()
                );
            }
            return Ok(alpha - 1);
        }
        Ok(scenario.retrieval_alpha.unwrap_or(0))
    }

    /// Header lines echoing the resolved configuration.
    pub fn echo(&self) -> Vec<String> {
        let mut lines = vec![
            format!("# command = {}", self.command),
            format!("# scenario = {}", self.scenario_name),
            format!(
                "# k_grid = [{}]",
                self.k_grid.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(", ")
            ),
            format!("# n_trials = {}", self.n_trials),
            format!("# seed = {}", self.seed),
            format!("# strict = {}", self.strict),
            format!("# lambda = {}", self.lambda),
            format!("# n_particles = {}", self.n_particles),
        ];
        for (key, value) in [
            ("sigma_mu", self.sigma_mu),
            ("sigma_w", self.sigma_w),
            ("tau_y", self.tau_y),
            ("t_param", self.t_param),
        ] {
            match value {
                Some(v) => lines.push(format!("# {key} = {v}")),
                None => lines.push(format!("# {key} = default")),
            }
        }
        match self.alpha {
            Some(a) => lines.push(format!("# alpha = {a}")),
            None => lines.push("# alpha = default".to_string()),
        }
        lines
    }
}

fn default_scenario(command: Command) -> &'static str {
    match command {
        Command::EarlyAscent => "early-ascent-1",
        Command::BoundedEfficacy => "tetrahedron-biased",
        Command::ZeroShot => "zero-shot-2",
        Command::RidgeCompare => "basis-6",
        Command::OracleCheck => "early-ascent-1",
        Command::DiscreteAscent => "discrete-token",
        _ => "tetrahedron",
    }
}

/// Scenario vocabulary: fixed names plus `basis-<d>`, `early-ascent-<d>`,
/// `zero-shot-<d>` families.
pub fn build_scenario(name: &str) -> Result<Scenario> {
    let scenario = match name {
        "tetrahedron" => scenarios::tetrahedron(0.25, 0.25),
        "tetrahedron-biased" => scenarios::tetrahedron_biased(0.05, 0.05),
        "tetrahedron-plain" => scenarios::regular_polyhedron(4, 0.25, 0.25)?,
        "octahedron" => scenarios::regular_polyhedron(6, 0.25, 0.25)?,
        "hexahedron" => scenarios::regular_polyhedron(8, 0.25, 0.25)?,
        "icosahedron" => scenarios::regular_polyhedron(12, 0.25, 0.25)?,
        "dodecahedron" => scenarios::regular_polyhedron(20, 0.25, 0.25)?,
        other => {
            if let Some(d) = other.strip_prefix("basis-") {
                let d: usize = d.parse().context("basis-<d> needs an integer dimension")?;
                if d < 2 {
                    bail!("basis-<d> needs d >= 2");
                }
                scenarios::basis_setting(d)
            } else if let Some(d) = other.strip_prefix("early-ascent-") {
                let d: usize = d.parse().context("early-ascent-<d> needs an integer dimension")?;
                if d == 0 {
                    bail!("early-ascent-<d> needs d >= 1");
                }
                scenarios::early_ascent(d)
            } else if let Some(d) = other.strip_prefix("zero-shot-") {
                let d: usize = d.parse().context("zero-shot-<d> needs an integer dimension")?;
                if d == 0 {
                    bail!("zero-shot-<d> needs d >= 1");
                }
                scenarios::zero_shot_setting(d)
            } else {
                bail!("unknown scenario '{other}'; valid scenarios: {SCENARIO_NAMES}");
            }
        }
    };
    Ok(scenario)
}

/// Loads and parses the TOML config file; unknown keys are rejected with the
/// full list of valid keys in the serde error.
pub fn load_config_file(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("cannot parse config file {}", path.display()))
}
