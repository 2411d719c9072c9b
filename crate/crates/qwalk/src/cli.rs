//! Argument parsing for the `qwalk` binary.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_angle, parse_config, Engine, Experiment, ExperimentConfig};
use crate::error::{ConfigError, Result};
use crate::run::{run_experiment, RunOutput};

/// Output directory when neither `--out`, the config, nor `QWALK_OUT` set one.
pub const DEFAULT_OUT: &str = "qwalk-out";

#[derive(Debug, Parser)]
#[command(name = "qwalk", version, about = "Quantum walker coupled to on-site spins")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sector-ensemble walk: distributions, variance series, IPR scans.
    Walk(Common),
    /// Matrix-product-state evolution of walker and spins.
    Mps(Common),
    /// Brute-force state-vector evolution (small lattices).
    Exact(Common),
    /// Quasi-energy spectrum of the sector step operators on a ring.
    Spectrum(Common),
    /// Symmetry-breaking field runs (MPS unless the config selects exact).
    Field(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML experiment file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Experiment to run (overrides the subcommand default).
    #[arg(long, value_parser = parse_experiment)]
    pub experiment: Option<Experiment>,
    /// Interaction angles, e.g. `--phi 3pi/8 --phi 0.2`.
    #[arg(long, value_parser = parse_angle, num_args = 1..)]
    pub phi: Vec<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = "QWALK_OUT")]
    pub out: Option<PathBuf>,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    pub workers: Option<usize>,
}

fn parse_experiment(s: &str) -> std::result::Result<Experiment, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown experiment `{s}`"))
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Self::Walk(c) | Self::Mps(c) | Self::Exact(c) | Self::Spectrum(c) | Self::Field(c) => c,
        }
    }
}

/// Reads the config (if any), applies the subcommand and flag overrides, and
/// validates the result. Flags win over the file.
pub fn resolve(command: &Command) -> std::result::Result<(ExperimentConfig, Option<PathBuf>), ConfigError> {
    let common = command.common();
    let (mut cfg, from_file) = match &common.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.clone(), source })?;
            (raw_config(&text)?, true)
        }
        None => (ExperimentConfig::default(), false),
    };
    let default_experiment = match command {
        Command::Walk(_) => {
            cfg.engine = Engine::Sector;
            Experiment::Distribution
        }
        Command::Mps(_) => {
            cfg.engine = Engine::Mps;
            Experiment::EntropySeries
        }
        Command::Exact(_) => {
            cfg.engine = Engine::Exact;
            Experiment::EntropySeries
        }
        Command::Spectrum(_) => {
            cfg.engine = Engine::Sector;
            Experiment::Spectrum
        }
        Command::Field(_) => {
            if cfg.engine == Engine::Sector {
                cfg.engine = Engine::Mps;
            }
            Experiment::FieldPerturbation
        }
    };
    if let Some(e) = common.experiment {
        cfg.experiment = e;
    } else if !from_file || !cfg.experiment.engines().contains(&cfg.engine) {
        cfg.experiment = default_experiment;
    }
    if matches!(command, Command::Spectrum(_)) {
        cfg.experiment = Experiment::Spectrum;
    }
    if matches!(command, Command::Field(_)) {
        cfg.experiment = Experiment::FieldPerturbation;
    }
    if !common.phi.is_empty() {
        cfg.phi = common.phi.clone();
    }
    if let Some(s) = common.steps {
        cfg.steps = s;
        if cfg.boundary == crate::config::BoundaryKind::Open {
            cfg.n_sites = None;
        }
    }
    if let Some(s) = common.samples {
        cfg.samples = s;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    cfg.resolve();
    cfg.validate()?;
    let out = common.out.clone().or_else(|| cfg.output_dir.clone());
    Ok((cfg, out))
}

/// Parses without validating, so overrides can still repair the document.
fn raw_config(text: &str) -> std::result::Result<ExperimentConfig, ConfigError> {
    match parse_config(text) {
        Ok(c) => Ok(c),
        Err(ConfigError::Validation(_)) => toml::from_str(text).map_err(|e| ConfigError::Validation(e.to_string())),
        Err(e) => Err(e),
    }
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli) -> Result<RunOutput> {
    let (cfg, out) = resolve(&cli.command)?;
    let out = out.unwrap_or_else(|| Path::new(DEFAULT_OUT).to_path_buf());
    let workers =
        cli.command.common().workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    run_experiment(&cfg, &out, workers)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("qwalk").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn subcommand_sets_engine_and_default_experiment() {
        let (c, _) = resolve(&parse(&["mps", "--steps", "10"]).command).unwrap();
        assert_eq!(c.engine, Engine::Mps);
        assert_eq!(c.experiment, Experiment::EntropySeries);
        assert_eq!(c.n_sites, Some(21));
    }

    #[test]
    fn flags_override_angles() {
        let (c, _) =
            resolve(&parse(&["walk", "--phi", "3pi/8", "pi/8", "--samples", "7", "--seed", "9"]).command).unwrap();
        assert_eq!(c.phi.len(), 2);
        assert!((c.phi[0] - 3.0 * std::f64::consts::PI / 8.0).abs() < 1e-15);
        assert_eq!((c.samples, c.seed), (7, 9));
    }

    #[test]
    fn incompatible_override_is_rejected() {
        let e = resolve(&parse(&["walk", "--experiment", "entropy_series"]).command).unwrap_err();
        assert!(matches!(e, ConfigError::Validation(_)));
    }
}
