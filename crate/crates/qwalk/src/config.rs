//! Experiment configuration: a flat TOML document plus command-line overrides.

use std::f64::consts::PI;
use std::path::PathBuf;

use qwalk_core::ensemble::{EnsembleConfig, FitWindow};
use qwalk_core::mps::{CapMode, MpsConfig, TruncRule};
use qwalk_core::{Boundary, WalkParams, C64};
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Sector,
    Mps,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Distribution,
    VarianceSeries,
    IprScan,
    Spectrum,
    EntropySeries,
    SpinTextures,
    FieldPerturbation,
    EntropyProfile,
    VolumeLaw,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::Distribution => "distribution",
            Self::VarianceSeries => "variance_series",
            Self::IprScan => "ipr_scan",
            Self::Spectrum => "spectrum",
            Self::EntropySeries => "entropy_series",
            Self::SpinTextures => "spin_textures",
            Self::FieldPerturbation => "field_perturbation",
            Self::EntropyProfile => "entropy_profile",
            Self::VolumeLaw => "volume_law",
        }
    }

    /// Engines able to produce this experiment.
    pub fn engines(self) -> &'static [Engine] {
        use Engine::*;
        match self {
            Self::Distribution | Self::VarianceSeries => &[Sector, Mps, Exact],
            Self::IprScan | Self::Spectrum => &[Sector],
            Self::EntropySeries | Self::SpinTextures | Self::EntropyProfile => &[Mps, Exact],
            Self::FieldPerturbation => &[Mps, Exact],
            Self::VolumeLaw => &[Exact],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    Open,
    Periodic,
}

impl From<BoundaryKind> for Boundary {
    fn from(b: BoundaryKind) -> Self {
        match b {
            BoundaryKind::Open => Boundary::Open,
            BoundaryKind::Periodic => Boundary::Periodic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncRuleKind {
    Weight,
    SingularValue,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapModeKind {
    Hard,
    Soft,
}

/// Localization-fit window on `|n|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitWindowConfig {
    pub min_abs: u64,
    pub max_abs: u64,
}

/// Everything that determines the numbers a run produces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub engine: Engine,
    pub experiment: Experiment,
    #[serde(with = "angle")]
    pub theta: f64,
    /// Interaction angles; one output column (or block) per entry.
    #[serde(with = "angle_list")]
    pub phi: Vec<f64>,
    /// Field angles for `field_perturbation`; `0` is always added as the
    /// reference curve.
    #[serde(with = "angle_list")]
    pub phi_prime: Vec<f64>,
    pub steps: usize,
    /// Lattice size; open lattices default to `2·steps + 1`.
    pub n_sites: Option<usize>,
    pub boundary: BoundaryKind,
    /// Initial coin `[Re a0, Im a0, Re a1, Im a1]`.
    pub coin: [f64; 4],
    pub samples: usize,
    pub seed: u64,
    /// Enumerate all `2^N` sectors instead of sampling.
    pub exhaustive: bool,
    /// Extra times at which `P_n` (or spin textures) are written.
    pub snapshot_times: Vec<usize>,
    pub fit_window: FitWindowConfig,
    pub ipr_norm: usize,
    pub trunc_tol: f64,
    pub trunc_rule: TruncRuleKind,
    pub max_bond: Option<usize>,
    pub cap_mode: CapModeKind,
    pub degeneracy_tol: f64,
    pub gap_threshold: f64,
    /// Ring sizes for `volume_law`.
    pub sizes: Vec<usize>,
    /// Log-grid density (points per decade) for long series.
    pub points_per_decade: usize,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            engine: Engine::Sector,
            experiment: Experiment::Distribution,
            theta: PI / 4.0,
            phi: vec![0.0, PI / 8.0, PI / 4.0, 3.0 * PI / 8.0],
            phi_prime: vec![PI / 100.0, 2.0 * PI / 100.0],
            steps: 100,
            n_sites: None,
            boundary: BoundaryKind::Open,
            coin: [std::f64::consts::FRAC_1_SQRT_2, 0.0, std::f64::consts::FRAC_1_SQRT_2, 0.0],
            samples: 4000,
            seed: 0,
            exhaustive: false,
            snapshot_times: Vec::new(),
            fit_window: FitWindowConfig { min_abs: 2, max_abs: 20 },
            ipr_norm: qwalk_core::ensemble::DEFAULT_IPR_NORM,
            trunc_tol: 1e-8,
            trunc_rule: TruncRuleKind::Weight,
            max_bond: Some(1024),
            cap_mode: CapModeKind::Hard,
            degeneracy_tol: 1e-8,
            gap_threshold: qwalk_core::spectrum::GAP_CLOSED_THRESHOLD,
            sizes: vec![6, 8, 10, 12],
            points_per_decade: 20,
            output_dir: None,
        }
    }
}

/// Parses a TOML document and validates it.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| parse_error(text, &e))?;
    cfg.resolve();
    cfg.validate()?;
    Ok(cfg)
}

fn parse_error(text: &str, e: &toml::de::Error) -> ConfigError {
    let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
    let message = e.message().to_string();
    let key = e
        .span()
        .and_then(|s| text.get(s.clone()))
        .map(|k| k.split('=').next().unwrap_or(k).trim().to_string())
        .filter(|k| !k.is_empty() && !k.contains('\n'));
    ConfigError::Parse { line, key, message }
}

impl ExperimentConfig {
    /// Fills size defaults that depend on other fields. Called after every
    /// override.
    pub fn resolve(&mut self) {
        if self.boundary == BoundaryKind::Open {
            let needed = 2 * self.steps + 1;
            if self.n_sites.map_or(true, |n| n < needed) {
                self.n_sites = Some(needed);
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Validation(m));
        if !self.experiment.engines().contains(&self.engine) {
            return bad(format!(
                "experiment `{}` cannot run on engine `{:?}` (allowed: {:?})",
                self.experiment.name(),
                self.engine,
                self.experiment.engines()
            ));
        }
        if self.phi.is_empty() {
            return bad("phi list is empty".into());
        }
        if matches!(self.experiment, Experiment::Spectrum | Experiment::VolumeLaw)
            && self.boundary != BoundaryKind::Periodic
        {
            return bad(format!("`{}` needs boundary = \"periodic\"", self.experiment.name()));
        }
        if self.experiment == Experiment::VolumeLaw {
            if self.sizes.is_empty() {
                return bad("volume_law needs at least one ring size".into());
            }
            if let Some(&n) = self.sizes.iter().find(|&&n| !(2..=qwalk_core::exact::MAX_SITES).contains(&n)) {
                return bad(format!("ring size {n} outside 2..={}", qwalk_core::exact::MAX_SITES));
            }
        } else if self.n_sites.is_none() {
            return bad("periodic lattices need an explicit n_sites".into());
        }
        if self.engine == Engine::Exact && self.experiment != Experiment::VolumeLaw {
            let n = self.n_sites.unwrap_or(0);
            if n > qwalk_core::exact::MAX_SITES {
                return bad(format!("exact engine supports at most {} sites, got {n}", qwalk_core::exact::MAX_SITES));
            }
        }
        if self.experiment == Experiment::FieldPerturbation && self.phi_prime.is_empty() {
            return bad("field_perturbation needs at least one phi_prime".into());
        }
        if self.trunc_tol.is_nan() || self.trunc_tol < 0.0 {
            return bad("trunc_tol must be non-negative".into());
        }
        if self.max_bond == Some(0) {
            return bad("max_bond must be positive".into());
        }
        if self.engine == Engine::Sector && !self.exhaustive && self.samples == 0 {
            return bad("samples must be positive".into());
        }
        if self.fit_window.min_abs > self.fit_window.max_abs {
            return bad("fit_window.min_abs exceeds fit_window.max_abs".into());
        }
        if self.ipr_norm == 0 || self.points_per_decade == 0 {
            return bad("ipr_norm and points_per_decade must be positive".into());
        }
        if let Some(&t) = self.snapshot_times.iter().find(|&&t| t > self.steps) {
            return bad(format!("snapshot time {t} is after the final step {}", self.steps));
        }
        let norm: f64 = self.coin.iter().map(|x| x * x).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return bad("coin amplitudes are not normalized".into());
        }
        for p in self.walk_params_all() {
            p.validate().map_err(|e| ConfigError::Validation(e.to_string()))?;
        }
        Ok(())
    }

    /// Walk parameters for the `k`-th entry of the `phi` list.
    pub fn walk_params(&self, phi: f64) -> WalkParams {
        let n = self.n_sites.unwrap_or(2 * self.steps + 1);
        WalkParams::new(phi, self.steps)
            .with_sites(n)
            .with_boundary(self.boundary.into())
            .with_theta(self.theta)
            .with_coin([C64::new(self.coin[0], self.coin[1]), C64::new(self.coin[2], self.coin[3])])
    }

    fn walk_params_all(&self) -> Vec<WalkParams> {
        if self.experiment == Experiment::VolumeLaw {
            self.phi
                .iter()
                .flat_map(|&phi| self.sizes.iter().map(move |&n| (phi, n)))
                .map(|(phi, n)| self.walk_params(phi).with_sites(n))
                .collect()
        } else {
            self.phi.iter().map(|&phi| self.walk_params(phi)).collect()
        }
    }

    pub fn ensemble(&self) -> EnsembleConfig {
        EnsembleConfig { n_samples: self.samples, seed: self.seed, exhaustive: self.exhaustive }
    }

    pub fn mps(&self) -> MpsConfig {
        MpsConfig {
            trunc_tol: self.trunc_tol,
            trunc_rule: match self.trunc_rule {
                TruncRuleKind::Weight => TruncRule::Weight,
                TruncRuleKind::SingularValue => TruncRule::SingularValue,
            },
            max_bond: self.max_bond,
            cap_mode: match self.cap_mode {
                CapModeKind::Hard => CapMode::Hard,
                CapModeKind::Soft => CapMode::Soft,
            },
        }
    }

    pub fn fit_window(&self) -> FitWindow {
        FitWindow { min_abs: self.fit_window.min_abs, max_abs: self.fit_window.max_abs }
    }
}

/// Parses an angle written as a number or as a multiple of `pi`, e.g.
/// `"3pi/8"`, `"pi/100"`, `"0.3pi"`, `"1.2"`.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    let err = || format!("cannot read `{text}` as an angle");
    let s = s.replace('π', "pi");
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.to_string(), b.parse::<f64>().map_err(|_| err())?),
        None => (s.clone(), 1.0),
    };
    let value = if let Some(coef) = num.strip_suffix("pi") {
        let coef = coef.trim_end_matches('*');
        let c = match coef {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| err())?,
        };
        c * PI
    } else {
        num.parse::<f64>().map_err(|_| err())?
    };
    let v = value / den;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(err())
    }
}

/// Accepts either a float or an angle string.
#[derive(Deserialize)]
#[serde(untagged)]
enum AngleRepr {
    Num(f64),
    Int(i64),
    Text(String),
}

impl AngleRepr {
    fn value<E: serde::de::Error>(self) -> Result<f64, E> {
        match self {
            Self::Num(x) => Ok(x),
            Self::Int(x) => Ok(x as f64),
            Self::Text(s) => parse_angle(&s).map_err(E::custom),
        }
    }
}

mod angle {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(*v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        super::AngleRepr::deserialize(d)?.value()
    }
}

mod angle_list {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.serialize(s)
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        Many(Vec<super::AngleRepr>),
        One(super::AngleRepr),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        match OneOrMany::deserialize(d)? {
            OneOrMany::Many(v) => v.into_iter().map(|a| a.value()).collect(),
            OneOrMany::One(a) => Ok(vec![a.value()?]),
        }
    }
}
