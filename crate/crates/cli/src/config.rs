//! Run configurations. Every run writes its fully resolved config next to
//! its outputs; feeding that file back via `--config` reproduces the run
//! byte for byte.

use crate::{CliError, CliResult};
use lassoboot::{
    PivotConvention, Scheme, SimulationScenario, SolverOptions, WeightDistribution,
};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::str::FromStr;

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
}

fn default_grid_size() -> usize {
    50
}

fn default_grid_ratio() -> f64 {
    1e-3
}

fn default_folds() -> usize {
    lassoboot::DEFAULT_CV_FOLDS
}

fn default_level() -> f64 {
    0.9
}

fn default_b() -> usize {
    1000
}

fn default_threshold_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub input: PathBuf,
    /// Penalty; absent means cross-validated.
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_grid_size")]
    pub grid_size: usize,
    #[serde(default = "default_grid_ratio")]
    pub grid_ratio: f64,
    #[serde(default)]
    pub solver: SolverOptions,
}

impl FitConfig {
    pub fn resolve(
        config: Option<&Path>,
        input: Option<PathBuf>,
        lambda: Option<f64>,
        seed: Option<u64>,
    ) -> CliResult<Self> {
        // flag-only invocations need a synthetic base, which requires input
        let mut cfg: FitConfig = match config {
            Some(p) => read_json(p)?,
            None => FitConfig {
                input: input
                    .clone()
                    .ok_or_else(|| CliError::usage("--input (or --config) is required"))?,
                lambda: None,
                seed: 0,
                folds: default_folds(),
                grid_size: default_grid_size(),
                grid_ratio: default_grid_ratio(),
                solver: SolverOptions::default(),
            },
        };
        if let Some(i) = input {
            cfg.input = i;
        }
        if let Some(l) = lambda {
            cfg.lambda = Some(l);
        }
        if let Some(s) = seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapConfig {
    pub input: PathBuf,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default = "default_b")]
    pub b: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_threshold_scale")]
    pub threshold_scale: f64,
    #[serde(default)]
    pub weights: WeightDistribution,
    #[serde(default)]
    pub pivot: PivotConvention,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_grid_size")]
    pub grid_size: usize,
    #[serde(default = "default_grid_ratio")]
    pub grid_ratio: f64,
    #[serde(default)]
    pub solver: SolverOptions,
}

fn default_scheme() -> Scheme {
    Scheme::Perturbation
}

impl BootstrapConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn resolve(
        config: Option<&Path>,
        input: Option<PathBuf>,
        scheme: Option<String>,
        b: Option<usize>,
        level: Option<f64>,
        lambda: Option<f64>,
        seed: Option<u64>,
    ) -> CliResult<Self> {
        let mut cfg: BootstrapConfig = match config {
            Some(p) => read_json(p)?,
            None => BootstrapConfig {
                input: input
                    .clone()
                    .ok_or_else(|| CliError::usage("--input (or --config) is required"))?,
                scheme: default_scheme(),
                b: default_b(),
                level: default_level(),
                lambda: None,
                seed: 0,
                threshold_scale: default_threshold_scale(),
                weights: WeightDistribution::default(),
                pivot: PivotConvention::default(),
                folds: default_folds(),
                grid_size: default_grid_size(),
                grid_ratio: default_grid_ratio(),
                solver: SolverOptions::default(),
            },
        };
        if let Some(i) = input {
            cfg.input = i;
        }
        if let Some(s) = scheme {
            cfg.scheme = Scheme::from_str(&s).map_err(|e| CliError::usage(e.to_string()))?;
        }
        if let Some(v) = b {
            cfg.b = v;
        }
        if let Some(v) = level {
            cfg.level = v;
        }
        if let Some(v) = lambda {
            cfg.lambda = Some(v);
        }
        if let Some(v) = seed {
            cfg.seed = v;
        }
        if cfg.b == 0 {
            return Err(CliError::usage("b must be at least 1"));
        }
        if !(cfg.level > 0.0 && cfg.level < 1.0) {
            return Err(CliError::usage("level must lie in (0, 1)"));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub scenario: SimulationScenario,
    /// Schemes to compare.
    pub methods: Vec<Scheme>,
}

impl SimulateConfig {
    pub fn resolve(
        config: Option<&Path>,
        seed: Option<u64>,
        level: Option<f64>,
    ) -> CliResult<Self> {
        let mut cfg: SimulateConfig = match config {
            Some(p) => read_json(p)?,
            None => return Err(CliError::usage("simulate requires --config")),
        };
        if let Some(s) = seed {
            cfg.scenario.seed = s;
        }
        if let Some(l) = level {
            cfg.scenario.level = l;
        }
        if cfg.methods.is_empty() {
            return Err(CliError::usage("config must list at least one method"));
        }
        cfg.scenario
            .validate()
            .map_err(|e| CliError::usage(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    /// Coverage CSV written by `simulate` for the perturbation bootstrap.
    pub pb: PathBuf,
    /// Coverage CSV of the competing method.
    pub other: PathBuf,
}

impl ReportConfig {
    pub fn resolve(
        config: Option<&Path>,
        pb: Option<PathBuf>,
        other: Option<PathBuf>,
    ) -> CliResult<Self> {
        let mut cfg: ReportConfig = match config {
            Some(p) => read_json(p)?,
            None => ReportConfig {
                pb: pb
                    .clone()
                    .ok_or_else(|| CliError::usage("--pb (or --config) is required"))?,
                other: other
                    .clone()
                    .ok_or_else(|| CliError::usage("--other (or --config) is required"))?,
            },
        };
        if let Some(p) = pb {
            cfg.pb = p;
        }
        if let Some(o) = other {
            cfg.other = o;
        }
        Ok(cfg)
    }
}
