//! Experiment configuration: a single TOML document with sections
//! mirroring the pipeline stages. Unknown keys are hard errors — a typo
//! in an exponent name must never silently change the regime.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::EvolutionConfig;
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Groundstate,
    Classify,
    Evolve,
    Sweep,
    Verify,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Groundstate => "groundstate",
            Command::Classify => "classify",
            Command::Evolve => "evolve",
            Command::Sweep => "sweep",
            Command::Verify => "verify",
        }
    }
}

fn default_r_max() -> f64 {
    30.0
}
fn default_n() -> usize {
    3000
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    #[serde(default = "default_n")]
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            r_max: default_r_max(),
            n: default_n(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    Gaussian,
    ExplicitQ,
    ScaledQ,
    File,
}

fn default_amplitude() -> f64 {
    1.0
}
fn default_width() -> f64 {
    1.0
}
fn default_lambda() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub kind: InitialKind,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Json]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            formats: default_formats(),
        }
    }
}

/// Lattice of `scaled_q` initial data for the dichotomy sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub amplitudes: Vec<f64>,
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    pub params: Params,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub evolution: Option<EvolutionConfig>,
    #[serde(default)]
    pub initial: Option<InitialConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.params
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if !(self.grid.r_max > 0.0) || self.grid.n < 3 {
            return Err(Error::Config(format!(
                "grid r_max = {}, n = {}",
                self.grid.r_max, self.grid.n
            )));
        }
        if let Some(ev) = &self.evolution {
            ev.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        if let Some(init) = &self.initial {
            if init.kind == InitialKind::File {
                match &init.path {
                    None => {
                        return Err(Error::Config(
                            "initial.kind = \"file\" requires initial.path".into(),
                        ))
                    }
                    Some(p) if !p.exists() => {
                        return Err(Error::Config(format!(
                            "initial.path {} does not exist",
                            p.display()
                        )))
                    }
                    _ => {}
                }
            }
            if !(init.amplitude.is_finite() && init.width > 0.0 && init.lambda > 0.0) {
                return Err(Error::Config(format!(
                    "initial amplitude/width/lambda = {}/{}/{}",
                    init.amplitude, init.width, init.lambda
                )));
            }
        }
        match self.command {
            Command::Evolve | Command::Classify => {
                if self.initial.is_none() {
                    return Err(Error::Config(format!(
                        "command \"{}\" requires an [initial] section",
                        self.command.as_str()
                    )));
                }
                if self.command == Command::Evolve && self.evolution.is_none() {
                    return Err(Error::Config(
                        "command \"evolve\" requires an [evolution] section".into(),
                    ));
                }
            }
            Command::Sweep => {
                if self.sweep.is_none() {
                    return Err(Error::Config(
                        "command \"sweep\" requires a [sweep] section".into(),
                    ));
                }
                if self.evolution.is_none() {
                    return Err(Error::Config(
                        "command \"sweep\" requires an [evolution] section".into(),
                    ));
                }
            }
            Command::Groundstate | Command::Verify => {}
        }
        Ok(())
    }
}
