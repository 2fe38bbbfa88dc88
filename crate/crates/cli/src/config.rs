//! Experiment configuration: one JSON document, parsed strictly.

use std::collections::BTreeMap;
use std::path::Path;

use clap::ValueEnum;
use rggclt_core::clt_bounds::{SigmaMode, MIN_MC_SAMPLES};
use rggclt_core::model::{DeltaRule, DimensionRule, IntensitySchedule, DEFAULT_REGIME_TOLERANCE};
use rggclt_core::moments::DEFAULT_QUADRATURE_TOL;
use rggclt_core::point_process::DEFAULT_MAX_EXPECTED;
use rggclt_core::{LogValue, ModelParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Simulate,
    Moments,
    Bounds,
    Gamma,
    Ladder,
    Regime,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Moments => "moments",
            Command::Bounds => "bounds",
            Command::Gamma => "gamma",
            Command::Ladder => "ladder",
            Command::Regime => "regime",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum IntensityMode {
    Explicit(f64),
    /// Natural log of λ, for intensities beyond `f64`.
    LogExplicit(f64),
    TargetU(DimensionRule),
    TargetV(DimensionRule),
}

impl IntensityMode {
    /// The schedule over `dims`. Explicit intensities are the same in every
    /// dimension.
    pub fn schedule(&self, dims: &[u32]) -> IntensitySchedule {
        let constant = |lambda: LogValue| {
            IntensitySchedule::Explicit(dims.iter().map(|&d| (d, lambda)).collect::<BTreeMap<_, _>>())
        };
        match self {
            IntensityMode::Explicit(l) => constant(LogValue::from_f64(*l)),
            IntensityMode::LogExplicit(ln) => constant(LogValue::from_ln(*ln)),
            IntensityMode::TargetU(rule) => IntensitySchedule::TargetU(*rule),
            IntensityMode::TargetV(rule) => IntensitySchedule::TargetV(*rule),
        }
    }
}

/// Output file names, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub records: String,
    pub summary: String,
    pub report: String,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            records: "records.jsonl".into(),
            summary: "summary.csv".into(),
            report: "report.json".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// If present, must agree with the command given on the command line.
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub dimension: Option<u32>,
    /// Dimensions for `regime`, strictly ascending.
    #[serde(default)]
    pub dimensions: Option<Vec<u32>>,
    pub delta: DeltaRule,
    pub intensity: IntensityMode,
    #[serde(default)]
    pub replications: Option<usize>,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_max_expected")]
    pub max_expected_points: f64,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default = "default_quadrature_tol")]
    pub quadrature_tol: f64,
    #[serde(default)]
    pub lambda_multipliers: Option<Vec<f64>>,
    #[serde(default = "default_regime_tolerance")]
    pub regime_tolerance: f64,
    #[serde(default)]
    pub sigma_mode: SigmaMode,
    /// Off by default so that record files are byte-reproducible.
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default)]
    pub outputs: Outputs,
}

fn default_max_expected() -> f64 {
    DEFAULT_MAX_EXPECTED
}

fn default_mc_samples() -> usize {
    100_000
}

fn default_quadrature_tol() -> f64 {
    DEFAULT_QUADRATURE_TOL
}

fn default_regime_tolerance() -> f64 {
    DEFAULT_REGIME_TOLERANCE
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks the fields `command` needs and all ranges.
    pub fn validate(&self, command: Command) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if let Some(c) = self.command {
            if c != command {
                return bad(format!("config is for `{}` but `{}` was requested", c.name(), command.name()));
            }
        }
        if !(self.max_expected_points > 0.0 && self.max_expected_points.is_finite()) {
            return bad("max_expected_points must be positive and finite".into());
        }
        if !(self.quadrature_tol > 0.0 && self.quadrature_tol < 1.0) {
            return bad("quadrature_tol must lie in (0, 1)".into());
        }
        if self.mc_samples < MIN_MC_SAMPLES {
            return bad(format!("mc_samples must be at least {MIN_MC_SAMPLES}"));
        }
        if !(self.regime_tolerance > 0.0 && self.regime_tolerance.is_finite()) {
            return bad("regime_tolerance must be positive".into());
        }
        match &self.intensity {
            IntensityMode::Explicit(l) if !(*l > 0.0 && l.is_finite()) => {
                return bad("explicit intensity must be positive and finite".into());
            }
            IntensityMode::LogExplicit(ln) if !ln.is_finite() => {
                return bad("log_explicit intensity must be finite".into());
            }
            _ => {}
        }
        for (name, path) in [
            ("records", &self.outputs.records),
            ("summary", &self.outputs.summary),
            ("report", &self.outputs.report),
        ] {
            if path.is_empty() {
                return bad(format!("outputs.{name} must not be empty"));
            }
        }

        if command == Command::Regime {
            match &self.dimensions {
                Some(d) if d.len() >= 4 => {}
                _ => return bad("regime needs `dimensions` with at least 4 entries".into()),
            }
        } else {
            match self.dimension {
                Some(d) if d >= 1 => {}
                Some(_) => return bad("dimension must be at least 1".into()),
                None => return bad(format!("`{}` needs `dimension`", command.name())),
            }
        }
        match command {
            Command::Simulate => self.require_replications(1)?,
            Command::Ladder => {
                self.require_replications(2)?;
                match &self.lambda_multipliers {
                    Some(m) if !m.is_empty() => {}
                    _ => return bad("ladder needs a non-empty `lambda_multipliers`".into()),
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn require_replications(&self, min: usize) -> Result<(), CliError> {
        match self.replications {
            Some(n) if n >= min => Ok(()),
            Some(_) => Err(CliError::Config(format!("replications must be at least {min}"))),
            None => Err(CliError::Config("`replications` is required".into())),
        }
    }

    /// Model parameters for the single-dimension commands.
    pub fn params(&self) -> Result<ModelParams, CliError> {
        let d = self
            .dimension
            .ok_or_else(|| CliError::Config("`dimension` is required".into()))?;
        Ok(self.delta.params(d, &self.intensity.schedule(&[d]))?)
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}
