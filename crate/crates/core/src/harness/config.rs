//! JSON experiment configuration.
//!
//! Every key is optional; unknown keys are rejected. Example:
//!
//! ```json
//! {
//!   "seed": 7,
//!   "placements": 20,
//!   "sweep": { "variable": "r", "values": [1, 2, 3] },
//!   "schemes": ["proposed-eb-cooperation", "independent-eb"],
//!   "strategies": ["closest-to-center"],
//!   "phy": { "antennas": 5 }
//! }
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::SchemeId;
use crate::error::{Error, Result};
use crate::network::{ChStrategy, PhyParams};
use crate::solver::SolverSettings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    /// Cluster radius in meters.
    #[serde(rename = "r")]
    Radius,
    /// Distance from the HAP to the cluster center in meters.
    #[serde(rename = "d")]
    Distance,
    /// Number of devices.
    #[serde(rename = "N", alias = "n")]
    Devices,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Radius => "r",
            SweepVariable::Distance => "d",
            SweepVariable::Devices => "N",
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

impl Default for Sweep {
    fn default() -> Self {
        Sweep {
            variable: SweepVariable::Radius,
            values: vec![1.0, 2.0, 3.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub phy: PhyParams,
    pub solver: SolverSettings,
    pub sweep: Sweep,
    /// Co-parameters held fixed while the sweep variable changes.
    pub devices: usize,
    pub distance_m: f64,
    pub radius_m: f64,
    pub schemes: Vec<SchemeId>,
    pub strategies: Vec<ChStrategy>,
    pub placements: usize,
    /// CH draws per placement for the random strategy.
    pub random_ch_repeats: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            phy: PhyParams::default(),
            solver: SolverSettings::default(),
            sweep: Sweep::default(),
            devices: 15,
            distance_m: 6.0,
            radius_m: 3.0,
            schemes: SchemeId::ALL.to_vec(),
            strategies: vec![ChStrategy::ClosestToCenter],
            placements: 20,
            random_ch_repeats: 5,
            seed: 1,
            output: None,
        }
    }
}

/// Geometry of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub devices: usize,
    pub distance_m: f64,
    pub radius_m: f64,
}

fn config_error(field: &str, msg: impl fmt::Display) -> Error {
    Error::Config(format!("{field}: {msg}"))
}

impl ExperimentConfig {
    /// Parses and validates a JSON document. Errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." || path == "?" {
                "config".to_string()
            } else {
                path
            };
            config_error(&field, e.into_inner())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.phy.validate().map_err(|e| config_error("phy", e))?;
        self.solver.validate().map_err(|e| config_error("solver", e))?;
        if self.sweep.values.is_empty() {
            return Err(config_error("sweep.values", "must not be empty"));
        }
        for (i, &v) in self.sweep.values.iter().enumerate() {
            let field = format!("sweep.values[{i}]");
            match self.sweep.variable {
                SweepVariable::Radius if !(v >= 0.0 && v.is_finite()) => {
                    return Err(config_error(&field, format!("radius must be nonnegative, got {v}")));
                }
                SweepVariable::Distance if !(v > 0.0 && v.is_finite()) => {
                    return Err(config_error(&field, format!("distance must be positive, got {v}")));
                }
                SweepVariable::Devices if !(v >= 2.0 && v.fract() == 0.0 && v <= 1e4) => {
                    return Err(config_error(
                        &field,
                        format!("device count must be an integer >= 2, got {v}"),
                    ));
                }
                _ => {}
            }
        }
        if self.devices < 2 {
            return Err(config_error("devices", "must be at least 2"));
        }
        if !(self.distance_m > 0.0 && self.distance_m.is_finite()) {
            return Err(config_error("distance_m", "must be positive"));
        }
        if !(self.radius_m >= 0.0 && self.radius_m.is_finite()) {
            return Err(config_error("radius_m", "must be nonnegative"));
        }
        if self.schemes.is_empty() {
            return Err(config_error("schemes", "must not be empty"));
        }
        if self.strategies.is_empty() {
            return Err(config_error("strategies", "must not be empty"));
        }
        if self.placements == 0 {
            return Err(config_error("placements", "must be at least 1"));
        }
        if self.random_ch_repeats == 0 {
            return Err(config_error("random_ch_repeats", "must be at least 1"));
        }
        Ok(())
    }

    /// Geometry with the sweep variable set to `value`.
    pub fn point(&self, value: f64) -> SweepPoint {
        let mut p = SweepPoint {
            devices: self.devices,
            distance_m: self.distance_m,
            radius_m: self.radius_m,
        };
        match self.sweep.variable {
            SweepVariable::Radius => p.radius_m = value,
            SweepVariable::Distance => p.distance_m = value,
            SweepVariable::Devices => p.devices = value as usize,
        }
        p
    }

    /// CH selections per placement under `strategy`.
    pub fn repeats(&self, strategy: ChStrategy) -> usize {
        match strategy {
            ChStrategy::Random => self.random_ch_repeats,
            _ => 1,
        }
    }
}
