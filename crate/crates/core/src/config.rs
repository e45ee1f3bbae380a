//! Experiment configuration, loadable from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{self, ScalarField};
use crate::protocol::Protocol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldName {
    Bumps,
    Piecewise,
}

impl std::str::FromStr for FieldName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "bumps" | "gaussian-bumps" => Ok(FieldName::Bumps),
            "piecewise" => Ok(FieldName::Piecewise),
            other => Err(format!("unknown field kind `{other}`")),
        }
    }
}

impl FieldName {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldName::Bumps => "bumps",
            FieldName::Piecewise => "piecewise",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldConfig {
    pub kind: FieldName,
    pub bump_count: usize,
    pub bump_height: f64,
    pub bump_decay: f64,
    /// Constant level the bumps sit on.
    pub bump_base: f64,
    pub low: f64,
    pub high: f64,
    pub noise_variance: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            kind: FieldName::Piecewise,
            bump_count: field::DEFAULT_BUMP_COUNT,
            bump_height: field::DEFAULT_BUMP_HEIGHT,
            bump_decay: field::DEFAULT_BUMP_DECAY,
            bump_base: field::DEFAULT_BUMP_BASE,
            low: field::DEFAULT_PIECEWISE_LOW,
            high: field::DEFAULT_PIECEWISE_HIGH,
            noise_variance: field::DEFAULT_NOISE_VARIANCE,
        }
    }
}

impl FieldConfig {
    pub fn of_kind(kind: FieldName) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn build(&self, extent: f64, seed: u64) -> Result<ScalarField> {
        match self.kind {
            FieldName::Bumps => field::gen_gaussian_bumps_with_base(
                extent,
                self.bump_count,
                self.bump_height,
                self.bump_decay,
                self.bump_base,
                seed,
            ),
            FieldName::Piecewise => {
                field::gen_piecewise(extent, self.low, self.high, self.noise_variance, seed)
            }
        }
    }
}

pub const DEFAULT_SWEEP_FRACTIONS: [f64; 5] = [0.005, 0.01, 0.0225, 0.03, 0.05];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub field: FieldConfig,
    pub nodes: Vec<usize>,
    pub extent: f64,
    pub branching: usize,
    pub levels: usize,
    pub fractions: Vec<f64>,
    pub protocols: Vec<Protocol>,
    pub seed: u64,
    pub reps: usize,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            field: FieldConfig::default(),
            nodes: vec![300, 400, 500, 600, 700, 800],
            extent: field::DEFAULT_EXTENT,
            branching: 4,
            levels: 4,
            fractions: vec![crate::transform::DEFAULT_TRUNCATION],
            protocols: vec![Protocol::Ahdacs, Protocol::Hdacs],
            seed: 1,
            reps: 1,
            out: PathBuf::from("results"),
        }
    }
}

fn bad(field: &str, why: impl std::fmt::Display) -> Error {
    Error::Config(format!("`{field}`: {why}"))
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Rejects the first invalid field, naming it in the message.
    pub fn validate(&self) -> Result<()> {
        if !(self.extent.is_finite() && self.extent > 0.0) {
            return Err(bad("extent", "must be positive"));
        }
        if self.nodes.is_empty() {
            return Err(bad("nodes", "at least one network size required"));
        }
        if let Some(&n) = self.nodes.iter().find(|&&n| n < self.branching.max(1)) {
            return Err(bad("nodes", format!("size {n} smaller than branching factor")));
        }
        if self.branching < 2 {
            return Err(bad("branching", "must be >= 2"));
        }
        if self.levels < 2 {
            return Err(bad("levels", "must be >= 2"));
        }
        if self.fractions.is_empty() {
            return Err(bad("fraction", "at least one truncation fraction required"));
        }
        if let Some(f) = self.fractions.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
            return Err(bad("fraction", format!("{f} not in (0, 1)")));
        }
        if self.protocols.is_empty() {
            return Err(bad("protocol", "at least one protocol required"));
        }
        if self.reps < 1 {
            return Err(bad("reps", "must be >= 1"));
        }
        let f = &self.field;
        match f.kind {
            FieldName::Bumps => {
                if f.bump_count < 1 {
                    return Err(bad("field.bump_count", "must be >= 1"));
                }
                if !(f.bump_height > 0.0) {
                    return Err(bad("field.bump_height", "must be positive"));
                }
                if !(f.bump_decay > 0.0) {
                    return Err(bad("field.bump_decay", "must be positive"));
                }
                if !f.bump_base.is_finite() {
                    return Err(bad("field.bump_base", "must be finite"));
                }
            }
            FieldName::Piecewise => {
                if !(f.noise_variance >= 0.0) {
                    return Err(bad("field.noise_variance", "must be >= 0"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn toml_overrides_defaults() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
            nodes = [400]
            protocols = ["ahdacs"]
            reps = 3
            [field]
            kind = "bumps"
            bump_count = 12
            "#,
        )
        .unwrap();
        assert_eq!(cfg.nodes, vec![400]);
        assert_eq!(cfg.protocols, vec![Protocol::Ahdacs]);
        assert_eq!(cfg.field.kind, FieldName::Bumps);
        assert_eq!(cfg.field.bump_count, 12);
        assert_eq!(cfg.levels, 4);
    }

    #[test]
    fn invalid_fields_are_named() {
        let mut cfg = ExperimentConfig::default();
        cfg.fractions = vec![1.5];
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("fraction"), "{msg}");

        let mut cfg = ExperimentConfig::default();
        cfg.reps = 0;
        assert!(cfg.validate().unwrap_err().to_string().contains("reps"));

        assert!(ExperimentConfig::from_toml_str("bogus = 1").is_err());
    }
}
