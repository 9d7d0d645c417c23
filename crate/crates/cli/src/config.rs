//! Versioned TOML project file.

use std::fs;
use std::path::{Path, PathBuf};

use kresling_airship::energy::PowerModel;
use kresling_airship::mass::DesignInputs;
use kresling_airship::sim::{PlantParams, Scenario, SimConfig};
use kresling_airship::sweep::SweepGrid;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpeedRange {
    pub start_m_s: f64,
    pub stop_m_s: f64,
    pub step_m_s: f64,
}

impl Default for SpeedRange {
    fn default() -> Self {
        Self {
            start_m_s: 0.01,
            stop_m_s: 2.0,
            step_m_s: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectConfig {
    pub version: u32,
    pub output_dir: PathBuf,
    pub design: DesignInputs,
    pub sweep: SweepGrid,
    pub power: PowerModel,
    pub energy_grid: SpeedRange,
    pub plant: PlantParams,
    pub controller: SimConfig,
    pub scenario: Scenario,
}

impl Default for ProjectConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            output_dir: PathBuf::from("out"),
            design: DesignInputs::default(),
            sweep: SweepGrid::default(),
            power: PowerModel::default(),
            energy_grid: SpeedRange::default(),
            plant: PlantParams::default(),
            controller: SimConfig::default(),
            scenario: Scenario::cave_test(),
        }
    }
}

impl ProjectConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.version != CONFIG_VERSION {
            return Err(CliError::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string_pretty(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// sha256 of the canonical re-serialization, so formatting and
    /// comments in the source file do not change it. `output_dir` is left
    /// out: it does not affect any result.
    pub fn hash(&self) -> Result<String, CliError> {
        let content = Self {
            output_dir: PathBuf::new(),
            ..self.clone()
        };
        let canonical = toml::to_string(&content).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(format!("{:x}", Sha256::digest(canonical.as_bytes())))
    }
}

/// Tool version and config hash stamped on every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_sha256: String,
}

impl Provenance {
    pub fn new(command: &str, config: &ProjectConfig) -> Result<Self, CliError> {
        Ok(Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_owned(),
            config_sha256: config.hash()?,
        })
    }

    pub fn lines(&self) -> Vec<String> {
        vec![
            format!("{} {}", self.tool, self.version),
            format!("command: {}", self.command),
            format!("config sha256: {}", self.config_sha256),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = ProjectConfig::default();
        let text = cfg.to_toml().unwrap();
        assert_eq!(ProjectConfig::parse(&text).unwrap(), cfg);
    }

    #[test]
    fn empty_file_is_default() {
        assert_eq!(ProjectConfig::parse("").unwrap(), ProjectConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = ProjectConfig::parse("[design]\nsidez = 7\n").unwrap_err();
        assert!(err.to_string().contains("sidez"), "{err}");
    }

    #[test]
    fn wrong_version_rejected() {
        assert!(ProjectConfig::parse("version = 2\n").is_err());
    }

    #[test]
    fn hash_ignores_formatting() {
        let a = ProjectConfig::parse("version = 1\n[design]\nsides = 7\n").unwrap();
        let b = ProjectConfig::parse("# comment\n\n[design]\nsides    = 7\n").unwrap();
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        let c = ProjectConfig::parse("[design]\nsides = 8\n").unwrap();
        assert_ne!(a.hash().unwrap(), c.hash().unwrap());
        let d = ProjectConfig {
            output_dir: "elsewhere".into(),
            ..a.clone()
        };
        assert_eq!(a.hash().unwrap(), d.hash().unwrap());
    }
}
