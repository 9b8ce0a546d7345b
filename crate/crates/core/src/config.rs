//! Experiment configuration (TOML).

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::curriculum::CurriculumConfig;
use crate::env::{EnvConfig, Scheme};
use crate::error::{Error, Result};
use crate::reward::RewardConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Parent directory for timestamped run directories.
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("runs") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub assembly_id: String,
    pub root_seed: u64,
    pub episodes_per_scheme: usize,
    pub schemes: Vec<Scheme>,
    pub demo_count: usize,
    pub env: EnvConfig,
    pub reward: RewardConfig,
    pub curriculum: CurriculumConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            assembly_id: "00000".into(),
            root_seed: 0,
            episodes_per_scheme: 500,
            schemes: Scheme::ALL.to_vec(),
            demo_count: 50,
            env: EnvConfig::default(),
            reward: RewardConfig::default(),
            curriculum: CurriculumConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.reward.validate()?;
        self.curriculum.validate()?;
        if self.schemes.is_empty() {
            return Err(Error::InvalidConfig("schemes must not be empty".into()));
        }
        if self.episodes_per_scheme == 0 {
            return Err(Error::InvalidConfig("episodes_per_scheme must be at least 1".into()));
        }
        if self.demo_count == 0 {
            return Err(Error::InvalidConfig("demo_count must be at least 1".into()));
        }
        Ok(())
    }

    /// Parses and validates. Errors name the offending key path.
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::InvalidConfig(e.message().to_string()))?;
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::InvalidConfig(format!("{path}: {}", inner.message()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut cfg = ExperimentConfig {
            root_seed: 99,
            schemes: vec![Scheme::Dtw, Scheme::None],
            ..ExperimentConfig::default()
        };
        cfg.env.channel_depth = 0.025;
        cfg.reward.omega_i = 2.5;
        let text = cfg.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn partial_file_uses_defaults() {
        let cfg = ExperimentConfig::from_toml("root_seed = 3\n[reward]\nomega_i = 2.0\n").unwrap();
        assert_eq!(cfg.root_seed, 3);
        assert_eq!(cfg.reward.omega_i, 2.0);
        assert_eq!(cfg.env, EnvConfig::default());
    }

    #[test]
    fn unknown_key_names_path() {
        let err = ExperimentConfig::from_toml("[reward]\nomega_x = 1.0\n").unwrap_err();
        let Error::InvalidConfig(msg) = err else { panic!("{err:?}") };
        assert!(msg.starts_with("reward"), "{msg}");
        assert!(msg.contains("omega_x"), "{msg}");
    }

    #[test]
    fn bad_type_names_path() {
        let err = ExperimentConfig::from_toml("[env]\nmax_steps = \"many\"\n").unwrap_err();
        let Error::InvalidConfig(msg) = err else { panic!("{err:?}") };
        assert!(msg.contains("env.max_steps"), "{msg}");
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(ExperimentConfig::from_toml("schemes = []\n").is_err());
        assert!(ExperimentConfig::from_toml("[curriculum]\nnum_stages = 0\n").is_err());
    }
}
