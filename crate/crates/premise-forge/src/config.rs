//! Simple key=value configuration, loaded from the path in
//! `PREMISE_FORGE_CONFIG` and overridden by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{ForgeError, Result};

pub const CONFIG_ENV: &str = "PREMISE_FORGE_CONFIG";

/// Keys that name files and are checked for existence on validation.
const PATH_KEYS: &[&str] = &[
    "lexicon", "stoplist", "objects", "attributes", "exclusions", "aliases", "features",
    "embeddings", "captions", "animate",
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    /// Loads the file named by `PREMISE_FORGE_CONFIG`, or an empty config
    /// when the variable is unset.
    pub fn from_env() -> Result<Config> {
        match std::env::var(CONFIG_ENV) {
            Ok(path) if !path.trim().is_empty() => Config::load(path),
            _ => Ok(Config::default()),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Config> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ForgeError::io(path, e))?;
        let mut config = Config::default();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ForgeError::parse(path, idx + 1, "expected key=value")
            })?;
            config
                .values
                .insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(config)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get_path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(PathBuf::from)
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|e| ForgeError::Invalid(format!("config {}: {}", key, e)))
            })
            .transpose()
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        self.get(key)
            .map(|v| {
                v.parse::<u64>()
                    .map_err(|e| ForgeError::Invalid(format!("config {}: {}", key, e)))
            })
            .transpose()
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.values.insert(key.into(), value.into());
    }

    /// Checks that every configured path key points at an existing file.
    pub fn validate(&self) -> Result<()> {
        for key in PATH_KEYS {
            if let Some(path) = self.get_path(key) {
                if !path.exists() {
                    return Err(ForgeError::Invalid(format!(
                        "config {} points at missing file {}",
                        key,
                        path.display()
                    )));
                }
            }
        }
        Ok(())
    }
}
