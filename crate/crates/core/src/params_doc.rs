//! Self-describing parameter documents: named numeric lists plus the grid
//! and a hash of the training window.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDocument {
    pub model: String,
    pub periods_per_day: usize,
    pub series_start: NaiveDate,
    /// SHA-256 of the training values (little-endian `f64` bytes).
    pub training_hash: String,
    pub training_periods: usize,
    #[serde(default)]
    pub settings: BTreeMap<String, String>,
    pub values: BTreeMap<String, Vec<f64>>,
}

impl ParamDocument {
    pub fn to_text(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_text(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn list(&self, key: &str) -> Result<&[f64]> {
        self.values
            .get(key)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Config(format!("parameter document lacks `{key}`")))
    }

    pub fn scalar(&self, key: &str) -> Result<f64> {
        match self.list(key)? {
            [v] => Ok(*v),
            other => Err(Error::Config(format!("`{key}` should hold one value, found {}", other.len()))),
        }
    }

    pub fn setting(&self, key: &str) -> Result<&str> {
        self.settings
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Config(format!("parameter document lacks setting `{key}`")))
    }
}

/// Hex SHA-256 of a series window.
pub fn content_hash(values: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}
