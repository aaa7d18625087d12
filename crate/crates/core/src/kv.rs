//! Flat `key=value` text blocks used for parameter, attack and experiment
//! configuration files.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KvError {
    #[error("line {line}: expected key=value, got {text:?}")]
    Malformed { line: usize, text: String },
    #[error("line {line}: duplicate key {key:?}")]
    Duplicate { line: usize, key: String },
    #[error("missing required key {0:?}")]
    Missing(String),
    #[error("invalid value {value:?} for key {key:?}: {reason}")]
    Invalid { key: String, value: String, reason: String },
    #[error("unknown key {0:?}")]
    Unknown(String),
}

/// Parsed block. Keys are unique; blank lines and `#` comments are skipped.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KvBlock {
    entries: BTreeMap<String, String>,
}

impl KvBlock {
    pub fn parse(text: &str) -> Result<Self, KvError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| KvError::Malformed { line: idx + 1, text: line.to_string() })?;
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(KvError::Malformed { line: idx + 1, text: line.to_string() });
            }
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(KvError::Duplicate { line: idx + 1, key });
            }
        }
        Ok(KvBlock { entries })
    }

    pub fn insert(&mut self, key: &str, value: impl Display) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, KvError>
    where
        T::Err: Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|e| KvError::Invalid {
                key: key.to_string(),
                value: v.to_string(),
                reason: e.to_string(),
            }),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, KvError>
    where
        T::Err: Display,
    {
        self.get(key)?.ok_or_else(|| KvError::Missing(key.to_string()))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, KvError>
    where
        T::Err: Display,
    {
        let Some(v) = self.raw(key) else { return Ok(None) };
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<T>().map_err(|e| KvError::Invalid {
                    key: key.to_string(),
                    value: s.to_string(),
                    reason: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    /// Fails on the first key not in `allowed`.
    pub fn reject_unknown(&self, allowed: &[&str]) -> Result<(), KvError> {
        match self.keys().find(|k| !allowed.contains(k)) {
            Some(k) => Err(KvError::Unknown(k.to_string())),
            None => Ok(()),
        }
    }

    /// Render as sorted `key=value` lines.
    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}
