use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// `key = value` pairs read from a parameter file. Blank lines and lines
/// starting with `#` are ignored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamFile {
    entries: BTreeMap<String, String>,
}

impl ParamFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = k.trim().replace('-', "_");
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("duplicate key '{key}'")));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Parses `key` if present.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Config(format!("bad value '{v}' for '{key}'")))
            })
            .transpose()
    }

    /// Overwrites `target` when `key` is present.
    pub fn set<T: FromStr>(&self, key: &str, target: &mut T) -> Result<()> {
        if let Some(v) = self.get(key)? {
            *target = v;
        }
        Ok(())
    }

    /// Fails on any key outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.keys().find(|k| !allowed.contains(k)) {
            Some(k) => Err(Error::Config(format!(
                "unknown parameter '{k}' (expected one of: {})",
                allowed.join(", ")
            ))),
            None => Ok(()),
        }
    }
}
