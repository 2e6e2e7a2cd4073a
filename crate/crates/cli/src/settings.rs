//! Flag / config-file / default layering.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use permfilter::io::{read_config, ConfigMap};

/// Config values for one command. Flags win over entries here, entries win
/// over built-in defaults.
pub struct Layers {
    map: ConfigMap,
}

impl Layers {
    /// Loads `path` (if any) and rejects keys the command does not know.
    pub fn load(path: Option<&Path>, allowed: &[&str]) -> Result<Self> {
        let map = match path {
            Some(p) => read_config(p).with_context(|| format!("reading config {}", p.display()))?,
            None => ConfigMap::new(),
        };
        if let Some(key) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            bail!(permfilter::Error::Input(format!(
                "unknown config key '{key}' (accepted: {})",
                allowed.join(", ")
            )));
        }
        Ok(Self { map })
    }

    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.map.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|e| {
                permfilter::Error::Input(format!("config key '{key}' = '{raw}': {e}")).into()
            }),
        }
    }

    pub fn or<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    /// Whitespace- or `;`-separated list.
    pub fn list<T>(&self, flag: Vec<T>, key: &str) -> Result<Vec<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if !flag.is_empty() {
            return Ok(flag);
        }
        let Some(raw) = self.map.get(key) else {
            return Ok(Vec::new());
        };
        raw.split(|c: char| c.is_whitespace() || c == ';')
            .filter(|s| !s.is_empty())
            .map(|item| {
                item.parse().map_err(|e| {
                    permfilter::Error::Input(format!("config key '{key}', item '{item}': {e}"))
                        .into()
                })
            })
            .collect()
    }
}
