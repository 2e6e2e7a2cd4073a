use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub type ConfigMap = BTreeMap<String, String>;

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// keys are case-sensitive and may not repeat.
pub fn parse_config(text: &str) -> Result<ConfigMap> {
    let mut map = ConfigMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::input(format!(
                "config line {}: expected 'key = value'",
                no + 1
            )));
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::input(format!("config line {}: empty key", no + 1)));
        }
        if map
            .insert(key.to_string(), value.trim().to_string())
            .is_some()
        {
            return Err(Error::input(format!(
                "config line {}: duplicate key '{key}'",
                no + 1
            )));
        }
    }
    Ok(map)
}

pub fn read_config(path: &Path) -> Result<ConfigMap> {
    parse_config(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_pairs() {
        let map =
            parse_config("# defaults\nsigma = 0.2\n\n  mode=tiled # inline\nfp = 6,17\n").unwrap();
        assert_eq!(map.len(), 3);
        assert_eq!(map["sigma"], "0.2");
        assert_eq!(map["mode"], "tiled");
        assert_eq!(map["fp"], "6,17");
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_config("sigma 0.2").is_err());
        assert!(parse_config("= 3").is_err());
        assert!(parse_config("a = 1\na = 2").is_err());
    }
}
