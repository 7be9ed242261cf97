//! Flat `key = value` configuration with `#` comments. Keys are the long
//! flag names (`vg`, `d`, `gamma-s`, ...); command-line flags take priority.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::CliError;
use crate::si::{parse_si, parse_si_list};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
            let key = k.trim().replace('_', "-");
            if key.is_empty() {
                return Err(format!("line {}: empty key", i + 1));
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn number(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.get(key)
            .map(|v| parse_si(v).map_err(|e| CliError::Usage(format!("config key '{key}': {e}"))))
            .transpose()
    }

    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.get(key)
            .map(|v| parse_si_list(v).map_err(|e| CliError::Usage(format!("config key '{key}': {e}"))))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_normalises_keys() {
        let c = Config::parse("# geometry\nvg = 6161\nd=50u # IDT gap\n\ngamma_s = 14G\n").unwrap();
        assert_eq!(c.number("vg").unwrap(), Some(6161.0));
        assert_eq!(c.number("d").unwrap(), Some(50e-6));
        assert_eq!(c.number("gamma-s").unwrap(), Some(14e9));
        assert_eq!(c.number("missing").unwrap(), None);
        assert!(Config::parse("novalue\n").is_err());
        assert!(Config::parse("x = 1\nvg = fast\n").unwrap().number("vg").is_err());
    }
}
