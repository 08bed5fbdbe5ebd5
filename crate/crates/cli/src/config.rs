//! Optional key=value configuration files. Precedence: command-line flags
//! win over file entries, file entries win over built-in defaults.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

/// Parsed configuration file contents.
#[derive(Debug, Default, Clone)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    /// Loads `path` if given; empty map otherwise. Lines are `key=value`;
    /// blank lines and `#` comments are ignored.
    pub fn load(path: Option<&Path>) -> Result<Self, String> {
        let Some(path) = path else {
            return Ok(ConfigMap::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(format!(
                    "config {} line {}: expected key=value",
                    path.display(),
                    i + 1
                ));
            };
            entries.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(ConfigMap { entries })
    }

    /// Fills `slot` from the config entry `key` when the flag was not
    /// given on the command line.
    pub fn fill<T: FromStr>(&self, slot: &mut Option<T>, key: &str) -> Result<(), String> {
        if slot.is_none() {
            if let Some(raw) = self.entries.get(key) {
                let parsed = raw
                    .parse::<T>()
                    .map_err(|_| format!("config key '{key}': cannot parse '{raw}'"))?;
                *slot = Some(parsed);
            }
        }
        Ok(())
    }
}
