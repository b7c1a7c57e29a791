//! Flat `key = value` run configuration with flag-override semantics.
//!
//! A config file supplies defaults for any command-line flag; a flag
//! given explicitly always wins. Keys outside the known set are
//! rejected so typos surface as usage errors instead of silently
//! falling back to defaults.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

/// Every key a config file may define, i.e. the union of all value
/// flags across subcommands.
const KNOWN_KEYS: [&str; 18] = [
    "family", "n", "p", "k", "m", "alpha", "tol", "start", "stop", "count", "spacing", "out",
    "svg", "in", "theorem", "json", "samples", "threads",
];

/// Parsed config file contents (empty when no file was given).
#[derive(Debug, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    /// Load and validate a config file; `None` yields an empty config.
    pub fn load(path: Option<&Path>) -> Result<Self, String> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {}", path.display(), e))?;
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!(
                    "config line {}: expected `key = value`, got `{}`",
                    idx + 1,
                    line
                ));
            };
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(format!("config line {}: unknown key `{}`", idx + 1, key));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(RunConfig { values })
    }

    /// Raw config value for a key, when present.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Flag value if given, else the parsed config value.
    pub fn merge<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, String>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.get(key) {
            None => Ok(None),
            Some(text) => text
                .parse()
                .map(Some)
                .map_err(|e| format!("config key `{}`: bad value `{}` ({})", key, text, e)),
        }
    }

    /// Like [`RunConfig::merge`] but the value must come from somewhere.
    pub fn require<T>(&self, flag: Option<T>, key: &str) -> Result<T, String>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.merge(flag, key)?
            .ok_or_else(|| format!("missing required value `--{}`", key))
    }
}
