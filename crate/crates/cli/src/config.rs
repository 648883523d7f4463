//! Flag resolution: command-line flag, then the `--config` JSON file, then
//! built-in defaults. The seed additionally falls back to `GT_SEED`.

use std::path::Path;

use anyhow::{anyhow, bail, Context as _, Result};
use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

pub const SEED_ENV: &str = "GT_SEED";

#[derive(Debug, Clone, Default)]
pub struct Config {
    values: Map<String, Value>,
}

fn normalise(key: &str) -> String {
    key.replace('-', "_")
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        Config::parse(&text).with_context(|| format!("in config file {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Config> {
        match serde_json::from_str(text)? {
            Value::Object(map) => Ok(Config {
                values: map.into_iter().map(|(k, v)| (normalise(&k), v)).collect(),
            }),
            _ => bail!("config must be a JSON object"),
        }
    }

    /// The flag if given, else the config entry under `key`.
    pub fn pick<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(&normalise(key)) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => serde_json::from_value(v.clone())
                .map(Some)
                .with_context(|| format!("config key '{key}' has the wrong type")),
        }
    }

    pub fn require<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<T> {
        self.pick(flag, key)?
            .ok_or_else(|| anyhow!("missing --{} (flag or config key)", key.replace('_', "-")))
    }

    pub fn or<T: DeserializeOwned>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    /// Flag, config, `GT_SEED`, then 0.
    pub fn seed(&self, flag: Option<u64>) -> Result<u64> {
        if let Some(s) = self.pick(flag, "seed")? {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .with_context(|| format!("{SEED_ENV}='{v}' is not a u64")),
            Err(_) => Ok(0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_beats_file() {
        let c = Config::parse(r#"{"n": 12, "design-samples": 3}"#).unwrap();
        assert_eq!(c.pick(Some(5usize), "n").unwrap(), Some(5));
        assert_eq!(c.pick(None::<usize>, "n").unwrap(), Some(12));
        assert_eq!(c.pick(None::<u64>, "design_samples").unwrap(), Some(3));
        assert_eq!(c.or(None::<u64>, "trials", 7).unwrap(), 7);
        assert!(c.require(None::<f64>, "p").is_err());
        assert!(c.pick(None::<String>, "n").is_err());
    }

    #[test]
    fn seed_from_file_wins_over_default() {
        let c = Config::parse(r#"{"seed": 99}"#).unwrap();
        assert_eq!(c.seed(None).unwrap(), 99);
        assert_eq!(c.seed(Some(1)).unwrap(), 1);
    }

    #[test]
    fn rejects_non_objects() {
        assert!(Config::parse("[1, 2]").is_err());
    }
}
