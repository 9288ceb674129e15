//! Settings resolution: command-line flags, then the config file, then
//! `LOSTPAGE_*` environment variables.
//!
//! The config file holds one `key = value` per line, `#` starts a comment and
//! keys are the long flag names (`top = 5`, `temporal-literal = true`).

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

/// Every key the config file and environment may set.
pub const KEYS: &[&str] = &[
    "aggregator",
    "any-top-level",
    "cache",
    "cache-max-age",
    "candidates",
    "corpus",
    "damage-service",
    "datetime",
    "fixtures",
    "format",
    "grams",
    "index",
    "max-pages",
    "model",
    "now",
    "output",
    "parallelism",
    "seed",
    "temporal-literal",
    "timeout",
    "top",
    "uri",
    "weights",
    "wikipedia",
];

pub const ENV_PREFIX: &str = "LOSTPAGE_";

/// Wraps a configuration problem so the exit code can tell it from I/O trouble.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
    env: BTreeMap<String, String>,
}

pub fn env_name(key: &str) -> String {
    format!("{ENV_PREFIX}{}", key.to_uppercase().replace('-', "_"))
}

impl Settings {
    /// Reads the config file (if any) and snapshots the environment.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let file = match path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .with_context(|| format!("reading config file {}", p.display()))?;
                parse_config(&text)?
            }
            None => BTreeMap::new(),
        };
        let env = KEYS
            .iter()
            .filter_map(|k| std::env::var(env_name(k)).ok().map(|v| (k.to_string(), v)))
            .collect();
        Ok(Self { file, env })
    }

    #[cfg(test)]
    pub fn from_parts(file: BTreeMap<String, String>, env: BTreeMap<String, String>) -> Self {
        Self { file, env }
    }

    fn lookup(&self, key: &str) -> Option<(&str, String)> {
        if let Some(v) = self.file.get(key) {
            return Some((v, format!("config key {key:?}")));
        }
        self.env.get(key).map(|v| {
            (
                v.as_str(),
                format!("environment variable {}", env_name(key)),
            )
        })
    }

    /// The flag value if given, otherwise the file value, otherwise the environment.
    pub fn get<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        debug_assert!(KEYS.contains(&key), "unregistered key {key}");
        if flag.is_some() {
            return Ok(flag);
        }
        match self.lookup(key) {
            Some((raw, origin)) => raw
                .parse()
                .map(Some)
                .map_err(|e| config_error(format!("bad value {raw:?} for {origin}: {e}"))),
            None => Ok(None),
        }
    }

    pub fn get_or<T>(&self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.get(key, flag)?.unwrap_or(default))
    }

    /// Boolean switches: a flag on the command line wins; otherwise
    /// `true`/`false` from the file or environment.
    pub fn switch(&self, key: &str, flag: bool) -> Result<bool> {
        if flag {
            return Ok(true);
        }
        match self.lookup(key) {
            Some((raw, origin)) => match raw.trim().to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" | "on" => Ok(true),
                "false" | "no" | "0" | "off" => Ok(false),
                _ => Err(config_error(format!("bad boolean {raw:?} for {origin}"))),
            },
            None => Ok(false),
        }
    }
}

fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!(ConfigError(format!(
                "config line {}: expected key = value",
                i + 1
            )));
        };
        let key = key.trim();
        if !KEYS.contains(&key) {
            bail!(ConfigError(format!(
                "config line {}: unknown key {key:?}",
                i + 1
            )));
        }
        let value = value.trim().trim_matches('"');
        out.insert(key.to_string(), value.to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(file: &[(&str, &str)], env: &[(&str, &str)]) -> Settings {
        let m = |kv: &[(&str, &str)]| {
            kv.iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect()
        };
        Settings::from_parts(m(file), m(env))
    }

    #[test]
    fn flags_beat_file_beat_env() {
        let s = settings(&[("top", "5")], &[("top", "7"), ("seed", "3")]);
        assert_eq!(s.get::<usize>("top", Some(2)).unwrap(), Some(2));
        assert_eq!(s.get::<usize>("top", None).unwrap(), Some(5));
        assert_eq!(s.get::<u64>("seed", None).unwrap(), Some(3));
        assert_eq!(s.get::<String>("uri", None).unwrap(), None);
    }

    #[test]
    fn switches() {
        let s = settings(&[("temporal-literal", "yes")], &[]);
        assert!(s.switch("temporal-literal", false).unwrap());
        let s = settings(&[], &[("any-top-level", "maybe")]);
        assert!(s.switch("any-top-level", false).is_err());
    }

    #[test]
    fn parses_file() {
        let m = parse_config("# comment\n top = 4 \nweights = \"0.4,0.2,0.2,0.2\"\n").unwrap();
        assert_eq!(m["top"], "4");
        assert_eq!(m["weights"], "0.4,0.2,0.2,0.2");
        assert!(parse_config("bogus = 1").is_err());
        assert!(parse_config("no equals sign").is_err());
    }

    #[test]
    fn bad_values_are_config_errors() {
        let s = settings(&[("top", "many")], &[]);
        let err = s.get::<usize>("top", None).unwrap_err();
        assert!(err.downcast_ref::<ConfigError>().is_some());
    }

    #[test]
    fn env_names() {
        assert_eq!(env_name("temporal-literal"), "LOSTPAGE_TEMPORAL_LITERAL");
    }
}
