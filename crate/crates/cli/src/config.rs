//! `key=value` config files layered under command-line flags.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

/// Error in how the program was invoked rather than in what it computed.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// Parses `key = value` lines. Blank lines and `#` comments are skipped; keys
/// are normalized to snake case.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| UsageError(format!("config line {}: expected key=value, got '{raw}'", n + 1)))?;
        let key = k.trim().replace('-', "_");
        if key.is_empty() {
            return Err(UsageError(format!("config line {}: empty key", n + 1)));
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(UsageError(format!("config line {}: duplicate key '{key}'", n + 1)));
        }
    }
    Ok(out)
}

/// Resolves settings from flags first, then the config file, then defaults,
/// and remembers which file keys were consumed.
#[derive(Debug, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
    used: Vec<String>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(p) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
        Ok(Self {
            file: parse_config(&text)?,
            used: Vec::new(),
        })
    }

    #[cfg(test)]
    pub fn from_map(file: BTreeMap<String, String>) -> Self {
        Self { file, used: Vec::new() }
    }

    fn file_value<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.used.push(key.to_string());
        match self.file.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| anyhow!(UsageError(format!("config key '{key}': invalid value '{raw}': {e}")))),
        }
    }

    pub fn get<T: FromStr>(&mut self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let from_file = self.file_value(key)?;
        Ok(flag.or(from_file).unwrap_or(default))
    }

    pub fn optional<T: FromStr>(&mut self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        let from_file = self.file_value(key)?;
        Ok(flag.or(from_file))
    }

    pub fn required<T: FromStr>(&mut self, flag: Option<T>, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.optional(flag, key)?
            .ok_or_else(|| anyhow!(UsageError(format!("missing required setting --{}", key.replace('_', "-")))))
    }

    /// Fails on config keys the command never asked for.
    pub fn finish(&self) -> Result<()> {
        let unknown: Vec<&str> = self.file.keys().filter(|k| !self.used.contains(k)).map(String::as_str).collect();
        if !unknown.is_empty() {
            bail!(UsageError(format!("unknown config key(s): {}", unknown.join(", "))));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_layers() {
        let map = parse_config("# run\nseed = 4\nlr=0.01  # fast\n\ngraph-type = dynamic\n").unwrap();
        assert_eq!(map.len(), 3);
        let mut s = Settings::from_map(map);
        assert_eq!(s.get(None, "seed", 0u64).unwrap(), 4);
        assert_eq!(s.get(Some(9u64), "seed", 0).unwrap(), 9);
        assert_eq!(s.get(None, "lr", 1.0f64).unwrap(), 0.01);
        assert_eq!(s.get(None, "steps", 7usize).unwrap(), 7);
        assert!(s.finish().is_err());
        assert_eq!(s.get(None, "graph_type", String::new()).unwrap(), "dynamic");
        assert!(s.finish().is_ok());
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_config("seed 4").is_err());
        assert!(parse_config("seed=1\nseed=2").is_err());
        assert!(parse_config("=3").is_err());
        let mut s = Settings::from_map(parse_config("steps=many").unwrap());
        let err = s.get(None, "steps", 1usize).unwrap_err();
        assert!(err.downcast_ref::<UsageError>().is_some());
        let mut s = Settings::default();
        assert!(s.required::<String>(None, "data").is_err());
    }
}
