//! Flat `key = value` configuration files.
//!
//! Blank lines and `#` comments are ignored. Keys are case-insensitive and
//! `_` is treated as `-`, so `dither_half_width` and `dither-half-width` are
//! the same key.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FlatConfig {
    entries: BTreeMap<String, String>,
}

fn normalize_key(k: &str) -> String {
    k.trim().to_ascii_lowercase().replace('_', "-")
}

impl FlatConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected `key = value`", n + 1)))?;
            if k.trim().is_empty() {
                return Err(Error::InvalidConfig(format!("line {}: empty key", n + 1)));
            }
            cfg.set(k, v.trim());
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.entries.insert(normalize_key(key), value.to_string());
    }

    pub fn set_opt<T: Display>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.set(key, v);
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(&normalize_key(key)).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::InvalidConfig(format!("{key} = {v}: {e}")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Sorted `key = value` lines.
    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_normalizes_keys() {
        let cfg = FlatConfig::parse("# top\nDither_Half_Width = 0.5  # inline\n\nregime=baseline\n").unwrap();
        assert_eq!(cfg.get::<f64>("dither-half-width").unwrap(), Some(0.5));
        assert_eq!(cfg.raw("regime"), Some("baseline"));
        assert_eq!(cfg.get::<u64>("seed").unwrap(), None);
    }

    #[test]
    fn later_sets_override() {
        let mut cfg = FlatConfig::parse("lr = 1").unwrap();
        cfg.set("lr", 0.01);
        assert_eq!(cfg.get_or("lr", 5.0).unwrap(), 0.01);
    }

    #[test]
    fn errors() {
        assert!(FlatConfig::parse("no equals").is_err());
        assert!(FlatConfig::parse(" = 3").is_err());
        let cfg = FlatConfig::parse("epochs = many").unwrap();
        assert!(cfg.get::<usize>("epochs").is_err());
    }

    #[test]
    fn text_round_trips() {
        let cfg = FlatConfig::parse("b = 2\na = x y\n").unwrap();
        assert_eq!(cfg.to_text(), "a = x y\nb = 2\n");
        assert_eq!(FlatConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }
}
