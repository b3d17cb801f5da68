//! Plain-text key-value configuration with `[section]` headers.
//!
//! ```text
//! # comment
//! [patterns]
//! min_freq = 10
//! ```
//!
//! Keys before the first header belong to the unnamed section `""`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("config key {section}.{key}: cannot parse `{value}`: {reason}")]
    Value {
        section: String,
        key: String,
        value: String,
        reason: String,
    },
    #[error("override `{0}` must look like section.key=value")]
    Override(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl Config {
    pub fn new() -> Config {
        Config::default()
    }

    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut config = Config::new();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                    line: i + 1,
                    reason: "unterminated section header".into(),
                })?;
                section = name.trim().to_string();
                config.sections.entry(section.clone()).or_default();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                reason: "expected key = value".into(),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    reason: "empty key".into(),
                });
            }
            config.set(&section, key, value.trim());
        }
        Ok(config)
    }

    pub fn read(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Config::parse(&text)
    }

    pub fn write(&self, path: &Path) -> Result<(), ConfigError> {
        std::fs::write(path, self.to_string()).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn set(&mut self, section: &str, key: &str, value: impl Into<String>) {
        self.sections
            .entry(section.to_string())
            .or_default()
            .insert(key.to_string(), value.into());
    }

    /// Applies `section.key=value`. A key without a dot targets the unnamed
    /// section.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let (path, value) = spec
            .split_once('=')
            .ok_or_else(|| ConfigError::Override(spec.to_string()))?;
        let (section, key) = path.trim().rsplit_once('.').unwrap_or(("", path.trim()));
        if key.is_empty() {
            return Err(ConfigError::Override(spec.to_string()));
        }
        self.set(section, key, value.trim());
        Ok(())
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section)?.get(key).map(String::as_str)
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    pub fn section(&self, section: &str) -> impl Iterator<Item = (&str, &str)> {
        self.sections
            .get(section)
            .into_iter()
            .flat_map(|m| m.iter().map(|(k, v)| (k.as_str(), v.as_str())))
    }

    /// Parsed value, or `None` when the key is absent.
    pub fn get_parsed<T>(&self, section: &str, key: &str) -> Result<Option<T>, ConfigError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        match self.get(section, key) {
            None => Ok(None),
            Some(value) => value
                .parse()
                .map(Some)
                .map_err(|e: T::Err| ConfigError::Value {
                    section: section.to_string(),
                    key: key.to_string(),
                    value: value.to_string(),
                    reason: e.to_string(),
                }),
        }
    }

    pub fn get_or<T>(&self, section: &str, key: &str, default: T) -> Result<T, ConfigError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        Ok(self.get_parsed(section, key)?.unwrap_or(default))
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, entries) in &self.sections {
            if !first {
                writeln!(f)?;
            }
            first = false;
            if !name.is_empty() {
                writeln!(f, "[{name}]")?;
            }
            for (k, v) in entries {
                writeln!(f, "{k} = {v}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_sections_and_comments() {
        let c =
            Config::parse("seed = 7\n# note\n[en]\nx1 = 0.5\n ; other\n[zh]\nx1=0.1\n").unwrap();
        assert_eq!(c.get("", "seed"), Some("7"));
        assert_eq!(c.get("en", "x1"), Some("0.5"));
        assert_eq!(c.get_parsed::<f64>("zh", "x1").unwrap(), Some(0.1));
        assert_eq!(c.get("zh", "x2"), None);
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(
            Config::parse("[en\n"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            Config::parse("ok = 1\nnonsense\n"),
            Err(ConfigError::Syntax { line: 2, .. })
        ));
    }

    #[test]
    fn bad_value() {
        let c = Config::parse("[p]\nn = ten\n").unwrap();
        assert!(matches!(
            c.get_parsed::<u64>("p", "n"),
            Err(ConfigError::Value { .. })
        ));
    }

    #[test]
    fn overrides() {
        let mut c = Config::new();
        c.apply_override("patterns.min_freq=3").unwrap();
        c.apply_override("seed = 9").unwrap();
        assert_eq!(c.get("patterns", "min_freq"), Some("3"));
        assert_eq!(c.get("", "seed"), Some("9"));
        assert!(c.apply_override("nothing").is_err());
    }

    #[test]
    fn display_round_trip() {
        let c = Config::parse("top = 1\n[b]\nk = v w\n[a]\nx = 2\n").unwrap();
        assert_eq!(Config::parse(&c.to_string()).unwrap(), c);
    }
}
