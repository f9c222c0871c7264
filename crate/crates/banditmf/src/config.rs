//! Flat `key = value` configuration files, parameter resolution, and run
//! manifests.
//!
//! Every command resolves each parameter as: command-line flag, else config
//! file value, else built-in default. The resolved values are recorded and
//! written to `manifest.txt` in the output directory, and a manifest can be
//! fed back through `--from-manifest` to reproduce a run exactly.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::UsageError;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: file not found")]
    Missing { path: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path} line {line}: expected `key = value`, got {text:?}")]
    Syntax { path: String, line: usize, text: String },
}

impl ConfigError {
    pub fn is_missing(&self) -> bool {
        matches!(self, ConfigError::Missing { .. })
    }
}

/// Parses flat `key = value` text. `#` lines are comments; blank lines are
/// skipped; the first `=` splits key from value and both are trimmed.
pub fn parse_flat(path: &str, text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (line_no, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(ConfigError::Syntax {
                path: path.to_string(),
                line: line_no + 1,
                text: line.to_string(),
            });
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::Syntax {
                path: path.to_string(),
                line: line_no + 1,
                text: line.to_string(),
            });
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Renders a map as flat `key = value` lines in sorted key order.
pub fn render_flat(map: &BTreeMap<String, String>) -> String {
    let mut out = String::new();
    for (key, value) in map {
        out.push_str(&format!("{key} = {value}\n"));
    }
    out
}

/// Loads a config file; `None` means no file, which resolves to an empty map.
pub fn load_config(path: Option<&Path>) -> Result<BTreeMap<String, String>, ConfigError> {
    let Some(path) = path else {
        return Ok(BTreeMap::new());
    };
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            ConfigError::Missing { path: display.clone() }
        } else {
            ConfigError::Io { path: display.clone(), source: e }
        }
    })?;
    parse_flat(&display, &text)
}

/// Writes `manifest.txt` under `dir` and returns its path.
pub fn write_manifest(
    dir: &Path,
    entries: &BTreeMap<String, String>,
) -> std::io::Result<PathBuf> {
    let path = dir.join("manifest.txt");
    std::fs::write(&path, render_flat(entries))?;
    Ok(path)
}

/// Resolves parameters with flag-over-file-over-default precedence while
/// recording every resolved value for the run manifest.
pub struct Resolver {
    file: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Resolver {
    pub fn new(command: &str, file: BTreeMap<String, String>) -> Self {
        let mut resolved = BTreeMap::new();
        resolved.insert("command".to_string(), command.to_string());
        Resolver { file, resolved }
    }

    fn record(&mut self, key: &str, value: impl Display) {
        self.resolved.insert(key.to_string(), value.to_string());
    }

    /// Records a value the caller resolved outside the usual precedence
    /// (e.g. an output directory override).
    pub fn note(&mut self, key: &str, value: impl Display) {
        self.record(key, value);
    }

    fn file_value(&self, key: &str) -> Option<&str> {
        self.file.get(key).map(String::as_str)
    }

    /// A required value with a built-in default.
    pub fn value<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, UsageError>
    where
        T: FromStr + Display,
    {
        let value = match flag {
            Some(v) => v,
            None => match self.file_value(key) {
                Some(text) => text.parse::<T>().map_err(|_| {
                    UsageError(format!("config key {key}: cannot parse {text:?}"))
                })?,
                None => default,
            },
        };
        self.record(key, &value);
        Ok(value)
    }

    /// An optional value with no default; recorded only when present.
    pub fn optional<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, UsageError>
    where
        T: FromStr + Display,
    {
        let value = match flag {
            Some(v) => Some(v),
            None => match self.file_value(key) {
                Some(text) => Some(text.parse::<T>().map_err(|_| {
                    UsageError(format!("config key {key}: cannot parse {text:?}"))
                })?),
                None => None,
            },
        };
        if let Some(v) = &value {
            self.record(key, v);
        }
        Ok(value)
    }

    /// A path the command cannot run without.
    pub fn require_path(&mut self, key: &str, flag: Option<PathBuf>) -> Result<PathBuf, UsageError> {
        let path = flag.or_else(|| self.file_value(key).map(PathBuf::from)).ok_or_else(|| {
            UsageError(format!("missing required input: pass --{key} or set {key} in the config"))
        })?;
        self.record(key, path.display());
        Ok(path)
    }

    /// An optional path.
    pub fn opt_path(&mut self, key: &str, flag: Option<PathBuf>) -> Option<PathBuf> {
        let path = flag.or_else(|| self.file_value(key).map(PathBuf::from));
        if let Some(p) = &path {
            self.record(key, p.display());
        }
        path
    }

    /// A repeatable flag; config files spell it as numbered keys
    /// (`key.0`, `key.1`, ...). Recorded back in numbered form.
    pub fn list(&mut self, key: &str, flags: &[String]) -> Vec<String> {
        let values: Vec<String> = if flags.is_empty() {
            let mut numbered: Vec<(usize, String)> = self
                .file
                .iter()
                .filter_map(|(k, v)| {
                    let index = k.strip_prefix(key)?.strip_prefix('.')?;
                    Some((index.parse::<usize>().ok()?, v.clone()))
                })
                .collect();
            numbered.sort_by_key(|(i, _)| *i);
            numbered.into_iter().map(|(_, v)| v).collect()
        } else {
            flags.to_vec()
        };
        for (index, value) in values.iter().enumerate() {
            self.record(&format!("{key}.{index}"), value);
        }
        values
    }

    /// The recorded `key = value` pairs for the manifest.
    pub fn into_manifest(self) -> BTreeMap<String, String> {
        self.resolved
    }
}
