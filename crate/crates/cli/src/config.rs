//! Configuration resolution: defaults < config file < command-line flags.
//!
//! The config file is flat `key=value` text; keys mirror the long flag
//! names with underscores (`lr_main`, `snr`, `batch`, ...).

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("cannot read config {}: {e}", path.display())))?;
        let mut values = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::usage(format!(
                    "config line {} is not key=value: '{line}'",
                    lineno + 1
                ))
            })?;
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }
}

/// Resolve one key with the flag > file > default precedence.
pub fn resolve<T>(
    flag: Option<T>,
    file: &FileConfig,
    key: &str,
    default: T,
) -> Result<T, CliError>
where
    T: FromStr + Display,
{
    if let Some(v) = flag {
        return Ok(v);
    }
    if let Some(raw) = file.get(key) {
        return raw
            .parse()
            .map_err(|_| CliError::usage(format!("config key {key} has invalid value '{raw}'")));
    }
    Ok(default)
}

/// Resolve an optional key (no default).
pub fn resolve_opt<T>(
    flag: Option<T>,
    file: &FileConfig,
    key: &str,
) -> Result<Option<T>, CliError>
where
    T: FromStr,
{
    if flag.is_some() {
        return Ok(flag);
    }
    match file.get(key) {
        Some(raw) => raw
            .parse()
            .map(Some)
            .map_err(|_| CliError::usage(format!("config key {key} has invalid value '{raw}'"))),
        None => Ok(None),
    }
}

/// Parse an SNR that may be the noiseless sentinel "inf".
pub fn parse_snr(raw: &str) -> Result<f64, CliError> {
    if raw == "inf" || raw == "+inf" {
        return Ok(f64::INFINITY);
    }
    let v: f64 = raw
        .parse()
        .map_err(|_| CliError::usage(format!("snr '{raw}' is not a number or 'inf'")))?;
    if v.is_nan() {
        return Err(CliError::usage("snr must not be NaN".into()));
    }
    Ok(v)
}

/// Threads: flag > HNN_THREADS env > config file > 1.
pub fn resolve_threads(flag: Option<usize>, file: &FileConfig) -> Result<usize, CliError> {
    if let Some(t) = flag {
        return check_threads(t);
    }
    if let Ok(raw) = std::env::var("HNN_THREADS") {
        let t: usize = raw
            .parse()
            .map_err(|_| CliError::usage(format!("HNN_THREADS='{raw}' is not an integer")))?;
        return check_threads(t);
    }
    if let Some(raw) = file.get("threads") {
        let t: usize = raw
            .parse()
            .map_err(|_| CliError::usage(format!("config key threads has invalid value '{raw}'")))?;
        return check_threads(t);
    }
    Ok(1)
}

fn check_threads(t: usize) -> Result<usize, CliError> {
    if t == 0 {
        return Err(CliError::usage("threads must be at least 1".into()));
    }
    Ok(t)
}
