//! Flat `key=value` configuration merged under command-line flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::CliError;

/// Keys accepted in configuration files; every one mirrors a long flag.
pub const KNOWN_KEYS: &[&str] = &[
    "rho",
    "n",
    "replicates",
    "thresholds",
    "seed",
    "out",
    "threads",
    "window",
    "candidates",
    "bootstrap",
    "x",
    "t",
    "to",
];

pub const SEED_ENV: &str = "LPP_LAB_SEED";

/// Parse `key=value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str, origin: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("{}:{}: expected key=value, got '{line}'", origin.display(), i + 1))
        })?;
        let (k, v) = (k.trim(), v.trim());
        if !KNOWN_KEYS.contains(&k) {
            return Err(CliError::Usage(format!("{}:{}: unknown key '{k}'", origin.display(), i + 1)));
        }
        map.insert(k.to_string(), v.to_string());
    }
    Ok(map)
}

/// Effective settings: flags first, then the config file, then defaults.
#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn load(config: Option<&Path>, flags: Vec<(&str, Option<String>)>) -> Result<Self, CliError> {
        let mut values = match config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
                parse_config(&text, path)?
            }
            None => BTreeMap::new(),
        };
        for (k, v) in flags {
            debug_assert!(KNOWN_KEYS.contains(&k));
            if let Some(v) = v {
                values.insert(k.to_string(), v);
            }
        }
        Ok(Settings { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|e| CliError::Usage(format!("invalid value '{v}' for {key}: {e}"))))
            .transpose()
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?.ok_or_else(|| CliError::Usage(format!("missing required setting --{key}")))
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Base seed: flag or config, then `LPP_LAB_SEED`, then 0.
    pub fn seed(&self) -> Result<u64, CliError> {
        if let Some(s) = self.get::<u64>("seed")? {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v.trim().parse().map_err(|e| CliError::Usage(format!("invalid {SEED_ENV}='{v}': {e}"))),
            Err(_) => Ok(0),
        }
    }

    /// `None` means "auto".
    pub fn threads(&self) -> Result<Option<usize>, CliError> {
        match self.raw("threads") {
            None | Some("auto") => Ok(None),
            Some(v) => match v.parse::<usize>() {
                Ok(t) if t > 0 => Ok(Some(t)),
                _ => Err(CliError::Usage(format!("threads must be a positive integer or 'auto', got '{v}'"))),
            },
        }
    }

    pub fn out(&self) -> Option<PathBuf> {
        self.raw("out").map(PathBuf::from)
    }
}

/// `a:b:step` into the inclusive grid `a, a + step, ...`, up to `b`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("thresholds must look like a:b:step, got '{s}'"));
    let parts: Vec<f64> = s.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [a, b, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0) || b < a {
        return Err(bad());
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    // Multiply rather than accumulate so grid points are exact where possible.
    Ok((0..count).map(|i| a + step * i as f64).collect())
}

/// `a:b` into an inclusive interval.
pub fn parse_interval(s: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Usage(format!("window must look like a:b, got '{s}'"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let (a, b): (f64, f64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if b < a {
        return Err(bad());
    }
    Ok((a, b))
}

pub fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| CliError::Usage(format!("invalid {what} list '{s}'"))))
        .collect()
}
