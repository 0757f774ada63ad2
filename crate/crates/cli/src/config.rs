//! Resolved run configuration: command-line flags layered over an optional
//! flat `key=value` config file, with flags taking precedence.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

/// Keys accepted in config files; identical to the long flag names.
const KNOWN_KEYS: &[&str] = &[
    "lambda",
    "m",
    "mass-L",
    "domain",
    "refinement",
    "p-schedule",
    "tol",
    "max-iter",
    "damping",
    "out",
    "samples",
    "theta",
];

/// Parse a flat `key = value` file; `#` starts a comment, blank lines skipped.
pub fn load_config(path: &Path) -> Result<BTreeMap<String, String>, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected `key = value`", idx + 1))?;
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(format!("config line {}: unknown key `{key}`", idx + 1));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// A flag value falling back to the config file, then to a default.
pub fn resolve<T: std::str::FromStr>(
    flag: Option<T>,
    config: &BTreeMap<String, String>,
    key: &str,
    default: Option<T>,
) -> Result<Option<T>, String> {
    if flag.is_some() {
        return Ok(flag);
    }
    if let Some(raw) = config.get(key) {
        return raw
            .parse()
            .map(Some)
            .map_err(|_| format!("config key `{key}`: cannot parse `{raw}`"));
    }
    Ok(default)
}

/// The mesh source named by `--domain`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Domain {
    Disk,
    Rect,
    File(String),
}

impl std::str::FromStr for Domain {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "disk" => Ok(Domain::Disk),
            "rect" => Ok(Domain::Rect),
            _ => match s.strip_prefix("file:") {
                Some(path) if !path.is_empty() => Ok(Domain::File(path.to_string())),
                _ => Err(format!("domain must be disk, rect, or file:PATH (got `{s}`)")),
            },
        }
    }
}

/// Comma-separated decreasing exponent list for `--p-schedule`.
#[derive(Debug, Clone, PartialEq)]
pub struct PSchedule(pub Vec<f64>);

impl std::str::FromStr for PSchedule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let values: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse()).collect();
        match values {
            Ok(v) if !v.is_empty() => Ok(PSchedule(v)),
            _ => Err(format!("p-schedule must be a comma list of numbers (got `{s}`)")),
        }
    }
}
