//! Flat `key = value` run configuration. Every command-line flag has a
//! twin key with the same long name; flags win over the file.

use crate::CliError;
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

pub const KEYS: &[&str] = &[
    "field", "format", "out", "report", "start", "kind", "arclen", "step", "box", "center", "radius",
    "grid", "from", "to", "nodes", "gradient-tol", "max-iters", "baseline", "polygon", "rect", "phi",
    "refinement", "seed", "starts", "length", "grids",
];

/// Keys of the form `tolerance.<check>` override single tolerances.
pub const TOLERANCE_PREFIX: &str = "tolerance.";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|m| CliError::Usage(format!("{}: {m}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected 'key = value'", i + 1))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) && !k.starts_with(TOLERANCE_PREFIX) {
                return Err(format!("line {}: unknown key '{k}'", i + 1));
            }
            if values.insert(k.to_string(), v.to_string()).is_some() {
                return Err(format!("line {}: duplicate key '{k}'", i + 1));
            }
        }
        Ok(Self { values })
    }

    /// The flag value if given, else the parsed config value, if any.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::Usage(format!("config key '{key}': {e}")))
            })
            .transpose()
    }

    pub fn or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    pub fn tolerances(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values
            .iter()
            .filter_map(|(k, v)| k.strip_prefix(TOLERANCE_PREFIX).map(|c| (c, v.as_str())))
    }
}
