use crate::report::CliError;
use pelab_core::config::{parse_list, KeyValues};
use std::collections::BTreeMap;
use std::path::Path;

/// Layered settings for one run: file, then `--set`, then flags.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub kv: KeyValues,
}

impl RunConfig {
    pub fn layered(file: Option<&Path>, sets: &[String], flags: &KeyValues) -> Result<Self, CliError> {
        let mut kv = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
                KeyValues::parse(&text).map_err(CliError::Usage)?
            }
            None => KeyValues::default(),
        };
        for s in sets {
            let (k, v) = s.split_once('=').ok_or_else(|| CliError::Usage(format!("--set `{s}`: expected KEY=VALUE")))?;
            kv.set(k.trim(), v.trim());
        }
        kv.merge(flags);
        Ok(Self { kv })
    }

    pub fn from_pairs(pairs: &[(&str, &str)]) -> Self {
        let mut kv = KeyValues::default();
        for (k, v) in pairs {
            kv.set(k, v);
        }
        Self { kv }
    }

    pub fn entries(&self) -> BTreeMap<String, String> {
        self.kv.keys().map(|k| (k.to_string(), self.kv.get(k).unwrap_or_default().to_string())).collect()
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.kv.get(key).unwrap_or(default)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.kv.get_f64(key).map_err(CliError::Usage)?.unwrap_or(default))
    }

    pub fn positive_f64(&self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.f64_or(key, default)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Usage(format!("{key} must be positive, got {v}")));
        }
        Ok(v)
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        Ok(self.kv.get_usize(key).map_err(CliError::Usage)?.unwrap_or(default))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, CliError> {
        self.kv
            .get(key)
            .map(|v| v.parse::<u64>().map_err(|e| CliError::Usage(format!("{key}: {e}"))))
            .transpose()
            .map(|v| v.unwrap_or(default))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.kv.get(key) {
            None => Ok(default),
            Some("true" | "1" | "yes") => Ok(true),
            Some("false" | "0" | "no") => Ok(false),
            Some(v) => Err(CliError::Usage(format!("{key}: expected true or false, got `{v}`"))),
        }
    }

    pub fn list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        Ok(self.kv.get_list(key).map_err(CliError::Usage)?.unwrap_or_else(|| default.to_vec()))
    }

    /// Positive, strictly decreasing list.
    pub fn eps_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        let v = self.list_or(key, default)?;
        if v.is_empty() || v.iter().any(|e| !(*e > 0.0)) {
            return Err(CliError::Usage(format!("{key} must be a non-empty list of positive values")));
        }
        if v.windows(2).any(|p| p[1] >= p[0]) {
            return Err(CliError::Usage(format!("{key} must be strictly decreasing")));
        }
        Ok(v)
    }

    pub fn usize_list(&self, key: &str) -> Result<Option<Vec<usize>>, CliError> {
        self.kv
            .get(key)
            .map(|text| {
                text.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<usize>().map_err(|e| CliError::Usage(format!("{key}: `{s}`: {e}"))))
                    .collect()
            })
            .transpose()
    }

    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.kv.get(key).map(|t| parse_list(t).map_err(|e| CliError::Usage(format!("{key}: {e}")))).transpose()
    }
}
