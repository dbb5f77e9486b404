//! Effective settings: flags (and their env equivalents) over the config
//! file over built-in defaults.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::defs;
use crate::CliError;

/// Shape of a `--config` file. Subcommand tables hold the subcommand's own
/// options under their long flag names, e.g. `[theoremA] eta-samples = 500`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub qmax: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub tol: Option<f64>,
    pub grid: Option<usize>,
    pub label: Option<String>,
    pub rho: Option<toml::Table>,
    pub windows: Option<toml::Table>,
    pub tongues: Option<toml::Table>,
    pub dio: Option<toml::Table>,
    pub skew: Option<toml::Table>,
    #[serde(rename = "theoremA")]
    pub theorem_a: Option<toml::Table>,
}

impl ConfigFile {
    /// Relative paths in a config file are taken relative to the file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let (_, text) = defs::read(path)?;
        let mut cfg: ConfigFile = defs::parse(path, &text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.input, &mut cfg.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    fn section(&self, sub: &str) -> Option<&toml::Table> {
        match sub {
            "rho" => self.rho.as_ref(),
            "windows" => self.windows.as_ref(),
            "tongues" => self.tongues.as_ref(),
            "dio" => self.dio.as_ref(),
            "skew" => self.skew.as_ref(),
            "theoremA" => self.theorem_a.as_ref(),
            _ => None,
        }
    }
}

/// Records every value it hands out so the effective configuration can be
/// dumped in the same shape as a config file.
pub struct Resolver<'a> {
    pub sub: &'static str,
    pub cfg: &'a ConfigFile,
    top: toml::Table,
    options: toml::Table,
}

impl<'a> Resolver<'a> {
    pub fn new(sub: &'static str, cfg: &'a ConfigFile) -> Self {
        Resolver {
            sub,
            cfg,
            top: toml::Table::new(),
            options: toml::Table::new(),
        }
    }

    /// A common setting: flag, then the config file's top level, then `default`.
    pub fn common<T: Serialize>(&mut self, key: &str, flag: Option<T>, file: Option<T>, default: T) -> T {
        let v = flag.or(file).unwrap_or(default);
        if let Ok(x) = toml::Value::try_from(&v) {
            self.top.insert(key.to_string(), x);
        }
        v
    }

    /// The effective configuration as TOML.
    pub fn dump(&self) -> String {
        let mut t = self.top.clone();
        if !self.options.is_empty() {
            t.insert(self.sub.to_string(), toml::Value::Table(self.options.clone()));
        }
        toml::to_string(&t).unwrap_or_default()
    }

    fn file_value<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>, CliError> {
        let Some(v) = self.cfg.section(self.sub).and_then(|t| t.get(key)) else {
            return Ok(None);
        };
        v.clone()
            .try_into()
            .map(Some)
            .map_err(|e| CliError::Input(format!("config [{}] {key}: {e}", self.sub)))
    }

    /// Flag, then config file, then `default`; the result is recorded.
    pub fn pick<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: DeserializeOwned + Serialize,
    {
        let v = match flag {
            Some(v) => v,
            None => self.file_value(key)?.unwrap_or(default),
        };
        self.record(key, &v);
        Ok(v)
    }

    /// Like [`pick`](Self::pick) without a default.
    pub fn pick_opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: DeserializeOwned + Serialize,
    {
        let v = match flag {
            Some(v) => Some(v),
            None => self.file_value(key)?,
        };
        if let Some(v) = &v {
            self.record(key, v);
        }
        Ok(v)
    }

    /// A flag that may come from a `Vec` flag (empty means absent).
    pub fn pick_list<T>(&mut self, key: &str, flag: Vec<T>, default: Vec<T>) -> Result<Vec<T>, CliError>
    where
        T: DeserializeOwned + Serialize,
    {
        let flag = if flag.is_empty() { None } else { Some(flag) };
        self.pick(key, flag, default)
    }

    fn record<T: Serialize>(&mut self, key: &str, v: &T) {
        if let Ok(v) = toml::Value::try_from(v) {
            self.options.insert(key.to_string(), v);
        }
    }
}

/// Parse `a:b:n` into `n` evenly spaced points from `a` to `b` inclusive.
pub fn parse_range(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Input(format!("bad t range {s:?}, expected a:b:n"));
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(bad());
    };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    Ok(match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range() {
        assert_eq!(parse_range("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_range("0.2:1:1").unwrap(), vec![0.2]);
        assert!(parse_range("0:1").is_err());
    }

    #[test]
    fn flag_beats_file_beats_default() {
        let cfg: ConfigFile = toml::from_str("seed = 3\n[dio]\nnmax = 50\nc = [0.2]\n").unwrap();
        let mut r = Resolver::new("dio", &cfg);
        assert_eq!(r.pick("nmax", Some(7u64), 1000).unwrap(), 7);
        assert_eq!(r.pick("nmax", None, 1000u64).unwrap(), 50);
        assert_eq!(r.pick_list("c", vec![], vec![0.1]).unwrap(), vec![0.2]);
        assert_eq!(r.pick("samples", None, 9usize).unwrap(), 9);
        let mut r = Resolver::new("rho", &cfg);
        assert_eq!(r.pick("nmax", None, 1u64).unwrap(), 1);
    }
}
