//! Experiment configuration files.
//!
//! ```toml
//! experiment = "sampler-validation"
//! seed = 7
//! threads = 2          # optional, defaults to all cores
//!
//! [params]             # experiment-specific, all optional
//! samples = 100000
//! ```

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use toml::{Table, Value};

use crate::registry;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error")?;
        if let Some(line) = self.line {
            write!(f, " at line {line}")?;
        }
        if let Some(field) = &self.field {
            write!(f, " in field `{field}`")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

/// 1-based line of the first `key =` assignment in `source`.
fn line_of(source: &str, key: &str) -> Option<usize> {
    source
        .lines()
        .position(|l| {
            let t = l.trim_start();
            t.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|i| i + 1)
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub seed: u64,
    pub threads: Option<usize>,
    params: Table,
    source: String,
}

impl ExperimentConfig {
    pub fn parse(source: &str) -> Result<ExperimentConfig, ConfigError> {
        let table: Table = source.parse().map_err(|e: toml::de::Error| ConfigError {
            field: None,
            line: e.span().map(|s| source[..s.start].lines().count().max(1)),
            message: e.message().to_string(),
        })?;
        let err = |field: &str, message: String| ConfigError {
            field: Some(field.to_string()),
            line: line_of(source, field),
            message,
        };
        for key in table.keys() {
            if !["experiment", "seed", "threads", "params"].contains(&key.as_str()) {
                return Err(err(key, "unknown top-level key".into()));
            }
        }
        let experiment = match table.get("experiment") {
            Some(Value::String(s)) => s.clone(),
            Some(_) => return Err(err("experiment", "must be a string".into())),
            None => {
                return Err(ConfigError { field: Some("experiment".into()), line: None, message: "missing".into() })
            }
        };
        if registry::find(&experiment).is_none() {
            let names: Vec<&str> = registry::EXPERIMENTS.iter().map(|e| e.name).collect();
            return Err(err("experiment", format!("unknown experiment `{experiment}`; known: {}", names.join(", "))));
        }
        let seed = match table.get("seed") {
            None => 0,
            Some(Value::Integer(i)) if *i >= 0 => *i as u64,
            Some(_) => return Err(err("seed", "must be a nonnegative integer".into())),
        };
        let threads = match table.get("threads") {
            None => None,
            Some(Value::Integer(0)) => None,
            Some(Value::Integer(i)) if *i > 0 => Some(*i as usize),
            Some(_) => return Err(err("threads", "must be a nonnegative integer".into())),
        };
        let params = match table.get("params") {
            None => Table::new(),
            Some(Value::Table(t)) => t.clone(),
            Some(_) => return Err(err("params", "must be a table".into())),
        };
        Ok(ExperimentConfig { experiment, seed, threads, params, source: source.to_string() })
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            field: None,
            line: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        ExperimentConfig::parse(&text)
    }

    /// Config with default parameters.
    pub fn named(experiment: &str, seed: u64) -> Result<ExperimentConfig, ConfigError> {
        ExperimentConfig::parse(&format!("experiment = {experiment:?}\nseed = {seed}\n"))
    }

    pub fn params(&self) -> Params<'_> {
        Params { table: &self.params, source: &self.source, used: RefCell::new(BTreeSet::new()) }
    }

    /// Parameters as given, in key order, for the metadata sidecar.
    pub fn params_table(&self) -> &Table {
        &self.params
    }
}

/// Typed access to `[params]`, recording which keys were read.
pub struct Params<'a> {
    table: &'a Table,
    source: &'a str,
    used: RefCell<BTreeSet<String>>,
}

impl Params<'_> {
    pub fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError { field: Some(format!("params.{key}")), line: line_of(self.source, key), message: message.into() }
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.used.borrow_mut().insert(key.to_string());
        self.table.get(key)
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(Value::Float(x)) => Ok(*x),
            Some(Value::Integer(i)) => Ok(*i as f64),
            Some(_) => Err(self.error(key, "must be a number")),
        }
    }

    pub fn positive(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let v = self.f64(key, default)?;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.error(key, format!("must be positive, got {v}")))
        }
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
            Some(_) => Err(self.error(key, "must be a nonnegative integer")),
        }
    }

    pub fn f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    Value::Float(x) => Ok(*x),
                    Value::Integer(i) => Ok(*i as f64),
                    _ => Err(self.error(key, "must be an array of numbers")),
                })
                .collect(),
            Some(_) => Err(self.error(key, "must be an array of numbers")),
        }
    }

    /// Fails on any key that was never read.
    pub fn finish(&self) -> Result<(), ConfigError> {
        let used = self.used.borrow();
        match self.table.keys().find(|k| !used.contains(*k)) {
            Some(k) => Err(self.error(k, "unknown parameter for this experiment")),
            None => Ok(()),
        }
    }
}

/// Renewal parameters with the `ρ < a/2` constraint reported as a config error.
pub fn renewal_params(p: &Params, rho: f64, a: f64) -> Result<(f64, f64), ConfigError> {
    let rho = p.positive("rho", rho)?;
    let a = p.positive("a", a)?;
    if rho >= a / 2.0 {
        return Err(p.error("rho", format!("constraint rho < a/2 violated: rho = {rho}, a = {a}")));
    }
    Ok((rho, a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let c = ExperimentConfig::parse("experiment = \"domination\"\nseed = 3\n").unwrap();
        assert_eq!(c.experiment, "domination");
        assert_eq!(c.seed, 3);
        assert_eq!(c.threads, None);
    }

    #[test]
    fn reports_line_of_bad_field() {
        let src = "experiment = \"domination\"\nseed = 1\n\n[params]\nsamples = -4\n";
        let c = ExperimentConfig::parse(src).unwrap();
        let p = c.params();
        let e = p.usize("samples", 10).unwrap_err();
        assert_eq!(e.line, Some(5));
        assert_eq!(e.field.as_deref(), Some("params.samples"));
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let e = ExperimentConfig::parse("experiment = \"domination\"\nseed = = 2\n").unwrap_err();
        assert_eq!(e.line, Some(2));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::parse("experiment = \"domination\"\nsed = 1\n").is_err());
        let c = ExperimentConfig::parse("experiment = \"domination\"\n[params]\nsampels = 1\n").unwrap();
        let p = c.params();
        p.usize("samples", 1).unwrap();
        assert!(p.finish().is_err());
    }
}
