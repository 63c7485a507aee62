//! Experiment results and the artifacts written for them.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::config::ExperimentConfig;
use crate::registry::ExperimentInfo;
use crate::svg::Plot;

/// One checked statement with its observed value.
#[derive(Clone, Debug, PartialEq)]
pub struct Assertion {
    pub name: String,
    pub observed: String,
    pub threshold: String,
    pub passed: bool,
}

impl Assertion {
    pub fn new(
        name: impl Into<String>,
        observed: impl Into<String>,
        threshold: impl Into<String>,
        passed: bool,
    ) -> Self {
        Assertion { name: name.into(), observed: observed.into(), threshold: threshold.into(), passed }
    }

    /// `observed <= bound`.
    pub fn at_most(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Assertion::new(name, format!("{observed:.6e}"), format!("<= {bound:.6e}"), observed <= bound)
    }

    /// `observed >= bound`.
    pub fn at_least(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Assertion::new(name, format!("{observed:.6e}"), format!(">= {bound:.6e}"), observed >= bound)
    }

    /// `|observed - expected| <= k * se`.
    pub fn within_se(name: impl Into<String>, observed: f64, expected: f64, se: f64, k: f64) -> Self {
        Assertion::new(
            name,
            format!("{observed:.6} (expected {expected:.6}, z = {:.2})", (observed - expected) / se),
            format!("|z| <= {k}"),
            (observed - expected).abs() <= k * se,
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fixed-precision formatting for CSV cells, so output is byte-stable.
pub fn num(x: f64) -> String {
    format!("{x:.10e}")
}

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub table: Table,
    pub assertions: Vec<Assertion>,
    pub plot: Option<Plot>,
    /// Free-form lines appended to the summary.
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn summary(&self, info: &ExperimentInfo, seed: u64) -> String {
        let mut s = format!("experiment: {}\nanchor: {}\nseed: {seed}\n\n", info.name, info.anchor);
        for a in &self.assertions {
            s.push_str(&format!(
                "{} {}: observed {} (required {})\n",
                if a.passed { "PASS" } else { "FAIL" },
                a.name,
                a.observed,
                a.threshold
            ));
        }
        if !self.notes.is_empty() {
            s.push('\n');
            for n in &self.notes {
                s.push_str(n);
                s.push('\n');
            }
        }
        let failed = self.assertions.iter().filter(|a| !a.passed).count();
        s.push_str(&format!(
            "\nresult: {} ({} of {} assertions passed)\n",
            if failed == 0 { "PASS" } else { "FAIL" },
            self.assertions.len() - failed,
            self.assertions.len()
        ));
        s
    }

    /// Writes `results.csv`, `summary.txt`, `metadata.toml` and, when
    /// present, `plot.svg` into `dir`.
    pub fn write_artifacts(
        &self,
        dir: &Path,
        config: &ExperimentConfig,
        info: &ExperimentInfo,
        threads: usize,
        elapsed_secs: f64,
    ) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        let csv_file = fs::File::create(dir.join("results.csv"))?;
        self.table.write_csv(csv_file).map_err(std::io::Error::other)?;
        fs::write(dir.join("summary.txt"), self.summary(info, config.seed))?;
        if let Some(p) = &self.plot {
            fs::write(dir.join("plot.svg"), p.render())?;
        }
        let mut meta = toml::Table::new();
        meta.insert("experiment".into(), info.name.into());
        meta.insert("anchor".into(), info.anchor.into());
        meta.insert("seed".into(), toml::Value::Integer(config.seed as i64));
        meta.insert("threads".into(), toml::Value::Integer(threads as i64));
        meta.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        meta.insert("passed".into(), self.passed().into());
        meta.insert("elapsed_secs".into(), toml::Value::Float((elapsed_secs * 1000.0).round() / 1000.0));
        meta.insert("params".into(), toml::Value::Table(config.params_table().clone()));
        fs::write(dir.join("metadata.toml"), toml::to_string(&meta).map_err(std::io::Error::other)?)?;
        Ok(())
    }
}
