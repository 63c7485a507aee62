//! Random PSD matrices against the determinant inequalities.
//!
//! `results.csv`: `check, trials, violations, worst_excess`, where
//! `worst_excess` is the largest `(lhs - rhs) / max(1, |rhs|)` seen (for the
//! identity checks, relative error minus tolerance; for projection
//! inversion, minus the gap).

use dpp_core::matrix_ineq::{dump_failures, run_suite, SuiteConfig};
use dpp_core::Result;

use super::Ctx;
use crate::config::{ConfigError, Params};
use crate::outcome::{num, Assertion, Outcome, Table};

#[derive(Clone, Debug)]
pub struct Settings {
    pub trials: usize,
    pub projection_trials: usize,
    pub min_size: usize,
    pub max_size: usize,
    pub tol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        let d = SuiteConfig::default();
        Settings {
            trials: d.trials,
            projection_trials: d.projection_trials,
            min_size: d.min_size,
            max_size: d.max_size,
            tol: d.tol,
        }
    }
}

impl Settings {
    pub fn from_params(p: &Params) -> std::result::Result<Self, ConfigError> {
        let d = Settings::default();
        let s = Settings {
            trials: p.usize("trials", d.trials)?,
            projection_trials: p.usize("projection_trials", d.projection_trials)?,
            min_size: p.usize("min_size", d.min_size)?,
            max_size: p.usize("max_size", d.max_size)?,
            tol: p.positive("tol", d.tol)?,
        };
        if s.min_size < 2 {
            return Err(p.error("min_size", "must be at least 2"));
        }
        if s.max_size < s.min_size {
            return Err(p.error("max_size", "must be at least min_size"));
        }
        Ok(s)
    }
}

pub fn run(s: &Settings, ctx: &Ctx) -> Result<Outcome> {
    let cfg = SuiteConfig {
        trials: s.trials,
        projection_trials: s.projection_trials,
        min_size: s.min_size,
        max_size: s.max_size,
        tol: s.tol,
        seed: ctx.seed,
        ..SuiteConfig::default()
    };
    let report = run_suite(&cfg)?;
    let mut out =
        Outcome { table: Table::new(&["check", "trials", "violations", "worst_excess"]), ..Default::default() };
    for c in &report.checks {
        out.table.push(vec![c.name.to_string(), c.trials.to_string(), c.violations.to_string(), num(c.worst)]);
        out.assertions.push(Assertion::new(
            format!("{} violations over {} trials", c.name, c.trials),
            format!("{} (worst excess {:.3e})", c.violations, c.worst),
            "== 0",
            c.passed(),
        ));
    }
    if !report.passed() {
        if let Some(dir) = ctx.out_dir {
            let written = dump_failures(&cfg, &report, &dir.join("failures"))?;
            out.notes.push(format!("{written} failing instances written to failures/"));
        }
    }
    Ok(out)
}
