//! One module per experiment. Each has a `Settings` whose defaults are the
//! acceptance-scale values, `Settings::from_params`, and `run`.

use std::path::Path;

use dpp_core::rng::StreamRng;
use dpp_core::stats::settled_grid;
use dpp_core::{Configuration, KernelSpec, Point, Window};
use rand::Rng;

use crate::config::{ConfigError, ExperimentConfig};
use crate::outcome::Outcome;
use crate::CliError;

pub mod cluster_formula;
pub mod cpi_limit;
pub mod cpi_monotonicity;
pub mod domination;
pub mod janossy;
pub mod matrix_ineq;
pub mod percolation;
pub mod renewal_equivalence;
pub mod sampler_validation;
pub mod vacuum_correlation;

/// What an experiment sees besides its settings.
pub struct Ctx<'a> {
    pub seed: u64,
    /// Where failure dumps may go; `None` for in-memory runs.
    pub out_dir: Option<&'a Path>,
}

impl Ctx<'_> {
    /// Independent seed for the `k`-th random component of a run.
    pub fn sub_seed(&self, k: u64) -> u64 {
        self.seed.wrapping_add(k.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

/// Parses the settings and runs the configured experiment.
pub fn run(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> Result<Outcome, CliError> {
    dispatch(cfg, out_dir, true).map(|o| o.expect("runs when asked to"))
}

/// Checks the `[params]` of `cfg` without running anything.
pub fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    match dispatch(cfg, None, false) {
        Ok(_) => Ok(()),
        Err(CliError::Config(e)) => Err(e),
        Err(e) => unreachable!("validation only parses: {e}"),
    }
}

fn dispatch(cfg: &ExperimentConfig, out_dir: Option<&Path>, execute: bool) -> Result<Option<Outcome>, CliError> {
    let p = cfg.params();
    let ctx = Ctx { seed: cfg.seed, out_dir };
    let wrap = |source| CliError::Core { experiment: cfg.experiment.clone(), seed: cfg.seed, source };
    macro_rules! go {
        ($m:ident) => {{
            let s = $m::Settings::from_params(&p)?;
            p.finish()?;
            if execute {
                $m::run(&s, &ctx).map(Some).map_err(wrap)
            } else {
                Ok(None)
            }
        }};
    }
    match cfg.experiment.as_str() {
        "matrix-ineq-suite" => go!(matrix_ineq),
        "cpi-monotonicity" => go!(cpi_monotonicity),
        "janossy-normalization" => go!(janossy),
        "sampler-validation" => go!(sampler_validation),
        "domination" => go!(domination),
        "vacuum-correlation" => go!(vacuum_correlation),
        "cpi-limit" => go!(cpi_limit),
        "cluster-formula" => go!(cluster_formula),
        "renewal-equivalence" => go!(renewal_equivalence),
        "percolation-curve" => go!(percolation),
        other => Err(ConfigError {
            field: Some("experiment".into()),
            line: None,
            message: format!("unknown experiment `{other}`"),
        }
        .into()),
    }
}

/// Starting grid for a 1D window: 16 nodes per unit length.
pub(crate) fn grid_for(len: f64) -> usize {
    ((16.0 * len).ceil() as usize).max(16)
}

/// Relative agreement of Fredholm determinants at `n` and `2n` required of
/// every grid an experiment uses.
pub(crate) const GRID_TOL: f64 = 1e-4;

/// Grid for the 1D window `w` at which `det(I - K_w)` has settled to
/// [`GRID_TOL`].
pub(crate) fn settled(spec: &KernelSpec, w: &Window) -> dpp_core::Result<usize> {
    settled_grid(spec, w, grid_for(w.side(0)), GRID_TOL)
}

pub(crate) fn uniform_point(rng: &mut StreamRng, w: &Window) -> Point {
    let u: Vec<f64> = (0..w.dim()).map(|_| rng.random::<f64>()).collect();
    w.at(&u)
}

/// `k` independent uniform points in `w`, redrawn in the null event of a
/// coincidence.
pub(crate) fn random_config(rng: &mut StreamRng, w: &Window, k: usize) -> Configuration {
    loop {
        let pts = (0..k).map(|_| uniform_point(rng, w)).collect();
        if let Ok(c) = Configuration::new(pts) {
            return c;
        }
    }
}

/// `k` uniform points in `w` avoiding every point of `other`.
pub(crate) fn random_config_disjoint(
    rng: &mut StreamRng,
    w: &Window,
    k: usize,
    other: &Configuration,
) -> Configuration {
    loop {
        let c = random_config(rng, w, k);
        if c.union(other).is_ok() {
            return c;
        }
    }
}

pub(crate) fn check_positive_list(
    p: &crate::config::Params,
    key: &str,
    xs: &[f64],
    increasing: bool,
) -> Result<(), ConfigError> {
    if xs.is_empty() || xs.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(p.error(key, "must be a nonempty list of positive numbers"));
    }
    if increasing && xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(p.error(key, "must be strictly increasing"));
    }
    Ok(())
}
