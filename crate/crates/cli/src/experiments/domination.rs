//! Increasing functionals under the DPP against the Poisson process with
//! intensity `J(x, x)`.
//!
//! `results.csv`: `family, functional, mean_dpp, se_dpp, mean_poisson,
//! se_poisson, z`, with `z = (mean_dpp - mean_poisson) / SE`.

use dpp_core::samplers::{domination_test, sample_dpp_spectral, sample_poisson, Functional};
use dpp_core::{KernelSpec, Result, Window};

use super::{settled, Ctx};
use crate::config::{renewal_params, ConfigError, Params};
use crate::outcome::{num, Assertion, Outcome, Table};

#[derive(Clone, Debug)]
pub struct Settings {
    pub rho: f64,
    pub a: f64,
    pub range: f64,
    pub amplitude: f64,
    pub samples: usize,
    pub window_len: f64,
    pub grid: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { rho: 0.25, a: 1.0, range: 1.0, amplitude: 0.5, samples: 100_000, window_len: 10.0, grid: 0 }
    }
}

impl Settings {
    pub fn from_params(p: &Params) -> std::result::Result<Self, ConfigError> {
        let d = Settings::default();
        let (rho, a) = renewal_params(p, d.rho, d.a)?;
        Ok(Settings {
            rho,
            a,
            range: p.positive("range", d.range)?,
            amplitude: p.positive("amplitude", d.amplitude)?,
            samples: p.usize("samples", d.samples)?,
            window_len: p.positive("window_len", d.window_len)?,
            grid: p.usize("grid", d.grid)?,
        })
    }
}

pub fn run(s: &Settings, ctx: &Ctx) -> Result<Outcome> {
    let w = Window::interval(0.0, s.window_len)?;
    let families = [
        ("renewal", KernelSpec::renewal(s.rho, s.a)?),
        ("finite-range-1d", KernelSpec::finite_range_gaussian(1, s.range, s.amplitude)?),
    ];
    let mut out = Outcome {
        table: Table::new(&["family", "functional", "mean_dpp", "se_dpp", "mean_poisson", "se_poisson", "z"]),
        ..Default::default()
    };
    for (k, (name, spec)) in families.iter().enumerate() {
        let grid = if s.grid == 0 { settled(spec, &w)? } else { s.grid };
        out.notes.push(format!("{name}: spectral grid {grid} nodes"));
        let dpp = sample_dpp_spectral(spec, &w, grid, s.samples, ctx.sub_seed(2 * k as u64 + 1))?;
        let z = spec.j_diag_sup();
        let pois = sample_poisson(&|_| z, z, &w, s.samples, ctx.sub_seed(2 * k as u64 + 2))?;
        let report = domination_test(&dpp, &pois, &Functional::defaults(&w))?;
        for r in &report.rows {
            out.table.push(vec![
                name.to_string(),
                r.functional.clone(),
                num(r.mean_a),
                num(r.se_a),
                num(r.mean_b),
                num(r.se_b),
                format!("{:.4}", r.z),
            ]);
            out.assertions.push(Assertion::new(
                format!("{name}: E_DPP {} <= E_Poisson(z={z:.6}) + 3 SE", r.functional),
                format!("{:.6} vs {:.6} (z = {:.2})", r.mean_a, r.mean_b, r.z),
                "z <= 3",
                !r.violation,
            ));
        }
    }
    Ok(out)
}
