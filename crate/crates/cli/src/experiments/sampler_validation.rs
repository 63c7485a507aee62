//! Spectral sampler moments against closed forms for the renewal kernel,
//! and the birth-death sampler against the spectral sampler.
//!
//! `results.csv`: `quantity, observed, expected, se, z`. The chi-square row
//! reports its p-value as `observed` and leaves the other columns empty.

use dpp_core::gof::chi_square_two_sample;
use dpp_core::renewal::{pair_integral_closed_form, vacuum_closed_form};
use dpp_core::samplers::{mean_se, refine_grid, BirthDeathSampler, BirthDeathSchedule, SpectralSampler};
use dpp_core::{KernelSpec, Result, Window};

use super::{settled, Ctx};
use crate::config::{renewal_params, ConfigError, Params};
use crate::outcome::{num, Assertion, Outcome, Table};
use crate::svg::{Plot, Series};

#[derive(Clone, Debug)]
pub struct Settings {
    pub rho: f64,
    pub a: f64,
    pub samples: usize,
    pub window_len: f64,
    /// Spectral grid; 0 picks a settled grid and refines it for intensity.
    pub grid: usize,
    pub bd_window_len: f64,
    pub bd_samples: usize,
    pub bd_grid: usize,
    pub k_se: f64,
    pub p_min: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            rho: 0.25,
            a: 1.0,
            samples: 100_000,
            window_len: 10.0,
            grid: 0,
            bd_window_len: 4.0,
            bd_samples: 10_000,
            bd_grid: 64,
            k_se: 3.0,
            p_min: 1e-3,
        }
    }
}

impl Settings {
    pub fn from_params(p: &Params) -> std::result::Result<Self, ConfigError> {
        let d = Settings::default();
        let (rho, a) = renewal_params(p, d.rho, d.a)?;
        Ok(Settings {
            rho,
            a,
            samples: p.usize("samples", d.samples)?,
            window_len: p.positive("window_len", d.window_len)?,
            grid: p.usize("grid", d.grid)?,
            bd_window_len: p.positive("bd_window_len", d.bd_window_len)?,
            bd_samples: p.usize("bd_samples", d.bd_samples)?,
            bd_grid: p.usize("bd_grid", d.bd_grid)?,
            k_se: p.positive("k_se", d.k_se)?,
            p_min: p.positive("p_min", d.p_min)?,
        })
    }
}

fn pmf_points(counts: &[usize]) -> Vec<(f64, f64)> {
    let max = counts.iter().copied().max().unwrap_or(0);
    let n = counts.len().max(1) as f64;
    (0..=max).map(|k| (k as f64, counts.iter().filter(|&&c| c == k).count() as f64 / n)).collect()
}

pub fn run(s: &Settings, ctx: &Ctx) -> Result<Outcome> {
    let spec = KernelSpec::renewal(s.rho, s.a)?;
    let forms = *spec.renewal_forms().expect("renewal kernel");
    let len = s.window_len;
    let w = Window::interval(0.0, len)?;
    let grid = if s.grid == 0 {
        let n0 = settled(&spec, &w)?;
        refine_grid(&spec, &w, n0, 4 * n0, s.samples)?
    } else {
        s.grid
    };
    let batch = SpectralSampler::new(&spec, &w, grid)?.sample_batch(s.samples, ctx.sub_seed(1));
    let counts: Vec<f64> = batch.counts().iter().map(|&c| c as f64).collect();
    let mut out = Outcome { table: Table::new(&["quantity", "observed", "expected", "se", "z"]), ..Default::default() };
    let mut check = |name: &str, xs: Vec<f64>, expected: f64, scale: f64| {
        let (m, se) = mean_se(&xs);
        let (m, se) = (m / scale, se / scale);
        out.table.push(vec![name.into(), num(m), num(expected), num(se), format!("{:.4}", (m - expected) / se)]);
        out.assertions.push(Assertion::within_se(name, m, expected, se, s.k_se));
    };
    check("intensity N/|Λ| vs K(x,x)", counts.clone(), forms.k(0.0), len);
    check(
        "E[N(N-1)] vs ∫∫ det K(2x2)",
        counts.iter().map(|n| n * (n - 1.0)).collect(),
        pair_integral_closed_form(&forms, len),
        1.0,
    );
    check(
        "P(N=0) vs det(I-K_Λ)",
        counts.iter().map(|&n| f64::from(u8::from(n == 0.0))).collect(),
        vacuum_closed_form(&forms, len),
        1.0,
    );

    let wb = Window::interval(0.0, s.bd_window_len)?;
    let bd = BirthDeathSampler::new(&spec, &wb, s.bd_grid)?.sample_batch(
        &BirthDeathSchedule::default(),
        s.bd_samples,
        ctx.sub_seed(2),
    )?;
    let sp = SpectralSampler::new(&spec, &wb, settled(&spec, &wb)?)?.sample_batch(s.bd_samples, ctx.sub_seed(3));
    let (bc, sc) = (bd.counts(), sp.counts());
    let p = chi_square_two_sample(&bc, &sc)?;
    out.table.push(vec![
        "birth-death vs spectral count chi-square p".into(),
        num(p),
        String::new(),
        String::new(),
        String::new(),
    ]);
    out.assertions.push(Assertion::at_least("birth-death vs spectral counts, chi-square p", p, s.p_min));
    out.notes.push(format!("spectral grid on [0,{len}]: {grid} nodes"));
    out.plot = Some(Plot {
        title: format!("Counts on [0,{}]: birth-death vs spectral", s.bd_window_len),
        x_label: "N".into(),
        y_label: "frequency".into(),
        series: vec![
            Series { name: "birth-death".into(), points: pmf_points(&bc), markers: false },
            Series { name: "spectral".into(), points: pmf_points(&sc), markers: true },
        ],
    });
    Ok(out)
}
