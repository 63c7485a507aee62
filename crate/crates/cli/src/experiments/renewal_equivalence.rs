//! The exponential-kernel DPP is the stationary renewal process with
//! spacing density `f(s) = e^{-as} d(s)`.
//!
//! Spacings come from the Palm process: the DPP conditioned on a point at 0,
//! sampled spectrally on `[0, palm_len]`. Its first point is the gap after a
//! typical point, so it has law `f` cut at `palm_len` and is compared with
//! `F(t) / F(palm_len)`. Pooling every gap of stationary samples would
//! length-bias the sample towards short gaps. Counts of the stationary
//! spectral DPP on `[0, count_window]` are compared with the direct renewal
//! sampler, and `det J(α, α)` with its factorisation.
//!
//! `results.csv`: `check, statistic, threshold, n`.

use dpp_core::gof::{chi_square_two_sample, ks_critical, ks_statistic};
use dpp_core::linalg::log_det;
use dpp_core::renewal::{factorized_det_j, palm_sampler, sample_renewal};
use dpp_core::rng::stream;
use dpp_core::samplers::SpectralSampler;
use dpp_core::stats::j_matrix;
use dpp_core::{Configuration, KernelSpec, Result, Window};
use rand::Rng;
use rayon::prelude::*;

use super::{settled, Ctx};
use crate::config::{renewal_params, ConfigError, Params};
use crate::outcome::{num, Assertion, Outcome, Table};
use crate::svg::{Plot, Series};

#[derive(Clone, Debug)]
pub struct Settings {
    pub rho: f64,
    pub a: f64,
    pub samples: usize,
    pub palm_len: f64,
    /// Palm grid; 0 picks a settled grid.
    pub grid: usize,
    pub ks_alpha: f64,
    pub count_window: f64,
    pub p_min: f64,
    pub alpha_trials: usize,
    pub max_alpha: usize,
    pub alpha_box: f64,
    pub factor_tol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            rho: 0.25,
            a: 1.0,
            samples: 100_000,
            palm_len: 20.0,
            grid: 0,
            ks_alpha: 0.01,
            count_window: 10.0,
            p_min: 1e-3,
            alpha_trials: 10_000,
            max_alpha: 8,
            alpha_box: 20.0,
            factor_tol: 1e-9,
        }
    }
}

impl Settings {
    pub fn from_params(p: &Params) -> std::result::Result<Self, ConfigError> {
        let d = Settings::default();
        let (rho, a) = renewal_params(p, d.rho, d.a)?;
        let s = Settings {
            rho,
            a,
            samples: p.usize("samples", d.samples)?,
            palm_len: p.positive("palm_len", d.palm_len)?,
            grid: p.usize("grid", d.grid)?,
            ks_alpha: p.positive("ks_alpha", d.ks_alpha)?,
            count_window: p.positive("count_window", d.count_window)?,
            p_min: p.positive("p_min", d.p_min)?,
            alpha_trials: p.usize("alpha_trials", d.alpha_trials)?,
            max_alpha: p.usize("max_alpha", d.max_alpha)?,
            alpha_box: p.positive("alpha_box", d.alpha_box)?,
            factor_tol: p.positive("factor_tol", d.factor_tol)?,
        };
        if s.max_alpha == 0 {
            return Err(p.error("max_alpha", "must be positive"));
        }
        Ok(s)
    }
}

pub fn run(s: &Settings, ctx: &Ctx) -> Result<Outcome> {
    let spec = KernelSpec::renewal(s.rho, s.a)?;
    let forms = *spec.renewal_forms().expect("renewal kernel");
    let pw = Window::interval(0.0, s.palm_len)?;
    // The Palm kernel has the same diagonal kink, so the stationary grid serves.
    let grid = if s.grid == 0 { settled(&spec, &pw)? } else { s.grid };
    let palm = palm_sampler(&forms, s.palm_len, grid)?.sample_batch(s.samples, ctx.sub_seed(1));
    let spacings: Vec<f64> =
        palm.configs.iter().filter_map(|c| c.iter().map(|p| p.x()).min_by(f64::total_cmp)).collect();
    let mass = forms.cdf(s.palm_len);
    let ks = ks_statistic(&spacings, |t| forms.cdf(t) / mass);
    let crit = ks_critical(spacings.len(), s.ks_alpha);
    let mut out = Outcome { table: Table::new(&["check", "statistic", "threshold", "n"]), ..Default::default() };
    out.table.push(vec!["ks_first_spacing".into(), num(ks), num(crit), spacings.len().to_string()]);
    out.assertions.push(Assertion::new(
        format!("KS distance of Palm first points to f on [0,{}], {} spacings", s.palm_len, spacings.len()),
        format!("{ks:.6}"),
        format!("< {crit:.6} (critical value at level {})", s.ks_alpha),
        ks < crit,
    ));

    let cw = Window::interval(0.0, s.count_window)?;
    let cgrid = settled(&spec, &cw)?;
    let batch = SpectralSampler::new(&spec, &cw, cgrid)?.sample_batch(s.samples, ctx.sub_seed(4));
    out.notes.push(format!(
        "Palm grid on [0,{}]: {grid} nodes; count grid on [0,{}]: {cgrid} nodes",
        s.palm_len, s.count_window
    ));
    let renewal = sample_renewal(&forms, &cw, s.samples, ctx.sub_seed(2))?;
    let p = chi_square_two_sample(&batch.count_in(&cw), &renewal.counts())?;
    out.table.push(vec!["count_chi_square_p".into(), num(p), num(s.p_min), s.samples.to_string()]);
    out.assertions.push(Assertion::at_least(
        format!("counts on [0,{}]: spectral DPP vs renewal sampler, chi-square p", s.count_window),
        p,
        s.p_min,
    ));

    let rels = (0..s.alpha_trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(ctx.sub_seed(3), i as u64);
            let k = rng.random_range(1..=s.max_alpha);
            let mut xs: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..s.alpha_box)).collect();
            xs.sort_by(f64::total_cmp);
            let alpha = Configuration::from_1d(&xs)?;
            let direct = log_det(&j_matrix(&spec, &alpha)?).to_value();
            let factored = factorized_det_j(&forms, &xs);
            Ok((direct - factored).abs() / factored.abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = rels.iter().copied().fold(0.0, f64::max);
    out.table.push(vec![
        "det_factorization_max_rel_error".into(),
        num(worst),
        num(s.factor_tol),
        s.alpha_trials.to_string(),
    ]);
    out.assertions.push(Assertion::at_most(
        format!("det J(α,α) vs u(x₁)v(xₙ)∏d(gaps), max relative error over {} sets", s.alpha_trials),
        worst,
        s.factor_tol,
    ));

    // Histogram of spacings against f / F(palm_len).
    let (bins, top) = (40usize, s.palm_len);
    let h = top / bins as f64;
    let mut hist = vec![0usize; bins];
    for &t in &spacings {
        if t < top {
            hist[(t / h) as usize] += 1;
        }
    }
    let n = spacings.len().max(1) as f64;
    out.plot = Some(Plot {
        title: "First point of Palm samples against f".into(),
        x_label: "s".into(),
        y_label: "density".into(),
        series: vec![
            Series {
                name: "f(s) / F(L)".into(),
                points: (0..=400).map(|i| i as f64 * top / 400.0).map(|t| (t, forms.f(t) / mass)).collect(),
                markers: false,
            },
            Series {
                name: "DPP histogram".into(),
                points: hist.iter().enumerate().map(|(i, &c)| ((i as f64 + 0.5) * h, c as f64 / (n * h))).collect(),
                markers: true,
            },
        ],
    });
    Ok(out)
}
