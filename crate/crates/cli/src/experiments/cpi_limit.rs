//! Convergence of local intensities to the renewal closed form, and the
//! decreasing candidate sequence built from the global `J`.
//!
//! Each instance draws `ξ` uniformly on `[0, L]` and a point `x` strictly
//! between two points of `ξ`, so that `ĉ_*({x}, ξ) = d(ℓ) d(r) / d(ℓ+r)`.
//!
//! `results.csv`: `kind, size, mean_abs_error, max_abs_error, instances`.
//! `kind = local` rows use `ĉ_Δ` on windows of length `size` centred in
//! `[0, L]`; `kind = candidate` rows use the global-`J` ratio on
//! `[x - size, x + size]`.

use dpp_core::operators::LocalInteraction;
use dpp_core::renewal::renewal_pi;
use dpp_core::rng::{stream, StreamRng};
use dpp_core::stats::{cpi_candidate, cpi_local};
use dpp_core::{Configuration, KernelSpec, Point, RenewalClosedForms, Result, Window};
use rand::Rng;
use rayon::prelude::*;

use super::{check_positive_list, grid_for, settled, Ctx};
use crate::config::{renewal_params, ConfigError, Params};
use crate::outcome::{num, Assertion, Outcome, Table};
use crate::svg::{Plot, Series};

#[derive(Clone, Debug)]
pub struct Settings {
    pub rho: f64,
    pub a: f64,
    pub instances: usize,
    pub window_len: f64,
    pub min_points: usize,
    pub max_points: usize,
    pub min_sep: f64,
    /// Lengths of the local windows, centred in `[0, window_len]`; the last
    /// must equal `window_len`.
    pub local_lengths: Vec<f64>,
    pub half_widths: Vec<f64>,
    pub tol: f64,
    pub mono_tol: f64,
    pub limit_tol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            rho: 0.25,
            a: 1.0,
            instances: 1000,
            window_len: 20.0,
            min_points: 2,
            max_points: 8,
            min_sep: 1e-3,
            local_lengths: vec![5.0, 10.0, 20.0],
            half_widths: vec![0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
            tol: 1e-4,
            mono_tol: 1e-10,
            limit_tol: 1e-9,
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
            instances: p.usize("instances", d.instances)?,
            window_len: p.positive("window_len", d.window_len)?,
            min_points: p.usize("min_points", d.min_points)?,
            max_points: p.usize("max_points", d.max_points)?,
            min_sep: p.positive("min_sep", d.min_sep)?,
            local_lengths: p.f64_list("local_lengths", &d.local_lengths)?,
            half_widths: p.f64_list("half_widths", &d.half_widths)?,
            tol: p.positive("tol", d.tol)?,
            mono_tol: p.positive("mono_tol", d.mono_tol)?,
            limit_tol: p.positive("limit_tol", d.limit_tol)?,
        };
        check_positive_list(p, "local_lengths", &s.local_lengths, true)?;
        check_positive_list(p, "half_widths", &s.half_widths, true)?;
        if s.local_lengths.last().is_some_and(|&l| l > s.window_len) {
            return Err(p.error("local_lengths", "must not exceed window_len"));
        }
        if s.min_points < 2 || s.max_points < s.min_points {
            return Err(p.error("min_points", "need 2 <= min_points <= max_points"));
        }
        if s.half_widths.last().is_some_and(|&h| h < s.window_len) {
            return Err(p.error("half_widths", "the last half-width must cover the whole window"));
        }
        Ok(s)
    }
}

struct Instance {
    exact: f64,
    /// `ĉ_Δ - exact` per local window, when `x` lies in it.
    local: Vec<Option<f64>>,
    /// Candidate values per half-width.
    candidates: Vec<f64>,
}

fn draw(rng: &mut StreamRng, s: &Settings) -> (Vec<f64>, f64) {
    loop {
        let m = rng.random_range(s.min_points..=s.max_points);
        let mut xs: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..s.window_len)).collect();
        xs.sort_by(f64::total_cmp);
        let (lo, hi) = (xs[0], xs[m - 1]);
        if hi - lo < 4.0 * s.min_sep || xs.windows(2).any(|w| w[1] - w[0] < 1e-9) {
            continue;
        }
        for _ in 0..100 {
            let x = rng.random_range(lo..hi);
            if xs.iter().all(|p| (p - x).abs() >= s.min_sep) {
                return (xs, x);
            }
        }
    }
}

fn instance(
    spec: &KernelSpec,
    forms: &RenewalClosedForms,
    locals: &[LocalInteraction],
    s: &Settings,
    rng: &mut StreamRng,
) -> Result<Instance> {
    let (xs, x) = draw(rng, s);
    let left = xs.iter().copied().filter(|&p| p < x).fold(f64::NEG_INFINITY, f64::max);
    let right = xs.iter().copied().filter(|&p| p > x).fold(f64::INFINITY, f64::min);
    let exact = renewal_pi(forms, x - left, right - x)?;
    let xi = Configuration::from_1d(&xs)?;
    let alpha = Configuration::new(vec![Point::new1(x)])?;
    let local = locals
        .iter()
        .map(|li| {
            if li.window().contains(&Point::new1(x)) {
                Ok(Some(cpi_local(li, &alpha, &xi.restrict(li.window()))?.value - exact))
            } else {
                Ok(None)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let windows = s.half_widths.iter().map(|h| Window::interval(x - h, x + h)).collect::<Result<Vec<_>>>()?;
    let candidates = cpi_candidate(spec, &alpha, &xi, &windows)?;
    Ok(Instance { exact, local, candidates })
}

pub fn run(s: &Settings, ctx: &Ctx) -> Result<Outcome> {
    let spec = KernelSpec::renewal(s.rho, s.a)?;
    let forms = *spec.renewal_forms().expect("renewal kernel");
    let centre = 0.5 * s.window_len;
    let locals = s
        .local_lengths
        .iter()
        .map(|&l| {
            let w = Window::interval(centre - 0.5 * l, centre + 0.5 * l)?;
            LocalInteraction::new(&spec, &w, (4 * grid_for(l)).max(settled(&spec, &w)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let res = (0..s.instances)
        .into_par_iter()
        .map(|i| instance(&spec, &forms, &locals, s, &mut stream(ctx.seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;

    let mut out = Outcome {
        table: Table::new(&["kind", "size", "mean_abs_error", "max_abs_error", "instances"]),
        ..Default::default()
    };
    let mut local_pts = Vec::new();
    let mut local_max = f64::NAN;
    for (k, len) in s.local_lengths.iter().enumerate() {
        let errs: Vec<f64> = res.iter().filter_map(|r| r.local[k]).map(f64::abs).collect();
        let max = errs.iter().copied().fold(0.0, f64::max);
        let mean = errs.iter().sum::<f64>() / errs.len().max(1) as f64;
        out.table.push(vec!["local".into(), num(*len), num(mean), num(max), errs.len().to_string()]);
        local_pts.push((*len, max.max(1e-17).log10()));
        local_max = max;
    }
    let mut cand_pts = Vec::new();
    let mut limit_err = 0.0f64;
    for (k, h) in s.half_widths.iter().enumerate() {
        let errs: Vec<f64> = res.iter().map(|r| (r.candidates[k] - r.exact).abs()).collect();
        let max = errs.iter().copied().fold(0.0, f64::max);
        let mean = errs.iter().sum::<f64>() / errs.len().max(1) as f64;
        out.table.push(vec!["candidate".into(), num(*h), num(mean), num(max), errs.len().to_string()]);
        cand_pts.push((2.0 * h, max.max(1e-17).log10()));
        if k + 1 == s.half_widths.len() {
            limit_err = res.iter().map(|r| (r.candidates[k] - r.exact).abs() / r.exact).fold(0.0, f64::max);
        }
    }
    let (mut mono_v, mut mono_w) = (0usize, f64::NEG_INFINITY);
    for r in &res {
        for w in r.candidates.windows(2) {
            mono_w = mono_w.max(w[1] - w[0]);
            mono_v += usize::from(w[1] > w[0] + s.mono_tol);
        }
    }
    let largest = s.local_lengths.last().copied().unwrap_or(s.window_len);
    out.assertions.push(Assertion::at_most(
        format!("max |ĉ_Δ({{x}}, ξ_Δ) - renewal_pi| on |Δ| = {largest}, {} instances", s.instances),
        local_max,
        s.tol,
    ));
    out.assertions.push(Assertion::new(
        format!("candidate sequence non-increasing (tolerance {:e})", s.mono_tol),
        format!("{mono_v} violations (largest increase {mono_w:.3e})"),
        "== 0",
        mono_v == 0,
    ));
    out.assertions.push(Assertion::at_most(
        "candidate limit vs renewal_pi, max relative error",
        limit_err,
        s.limit_tol,
    ));
    out.plot = Some(Plot {
        title: "Distance to the closed-form intensity".into(),
        x_label: "window length".into(),
        y_label: "log10 max |error|".into(),
        series: vec![
            Series { name: "local ĉ_Δ".into(), points: local_pts, markers: false },
            Series { name: "global-J candidate".into(), points: cand_pts, markers: false },
        ],
    });
    Ok(out)
}
