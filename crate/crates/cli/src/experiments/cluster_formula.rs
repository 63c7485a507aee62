//! For finite-range kernels the candidate ratio stabilises once the window
//! covers `W(α, ξ)`, at the value of the cluster formula.
//!
//! `results.csv`: `family, instances, comparisons, max_rel_diff,
//! violations, mean_hull_size`. A comparison is one (instance, window)
//! pair whose window contains `W(α, ξ)`.

use std::sync::Arc;

use dpp_core::percolation::hull_w;
use dpp_core::rng::{stream, StreamRng};
use dpp_core::stats::{cpi_candidate, cpi_cluster_formula};
use dpp_core::{KernelSpec, Modulation, Point, Result, Window};
use rand::Rng;
use rayon::prelude::*;

use super::{check_positive_list, random_config, random_config_disjoint, Ctx};
use crate::config::{ConfigError, Params};
use crate::outcome::{num, Assertion, Outcome, Table};

#[derive(Clone, Debug)]
pub struct Settings {
    pub instances: usize,
    pub max_xi: usize,
    pub max_alpha: usize,
    pub box_half: f64,
    pub half_widths: Vec<f64>,
    pub tol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            instances: 1000,
            max_xi: 15,
            max_alpha: 2,
            box_half: 5.0,
            half_widths: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            tol: 1e-10,
        }
    }
}

impl Settings {
    pub fn from_params(p: &Params) -> std::result::Result<Self, ConfigError> {
        let d = Settings::default();
        let s = Settings {
            instances: p.usize("instances", d.instances)?,
            max_xi: p.usize("max_xi", d.max_xi)?,
            max_alpha: p.usize("max_alpha", d.max_alpha)?,
            box_half: p.positive("box_half", d.box_half)?,
            half_widths: p.f64_list("half_widths", &d.half_widths)?,
            tol: p.positive("tol", d.tol)?,
        };
        check_positive_list(p, "half_widths", &s.half_widths, true)?;
        if s.max_alpha == 0 {
            return Err(p.error("max_alpha", "must be positive"));
        }
        Ok(s)
    }
}

fn families() -> Result<Vec<(&'static str, KernelSpec)>> {
    let modulation = Modulation { psi: Arc::new(|x: &Point| 1.0 + 0.5 * x.x().cos()), bound: 1.5 };
    Ok(vec![
        ("finite-range-1d", KernelSpec::finite_range_gaussian(1, 1.0, 0.4)?),
        ("modulated-1d", KernelSpec::modulated(KernelSpec::finite_range_gaussian(1, 0.5, 0.4)?, modulation)?),
        ("finite-range-2d", KernelSpec::finite_range_gaussian(2, 1.0, 0.3)?),
    ])
}

fn cube(dim: usize, h: f64) -> Result<Window> {
    Window::new(Point::from_slice(&vec![-h; dim])?, Point::from_slice(&vec![h; dim])?)
}

/// `(comparisons, violations, max relative difference, |W|)` for one instance.
fn instance(spec: &KernelSpec, s: &Settings, rng: &mut StreamRng) -> Result<(usize, usize, f64, usize)> {
    let d = spec.dim();
    let bx = cube(d, s.box_half)?;
    let m = rng.random_range(0..=s.max_xi);
    let xi = random_config(rng, &bx, m);
    let k = rng.random_range(1..=s.max_alpha);
    let alpha = random_config_disjoint(rng, &bx, k, &xi);
    let range = spec.declared_range().expect("finite-range family");
    let w = hull_w(&alpha, &xi, range)?;
    let cluster = cpi_cluster_formula(spec, &alpha, &xi)?;
    let windows = s.half_widths.iter().map(|&h| cube(d, h)).collect::<Result<Vec<_>>>()?;
    let cand = cpi_candidate(spec, &alpha, &xi, &windows)?;
    let (mut n, mut bad, mut worst) = (0, 0, 0.0f64);
    for (win, c) in windows.iter().zip(&cand) {
        if w.iter().all(|p| win.contains(p)) {
            let rel = (c - cluster).abs() / cluster.abs().max(1.0);
            n += 1;
            bad += usize::from(rel >= s.tol);
            worst = worst.max(rel);
        }
    }
    Ok((n, bad, worst, w.len()))
}

pub fn run(s: &Settings, ctx: &Ctx) -> Result<Outcome> {
    let fams = families()?;
    let mut out = Outcome {
        table: Table::new(&["family", "instances", "comparisons", "max_rel_diff", "violations", "mean_hull_size"]),
        ..Default::default()
    };
    let (mut total_bad, mut total_n, mut uncovered) = (0usize, 0usize, 0usize);
    let mut start = 0;
    for (fi, (name, spec)) in fams.iter().enumerate() {
        let count = s.instances / fams.len() + usize::from(fi < s.instances % fams.len());
        let res = (start..start + count)
            .into_par_iter()
            .map(|i| instance(spec, s, &mut stream(ctx.seed, i as u64)))
            .collect::<Result<Vec<_>>>()?;
        start += count;
        let n: usize = res.iter().map(|r| r.0).sum();
        let bad: usize = res.iter().map(|r| r.1).sum();
        let worst = res.iter().map(|r| r.2).fold(0.0, f64::max);
        let hull = res.iter().map(|r| r.3 as f64).sum::<f64>() / count.max(1) as f64;
        uncovered += res.iter().filter(|r| r.0 == 0).count();
        total_bad += bad;
        total_n += n;
        out.table.push(vec![
            name.to_string(),
            count.to_string(),
            n.to_string(),
            num(worst),
            bad.to_string(),
            format!("{hull:.4}"),
        ]);
        out.assertions.push(Assertion::new(
            format!("{name}: |candidate - cluster formula| < {:e} max(1,|v|) on covering windows", s.tol),
            format!("{bad} violations in {n} comparisons (max {worst:.3e})"),
            "== 0",
            bad == 0,
        ));
    }
    out.assertions.push(Assertion::new(
        "every instance has a window covering W(α,ξ)",
        format!("{uncovered} uncovered, {total_n} comparisons, {total_bad} violations"),
        "== 0 uncovered",
        uncovered == 0,
    ));
    Ok(out)
}
