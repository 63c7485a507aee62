//! Monotonicity of `ĉ_Λ(α, ·)` and the bound by `∏ J_[Λ](x, x)` on random
//! windows for the renewal kernel and finite-range kernels in 1D and 2D.
//!
//! `results.csv`: one row per window, `family, window, instances,
//! max_monotone_excess, max_bound_excess, monotone_violations,
//! bound_violations`. Excesses are `ĉ(α,η) - ĉ(α,ξ)` and
//! `ĉ(α,ξ) - ∏ J_[Λ](x,x)`; negative values mean the inequality holds.

use dpp_core::linalg::principal;
use dpp_core::operators::LocalInteraction;
use dpp_core::rng::{stream, StreamRng};
use dpp_core::stats::DeterminantRatio;
use dpp_core::{KernelSpec, Point, Result, Window};
use rand::Rng;
use rayon::prelude::*;

use super::{random_config, random_config_disjoint, settled, Ctx};
use crate::config::{ConfigError, Params};
use crate::outcome::{num, Assertion, Outcome, Table};

#[derive(Clone, Debug)]
pub struct Settings {
    pub instances: usize,
    pub windows_per_family: usize,
    pub max_points: usize,
    pub max_alpha: usize,
    pub tol: f64,
    pub grid_1d: usize,
    pub grid_2d: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            instances: 10_000,
            windows_per_family: 5,
            max_points: 6,
            max_alpha: 3,
            tol: 1e-9,
            grid_1d: 64,
            grid_2d: 6,
        }
    }
}

impl Settings {
    pub fn from_params(p: &Params) -> std::result::Result<Self, ConfigError> {
        let d = Settings::default();
        let s = Settings {
            instances: p.usize("instances", d.instances)?,
            windows_per_family: p.usize("windows_per_family", d.windows_per_family)?,
            max_points: p.usize("max_points", d.max_points)?,
            max_alpha: p.usize("max_alpha", d.max_alpha)?,
            tol: p.positive("tol", d.tol)?,
            grid_1d: p.usize("grid_1d", d.grid_1d)?,
            grid_2d: p.usize("grid_2d", d.grid_2d)?,
        };
        if s.windows_per_family == 0 {
            return Err(p.error("windows_per_family", "must be positive"));
        }
        if s.max_alpha == 0 {
            return Err(p.error("max_alpha", "must be positive"));
        }
        Ok(s)
    }
}

struct Family {
    name: &'static str,
    spec: KernelSpec,
    grid: usize,
    window: fn(&mut StreamRng) -> Window,
}

fn families(s: &Settings) -> Result<Vec<Family>> {
    Ok(vec![
        Family {
            name: "renewal",
            spec: KernelSpec::renewal(0.25, 1.0)?,
            grid: s.grid_1d,
            window: |rng| {
                let lo = rng.random_range(0.0..10.0);
                Window::interval(lo, lo + rng.random_range(1.0..4.0)).expect("nonempty")
            },
        },
        Family {
            name: "finite-range-1d",
            spec: KernelSpec::finite_range_gaussian(1, 1.0, 0.5)?,
            grid: s.grid_1d,
            window: |rng| {
                let lo = rng.random_range(-5.0..5.0);
                Window::interval(lo, lo + rng.random_range(1.0..3.0)).expect("nonempty")
            },
        },
        Family {
            name: "finite-range-2d",
            spec: KernelSpec::finite_range_gaussian(2, 0.5, 0.4)?,
            grid: s.grid_2d,
            window: |rng| {
                let (x, y) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                let side = rng.random_range(0.5..1.5);
                Window::rect(x, x + side, y, y + side).expect("nonempty")
            },
        },
    ])
}

/// `(ĉ(α,η) - ĉ(α,ξ), ĉ(α,ξ) - ∏ J_[Λ](x,x))` for one random instance.
/// Every quantity is a principal minor of one matrix `J_[Λ](αη, αη)`.
fn instance(li: &LocalInteraction, s: &Settings, rng: &mut StreamRng) -> Result<(f64, f64)> {
    let w = li.window();
    let m = rng.random_range(0..=s.max_points);
    let eta = random_config(rng, w, m);
    let mask: Vec<bool> = (0..m).map(|_| rng.random_bool(0.5)).collect();
    let xi = eta.select(&mask);
    let k = rng.random_range(1..=s.max_alpha);
    let alpha = random_config_disjoint(rng, w, k, &eta);
    let all = alpha.union(&eta)?;
    let j = li.matrix(&all);
    let idx =
        |keep: &dyn Fn(&Point) -> bool| -> Vec<usize> { (0..all.len()).filter(|&i| keep(&all.points()[i])).collect() };
    let ratio = |with: &[usize], without: &[usize]| {
        DeterminantRatio::from_matrices(&principal(&j, with), &principal(&j, without)).value
    };
    let a_idx = idx(&|p| alpha.contains(p));
    let c_xi = ratio(&idx(&|p| alpha.contains(p) || xi.contains(p)), &idx(&|p| xi.contains(p)));
    let c_eta = ratio(&(0..all.len()).collect::<Vec<_>>(), &idx(&|p| !alpha.contains(p)));
    let bound: f64 = a_idx.iter().map(|&i| j[(i, i)]).product();
    Ok((c_eta - c_xi, c_xi - bound))
}

pub fn run(s: &Settings, ctx: &Ctx) -> Result<Outcome> {
    let fams = families(s)?;
    let slots = fams.len() * s.windows_per_family;
    let mut out = Outcome {
        table: Table::new(&[
            "family",
            "window",
            "instances",
            "max_monotone_excess",
            "max_bound_excess",
            "monotone_violations",
            "bound_violations",
        ]),
        ..Default::default()
    };
    let (mut mono_v, mut bound_v) = (0usize, 0usize);
    let (mut mono_w, mut bound_w) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut start = 0usize;
    for (fi, fam) in fams.iter().enumerate() {
        for k in 0..s.windows_per_family {
            let slot = fi * s.windows_per_family + k;
            let count = s.instances / slots + usize::from(slot < s.instances % slots);
            let mut wrng = stream(ctx.sub_seed(1), slot as u64);
            let window = (fam.window)(&mut wrng);
            // 1D grids are raised until the vacuum determinant settles.
            let grid = if window.dim() == 1 { fam.grid.max(settled(&fam.spec, &window)?) } else { fam.grid };
            let li = LocalInteraction::new(&fam.spec, &window, grid)?;
            let res = (start..start + count)
                .into_par_iter()
                .map(|i| instance(&li, s, &mut stream(ctx.seed, i as u64)))
                .collect::<Result<Vec<_>>>()?;
            start += count;
            let mono = res.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
            let bound = res.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
            let mv = res.iter().filter(|r| r.0 > s.tol).count();
            let bv = res.iter().filter(|r| r.1 > s.tol).count();
            mono_v += mv;
            bound_v += bv;
            mono_w = mono_w.max(mono);
            bound_w = bound_w.max(bound);
            let wdesc = (0..window.dim())
                .map(|d| format!("[{:.6},{:.6}]", window.lo(d), window.hi(d)))
                .collect::<Vec<_>>()
                .join("x");
            out.table.push(vec![
                fam.name.into(),
                wdesc,
                count.to_string(),
                num(mono),
                num(bound),
                mv.to_string(),
                bv.to_string(),
            ]);
        }
    }
    out.assertions.push(Assertion::new(
        format!("ĉ(α,ξ) >= ĉ(α,η) - {:e} for ξ ⊂ η, {} instances", s.tol, s.instances),
        format!("{mono_v} violations (worst excess {mono_w:.3e})"),
        "== 0",
        mono_v == 0,
    ));
    out.assertions.push(Assertion::new(
        format!("ĉ(α,ξ) <= ∏ J_[Λ](x,x) + {:e}, {} instances", s.tol, s.instances),
        format!("{bound_v} violations (worst excess {bound_w:.3e})"),
        "== 0",
        bound_v == 0,
    ));
    Ok(out)
}
