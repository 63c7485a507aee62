//! Normalisation of the Janossy densities: `Σ_m (1/m!) ∫ σ_Λ = 1`.
//!
//! The terms come from the discretised spectrum as `det(I - K_Λ) e_m(μ)`.
//! The `m = 1` term is also integrated directly, `∫ σ_Λ({x}) dx`, on a
//! second quadrature rule with different nodes as an independent check.
//! Off-grid evaluation goes through the Nyström interpolant, so the two
//! agree only to discretisation accuracy, hence a relative tolerance.
//!
//! 1D grids are raised until `det(I - K_Λ)` settles between `n` and `2n`.
//! A 2D table at `2n` does not fit in memory, so the 2D note reports the
//! gap between `n/2` and `n` instead.
//!
//! `results.csv`: `case, m, term, partial_sum`.

use dpp_core::operators::LocalInteraction;
use dpp_core::quadrature::Quadrature;
use dpp_core::stats::{janossy, janossy_series, vacuum_probability};
use dpp_core::{Configuration, KernelSpec, Result, Window};

use super::{settled, Ctx};
use crate::config::{ConfigError, Params};
use crate::outcome::{num, Assertion, Outcome, Table};
use crate::svg::{Plot, Series};

#[derive(Clone, Debug)]
pub struct Settings {
    pub tol: f64,
    pub next_term: f64,
    pub grid_1d: usize,
    pub grid_2d: usize,
    /// Nodes per dimension of the independent rule for the `m = 1` term.
    pub check_grid_1d: usize,
    pub check_grid_2d: usize,
    pub check_rel_tol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            tol: 1e-5,
            next_term: 1e-8,
            grid_1d: 64,
            grid_2d: 12,
            check_grid_1d: 40,
            check_grid_2d: 20,
            check_rel_tol: 1e-3,
        }
    }
}

impl Settings {
    pub fn from_params(p: &Params) -> std::result::Result<Self, ConfigError> {
        let d = Settings::default();
        Ok(Settings {
            tol: p.positive("tol", d.tol)?,
            next_term: p.positive("next_term", d.next_term)?,
            grid_1d: p.usize("grid_1d", d.grid_1d)?,
            grid_2d: p.usize("grid_2d", d.grid_2d)?,
            check_grid_1d: p.usize("check_grid_1d", d.check_grid_1d)?,
            check_grid_2d: p.usize("check_grid_2d", d.check_grid_2d)?,
            check_rel_tol: p.positive("check_rel_tol", d.check_rel_tol)?,
        })
    }
}

pub fn run(s: &Settings, _ctx: &Ctx) -> Result<Outcome> {
    let cases = [
        ("renewal [0,1]", KernelSpec::renewal(0.25, 1.0)?, Window::interval(0.0, 1.0)?, s.grid_1d, s.check_grid_1d),
        (
            "finite-range-1d [0,1]",
            KernelSpec::finite_range_gaussian(1, 0.5, 0.5)?,
            Window::interval(0.0, 1.0)?,
            s.grid_1d,
            s.check_grid_1d,
        ),
        (
            "finite-range-2d [0,1]^2",
            KernelSpec::finite_range_gaussian(2, 0.5, 0.5)?,
            Window::cube(2, 1.0)?,
            s.grid_2d,
            s.check_grid_2d,
        ),
    ];
    let mut out = Outcome { table: Table::new(&["case", "m", "term", "partial_sum"]), ..Default::default() };
    let mut series = Vec::new();
    for (name, spec, window, grid, check_grid) in cases {
        let (grid, lo, hi) = if window.dim() == 1 {
            let g = grid.max(settled(&spec, &window)?);
            (g, g, 2 * g)
        } else {
            (grid, grid / 2, grid)
        };
        let (pl, ph) = (vacuum_probability(&spec, &window, lo)?, vacuum_probability(&spec, &window, hi)?);
        out.notes.push(format!("{name}: det(I-K_Λ) at n = {lo} vs {hi}: relative gap {:.2e}", ((pl - ph) / ph).abs()));
        let li = LocalInteraction::new(&spec, &window, grid)?;
        let terms = janossy_series(&li, s.next_term);
        let mut partial = 0.0;
        for (m, t) in terms.iter().enumerate() {
            partial += t;
            out.table.push(vec![name.into(), m.to_string(), num(*t), num(partial)]);
        }
        let last = *terms.last().expect("the m = 0 term is always present");
        out.assertions.push(Assertion::at_most(format!("{name}: |Σ terms - 1|"), (partial - 1.0).abs(), s.tol));
        out.assertions.push(Assertion::new(
            format!("{name}: truncation after m = {}", terms.len() - 1),
            format!("last term {last:.3e}"),
            format!("< {:e}", s.next_term),
            last < s.next_term,
        ));
        let q = Quadrature::gauss_legendre(&window, check_grid)?;
        let direct = q
            .nodes()
            .iter()
            .zip(q.weights())
            .map(|(x, w)| Ok(w * janossy(&li, &Configuration::new(vec![*x])?)?))
            .sum::<Result<f64>>()?;
        if let Some(t1) = terms.get(1) {
            out.assertions.push(Assertion::at_most(
                format!("{name}: relative gap between ∫ σ_Λ({{x}}) dx on an independent rule and the m=1 term"),
                (direct - t1).abs() / t1.abs(),
                s.check_rel_tol,
            ));
        }
        series.push(Series {
            name: name.into(),
            points: terms.iter().enumerate().filter(|(_, t)| **t > 0.0).map(|(m, t)| (m as f64, t.log10())).collect(),
            markers: false,
        });
    }
    out.plot = Some(Plot {
        title: "Janossy normalisation terms".into(),
        x_label: "m".into(),
        y_label: "log10 (1/m!) ∫ σ_Λ".into(),
        series,
    });
    Ok(out)
}
