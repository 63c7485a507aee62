//! Negative correlation of vacuum events: `det(I - K_{Λ∪Δ}) <=
//! det(I - K_Λ) det(I - K_Δ)` on random disjoint interval pairs, and a
//! Monte Carlo estimate of `P(N_Λ = 0, N_Δ = 0) - P(N_Λ = 0) P(N_Δ = 0)`.
//! Pair endpoints lie on the panel lattice of a settled grid, so all three
//! determinants are principal minors of one matrix.
//!
//! `results.csv`: `part, family, lambda_lo, lambda_hi, delta_lo, delta_hi,
//! p_lambda, p_delta, p_union, excess, se`. `excess` is the joint vacuum
//! probability minus the product; `se` is filled for Monte Carlo rows.

use std::sync::Arc;

use dpp_core::linalg::{log_det, principal};
use dpp_core::operators::DiscretizedOperator;
use dpp_core::quadrature::{Grid, Quadrature, PANEL_ORDER};
use dpp_core::rng::stream;
use dpp_core::samplers::{mean_se, sample_dpp_spectral};
use dpp_core::{KernelSpec, Result, Window};
use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use super::{settled, Ctx};
use crate::config::{renewal_params, ConfigError, Params};
use crate::outcome::{num, Assertion, Outcome, Table};

#[derive(Clone, Debug)]
pub struct Settings {
    pub rho: f64,
    pub a: f64,
    pub range: f64,
    pub amplitude: f64,
    pub pairs: usize,
    pub tol: f64,
    pub samples: usize,
    pub k_se: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { rho: 0.25, a: 1.0, range: 1.0, amplitude: 0.5, pairs: 100, tol: 1e-9, samples: 100_000, k_se: 3.0 }
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
            pairs: p.usize("pairs", d.pairs)?,
            tol: p.positive("tol", d.tol)?,
            samples: p.usize("samples", d.samples)?,
            k_se: p.positive("k_se", d.k_se)?,
        })
    }
}

fn det_i_minus(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    log_det(&(DMatrix::identity(n, n) - m)).to_value()
}

/// Window pairs live in `[0, DOMAIN]`.
const DOMAIN: f64 = 20.0;
/// Longest `|Λ| + |Δ|` a random pair can have; the grid is settled on it.
const LONGEST_UNION: f64 = 8.0;

/// One weighted `K` matrix on a composite Gauss rule over `[0, DOMAIN]`.
/// Window endpoints are drawn on the lattice of panel boundaries, so every
/// `Λ`, `Δ` and `Λ ∪ Δ` is an exact sub-rule and its determinant is a
/// principal minor of the shared matrix.
struct SharedGrid {
    quad: Quadrature,
    matrix: DMatrix<f64>,
    panels_per_unit: usize,
}

impl SharedGrid {
    fn new(spec: &KernelSpec) -> Result<SharedGrid> {
        let probe = Window::interval(0.0, LONGEST_UNION)?;
        let n = settled(spec, &probe)?;
        let panels_per_unit = (n as f64 / (LONGEST_UNION * PANEL_ORDER as f64)).ceil().max(1.0) as usize;
        let dom = Window::interval(0.0, DOMAIN)?;
        let panels = panels_per_unit * DOMAIN as usize;
        let (quad, matrix) = match spec.renewal_forms() {
            Some(forms) => {
                let q = Arc::new(Quadrature::from_grid(&dom, Grid { panels, order: PANEL_ORDER })?);
                let op = DiscretizedOperator::from_kernel(q.clone(), |x, y| forms.k(x.x() - y.x()));
                (q.as_ref().clone(), op.matrix().clone())
            }
            None => {
                let table = spec.table(&dom, panels * PANEL_ORDER)?;
                (table.quadrature().clone(), table.weighted_matrix())
            }
        };
        Ok(SharedGrid { quad, matrix, panels_per_unit })
    }

    fn step(&self) -> f64 {
        1.0 / self.panels_per_unit as f64
    }

    /// `(det(I-K_Λ), det(I-K_Δ), det(I-K_{Λ∪Δ}))`.
    fn vacuum_triple(&self, lam: &Window, del: &Window) -> Result<(f64, f64, f64)> {
        let (ia, _) = self.quad.restrict(lam)?;
        let (ib, _) = self.quad.restrict(del)?;
        let union: Vec<usize> = ia.iter().chain(&ib).copied().collect();
        let m = &self.matrix;
        Ok((det_i_minus(&principal(m, &ia)), det_i_minus(&principal(m, &ib)), det_i_minus(&principal(m, &union))))
    }

    /// A random disjoint pair with endpoints on the panel lattice: lengths in
    /// `[0.5, 4]`, gap in `(0, 3]`.
    fn random_pair(&self, rng: &mut impl Rng) -> Result<(Window, Window)> {
        let u = self.panels_per_unit;
        let (l1, l2) = (rng.random_range(u.div_ceil(2)..=4 * u), rng.random_range(u.div_ceil(2)..=4 * u));
        let gap = rng.random_range(1..=3 * u);
        let lo = rng.random_range(0..=DOMAIN as usize * u - (l1 + gap + l2));
        let h = self.step();
        let at = |k: usize| k as f64 * h;
        Ok((Window::interval(at(lo), at(lo + l1))?, Window::interval(at(lo + l1 + gap), at(lo + l1 + gap + l2))?))
    }
}

pub fn run(s: &Settings, ctx: &Ctx) -> Result<Outcome> {
    let families = [
        ("renewal", KernelSpec::renewal(s.rho, s.a)?),
        ("finite-range-1d", KernelSpec::finite_range_gaussian(1, s.range, s.amplitude)?),
    ];
    let mut out = Outcome {
        table: Table::new(&[
            "part",
            "family",
            "lambda_lo",
            "lambda_hi",
            "delta_lo",
            "delta_hi",
            "p_lambda",
            "p_delta",
            "p_union",
            "excess",
            "se",
        ]),
        ..Default::default()
    };
    for (k, (name, spec)) in families.iter().enumerate() {
        let grid = SharedGrid::new(spec)?;
        out.notes.push(format!(
            "{name}: {} nodes per unit on [0,{DOMAIN}], endpoints on a lattice of step {}",
            grid.panels_per_unit * PANEL_ORDER,
            grid.step()
        ));
        let rows = (0..s.pairs)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(ctx.sub_seed(k as u64 + 1), i as u64);
                let (lam, del) = grid.random_pair(&mut rng)?;
                let (pa, pb, pu) = grid.vacuum_triple(&lam, &del)?;
                Ok((lam, del, pa, pb, pu))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut violations = 0;
        let mut worst = f64::NEG_INFINITY;
        for (lam, del, pa, pb, pu) in &rows {
            let excess = pu - pa * pb;
            worst = worst.max(excess);
            violations += usize::from(excess > s.tol);
            out.table.push(vec![
                "fredholm".into(),
                name.to_string(),
                num(lam.lo(0)),
                num(lam.hi(0)),
                num(del.lo(0)),
                num(del.hi(0)),
                num(*pa),
                num(*pb),
                num(*pu),
                num(excess),
                String::new(),
            ]);
        }
        out.assertions.push(Assertion::new(
            format!("{name}: det(I-K_{{Λ∪Δ}}) <= det(I-K_Λ) det(I-K_Δ) + {:e}, {} pairs", s.tol, s.pairs),
            format!("{violations} violations (worst excess {worst:.3e})"),
            "== 0",
            violations == 0,
        ));

        let lam = Window::interval(0.0, 2.0)?;
        let del = Window::interval(3.0, 5.0)?;
        let w = Window::interval(0.0, 5.0)?;
        let batch = sample_dpp_spectral(spec, &w, settled(spec, &w)?, s.samples, ctx.sub_seed(k as u64 + 11))?;
        let ind =
            |win: &Window| -> Vec<f64> { batch.count_in(win).iter().map(|&c| f64::from(u8::from(c == 0))).collect() };
        let (ia, ib) = (ind(&lam), ind(&del));
        let iab: Vec<f64> = ia.iter().zip(&ib).map(|(x, y)| x * y).collect();
        let (pa, pb, pab) = (mean_se(&ia).0, mean_se(&ib).0, mean_se(&iab).0);
        // Delta-method influence function of pab - pa pb.
        let psi: Vec<f64> = (0..ia.len()).map(|i| iab[i] - pb * ia[i] - pa * ib[i]).collect();
        let se = mean_se(&psi).1;
        let excess = pab - pa * pb;
        out.table.push(vec![
            "monte-carlo".into(),
            name.to_string(),
            num(lam.lo(0)),
            num(lam.hi(0)),
            num(del.lo(0)),
            num(del.hi(0)),
            num(pa),
            num(pb),
            num(pab),
            num(excess),
            num(se),
        ]);
        let (ea, eb, eu) = grid.vacuum_triple(&lam, &del)?;
        out.notes.push(format!(
            "{name}: Fredholm values on Λ=[0,2], Δ=[3,5]: {ea:.6} {eb:.6}, union {eu:.6}, excess {:.3e}",
            eu - ea * eb
        ));
        out.assertions.push(Assertion::new(
            format!("{name}: μ̂(N_Λ=0, N_Δ=0) <= μ̂(N_Λ=0) μ̂(N_Δ=0) + {} SE", s.k_se),
            format!("excess {excess:.3e}, SE {se:.3e}"),
            format!("<= {:.3e}", s.k_se * se),
            excess <= s.k_se * se,
        ));
    }
    Ok(out)
}
