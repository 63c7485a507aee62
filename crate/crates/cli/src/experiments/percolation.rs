//! Spanning probabilities of the Boolean model in 1D: the renewal DPP
//! against the Poisson process with intensity `z = J(x, x)`.
//!
//! `results.csv`: `process, window_size, mean_largest_fraction, se,
//! spanning_prob, se`.

use dpp_core::percolation::{percolation_curve, CurveRow};
use dpp_core::samplers::{sample_dpp_spectral, sample_poisson, SampleBatch};
use dpp_core::{KernelSpec, Result, Window};

use super::{check_positive_list, settled, Ctx};
use crate::config::{renewal_params, ConfigError, Params};
use crate::outcome::{num, Assertion, Outcome, Table};
use crate::svg::{Plot, Series};

#[derive(Clone, Debug)]
pub struct Settings {
    pub rho: f64,
    pub a: f64,
    pub radius: f64,
    pub sizes: Vec<f64>,
    pub reps: usize,
    pub k_se: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            rho: 0.25,
            a: 1.0,
            radius: 2.0,
            sizes: vec![4.0, 8.0, 12.0, 16.0, 24.0, 32.0],
            reps: 20_000,
            k_se: 3.0,
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
            radius: p.positive("radius", d.radius)?,
            sizes: p.f64_list("sizes", &d.sizes)?,
            reps: p.usize("reps", d.reps)?,
            k_se: p.positive("k_se", d.k_se)?,
        };
        check_positive_list(p, "sizes", &s.sizes, true)?;
        Ok(s)
    }
}

fn se_diff(a: f64, b: f64) -> f64 {
    (a * a + b * b).sqrt()
}

pub fn run(s: &Settings, ctx: &Ctx) -> Result<Outcome> {
    let spec = KernelSpec::renewal(s.rho, s.a)?;
    let z = spec.j_diag_sup();
    let windows = s.sizes.iter().map(|&l| Window::interval(0.0, l)).collect::<Result<Vec<_>>>()?;
    let dpp = |w: &Window, reps: usize, seed: u64| -> Result<SampleBatch> {
        sample_dpp_spectral(&spec, w, settled(&spec, w)?, reps, seed)
    };
    let pois = |w: &Window, reps: usize, seed: u64| -> Result<SampleBatch> { sample_poisson(&|_| z, z, w, reps, seed) };
    let rd = percolation_curve(&dpp, s.radius, &windows, s.reps, ctx.sub_seed(1))?;
    let rp = percolation_curve(&pois, s.radius, &windows, s.reps, ctx.sub_seed(2))?;

    let mut out = Outcome {
        table: Table::new(&["process", "window_size", "mean_largest_fraction", "se", "spanning_prob", "se"]),
        ..Default::default()
    };
    for (name, rows) in [("dpp", &rd), ("poisson", &rp)] {
        for r in rows.iter() {
            out.table.push(vec![
                name.into(),
                num(r.window_size),
                num(r.mean_largest_fraction),
                num(r.largest_se),
                num(r.spanning_prob),
                num(r.spanning_se),
            ]);
        }
    }
    for (d, p) in rd.iter().zip(&rp) {
        let bound = p.spanning_prob + s.k_se * se_diff(d.spanning_se, p.spanning_se);
        out.assertions.push(Assertion::new(
            format!("L = {}: DPP spanning <= Poisson(z={z:.6}) spanning + {} SE", d.window_size, s.k_se),
            format!("{:.5} vs {:.5}", d.spanning_prob, p.spanning_prob),
            format!("<= {bound:.5}"),
            d.spanning_prob <= bound,
        ));
    }
    let monotone = |rows: &[CurveRow]| -> (usize, f64) {
        let mut bad = 0;
        let mut worst = f64::NEG_INFINITY;
        for w in rows.windows(2) {
            let z = (w[1].spanning_prob - w[0].spanning_prob)
                / se_diff(w[0].spanning_se, w[1].spanning_se).max(f64::MIN_POSITIVE);
            worst = worst.max(z);
            bad += usize::from(
                w[1].spanning_prob > w[0].spanning_prob + s.k_se * se_diff(w[0].spanning_se, w[1].spanning_se),
            );
        }
        (bad, worst)
    };
    for (name, rows) in [("DPP", &rd), ("Poisson", &rp)] {
        let (bad, worst) = monotone(rows);
        out.assertions.push(Assertion::new(
            format!("{name} spanning probability decreasing in window size (within {} SE)", s.k_se),
            format!("{bad} increases (largest z {worst:.2})"),
            "== 0",
            bad == 0,
        ));
    }
    let pts = |rows: &[CurveRow]| rows.iter().map(|r| (r.window_size, r.spanning_prob)).collect();
    out.plot = Some(Plot {
        title: format!("Spanning probability, R = {}", s.radius),
        x_label: "window size".into(),
        y_label: "P(spanning)".into(),
        series: vec![
            Series { name: "DPP".into(), points: pts(&rd), markers: false },
            Series { name: format!("Poisson z = {z:.4}"), points: pts(&rp), markers: false },
        ],
    });
    Ok(out)
}
