//! The exponential-kernel DPP as a stationary renewal process: spacing
//! density, Papangelou intensity and a direct renewal sampler.

use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{DppError, Result};
use crate::kernels::RenewalClosedForms;
use crate::operators::DiscretizedOperator;
use crate::quadrature::Quadrature;
use crate::rng::{stream, StreamRng};
use crate::samplers::{SampleBatch, SpectralSampler};
use crate::space::{Configuration, Point, Window};

pub fn spacing_density(forms: &RenewalClosedForms, s: f64) -> f64 {
    forms.f(s)
}

/// `c_*(x, ξ) = d(ℓ) d(r) / d(ℓ + r)` for the gaps `ℓ, r` to the neighbours
/// of `x`.
pub fn renewal_pi(forms: &RenewalClosedForms, l: f64, r: f64) -> Result<f64> {
    if !(l > 0.0 && r > 0.0) {
        return Err(DppError::DomainError(format!("gaps must be positive, got {l} and {r}")));
    }
    // d(l) d(r) / d(l + r) with sinh written through exponentials so large
    // gaps do not overflow.
    let sg = forms.sigma;
    let c = 2.0 * forms.rho * forms.a / sg;
    let num = (-(2.0 * sg * l)).exp_m1() * (-(2.0 * sg * r)).exp_m1();
    let den = -(-(2.0 * sg * (l + r))).exp_m1();
    Ok(0.5 * c * num / den)
}

/// The same intensity in the form `f(ℓ) f(r) / f(ℓ + r)`.
pub fn renewal_pi_f_form(forms: &RenewalClosedForms, l: f64, r: f64) -> Result<f64> {
    if !(l > 0.0 && r > 0.0) {
        return Err(DppError::DomainError(format!("gaps must be positive, got {l} and {r}")));
    }
    Ok(forms.f(l) * forms.f(r) / forms.f(l + r))
}

/// `u(x_1) v(x_n) ∏ d(x_{i+1} - x_i)` for sorted points.
pub fn factorized_det_j(forms: &RenewalClosedForms, sorted: &[f64]) -> f64 {
    let (Some(first), Some(last)) = (sorted.first(), sorted.last()) else { return 1.0 };
    let gaps: f64 = sorted.windows(2).map(|w| forms.d_fn(w[1] - w[0])).product();
    forms.u(*first) * forms.v(*last) * gaps
}

/// Solves `tail(s) = target` for a decreasing tail with density `dens`.
fn invert_tail(tail: impl Fn(f64) -> f64, dens: impl Fn(f64) -> f64, target: f64, scale: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, scale);
    while tail(hi) > target {
        lo = hi;
        hi *= 2.0;
    }
    let mut s = 0.5 * (lo + hi);
    for _ in 0..200 {
        let g = tail(s) - target;
        if g.abs() <= 1e-16 * target {
            return s;
        }
        if g > 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        if hi - lo < 1e-14 * hi.max(1.0) {
            break;
        }
        let d = dens(s);
        let newton = s + g / d;
        s = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    s
}

fn sample_gap(forms: &RenewalClosedForms, rng: &mut StreamRng) -> f64 {
    let v: f64 = 1.0 - rng.random::<f64>();
    invert_tail(|s| forms.survival(s), |s| forms.f(s), v, 1.0 / forms.rho)
}

fn sample_forward(forms: &RenewalClosedForms, rng: &mut StreamRng) -> f64 {
    let v: f64 = 1.0 - rng.random::<f64>();
    invert_tail(|s| 1.0 - forms.forward_recurrence_cdf(s), |s| forms.rho * forms.survival(s), v, 1.0 / forms.rho)
}

/// How the renewal sequence is started relative to the window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RenewalStart {
    /// First point at a forward-recurrence time from the window's left end.
    Stationary,
    /// A point at `lo - distance`, then i.i.d. gaps; stationary only in the
    /// limit of large `distance`.
    BurnIn { distance: f64 },
}

fn renewal_one(forms: &RenewalClosedForms, window: &Window, start: RenewalStart, rng: &mut StreamRng) -> Configuration {
    let (lo, hi) = (window.lo(0), window.hi(0));
    let mut x = match start {
        RenewalStart::Stationary => lo + sample_forward(forms, rng),
        RenewalStart::BurnIn { distance } => {
            let mut x = lo - distance;
            while x < lo {
                x += sample_gap(forms, rng);
            }
            x
        }
    };
    let mut pts = Vec::new();
    while x <= hi {
        pts.push(Point::new1(x));
        x += sample_gap(forms, rng);
    }
    Configuration::new(pts).expect("gaps are positive")
}

pub fn sample_renewal_with(
    forms: &RenewalClosedForms,
    window: &Window,
    start: RenewalStart,
    count: usize,
    seed: u64,
) -> Result<SampleBatch> {
    if window.dim() != 1 {
        return Err(DppError::DimensionMismatch { expected: 1, got: window.dim() });
    }
    let t0 = Instant::now();
    let configs: Vec<Configuration> =
        (0..count).into_par_iter().map(|i| renewal_one(forms, window, start, &mut stream(seed, i as u64))).collect();
    Ok(SampleBatch {
        window: *window,
        configs,
        seed,
        method: "renewal".into(),
        params: vec![
            ("rho".into(), forms.rho.to_string()),
            ("a".into(), forms.a.to_string()),
            ("start".into(), format!("{start:?}")),
        ],
        grid_n: None,
        elapsed_secs: t0.elapsed().as_secs_f64(),
    })
}

pub fn sample_renewal(forms: &RenewalClosedForms, window: &Window, count: usize, seed: u64) -> Result<SampleBatch> {
    sample_renewal_with(forms, window, RenewalStart::Stationary, count, seed)
}

/// Spectral sampler of the reduced Palm process at 0, on `[0, len]` with
/// an `n`-node grid. Conditioning a DPP on a point at 0 gives the DPP with
/// kernel `K(x, y) - K(x, 0) K(0, y) / K(0, 0)`; for the renewal kernel its
/// first point is the spacing after a typical point, with law `f` cut at
/// `len`.
pub fn palm_sampler(forms: &RenewalClosedForms, len: f64, n: usize) -> Result<SpectralSampler> {
    let q = Arc::new(Quadrature::gauss_legendre(&Window::interval(0.0, len)?, n)?);
    let k0 = forms.k(0.0);
    let op = DiscretizedOperator::from_kernel(q, |x, y| forms.k(x.x() - y.x()) - forms.k(x.x()) * forms.k(y.x()) / k0);
    SpectralSampler::from_operator(&op)
}

/// `P(N_[0,L] = 0) = det(I - K_[0,L])` in closed form:
/// `e^{-aL} [(σ² + a²) sinh(σL) + 2aσ cosh(σL)] / (2aσ)`.
pub fn vacuum_closed_form(forms: &RenewalClosedForms, len: f64) -> f64 {
    let (a, sg) = (forms.a, forms.sigma);
    // e^{-aL} sinh and cosh through e^{(σ-a)L} and e^{-(σ+a)L}.
    let (p, m) = (((sg - a) * len).exp(), (-(sg + a) * len).exp());
    ((sg * sg + a * a) * 0.5 * (p - m) + 2.0 * a * sg * 0.5 * (p + m)) / (2.0 * a * sg)
}

/// `E[N(N-1)]` on `[0, L]`: the integral of `ρ² - K(x, y)²` over the square.
pub fn pair_integral_closed_form(forms: &RenewalClosedForms, len: f64) -> f64 {
    let rho = forms.rho;
    let c = 2.0 * forms.a;
    let square = 2.0 * (len / c + (-c * len).exp_m1() / (c * c));
    rho * rho * (len * len - square)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gof::{ks_critical, ks_statistic};
    use crate::kernels::KernelSpec;
    use crate::linalg::log_det;
    use crate::samplers::mean_se;
    use crate::stats::j_matrix;

    fn forms() -> RenewalClosedForms {
        RenewalClosedForms::new(0.25, 1.0).unwrap()
    }

    #[test]
    fn density_examples() {
        let f = forms();
        assert_eq!(spacing_density(&f, 0.0), 0.0);
        let sg = 0.5f64.sqrt();
        for s in [0.3, 1.0, 4.0, 12.0] {
            let want = 2.0 * 0.25 / sg * (-s as f64).exp() * (sg * s).sinh();
            assert!((spacing_density(&f, s) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn pi_forms_agree_and_are_symmetric() {
        let f = forms();
        for (l, r) in [(0.1, 0.2), (1.0, 3.0), (5.0, 0.4), (20.0, 20.0)] {
            let d = renewal_pi(&f, l, r).unwrap();
            let ff = renewal_pi_f_form(&f, l, r).unwrap();
            let direct = f.d_fn(l) * f.d_fn(r) / f.d_fn(l + r);
            assert!((d - ff).abs() < 1e-12 * d && (d - direct).abs() < 1e-12 * d);
            assert!((d - renewal_pi(&f, r, l).unwrap()).abs() < 1e-15);
        }
        assert!(renewal_pi(&f, 0.0, 1.0).is_err());
        // large gaps: the isolated-point intensity J(x, x) = ρa/σ
        assert!((renewal_pi(&f, 400.0, 400.0).unwrap() - f.j(0.0)).abs() < 1e-14);
    }

    #[test]
    fn factorization_matches_determinant() {
        let f = forms();
        let spec = KernelSpec::renewal(0.25, 1.0).unwrap();
        for xs in [vec![], vec![1.0], vec![0.5, 1.2, 4.0], vec![0.0, 0.01, 0.02, 7.5, 19.0]] {
            let cfg = Configuration::from_1d(&xs).unwrap();
            let det = log_det(&j_matrix(&spec, &cfg).unwrap()).value();
            let fac = factorized_det_j(&f, &xs);
            assert!((det - fac).abs() < 1e-9 * fac.abs(), "{det} vs {fac}");
        }
    }

    #[test]
    fn gap_and_forward_inversion() {
        let f = forms();
        for k in 1..100_000 {
            let v = k as f64 / 1e5;
            let s = invert_tail(|s| f.survival(s), |s| f.f(s), v, 4.0);
            assert!((f.survival(s) - v).abs() < 1e-12, "tail {v}");
            let s = invert_tail(|s| 1.0 - f.forward_recurrence_cdf(s), |s| 0.25 * f.survival(s), v, 4.0);
            assert!((f.forward_recurrence_cdf(s) - (1.0 - v)).abs() < 1e-12, "forward tail {v}");
        }
        let mut rng = stream(2, 0);
        let gaps: Vec<f64> = (0..20_000).map(|_| sample_gap(&f, &mut rng)).collect();
        assert!(ks_statistic(&gaps, |s| f.cdf(s)) < ks_critical(gaps.len(), 0.01));
        let fwd: Vec<f64> = (0..20_000).map(|_| sample_forward(&f, &mut rng)).collect();
        assert!(ks_statistic(&fwd, |s| f.forward_recurrence_cdf(s)) < ks_critical(fwd.len(), 0.01));
    }

    #[test]
    fn stationary_intensity() {
        let f = forms();
        let w = Window::interval(0.0, 40.0).unwrap();
        for start in [RenewalStart::Stationary, RenewalStart::BurnIn { distance: 200.0 }] {
            let b = sample_renewal_with(&f, &w, start, 20_000, 4).unwrap();
            let counts: Vec<f64> = b.counts().iter().map(|&c| c as f64).collect();
            let (m, se) = mean_se(&counts);
            assert!((m / 40.0 - 0.25).abs() < 3.0 * se / 40.0, "{start:?}: {m} ± {se}");
        }
        assert!(sample_renewal(&f, &Window::cube(2, 1.0).unwrap(), 1, 1).is_err());
    }

    #[test]
    fn vacuum_matches_fredholm_determinant() {
        // The kernel's kink on the diagonal makes the Nyström determinant
        // converge at O(h^2), so compare the Richardson extrapolant.
        let f = forms();
        let spec = KernelSpec::renewal(0.25, 1.0).unwrap();
        assert!((vacuum_closed_form(&f, 0.0) - 1.0).abs() < 1e-15);
        for len in [2.0, 10.0] {
            let w = Window::interval(0.0, len).unwrap();
            let coarse = crate::stats::vacuum_probability(&spec, &w, 256).unwrap();
            let fine = crate::stats::vacuum_probability(&spec, &w, 1024).unwrap();
            let extrapolated = (16.0 * fine - coarse) / 15.0;
            let exact = vacuum_closed_form(&f, len);
            assert!((extrapolated - exact).abs() < 1e-7 * exact, "L = {len}: {extrapolated} vs {exact}");
        }
    }

    #[test]
    fn pair_integral_matches_brute_force() {
        let f = forms();
        for len in [1.0, 10.0] {
            // midpoint rule on a 2000 x 2000 grid
            let m = 2000;
            let h = len / m as f64;
            let mut sum = 0.0;
            for i in 0..m {
                let x = (i as f64 + 0.5) * h;
                for j in 0..m {
                    let y = (j as f64 + 0.5) * h;
                    sum += f.rho * f.rho - f.k(x - y).powi(2);
                }
            }
            let brute = sum * h * h;
            let exact = pair_integral_closed_form(&f, len);
            assert!((brute - exact).abs() < 1e-5 * exact, "L = {len}: {brute} vs {exact}");
        }
    }

    #[test]
    fn palm_first_point_has_the_spacing_law() {
        let f = forms();
        let len = 20.0;
        let batch = palm_sampler(&f, len, 640).unwrap().sample_batch(20_000, 9);
        let firsts: Vec<f64> =
            batch.configs.iter().filter_map(|c| c.iter().map(|p| p.x()).min_by(f64::total_cmp)).collect();
        let cut = f.cdf(len);
        assert!(ks_statistic(&firsts, |t| f.cdf(t) / cut) < ks_critical(firsts.len(), 0.01));
        // E N = ∫ K(x,x) - K(x,0)^2 / K(0,0) dx = ρL - ρ(1 - e^{-2aL}) / (2a)
        let counts: Vec<f64> = batch.counts().iter().map(|&c| c as f64).collect();
        let (m, se) = mean_se(&counts);
        let hole = f.rho * (1.0 - (-2.0 * f.a * len).exp()) / (2.0 * f.a);
        assert!((m - (0.25 * len - hole)).abs() < 4.0 * se, "{m} ± {se}");
    }
}
