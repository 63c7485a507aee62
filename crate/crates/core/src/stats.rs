//! Correlation functions, Janossy densities and compound Papangelou
//! intensities as determinant ratios.

use nalgebra::DMatrix;

use crate::error::{DppError, Result};
use crate::kernels::KernelSpec;
use crate::linalg::{log_det, LOG_DET_FLOOR};
use crate::operators::{discretize, LocalInteraction, Which};
use crate::percolation::hull_w;
use crate::space::{Configuration, Point, Window};

/// `exp(numerator - denominator)`, defined as 0 when the denominator
/// vanishes. Log-determinants of non-positive determinants are `-inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeterminantRatio {
    pub numerator_logdet: f64,
    pub denominator_logdet: f64,
    pub value: f64,
}

fn positive_logdet(m: &DMatrix<f64>) -> f64 {
    let ld = log_det(m);
    if ld.is_positive() {
        ld.log_abs
    } else {
        f64::NEG_INFINITY
    }
}

impl DeterminantRatio {
    pub fn new(numerator_logdet: f64, denominator_logdet: f64) -> Self {
        let value = if denominator_logdet <= LOG_DET_FLOOR || numerator_logdet == f64::NEG_INFINITY {
            0.0
        } else {
            (numerator_logdet - denominator_logdet).exp()
        };
        DeterminantRatio { numerator_logdet, denominator_logdet, value }
    }

    pub fn from_matrices(num: &DMatrix<f64>, den: &DMatrix<f64>) -> Self {
        DeterminantRatio::new(positive_logdet(num), positive_logdet(den))
    }
}

fn kernel_matrix(pts: &[Point], f: impl Fn(&Point, &Point) -> Result<f64>) -> Result<DMatrix<f64>> {
    let m = pts.len();
    let mut out = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = f(&pts[i], &pts[j])?;
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(out)
}

/// `J(α, α)` from the global interaction kernel.
pub fn j_matrix(spec: &KernelSpec, alpha: &Configuration) -> Result<DMatrix<f64>> {
    kernel_matrix(alpha.points(), |x, y| spec.eval_j(x, y))
}

pub fn k_matrix(spec: &KernelSpec, alpha: &Configuration) -> Result<DMatrix<f64>> {
    kernel_matrix(alpha.points(), |x, y| spec.eval_k(x, y))
}

/// `ρ(α) = det K(α, α)`.
pub fn correlation(spec: &KernelSpec, alpha: &Configuration) -> Result<f64> {
    let k = k_matrix(spec, alpha)?;
    let det = log_det(&k).value();
    let scale = k.iter().fold(0.0f64, |a, v| a.max(v.abs())).powi(alpha.len() as i32).max(1.0);
    if det < -1e-9 * scale {
        return Err(DppError::NumericalBreakdown(format!("det K(α, α) = {det:e} < 0")));
    }
    Ok(det.max(0.0))
}

fn check_inside(li: &LocalInteraction, cfg: &Configuration) -> Result<()> {
    match cfg.iter().find(|p| !li.window().contains(p)) {
        Some(p) => Err(DppError::DomainError(format!("point {:?} outside the window", p.coords()))),
        None => Ok(()),
    }
}

/// `σ_Λ(ξ) = det(I - K_Λ) det J_[Λ](ξ, ξ)`.
pub fn janossy(li: &LocalInteraction, xi: &Configuration) -> Result<f64> {
    check_inside(li, xi)?;
    let ld = positive_logdet(&li.matrix(xi));
    Ok(li.fredholm() * ld.exp())
}

/// Terms `(1/m!) ∫_{Λ^m} σ_Λ` of the Janossy normalisation series, computed
/// on the window's quadrature as `det(I - K_Λ) e_m(μ)` with `μ` the
/// eigenvalues of the discretised `J_[Λ]`. Stops once a term after the peak
/// falls below `tol`.
pub fn janossy_series(li: &LocalInteraction, tol: f64) -> Vec<f64> {
    let mu: Vec<f64> =
        li.k_operator().spectrum().clipped().into_iter().filter(|&l| l > 0.0).map(|l| l / (1.0 - l)).collect();
    // e[m] = elementary symmetric polynomial of degree m, grown one
    // eigenvalue at a time.
    let max_m = mu.len();
    let mut e = vec![0.0; max_m + 1];
    e[0] = 1.0;
    for (k, &m) in mu.iter().enumerate() {
        for j in (1..=k + 1).rev() {
            e[j] += m * e[j - 1];
        }
    }
    let mut terms = Vec::new();
    let mut peaked = false;
    for (m, em) in e.iter().enumerate() {
        let t = li.fredholm() * em;
        terms.push(t);
        if m > 0 && t < terms[m - 1] {
            peaked = true;
        }
        if peaked && t < tol {
            break;
        }
    }
    terms
}

/// `ĉ_Λ(α, ξ) = det J_[Λ](αξ, αξ) / det J_[Λ](ξ, ξ)`.
pub fn cpi_local(li: &LocalInteraction, alpha: &Configuration, xi: &Configuration) -> Result<DeterminantRatio> {
    let all = alpha.union(xi)?;
    check_inside(li, &all)?;
    Ok(DeterminantRatio::from_matrices(&li.matrix(&all), &li.matrix(xi)))
}

/// Ratio with the global `J` on the points of `αξ_Δ` and `ξ_Δ`.
pub fn global_ratio(spec: &KernelSpec, alpha: &Configuration, xi: &Configuration) -> Result<DeterminantRatio> {
    let all = alpha.union(xi)?;
    Ok(DeterminantRatio::from_matrices(&j_matrix(spec, &all)?, &j_matrix(spec, xi)?))
}

/// The candidate intensity sequence `det J(αξ_Δ) / det J(ξ_Δ)` over an
/// increasing family of windows. The sequence is non-increasing.
pub fn cpi_candidate(
    spec: &KernelSpec,
    alpha: &Configuration,
    xi: &Configuration,
    windows: &[Window],
) -> Result<Vec<f64>> {
    if !spec.has_closed_form_j() {
        return Err(DppError::NoClosedForm);
    }
    for pair in windows.windows(2) {
        if !pair[1].contains_window(&pair[0]) {
            return Err(DppError::InvalidWindow("candidate windows must increase".into()));
        }
    }
    windows.iter().map(|w| Ok(global_ratio(spec, alpha, &xi.restrict(w))?.value)).collect()
}

/// The cluster formula: the candidate ratio over `W(α, ξ)`, the clusters of
/// the Boolean model with the kernel's range hitting `α`.
pub fn cpi_cluster_formula(spec: &KernelSpec, alpha: &Configuration, xi: &Configuration) -> Result<f64> {
    let r = spec.declared_range().ok_or(DppError::NoFiniteRange)?;
    if alpha.is_empty() {
        return Ok(1.0);
    }
    let w = hull_w(alpha, xi, r)?;
    let xi_w = w.select(&w.iter().map(|p| !alpha.contains(p)).collect::<Vec<_>>());
    Ok(DeterminantRatio::from_matrices(&j_matrix(spec, &w)?, &j_matrix(spec, &xi_w)?).value)
}

/// Kernel of the conditional process on `Λ` given `ξ` on `Δ \ Λ`:
/// `J^ξ(x, y) = det J_[Δ](xξ, yξ) / det J_[Δ](ξ, ξ)`.
pub struct ConditionalKernel<'a> {
    li: &'a LocalInteraction,
    inner: Window,
    xi: Vec<Point>,
    xi_gram: DMatrix<f64>,
    denominator: f64,
}

impl<'a> ConditionalKernel<'a> {
    pub fn window(&self) -> &Window {
        &self.inner
    }

    /// Bordered determinant with rows `xξ` and columns `yξ`.
    pub fn eval(&self, x: &Point, y: &Point) -> f64 {
        let m = self.xi.len();
        let mut b = DMatrix::zeros(m + 1, m + 1);
        b.view_mut((1, 1), (m, m)).copy_from(&self.xi_gram);
        b[(0, 0)] = self.li.eval(x, y);
        for (i, z) in self.xi.iter().enumerate() {
            b[(0, i + 1)] = self.li.eval(x, z);
            b[(i + 1, 0)] = self.li.eval(z, y);
        }
        log_det(&b).value() / self.denominator
    }

    pub fn matrix(&self, alpha: &Configuration) -> DMatrix<f64> {
        let p = alpha.points();
        let out = DMatrix::from_fn(p.len(), p.len(), |i, j| self.eval(&p[i], &p[j]));
        (&out + out.transpose()) * 0.5
    }
}

pub fn conditional_interaction_kernel<'a>(
    li: &'a LocalInteraction,
    inner: &Window,
    xi: &Configuration,
) -> Result<ConditionalKernel<'a>> {
    if !li.window().contains_window(inner) {
        return Err(DppError::InvalidWindow("inner window must lie in the outer window".into()));
    }
    check_inside(li, xi)?;
    let xi_gram = li.matrix(xi);
    let ld = log_det(&xi_gram);
    if !ld.is_positive() {
        return Err(DppError::ZeroDenominator);
    }
    Ok(ConditionalKernel { li, inner: *inner, xi: xi.points().to_vec(), xi_gram, denominator: ld.value() })
}

/// `μ(N_Λ = 0) = det(I - K_Λ)`.
pub fn vacuum_probability(spec: &KernelSpec, window: &Window, n: usize) -> Result<f64> {
    discretize(spec, Which::K, window, n)?.fredholm_det_i_minus()
}

/// Smallest grid at least `n0` for which `det(I - K_Λ)` at `n` and `2n`
/// should agree to `rel_tol`.
///
/// Both kernel families have a kink on the diagonal (`e^{-a|t|}`, and the
/// `(1 - |t|/R)` factor of finite-range profiles), so Nyström converges at
/// `O(h^2)`. The gap between `n0` and `2 n0` is measured and scaled by that
/// law to half of `rel_tol`.
pub fn settled_grid(spec: &KernelSpec, window: &Window, n0: usize, rel_tol: f64) -> Result<usize> {
    let coarse = vacuum_probability(spec, window, n0)?;
    let fine = vacuum_probability(spec, window, 2 * n0)?;
    let gap = ((coarse - fine) / fine).abs();
    let target = 0.5 * rel_tol;
    if gap <= target {
        return Ok(n0);
    }
    Ok((n0 as f64 * (gap / target).sqrt()).ceil() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    fn renewal() -> KernelSpec {
        KernelSpec::renewal(0.25, 1.0).unwrap()
    }

    fn random_config(rng: &mut crate::rng::StreamRng, w: &Window, max: usize) -> Configuration {
        let n = rng.random_range(0..=max);
        let pts = (0..n).map(|_| {
            let u: Vec<f64> = (0..w.dim()).map(|_| rng.random::<f64>()).collect();
            w.at(&u)
        });
        Configuration::new(pts.collect()).unwrap()
    }

    #[test]
    fn correlation_examples() {
        let s = renewal();
        assert_eq!(correlation(&s, &Configuration::empty()).unwrap(), 1.0);
        assert!((correlation(&s, &Configuration::from_1d(&[3.0]).unwrap()).unwrap() - 0.25).abs() < 1e-15);
        for sep in [0.1, 0.7, 2.5] {
            let got = correlation(&s, &Configuration::from_1d(&[0.0, sep]).unwrap()).unwrap();
            let want = 0.0625 * (1.0 - (-2.0 * sep).exp());
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn ratio_convention() {
        assert_eq!(DeterminantRatio::new(0.0, f64::NEG_INFINITY).value, 0.0);
        assert_eq!(DeterminantRatio::new(f64::NEG_INFINITY, 0.0).value, 0.0);
        assert!((DeterminantRatio::new(1.0, 0.0).value - 1f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn janossy_and_cpi_basics() {
        let w = Window::interval(0.0, 2.0).unwrap();
        let li = LocalInteraction::new(&renewal(), &w, 64).unwrap();
        assert!((janossy(&li, &Configuration::empty()).unwrap() - li.fredholm()).abs() < 1e-15);
        let xi = Configuration::from_1d(&[0.3, 1.1]).unwrap();
        assert_eq!(cpi_local(&li, &Configuration::empty(), &xi).unwrap().value, 1.0);
        let a = Configuration::from_1d(&[0.7, 1.6]).unwrap();
        let direct = log_det(&li.matrix(&a)).value();
        assert!((cpi_local(&li, &a, &Configuration::empty()).unwrap().value - direct).abs() < 1e-14);
        assert!(matches!(cpi_local(&li, &xi, &xi), Err(DppError::DuplicatePoint(_))));
        let outside = Configuration::from_1d(&[3.0]).unwrap();
        assert!(cpi_local(&li, &outside, &xi).is_err());
    }

    #[test]
    fn series_sums_to_one() {
        let li = LocalInteraction::new(&renewal(), &Window::interval(0.0, 1.0).unwrap(), 64).unwrap();
        let terms = janossy_series(&li, 1e-8);
        assert!((terms.iter().sum::<f64>() - 1.0).abs() < 1e-5);
        assert!(*terms.last().unwrap() < 1e-8);
    }

    #[test]
    fn monotone_bounded_and_chain_rule() {
        let s = renewal();
        let w = Window::interval(0.0, 3.0).unwrap();
        let li = LocalInteraction::new(&s, &w, 64).unwrap();
        for t in 0..300 {
            let mut rng = stream(5, t);
            let eta = random_config(&mut rng, &w, 6);
            let alpha = random_config(&mut rng, &w, 3);
            let mask: Vec<bool> = (0..eta.len()).map(|_| rng.random_bool(0.5)).collect();
            let xi = eta.select(&mask);
            let (Ok(a), Ok(b)) = (cpi_local(&li, &alpha, &xi), cpi_local(&li, &alpha, &eta)) else { continue };
            assert!(a.value >= b.value - 1e-9);
            let bound: f64 = alpha.iter().map(|x| li.diag(x)).product();
            assert!(a.value <= bound + 1e-9);
            // chain rule over the points of α in both orders
            let pts = alpha.points();
            for order in [pts.to_vec(), pts.iter().rev().copied().collect()] {
                let mut cond = xi.clone();
                let mut prod = 1.0;
                for x in &order {
                    let single = Configuration::new(vec![*x]).unwrap();
                    prod *= cpi_local(&li, &single, &cond).unwrap().value;
                    cond = cond.union(&single).unwrap();
                }
                assert!((prod - a.value).abs() < 1e-9 * a.value.max(1.0));
            }
        }
    }

    #[test]
    fn candidate_sequence_and_cluster_formula() {
        let s = KernelSpec::finite_range_gaussian(1, 1.0, 0.4).unwrap();
        let alpha = Configuration::from_1d(&[0.0]).unwrap();
        assert_eq!(cpi_cluster_formula(&s, &Configuration::empty(), &alpha).unwrap(), 1.0);
        let far = Configuration::from_1d(&[5.0, 9.0, -7.0]).unwrap();
        let j0 = s.eval_j(&Point::new1(0.0), &Point::new1(0.0)).unwrap();
        assert!((cpi_cluster_formula(&s, &alpha, &far).unwrap() - j0).abs() < 1e-15);
        let xi = Configuration::from_1d(&[0.6, 1.5, 2.9, 6.0, -0.8]).unwrap();
        let ws: Vec<Window> = [1.0, 2.0, 4.0, 8.0].iter().map(|&h| Window::interval(-h, h).unwrap()).collect();
        let seq = cpi_candidate(&s, &alpha, &xi, &ws).unwrap();
        assert!(seq.windows(2).all(|p| p[1] <= p[0] + 1e-10));
        let cluster = cpi_cluster_formula(&s, &alpha, &xi).unwrap();
        assert!((seq[3] - cluster).abs() < 1e-10);
        assert!(matches!(cpi_cluster_formula(&renewal(), &alpha, &xi), Err(DppError::NoFiniteRange)));
        let empty = cpi_candidate(&s, &Configuration::empty(), &xi, &ws).unwrap();
        assert!(empty.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn conditional_kernel_reproduces_cpi() {
        let s = renewal();
        let outer = Window::interval(0.0, 4.0).unwrap();
        let inner = Window::interval(0.0, 2.0).unwrap();
        let li = LocalInteraction::new(&s, &outer, 64).unwrap();
        let none = conditional_interaction_kernel(&li, &inner, &Configuration::empty()).unwrap();
        let x = Point::new1(0.4);
        let y = Point::new1(1.3);
        assert!((none.eval(&x, &y) - li.eval(&x, &y)).abs() < 1e-14);
        let xi = Configuration::from_1d(&[2.5, 3.7]).unwrap();
        let cond = conditional_interaction_kernel(&li, &inner, &xi).unwrap();
        assert!((cond.eval(&x, &y) - cond.eval(&y, &x)).abs() < 1e-14);
        for t in 0..50 {
            let mut rng = stream(9, t);
            let alpha = random_config(&mut rng, &inner, 4);
            let lhs = log_det(&cond.matrix(&alpha)).value();
            let rhs = cpi_local(&li, &alpha, &xi).unwrap().value;
            assert!((lhs - rhs).abs() < 1e-9 * rhs.max(1.0), "{lhs} vs {rhs}");
        }
        assert!(crate::linalg::min_eigenvalue(&cond.matrix(&Configuration::from_1d(&[0.2, 0.9, 1.8]).unwrap())) > 0.0);
    }

    #[test]
    fn vacuum_examples() {
        let zero = KernelSpec::finite_range_gaussian(1, 1.0, 0.0).unwrap();
        assert_eq!(vacuum_probability(&zero, &Window::interval(0.0, 1.0).unwrap(), 16).unwrap(), 1.0);
        let s = renewal();
        let mut prev = 0.0;
        for len in [2.0, 1.0, 0.1, 0.001] {
            let v = vacuum_probability(&s, &Window::interval(0.0, len).unwrap(), 32).unwrap();
            assert!(v > prev && v <= 1.0);
            prev = v;
        }
        assert!(prev > 0.999);
    }
}
