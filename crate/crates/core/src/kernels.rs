//! Catalog of correlation kernels `K` and interaction kernels `J = K(I-K)^{-1}`.
//!
//! Two kinds of family live here:
//!
//! * `RenewalExponential`: `K` is primitive, `k(t) = rho e^{-a|t|}` on the line,
//!   and `J` has the closed form `j(t) = (rho a / sigma) e^{-sigma |t|}`.
//! * `FiniteRangeFourier` and `Modulated`: `J` is primitive and has finite
//!   range. `K = J(I+J)^{-1}` has no closed form; it is obtained from a
//!   Nyström discretisation of `J` on a padded window (see
//!   [`CorrelationTable`]), cached per window and grid.
//!
//! All catalogued kernels are real symmetric, so evaluators return `f64`.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};

use crate::error::{DppError, Result};
use crate::linalg::{principal, sym_eigen};
use crate::quadrature::{gauss_legendre, Quadrature};
use crate::space::{Point, Window};

/// Closed forms of the exponential-kernel renewal model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenewalClosedForms {
    pub rho: f64,
    pub a: f64,
    pub sigma: f64,
}

impl RenewalClosedForms {
    pub fn new(rho: f64, a: f64) -> Result<Self> {
        if !(rho > 0.0 && a > 0.0 && rho.is_finite() && a.is_finite()) {
            return Err(DppError::ParameterOutOfRange(format!(
                "renewal kernel needs rho > 0 and a > 0, got rho = {rho}, a = {a}"
            )));
        }
        if rho >= a / 2.0 {
            return Err(DppError::ParameterOutOfRange(format!(
                "renewal kernel needs rho < a/2 (so that ||K|| < 1), got rho = {rho}, a = {a}"
            )));
        }
        let sigma = (a * a - 2.0 * rho * a).sqrt();
        Ok(RenewalClosedForms { rho, a, sigma })
    }

    pub fn k(&self, t: f64) -> f64 {
        self.rho * (-self.a * t.abs()).exp()
    }

    pub fn j(&self, t: f64) -> f64 {
        self.rho * self.a / self.sigma * (-self.sigma * t.abs()).exp()
    }

    pub fn u(&self, x: f64) -> f64 {
        (self.sigma * x).exp()
    }

    pub fn v(&self, x: f64) -> f64 {
        self.rho * self.a / self.sigma * (-self.sigma * x).exp()
    }

    /// `d(s) = v(x) u(x+s) - v(x+s) u(x) = (2 rho a / sigma) sinh(sigma s)`.
    pub fn d_fn(&self, s: f64) -> f64 {
        2.0 * self.rho * self.a / self.sigma * (self.sigma * s).sinh()
    }

    /// Spacing density `f(s) = e^{-a s} d(s)`, written without overflow.
    pub fn f(&self, s: f64) -> f64 {
        if s < 0.0 {
            return 0.0;
        }
        let c = self.rho * self.a / self.sigma;
        c * ((-(self.a - self.sigma) * s).exp() - (-(self.a + self.sigma) * s).exp())
    }

    /// `1 - F(s)`.
    pub fn survival(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 1.0;
        }
        let c = self.rho * self.a / self.sigma;
        let (l1, l2) = (self.a - self.sigma, self.a + self.sigma);
        c * ((-l1 * s).exp() / l1 - (-l2 * s).exp() / l2)
    }

    pub fn cdf(&self, s: f64) -> f64 {
        1.0 - self.survival(s)
    }

    /// Distribution function of the forward recurrence time, density `rho (1 - F)`.
    pub fn forward_recurrence_cdf(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let c = self.rho * self.rho * self.a / self.sigma;
        let (l1, l2) = (self.a - self.sigma, self.a + self.sigma);
        1.0 - c * ((-l1 * s).exp() / (l1 * l1) - (-l2 * s).exp() / (l2 * l2))
    }

    pub fn intensity(&self) -> f64 {
        self.rho
    }
}

pub fn renewal_closed_forms(rho: f64, a: f64) -> Result<RenewalClosedForms> {
    RenewalClosedForms::new(rho, a)
}

/// Shape factor `phi` multiplying the triangular cut-off of a finite-range profile.
#[derive(Clone)]
pub enum Profile {
    /// `phi = 1`: `j = amplitude * chi_R`.
    Triangular,
    /// `phi(x) = exp(-|x|^2 / (2 width^2))`; its Fourier transform is positive.
    Gaussian { width: f64 },
    /// User-supplied `phi`. The flag asserts that the resulting `j` has a
    /// nonnegative Fourier transform; it is not checked.
    Custom { phi: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>, certified_positive: bool },
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Triangular => write!(f, "Triangular"),
            Profile::Gaussian { width } => write!(f, "Gaussian {{ width: {width} }}"),
            Profile::Custom { certified_positive, .. } => {
                write!(f, "Custom {{ certified_positive: {certified_positive} }}")
            }
        }
    }
}

impl Profile {
    fn phi(&self, t: &[f64]) -> f64 {
        match self {
            Profile::Triangular => 1.0,
            Profile::Gaussian { width } => {
                let r2: f64 = t.iter().map(|v| v * v).sum();
                (-r2 / (2.0 * width * width)).exp()
            }
            Profile::Custom { phi, .. } => phi(t),
        }
    }
}

/// Bounded nonnegative multiplier `psi` of a modulated kernel `L = J M_psi J`.
#[derive(Clone)]
pub struct Modulation {
    pub psi: Arc<dyn Fn(&Point) -> f64 + Send + Sync>,
    pub bound: f64,
}

impl fmt::Debug for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Modulation {{ bound: {} }}", self.bound)
    }
}

#[derive(Clone, Debug)]
pub enum Family {
    RenewalExponential { forms: RenewalClosedForms },
    FiniteRangeFourier { range: f64, amplitude: f64, profile: Profile },
    Modulated { base: KernelSpec, modulation: Modulation },
}

/// Resolution of the padded Nyström table behind J-primitive families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableResolution {
    /// Padding on each side, in multiples of the interaction range.
    pub pad_ranges: f64,
    /// Gauss order per panel of width `range` when no grid is supplied.
    pub order_per_range: usize,
}

impl TableResolution {
    pub fn default_for(dim: usize) -> Self {
        if dim == 1 {
            TableResolution { pad_ranges: 6.0, order_per_range: 16 }
        } else {
            TableResolution { pad_ranges: 2.0, order_per_range: 6 }
        }
    }
}

type TableKey = [u64; 5];

/// Tables hold two dense matrices on the padded grid, so only the most
/// recently built few are kept.
const TABLE_CACHE_CAP: usize = 8;

#[derive(Default)]
struct TableCache {
    map: HashMap<TableKey, Arc<CorrelationTable>>,
    order: VecDeque<TableKey>,
}

struct Inner {
    family: Family,
    dim: usize,
    resolution: TableResolution,
    tables: Mutex<TableCache>,
}

/// Immutable, cheaply clonable kernel description.
#[derive(Clone)]
pub struct KernelSpec {
    inner: Arc<Inner>,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec").field("family", &self.inner.family).field("dim", &self.inner.dim).finish()
    }
}

impl KernelSpec {
    fn build(family: Family, dim: usize) -> KernelSpec {
        KernelSpec {
            inner: Arc::new(Inner {
                family,
                dim,
                resolution: TableResolution::default_for(dim),
                tables: Mutex::new(TableCache::default()),
            }),
        }
    }

    pub fn renewal(rho: f64, a: f64) -> Result<KernelSpec> {
        let forms = RenewalClosedForms::new(rho, a)?;
        Ok(KernelSpec::build(Family::RenewalExponential { forms }, 1))
    }

    pub fn finite_range(dim: usize, range: f64, amplitude: f64, profile: Profile) -> Result<KernelSpec> {
        if !(1..=2).contains(&dim) {
            return Err(DppError::DimensionMismatch { expected: 2, got: dim });
        }
        if !(range > 0.0 && range.is_finite()) {
            return Err(DppError::ParameterOutOfRange(format!("range must be > 0, got {range}")));
        }
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(DppError::ParameterOutOfRange(format!("amplitude must be >= 0, got {amplitude}")));
        }
        match &profile {
            Profile::Gaussian { width } if !(*width > 0.0) => {
                return Err(DppError::ParameterOutOfRange(format!("profile width must be > 0, got {width}")))
            }
            Profile::Custom { certified_positive: false, .. } => {
                return Err(DppError::ParameterOutOfRange(
                    "custom profiles must be certified to have a nonnegative Fourier transform".into(),
                ))
            }
            _ => {}
        }
        Ok(KernelSpec::build(Family::FiniteRangeFourier { range, amplitude, profile }, dim))
    }

    /// Gaussian-profile finite-range kernel with width `range / 2`.
    pub fn finite_range_gaussian(dim: usize, range: f64, amplitude: f64) -> Result<KernelSpec> {
        KernelSpec::finite_range(dim, range, amplitude, Profile::Gaussian { width: range / 2.0 })
    }

    pub fn modulated(base: KernelSpec, modulation: Modulation) -> Result<KernelSpec> {
        if !matches!(base.family(), Family::FiniteRangeFourier { .. }) {
            return Err(DppError::ParameterOutOfRange("modulated kernels need a finite-range base".into()));
        }
        if !(modulation.bound >= 0.0 && modulation.bound.is_finite()) {
            return Err(DppError::ParameterOutOfRange("modulation bound must be finite and >= 0".into()));
        }
        let dim = base.dim();
        Ok(KernelSpec::build(Family::Modulated { base, modulation }, dim))
    }

    pub fn with_resolution(&self, resolution: TableResolution) -> KernelSpec {
        KernelSpec {
            inner: Arc::new(Inner {
                family: self.inner.family.clone(),
                dim: self.inner.dim,
                resolution,
                tables: Mutex::new(TableCache::default()),
            }),
        }
    }

    pub fn family(&self) -> &Family {
        &self.inner.family
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn resolution(&self) -> TableResolution {
        self.inner.resolution
    }

    pub fn renewal_forms(&self) -> Option<&RenewalClosedForms> {
        match &self.inner.family {
            Family::RenewalExponential { forms } => Some(forms),
            _ => None,
        }
    }

    /// Range beyond which `J` vanishes; `None` for infinite range.
    pub fn declared_range(&self) -> Option<f64> {
        match &self.inner.family {
            Family::RenewalExponential { .. } => None,
            Family::FiniteRangeFourier { range, .. } => Some(*range),
            Family::Modulated { base, .. } => base.declared_range().map(|r| 2.0 * r),
        }
    }

    pub fn has_closed_form_j(&self) -> bool {
        true
    }

    /// True when `K` is derived numerically from `J`.
    pub fn j_primitive(&self) -> bool {
        !matches!(self.inner.family, Family::RenewalExponential { .. })
    }

    pub fn is_zero(&self) -> bool {
        match &self.inner.family {
            Family::RenewalExponential { .. } => false,
            Family::FiniteRangeFourier { amplitude, .. } => *amplitude == 0.0,
            Family::Modulated { base, modulation } => base.is_zero() || modulation.bound == 0.0,
        }
    }

    fn check_dims(&self, x: &Point, y: &Point) -> Result<()> {
        for p in [x, y] {
            if p.dim() != self.dim() {
                return Err(DppError::DimensionMismatch { expected: self.dim(), got: p.dim() });
            }
        }
        Ok(())
    }

    /// Interaction kernel `J(x, y)`.
    pub fn eval_j(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check_dims(x, y)?;
        Ok(self.j_unchecked(x, y))
    }

    #[inline]
    pub(crate) fn j_unchecked(&self, x: &Point, y: &Point) -> f64 {
        match &self.inner.family {
            Family::RenewalExponential { forms } => forms.j(x.x() - y.x()),
            Family::FiniteRangeFourier { range, amplitude, profile } => {
                let t = x.sub(y);
                finite_range_profile(t.coords(), *range, *amplitude, profile)
            }
            Family::Modulated { base, modulation } => modulated_j(base, modulation, x, y),
        }
    }

    /// Correlation kernel `K(x, y)`. For J-primitive families this goes
    /// through a cached table on a window snapped around the two points.
    pub fn eval_k(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check_dims(x, y)?;
        match &self.inner.family {
            Family::RenewalExponential { forms } => Ok(forms.k(x.x() - y.x())),
            _ => {
                if self.is_zero() {
                    return Ok(0.0);
                }
                let (window, n) = self.default_table_window(x, y);
                let table = self.table(&window, n)?;
                Ok(table.eval(x, y))
            }
        }
    }

    fn default_table_window(&self, x: &Point, y: &Point) -> (Window, usize) {
        let r = self.declared_range().expect("finite range");
        let d = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..d {
            lo = lo.min((x.coord(i).min(y.coord(i)) / r).floor() * r);
            hi = hi.max((x.coord(i).max(y.coord(i)) / r).floor() * r + r);
        }
        let window = Window::new(
            Point::from_slice(&vec![lo; d]).expect("finite"),
            Point::from_slice(&vec![hi; d]).expect("finite"),
        )
        .expect("nonempty box");
        let panels = ((hi - lo) / r).round() as usize;
        let order = self.inner.resolution.order_per_range;
        (window, panels * order)
    }

    /// Cached padded Nyström table for a J-primitive family on `window`.
    pub fn table(&self, window: &Window, n: usize) -> Result<Arc<CorrelationTable>> {
        if !self.j_primitive() {
            return Err(DppError::ParameterOutOfRange(
                "correlation tables are only built for J-primitive kernels".into(),
            ));
        }
        let key = [
            window.lo(0).to_bits(),
            window.hi(0).to_bits(),
            if window.dim() > 1 { window.lo(1).to_bits() } else { 0 },
            if window.dim() > 1 { window.hi(1).to_bits() } else { 0 },
            n as u64,
        ];
        let mut tables = self.inner.tables.lock().expect("table cache poisoned");
        if let Some(t) = tables.map.get(&key) {
            return Ok(t.clone());
        }
        let t = Arc::new(CorrelationTable::build(self, window, n)?);
        if tables.order.len() == TABLE_CACHE_CAP {
            let oldest = tables.order.pop_front().expect("cache is full");
            tables.map.remove(&oldest);
        }
        tables.order.push_back(key);
        tables.map.insert(key, t.clone());
        Ok(t)
    }

    /// Largest eigenvalue of the Nyström discretisation of `K` on `window`.
    pub fn estimate_operator_norm(&self, window: &Window, n: usize) -> Result<f64> {
        let op = crate::operators::discretize(self, crate::operators::Which::K, window, n)?;
        Ok(op.spectrum().values.first().copied().unwrap_or(0.0).max(0.0))
    }

    /// `sup_x J(x, x)`, the intensity of the dominating Poisson process when
    /// `J(x, x)` is constant.
    pub fn j_diag_sup(&self) -> f64 {
        match &self.inner.family {
            Family::RenewalExponential { forms } => forms.j(0.0),
            Family::FiniteRangeFourier { amplitude, profile, .. } => amplitude * profile.phi(&vec![0.0; self.dim()]),
            Family::Modulated { base, modulation } => {
                let origin = Point::from_slice(&vec![0.0; self.dim()]).expect("finite");
                let unit = Modulation { psi: Arc::new(|_| 1.0), bound: 1.0 };
                modulation.bound * modulated_j(base, &unit, &origin, &origin)
            }
        }
    }
}

#[inline]
fn finite_range_profile(t: &[f64], range: f64, amplitude: f64, profile: &Profile) -> f64 {
    let mut chi = 1.0;
    for &ti in t {
        let c = 1.0 - ti.abs() / range;
        if c <= 0.0 {
            return 0.0;
        }
        chi *= c;
    }
    amplitude * chi * profile.phi(t)
}

const MODULATION_ORDER: usize = 10;

/// `L(x, y) = ∫ j(x - z) psi(z) j(z - y) dz`, integrated piecewise between
/// the kinks of the triangular factor.
fn modulated_j(base: &KernelSpec, modulation: &Modulation, x: &Point, y: &Point) -> f64 {
    let r = base.declared_range().expect("finite-range base");
    let d = x.dim();
    let mut pieces: Vec<Vec<(f64, f64)>> = Vec::with_capacity(d);
    for i in 0..d {
        let lo = (x.coord(i) - r).max(y.coord(i) - r);
        let hi = (x.coord(i) + r).min(y.coord(i) + r);
        if lo >= hi {
            return 0.0;
        }
        let mut cuts = vec![lo, hi];
        for c in [x.coord(i), y.coord(i)] {
            if c > lo && c < hi {
                cuts.push(c);
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        pieces.push(cuts.windows(2).map(|w| (w[0], w[1])).collect());
    }
    let (t, w) = gauss_legendre(MODULATION_ORDER);
    let nodes_1d = |pcs: &[(f64, f64)]| -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for &(a, b) in pcs {
            let h = 0.5 * (b - a);
            for (ti, wi) in t.iter().zip(&w) {
                out.push((a + h * (ti + 1.0), h * wi));
            }
        }
        out
    };
    let integrand = |z: &Point| base.j_unchecked(x, z) * (modulation.psi)(z) * base.j_unchecked(z, y);
    match d {
        1 => nodes_1d(&pieces[0]).iter().map(|&(z, wz)| wz * integrand(&Point::new1(z))).sum(),
        _ => {
            let nx = nodes_1d(&pieces[0]);
            let ny = nodes_1d(&pieces[1]);
            let mut s = 0.0;
            for &(zx, wx) in &nx {
                for &(zy, wy) in &ny {
                    s += wx * wy * integrand(&Point::new2(zx, zy));
                }
            }
            s
        }
    }
}

/// Nyström realisation of `K = J(I+J)^{-1}` around a window.
///
/// `J` is discretised on the window padded by `pad_ranges` interaction
/// ranges, with panels aligned to the window's own rule of `n` nodes per
/// dimension. With `N = sqrt(W) J sqrt(W) = U diag(mu) U^T`, the kernel is
/// extended off the nodes by
/// `K(x, y) = J(x, y) - g(x) . g(y)`, `g(x) = diag(1+mu)^{-1/2} U^T sqrt(W) J(., x)`,
/// which agrees with `N(I+N)^{-1}` on the nodes.
pub struct CorrelationTable {
    spec: KernelSpec,
    padded: Quadrature,
    inner_idx: Vec<usize>,
    inner: Quadrature,
    /// `diag(1+mu)^{-1/2} U^T sqrt(W)`, one row per eigenpair.
    projector: DMatrix<f64>,
    /// Weighted `K` on the padded nodes.
    k_padded: DMatrix<f64>,
}

impl CorrelationTable {
    fn build(spec: &KernelSpec, window: &Window, n: usize) -> Result<CorrelationTable> {
        let r = spec.declared_range().ok_or(DppError::NoFiniteRange)?;
        let margin = spec.resolution().pad_ranges * r;
        let padded = Quadrature::padded(window, n, margin)?;
        let (inner_idx, inner) = padded.restrict(window)?;
        let m = padded.len();
        let sw: Vec<f64> = padded.weights().iter().map(|w| w.sqrt()).collect();
        let nodes = padded.nodes();
        let mut jm = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for k in i..m {
                let v = sw[i] * spec.j_unchecked(&nodes[i], &nodes[k]) * sw[k];
                jm[(i, k)] = v;
                jm[(k, i)] = v;
            }
        }
        let eig = sym_eigen(&jm);
        let mut projector = eig.vectors.transpose();
        for (row, mu) in eig.values.iter().enumerate() {
            let s = 1.0 / (1.0 + mu.max(0.0)).sqrt();
            projector.row_mut(row).scale_mut(s);
        }
        let k_padded = crate::linalg::spectral_map(&eig, |mu| {
            let mu = mu.max(0.0);
            mu / (1.0 + mu)
        });
        for c in 0..m {
            projector.column_mut(c).scale_mut(sw[c]);
        }
        Ok(CorrelationTable { spec: spec.clone(), padded, inner_idx, inner, projector, k_padded })
    }

    /// Quadrature of the unpadded window (a sub-rule of the padded one).
    pub fn quadrature(&self) -> &Quadrature {
        &self.inner
    }

    pub fn padded_quadrature(&self) -> &Quadrature {
        &self.padded
    }

    /// Weighted `K` matrix on the window's nodes.
    pub fn weighted_matrix(&self) -> DMatrix<f64> {
        principal(&self.k_padded, &self.inner_idx)
    }

    pub fn features(&self, x: &Point) -> DVector<f64> {
        let jx =
            DVector::from_iterator(self.padded.len(), self.padded.nodes().iter().map(|z| self.spec.j_unchecked(z, x)));
        &self.projector * jx
    }

    pub fn eval(&self, x: &Point, y: &Point) -> f64 {
        let gx = self.features(x);
        let gy = if x == y { gx.clone() } else { self.features(y) };
        self.spec.j_unchecked(x, y) - gx.dot(&gy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64) -> Point {
        Point::new1(x)
    }

    #[test]
    fn renewal_kernel_examples() {
        let s = KernelSpec::renewal(0.25, 1.0).unwrap();
        assert!((s.eval_k(&p(0.7), &p(0.7)).unwrap() - 0.25).abs() < 1e-15);
        assert!((s.eval_k(&p(0.0), &p(2f64.ln())).unwrap() - 0.125).abs() < 1e-15);
        let j0 = s.eval_j(&p(3.0), &p(3.0)).unwrap();
        assert!((j0 - 0.25 / 0.5f64.sqrt()).abs() < 1e-12);
        assert!((j0 - 0.353553).abs() < 1e-6);
        assert_eq!(s.eval_k(&p(0.1), &p(1.3)).unwrap(), s.eval_k(&p(1.3), &p(0.1)).unwrap());
        assert!(matches!(s.eval_k(&p(0.0), &Point::new2(0.0, 0.0)), Err(DppError::DimensionMismatch { .. })));
    }

    #[test]
    fn renewal_parameters_are_gated() {
        assert!(matches!(KernelSpec::renewal(0.6, 1.0), Err(DppError::ParameterOutOfRange(_))));
        assert!(KernelSpec::renewal(0.5, 1.0).is_err());
        assert!(renewal_closed_forms(0.25, 1.0).is_ok());
    }

    #[test]
    fn renewal_closed_form_values() {
        let f = renewal_closed_forms(0.25, 1.0).unwrap();
        assert!((f.sigma - 0.70711).abs() < 1e-5);
        assert_eq!(f.f(0.0), 0.0);
        // f written as a difference of exponentials equals e^{-as} d(s)
        for s in [0.1, 1.0, 3.7, 12.0] {
            let direct = (-f.a * s).exp() * f.d_fn(s);
            assert!((f.f(s) - direct).abs() < 1e-14 * direct.max(1e-300));
        }
        assert!((f.survival(0.0) - 1.0).abs() < 1e-14);
        assert!(f.survival(200.0) < 1e-20);
    }

    #[test]
    fn spacing_density_integrates_to_one_by_quadrature() {
        let f = renewal_closed_forms(0.25, 1.0).unwrap();
        // Independent check: composite Gauss–Legendre on [0, 120].
        let (t, w) = gauss_legendre(20);
        let (mut total, mut first) = (0.0, 0.0);
        for k in 0..240 {
            let (a, b) = (0.5 * k as f64, 0.5 * (k + 1) as f64);
            for (ti, wi) in t.iter().zip(&w) {
                let s = a + 0.5 * (b - a) * (ti + 1.0);
                total += 0.5 * (b - a) * wi * f.f(s);
                first += 0.5 * (b - a) * wi * s * f.f(s);
            }
        }
        assert!((total - 1.0).abs() < 1e-10, "integral {total}");
        assert!((first - 4.0).abs() < 1e-8, "mean spacing {first}");
    }

    #[test]
    fn finite_range_j_vanishes_beyond_range() {
        let s = KernelSpec::finite_range_gaussian(1, 1.0, 0.5).unwrap();
        assert_eq!(s.eval_j(&p(0.0), &p(1.5)).unwrap(), 0.0);
        assert_eq!(s.eval_j(&p(0.0), &p(1.0)).unwrap(), 0.0);
        assert!(s.eval_j(&p(0.0), &p(0.99)).unwrap() > 0.0);
        assert_eq!(s.eval_j(&p(0.0), &p(0.0)).unwrap(), 0.5);
        assert_eq!(s.eval_j(&p(0.2), &p(0.9)).unwrap(), s.eval_j(&p(0.9), &p(0.2)).unwrap());
    }

    #[test]
    fn derived_k_is_symmetric_and_below_j() {
        let s = KernelSpec::finite_range_gaussian(1, 1.0, 0.5).unwrap();
        let (x, y) = (p(0.3), p(0.8));
        let kxy = s.eval_k(&x, &y).unwrap();
        let kyx = s.eval_k(&y, &x).unwrap();
        assert!((kxy - kyx).abs() < 1e-12);
        let kxx = s.eval_k(&x, &x).unwrap();
        assert!(kxx > 0.0 && kxx < s.eval_j(&x, &x).unwrap());
    }

    #[test]
    fn derived_k_matches_fourier_multiplier() {
        // Independent route: k = j - F^{-1}[ j^2 / (1 + j^) ], with j^ of the
        // triangle known in closed form. The subtracted multiplier decays like
        // w^{-4}, so a plain Riemann sum over frequencies converges fast.
        let (range, amp) = (1.0, 0.5);
        let s = KernelSpec::finite_range(1, range, amp, Profile::Triangular).unwrap();
        let jhat = |w: f64| {
            let z = 0.5 * w * range;
            if z.abs() < 1e-12 {
                amp * range
            } else {
                amp * range * (z.sin() / z).powi(2)
            }
        };
        let (n, period) = (1usize << 16, 200.0);
        for t in [0.0, 0.37, 1.4] {
            let mut corr = 0.0;
            for m in 0..n {
                let w = 2.0 * std::f64::consts::PI * (m as f64 - (n / 2) as f64) / period;
                let jh = jhat(w);
                corr += jh * jh / (1.0 + jh) * (w * t).cos();
            }
            let k_t = s.eval_j(&p(0.0), &p(t)).unwrap() - corr / period;
            // The triangle's kinks limit the rule to algebraic convergence.
            let ours = s.eval_k(&p(5.0), &p(5.0 + t)).unwrap();
            assert!((ours - k_t).abs() < 1e-4, "t = {t}: nystrom {ours} vs fourier {k_t}");
            let fine = s.with_resolution(TableResolution { pad_ranges: 6.0, order_per_range: 32 });
            let ours = fine.eval_k(&p(5.0), &p(5.0 + t)).unwrap();
            assert!((ours - k_t).abs() < 1.5e-5, "t = {t}: nystrom {ours} vs fourier {k_t}");
        }
    }

    #[test]
    fn modulated_kernel_is_symmetric_with_doubled_range() {
        let base = KernelSpec::finite_range_gaussian(1, 1.0, 0.5).unwrap();
        let m = Modulation { psi: Arc::new(|z: &Point| 1.0 + 0.5 * z.x().cos()), bound: 1.5 };
        let s = KernelSpec::modulated(base.clone(), m).unwrap();
        assert_eq!(s.declared_range(), Some(2.0));
        assert_eq!(s.eval_j(&p(0.0), &p(2.01)).unwrap(), 0.0);
        let a = s.eval_j(&p(0.3), &p(1.1)).unwrap();
        let b = s.eval_j(&p(1.1), &p(0.3)).unwrap();
        assert!((a - b).abs() < 1e-14 && a > 0.0);
        // constant psi = 1 gives the convolution j * j; check at lag 0 by brute force
        let unit = Modulation { psi: Arc::new(|_| 1.0), bound: 1.0 };
        let conv = KernelSpec::modulated(base.clone(), unit).unwrap();
        let brute: f64 = (0..200_000)
            .map(|i| {
                let z = -1.0 + (i as f64 + 0.5) * 2.0 / 200_000.0;
                let jz = base.eval_j(&p(0.0), &p(z)).unwrap();
                jz * jz * 2.0 / 200_000.0
            })
            .sum();
        assert!((conv.eval_j(&p(0.0), &p(0.0)).unwrap() - brute).abs() < 1e-9);
    }

    #[test]
    fn operator_norm_estimates() {
        let s = KernelSpec::renewal(0.25, 1.0).unwrap();
        let w = Window::interval(0.0, 20.0).unwrap();
        let big = s.estimate_operator_norm(&w, 400).unwrap();
        assert!(big > 0.0 && big < 0.5);
        let small = s.estimate_operator_norm(&Window::interval(0.0, 5.0).unwrap(), 400).unwrap();
        assert!(small <= big + 1e-12);
        let zero = KernelSpec::finite_range_gaussian(1, 1.0, 0.0).unwrap();
        assert_eq!(zero.estimate_operator_norm(&Window::interval(0.0, 2.0).unwrap(), 32).unwrap(), 0.0);
    }
}
