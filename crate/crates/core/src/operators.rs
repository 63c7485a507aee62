//! Nyström discretisation of integral operators on windows.
//!
//! An operator with kernel `T` on a window is represented by the symmetrised
//! matrix `sqrt(w_i) T(x_i, x_j) sqrt(w_j)` over a quadrature rule, so its
//! spectrum is real and approximates that of the operator.

use std::io::Write;
use std::sync::{Arc, OnceLock};

use log::debug;
use nalgebra::{ComplexField, DMatrix, DVector};

use crate::error::{DppError, Result};
use crate::kernels::{CorrelationTable, KernelSpec};
use crate::linalg::{self, principal, sym_eigen, SortedEigen};
use crate::quadrature::Quadrature;
use crate::space::{Configuration, Point, Window};

/// `(I - K)^{-1}` is refused once the top of the spectrum is this close to 1.
pub const SPECTRUM_GATE: f64 = 1e-8;
/// Negative eigenvalues above `-CLIP_REL * lambda_max` are round-off.
pub const CLIP_REL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    K,
    J,
}

#[derive(Clone, Debug)]
pub struct SpectralData {
    /// Descending.
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl From<SortedEigen> for SpectralData {
    fn from(e: SortedEigen) -> Self {
        SpectralData { values: e.values, vectors: e.vectors }
    }
}

impl SpectralData {
    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Eigenvalues with negative round-off clipped to zero.
    pub fn clipped(&self) -> Vec<f64> {
        let top = self.max().max(0.0);
        let mut clipped = 0;
        let out = self
            .values
            .iter()
            .map(|&l| {
                if l < 0.0 {
                    if l < -CLIP_REL * top.max(f64::MIN_POSITIVE) {
                        debug!("clipping eigenvalue {l:e} (lambda_max {top:e})");
                    }
                    clipped += 1;
                    0.0
                } else {
                    l
                }
            })
            .collect();
        if clipped > 0 {
            debug!("clipped {clipped} negative eigenvalues to 0");
        }
        out
    }
}

/// Symmetrised weighted kernel matrix on a quadrature rule.
#[derive(Clone, Debug)]
pub struct DiscretizedOperator {
    quad: Arc<Quadrature>,
    matrix: DMatrix<f64>,
    spectrum: OnceLock<SpectralData>,
}

impl DiscretizedOperator {
    pub fn from_matrix(quad: Arc<Quadrature>, matrix: DMatrix<f64>) -> Self {
        assert_eq!(matrix.nrows(), quad.len());
        DiscretizedOperator { quad, matrix: linalg::hermitize(&matrix), spectrum: OnceLock::new() }
    }

    /// `M_ij = sqrt(w_i) T(x_i, x_j) sqrt(w_j)`, filled symmetrically.
    pub fn from_kernel(quad: Arc<Quadrature>, t: impl Fn(&Point, &Point) -> f64) -> Self {
        let n = quad.len();
        let sw: Vec<f64> = quad.weights().iter().map(|w| w.sqrt()).collect();
        let nodes = quad.nodes();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = sw[i] * t(&nodes[i], &nodes[j]) * sw[j];
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        DiscretizedOperator { quad, matrix: m, spectrum: OnceLock::new() }
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quad
    }

    pub fn quadrature_arc(&self) -> Arc<Quadrature> {
        self.quad.clone()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spectrum(&self) -> &SpectralData {
        self.spectrum.get_or_init(|| sym_eigen(&self.matrix).into())
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// Kernel value at nodes `i`, `j` (the weights divided back out).
    pub fn kernel_at(&self, i: usize, j: usize) -> f64 {
        let w = self.quad.weights();
        self.matrix[(i, j)] / (w[i] * w[j]).sqrt()
    }

    /// Principal compression onto the nodes lying in `sub`.
    pub fn restrict(&self, sub: &Window) -> Result<DiscretizedOperator> {
        let (idx, q) = self.quad.restrict(sub)?;
        Ok(DiscretizedOperator { quad: Arc::new(q), matrix: principal(&self.matrix, &idx), spectrum: OnceLock::new() })
    }

    /// Fails with `SpectrumAtOne` unless `lambda_max < 1 - SPECTRUM_GATE`.
    pub fn check_gate(&self) -> Result<f64> {
        let top = self.spectrum().max();
        if top >= 1.0 - SPECTRUM_GATE {
            return Err(DppError::SpectrumAtOne(top));
        }
        Ok(top)
    }

    /// `J_[Λ] = K_Λ (I - K_Λ)^{-1}`, spectrally, with eigenvalues `λ/(1-λ)`.
    pub fn local_interaction(&self) -> Result<DiscretizedOperator> {
        self.check_gate()?;
        let spec = self.spectrum();
        let mapped: Vec<f64> = spec.clipped().iter().map(|&l| l / (1.0 - l)).collect();
        let matrix = linalg::reconstruct(&spec.vectors, &mapped);
        let out = DiscretizedOperator { quad: self.quad.clone(), matrix, spectrum: OnceLock::new() };
        let _ = out.spectrum.set(SpectralData { values: mapped, vectors: spec.vectors.clone() });
        Ok(out)
    }

    /// Fredholm determinant `det(I - K)` as `prod (1 - λ_i)`.
    pub fn fredholm_det_i_minus(&self) -> Result<f64> {
        self.check_gate()?;
        Ok(self.spectrum().clipped().iter().map(|l| (1.0 - l).ln()).sum::<f64>().exp())
    }

    /// `det(I + J) = prod (1 + λ_i)`.
    pub fn det_i_plus(&self) -> f64 {
        self.spectrum().clipped().iter().map(|l| l.ln_1p()).sum::<f64>().exp()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in 0..self.len() {
            w.write_record(self.matrix.row(r).iter().map(|v| format!("{v:.17e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Nyström discretisation of `K` or `J` on `window` with at least `n` nodes
/// per dimension. For J-primitive kernels both use the nodes of the padded
/// correlation table.
pub fn discretize(spec: &KernelSpec, which: Which, window: &Window, n: usize) -> Result<DiscretizedOperator> {
    if window.dim() != spec.dim() {
        return Err(DppError::DimensionMismatch { expected: spec.dim(), got: window.dim() });
    }
    if n < 2 {
        return Err(DppError::ParameterOutOfRange(format!("grid size {n} < 2")));
    }
    if spec.j_primitive() {
        let table = spec.table(window, n)?;
        let quad = Arc::new(table.quadrature().clone());
        Ok(match which {
            Which::K => DiscretizedOperator::from_matrix(quad, table.weighted_matrix()),
            Which::J => DiscretizedOperator::from_kernel(quad, |x, y| spec.eval_j(x, y).unwrap_or(0.0)),
        })
    } else {
        let quad = Arc::new(Quadrature::gauss_legendre(window, n)?);
        let forms = *spec.renewal_forms().expect("closed-form K");
        Ok(match which {
            Which::K => DiscretizedOperator::from_kernel(quad, |x, y| forms.k(x.x() - y.x())),
            Which::J => DiscretizedOperator::from_kernel(quad, |x, y| forms.j(x.x() - y.x())),
        })
    }
}

pub fn fredholm_det_i_minus(k: &DiscretizedOperator) -> Result<f64> {
    k.fredholm_det_i_minus()
}

pub fn det_i_plus(j: &DiscretizedOperator) -> f64 {
    j.det_i_plus()
}

pub fn local_interaction(k: &DiscretizedOperator) -> Result<DiscretizedOperator> {
    k.local_interaction()
}

/// `A <= B` in the operator order: smallest eigenvalue of `B - A` at least `-tol`.
pub fn operator_leq(a: &DiscretizedOperator, b: &DiscretizedOperator, tol: f64) -> Result<bool> {
    if !a.quadrature().same_as(b.quadrature()) {
        return Err(DppError::QuadratureMismatch);
    }
    let diff = b.matrix() - a.matrix();
    Ok(linalg::min_eigenvalue(&linalg::hermitize(&diff)) >= -tol)
}

/// Smallest eigenvalue of `P T^{-1} P - P (P T P)^{-1} P` on the masked block.
/// Nonnegative for every positive `T` and coordinate projection `P`.
pub fn projection_inversion_gap<T>(t: &DMatrix<T>, mask: &[bool]) -> Result<f64>
where
    T: ComplexField<RealField = f64>,
{
    assert_eq!(mask.len(), t.nrows());
    let min = linalg::min_eigenvalue(t);
    if min <= 1e-8 {
        return Err(DppError::SingularOperator(min));
    }
    let idx: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    if idx.is_empty() {
        return Ok(0.0);
    }
    let inv = t.clone().cholesky().ok_or(DppError::SingularOperator(min))?.inverse();
    let block = principal(t, &idx);
    let block_inv = block.cholesky().ok_or(DppError::SingularOperator(min))?.inverse();
    let diff = principal(&inv, &idx) - block_inv;
    Ok(linalg::min_eigenvalue(&linalg::hermitize(&diff)))
}

/// Correlation kernel `K` restricted to a window, evaluable anywhere.
#[derive(Clone)]
enum CorrelationSource {
    Closed(KernelSpec),
    Table(Arc<CorrelationTable>),
}

impl CorrelationSource {
    fn eval(&self, x: &Point, y: &Point) -> f64 {
        match self {
            CorrelationSource::Closed(s) => s.renewal_forms().expect("closed form").k(x.x() - y.x()),
            CorrelationSource::Table(t) => t.eval(x, y),
        }
    }
}

/// The local interaction kernel `J_[Λ]` on a window, evaluable at arbitrary
/// points of the window by Nyström extension of the resolvent identity
/// `J_[Λ] = K + K_Λ (I - K_Λ)^{-1} K`:
///
/// `J(x, y) = K(x, y) + φ(x) · φ(y)`, where `φ(x)` stacks `sqrt(W) k_x` and
/// `sqrt(λ/(1-λ)) V^T sqrt(W) k_x`, `k_x = (K(z_i, x))_i`.
///
/// At the nodes this reproduces `M (I - M)^{-1}` exactly.
pub struct LocalInteraction {
    spec: KernelSpec,
    window: Window,
    k_op: DiscretizedOperator,
    source: CorrelationSource,
    sqrt_w: Vec<f64>,
    /// Rows `sqrt(λ/(1-λ)) v^T` for nonzero eigenvalues.
    resolvent_rows: DMatrix<f64>,
    /// Table features at the window's nodes (J-primitive kernels only).
    node_features: Option<DMatrix<f64>>,
    fredholm: f64,
    lambda_max: f64,
}

impl LocalInteraction {
    pub fn new(spec: &KernelSpec, window: &Window, n: usize) -> Result<LocalInteraction> {
        let k_op = discretize(spec, Which::K, window, n)?;
        let lambda_max = k_op.check_gate()?;
        let fredholm = k_op.fredholm_det_i_minus()?;
        let (source, node_features) = if spec.j_primitive() {
            let t = spec.table(window, n)?;
            let nodes = k_op.quadrature().nodes();
            let cols: Vec<DVector<f64>> = nodes.iter().map(|z| t.features(z)).collect();
            let feats = DMatrix::from_columns(&cols);
            (CorrelationSource::Table(t), Some(feats))
        } else {
            (CorrelationSource::Closed(spec.clone()), None)
        };
        let sqrt_w: Vec<f64> = k_op.quadrature().weights().iter().map(|w| w.sqrt()).collect();
        let spec_data = k_op.spectrum();
        let clipped = spec_data.clipped();
        let keep: Vec<usize> = (0..clipped.len()).filter(|&i| clipped[i] > 0.0).collect();
        let n_nodes = k_op.len();
        let mut rows = DMatrix::zeros(keep.len(), n_nodes);
        for (r, &l) in keep.iter().enumerate() {
            let s = (clipped[l] / (1.0 - clipped[l])).sqrt();
            for c in 0..n_nodes {
                rows[(r, c)] = s * spec_data.vectors[(c, l)];
            }
        }
        Ok(LocalInteraction {
            spec: spec.clone(),
            window: *window,
            k_op,
            source,
            sqrt_w,
            resolvent_rows: rows,
            node_features,
            fredholm,
            lambda_max,
        })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn k_operator(&self) -> &DiscretizedOperator {
        &self.k_op
    }

    pub fn quadrature(&self) -> &Quadrature {
        self.k_op.quadrature()
    }

    /// `det(I - K_Λ)` on this discretisation.
    pub fn fredholm(&self) -> f64 {
        self.fredholm
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// `K(x, y)` as seen by this window's discretisation.
    pub fn eval_k(&self, x: &Point, y: &Point) -> f64 {
        self.source.eval(x, y)
    }

    /// Table features `g(x)` with `K(x, y) = J(x, y) - g(x) · g(y)`, for
    /// J-primitive kernels.
    fn table_features(&self, x: &Point) -> Option<DVector<f64>> {
        match &self.source {
            CorrelationSource::Table(t) => Some(t.features(x)),
            CorrelationSource::Closed(_) => None,
        }
    }

    fn k_column_with(&self, x: &Point, gx: Option<&DVector<f64>>) -> DVector<f64> {
        let nodes = self.k_op.quadrature().nodes();
        match (gx, &self.node_features) {
            (Some(gx), Some(feats)) => {
                let mut col = feats.tr_mul(gx);
                for (i, z) in nodes.iter().enumerate() {
                    col[i] = self.spec.j_unchecked(z, x) - col[i];
                }
                col
            }
            _ => {
                let forms = self.spec.renewal_forms().expect("closed form");
                DVector::from_iterator(nodes.len(), nodes.iter().map(|z| forms.k(z.x() - x.x())))
            }
        }
    }

    /// `(K(z_i, x))_i` over the nodes.
    pub fn k_column(&self, x: &Point) -> DVector<f64> {
        self.k_column_with(x, self.table_features(x).as_ref())
    }

    fn features_with(&self, x: &Point, gx: Option<&DVector<f64>>) -> DVector<f64> {
        let mut kx = self.k_column_with(x, gx);
        for (v, s) in kx.iter_mut().zip(&self.sqrt_w) {
            *v *= s;
        }
        let tail = &self.resolvent_rows * &kx;
        let mut out = DVector::zeros(kx.len() + tail.len());
        out.rows_mut(0, kx.len()).copy_from(&kx);
        out.rows_mut(kx.len(), tail.len()).copy_from(&tail);
        out
    }

    /// Feature vector `φ(x)` with `J_[Λ](x, y) = K(x, y) + φ(x) · φ(y)`.
    pub fn features(&self, x: &Point) -> DVector<f64> {
        self.features_with(x, self.table_features(x).as_ref())
    }

    pub fn eval(&self, x: &Point, y: &Point) -> f64 {
        let fx = self.features(x);
        let fy = if x == y { fx.clone() } else { self.features(y) };
        self.eval_k(x, y) + fx.dot(&fy)
    }

    /// `J_[Λ](ξ, ξ)` for a configuration. Features are computed once per
    /// point; `K(x_i, x_j)` comes from the same table features.
    pub fn matrix(&self, config: &Configuration) -> DMatrix<f64> {
        let pts = config.points();
        let g: Vec<Option<DVector<f64>>> = pts.iter().map(|p| self.table_features(p)).collect();
        let feats: Vec<DVector<f64>> = pts.iter().zip(&g).map(|(p, gp)| self.features_with(p, gp.as_ref())).collect();
        let m = pts.len();
        let mut out = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let k = match (&g[i], &g[j]) {
                    (Some(gi), Some(gj)) => self.spec.j_unchecked(&pts[i], &pts[j]) - gi.dot(gj),
                    _ => self.source.eval(&pts[i], &pts[j]),
                };
                let v = k + feats[i].dot(&feats[j]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }

    /// Diagonal `J_[Λ](x, x)`.
    pub fn diag(&self, x: &Point) -> f64 {
        self.matrix(&Configuration::new(vec![*x]).expect("single point"))[(0, 0)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::RenewalClosedForms;

    /// Exact `J_[0,L]` for `k(t) = rho e^{-a|t|}`: `2 rho a` times the Green's
    /// function of `-d²/dx² + sigma²` with Robin conditions `g' = a g` at 0
    /// and `g' = -a g` at L.
    fn renewal_local_j(f: &RenewalClosedForms, len: f64, x: f64, y: f64) -> f64 {
        let (s, a) = (f.sigma, f.a);
        let p0 = |t: f64| s * (s * t).cosh() + a * (s * t).sinh();
        let pl = |t: f64| s * (s * (len - t)).cosh() + a * (s * (len - t)).sinh();
        let den = s * ((s * s + a * a) * (s * len).sinh() + 2.0 * a * s * (s * len).cosh());
        2.0 * f.rho * a * p0(x.min(y)) * pl(x.max(y)) / den
    }

    fn renewal_fredholm(f: &RenewalClosedForms, len: f64) -> f64 {
        let (s, a) = (f.sigma, f.a);
        (-a * len).exp() * ((s * s + a * a) * (s * len).sinh() + 2.0 * a * s * (s * len).cosh()) / (2.0 * a * s)
    }

    fn renewal() -> KernelSpec {
        KernelSpec::renewal(0.25, 1.0).unwrap()
    }

    #[test]
    fn zero_kernel_gives_zero_matrix() {
        let z = KernelSpec::finite_range_gaussian(1, 1.0, 0.0).unwrap();
        let op = discretize(&z, Which::K, &Window::interval(0.0, 1.0).unwrap(), 16).unwrap();
        assert_eq!(op.matrix().amax(), 0.0);
        assert_eq!(op.fredholm_det_i_minus().unwrap(), 1.0);
        let j = op.local_interaction().unwrap();
        assert_eq!(j.matrix().amax(), 0.0);
        assert_eq!(j.det_i_plus(), 1.0);
    }

    #[test]
    fn trace_matches_local_trace_formula() {
        let op = discretize(&renewal(), Which::K, &Window::interval(0.0, 1.0).unwrap(), 64).unwrap();
        assert!((op.trace() - 0.25).abs() < 1e-8 * 0.25);
        assert_eq!(op.matrix(), &op.matrix().transpose());
    }

    #[test]
    fn single_eigenvalue_examples() {
        let q = Arc::new(Quadrature::gauss_legendre(&Window::interval(0.0, 1.0).unwrap(), 2).unwrap());
        let v = DVector::from_vec(vec![1.0, 1.0]) / 2f64.sqrt();
        let k = DiscretizedOperator::from_matrix(q, &v * v.transpose() * 0.5);
        let j = k.local_interaction().unwrap();
        assert!((j.spectrum().max() - 1.0).abs() < 1e-14);
        assert!((k.fredholm_det_i_minus().unwrap() - 0.5).abs() < 1e-14);
        assert!((j.det_i_plus() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn spectrum_at_one_is_refused() {
        let q = Arc::new(Quadrature::gauss_legendre(&Window::interval(0.0, 1.0).unwrap(), 2).unwrap());
        let k = DiscretizedOperator::from_matrix(q, DMatrix::identity(2, 2));
        assert!(matches!(k.local_interaction(), Err(DppError::SpectrumAtOne(_))));
        assert!(matches!(k.fredholm_det_i_minus(), Err(DppError::SpectrumAtOne(_))));
    }

    #[test]
    fn fredholm_matches_closed_form_and_refines() {
        let spec = renewal();
        let f = *spec.renewal_forms().unwrap();
        let w = Window::interval(0.0, 1.0).unwrap();
        let d64 = discretize(&spec, Which::K, &w, 64).unwrap().fredholm_det_i_minus().unwrap();
        let d128 = discretize(&spec, Which::K, &w, 128).unwrap().fredholm_det_i_minus().unwrap();
        assert!(((d64 - d128) / d128).abs() < 1e-4);
        assert!((d128 / renewal_fredholm(&f, 1.0) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn fredholm_times_det_i_plus_is_one() {
        let k = discretize(&renewal(), Which::K, &Window::interval(0.0, 1.0).unwrap(), 64).unwrap();
        let j = k.local_interaction().unwrap();
        assert!((k.fredholm_det_i_minus().unwrap() * j.det_i_plus() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn eigenvalue_map_is_consistent() {
        let k = discretize(&renewal(), Which::K, &Window::interval(0.0, 3.0).unwrap(), 48).unwrap();
        let j = k.local_interaction().unwrap();
        let v = &k.spectrum().vectors;
        for (c, &l) in k.spectrum().values.iter().enumerate().take(10) {
            let col = v.column(c);
            let jv = j.matrix() * col;
            let expect = col * (l.max(0.0) / (1.0 - l.max(0.0)));
            assert!((jv - expect).amax() < 1e-12);
        }
    }

    #[test]
    fn local_trace_bound() {
        let k = discretize(&renewal(), Which::K, &Window::interval(0.0, 5.0).unwrap(), 128).unwrap();
        let j = k.local_interaction().unwrap();
        // ||K|| <= 2 rho / a = 0.5
        assert!(j.trace() <= k.trace() / (1.0 - 0.5));
    }

    #[test]
    fn lemma_chain_for_nested_windows() {
        let spec = renewal();
        let big = Window::interval(0.0, 3.0).unwrap();
        let small = Window::interval(0.0, 1.0).unwrap();
        let k_big = discretize(&spec, Which::K, &big, 96).unwrap();
        let j_big_restricted = k_big.local_interaction().unwrap().restrict(&small).unwrap();
        let j_small = k_big.restrict(&small).unwrap().local_interaction().unwrap();
        assert!(operator_leq(&j_small, &j_big_restricted, 1e-8).unwrap());
        assert!(operator_leq(&j_small, &j_small, 0.0).unwrap());
        let other = discretize(&spec, Which::K, &small, 8).unwrap();
        assert!(matches!(operator_leq(&j_small, &other, 1e-8), Err(DppError::QuadratureMismatch)));
    }

    #[test]
    fn projection_gap_examples() {
        let id = DMatrix::<f64>::identity(4, 4);
        assert!(projection_inversion_gap(&id, &[true, false, true, false]).unwrap().abs() < 1e-15);
        let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 2.0, 1.5]));
        assert!(projection_inversion_gap(&diag, &[false, true, true]).unwrap().abs() < 1e-14);
        let sing = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0]));
        assert!(matches!(projection_inversion_gap(&sing, &[true, false]), Err(DppError::SingularOperator(_))));
    }

    #[test]
    fn local_interaction_matches_green_function() {
        let spec = renewal();
        let f = *spec.renewal_forms().unwrap();
        let len = 5.0;
        let li = LocalInteraction::new(&spec, &Window::interval(0.0, len).unwrap(), 256).unwrap();
        for (x, y) in [(0.3, 0.3), (1.234, 4.5), (2.5, 2.6), (0.0, 5.0), (4.99, 0.01)] {
            let ours = li.eval(&Point::new1(x), &Point::new1(y));
            let exact = renewal_local_j(&f, len, x, y);
            assert!((ours - exact).abs() < 5e-5, "({x},{y}): {ours} vs {exact}");
        }
        assert!((li.fredholm() / renewal_fredholm(&f, len) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn extension_reproduces_node_values() {
        let spec = renewal();
        let k = discretize(&spec, Which::K, &Window::interval(0.0, 2.0).unwrap(), 32).unwrap();
        let j = k.local_interaction().unwrap();
        let li = LocalInteraction::new(&spec, &Window::interval(0.0, 2.0).unwrap(), 32).unwrap();
        let nodes = k.quadrature().nodes();
        for (i, j_idx) in [(0, 0), (3, 17), (31, 30)] {
            let v = li.eval(&nodes[i], &nodes[j_idx]);
            assert!((v - j.kernel_at(i, j_idx)).abs() < 1e-12);
        }
    }

    #[test]
    fn table_extension_reproduces_node_values() {
        let spec = KernelSpec::finite_range_gaussian(1, 1.0, 0.5).unwrap();
        let w = Window::interval(0.0, 2.0).unwrap();
        let k = discretize(&spec, Which::K, &w, 32).unwrap();
        let li = LocalInteraction::new(&spec, &w, 32).unwrap();
        let nodes = k.quadrature().nodes();
        for (i, j) in [(0, 0), (5, 9), (31, 2)] {
            assert!((li.eval_k(&nodes[i], &nodes[j]) - k.kernel_at(i, j)).abs() < 1e-12);
        }
        let jl = k.local_interaction().unwrap();
        assert!((li.eval(&nodes[4], &nodes[20]) - jl.kernel_at(4, 20)).abs() < 1e-12);
    }
}
