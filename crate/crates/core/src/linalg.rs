//! Small dense linear-algebra helpers shared by the operator and statistics
//! layers: log-space determinants and sorted Hermitian eigendecompositions.

use nalgebra::{ComplexField, DMatrix, DVector};

/// Below this log-magnitude a determinant counts as zero.
pub const LOG_DET_FLOOR: f64 = -700.0;

/// `det = phase * exp(log_abs)`, with `log_abs = -inf` for exactly singular input.
#[derive(Clone, Copy, Debug)]
pub struct LogDet<T> {
    pub phase: T,
    pub log_abs: f64,
}

impl LogDet<f64> {
    pub fn value(&self) -> f64 {
        self.phase * self.log_abs.exp()
    }

    /// True when the determinant is numerically a positive number.
    pub fn is_positive(&self) -> bool {
        self.phase > 0.0 && self.log_abs > LOG_DET_FLOOR
    }
}

impl<T: ComplexField<RealField = f64>> LogDet<T> {
    pub fn to_value(&self) -> T {
        self.phase.clone() * T::from_real(self.log_abs.exp())
    }
}

/// LU with partial pivoting, accumulated in log space.
pub fn log_det<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> LogDet<T> {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.nrows();
    let mut a = m.clone();
    let mut phase = T::one();
    let mut log_abs = 0.0;
    for k in 0..n {
        let mut piv = k;
        let mut best = a[(k, k)].clone().modulus();
        for i in k + 1..n {
            let v = a[(i, k)].clone().modulus();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return LogDet { phase: T::zero(), log_abs: f64::NEG_INFINITY };
        }
        if piv != k {
            a.swap_rows(piv, k);
            phase = -phase;
        }
        let pivot = a[(k, k)].clone();
        log_abs += best.ln();
        phase *= pivot.clone().scale(1.0 / best);
        for i in k + 1..n {
            let factor = a[(i, k)].clone() / pivot.clone();
            if factor.clone().modulus() == 0.0 {
                continue;
            }
            for j in k + 1..n {
                let t = a[(k, j)].clone() * factor.clone();
                a[(i, j)] -= t;
            }
        }
    }
    LogDet { phase, log_abs }
}

pub fn det<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> T {
    log_det(m).to_value()
}

/// Real symmetric eigendecomposition with eigenvalues sorted descending.
pub struct SortedEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

pub fn sym_eigen(m: &DMatrix<f64>) -> SortedEigen {
    let n = m.nrows();
    if n == 0 {
        return SortedEigen { values: Vec::new(), vectors: DMatrix::zeros(0, 0) };
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    SortedEigen { values, vectors }
}

/// Smallest eigenvalue of a Hermitian matrix (real or complex).
pub fn min_eigenvalue<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    m.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn max_eigenvalue<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone().symmetric_eigenvalues().iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Principal submatrix on the given (sorted or unsorted) index list.
pub fn principal<T: ComplexField>(m: &DMatrix<T>, idx: &[usize]) -> DMatrix<T> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])].clone())
}

pub fn block<T: ComplexField>(m: &DMatrix<T>, rows: &[usize], cols: &[usize]) -> DMatrix<T> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])].clone())
}

/// `(m + m^H) / 2`, removing round-off asymmetry.
pub fn hermitize<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.adjoint()).scale(0.5)
}

pub fn spectral_norm_sym(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone().symmetric_eigenvalues().iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// `V diag(f(λ)) V^T` for a sorted eigendecomposition.
pub fn spectral_map(e: &SortedEigen, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let mapped: Vec<f64> = e.values.iter().map(|&l| f(l)).collect();
    reconstruct(&e.vectors, &mapped)
}

/// `V diag(values) V^T`, symmetrised.
pub fn reconstruct(vectors: &DMatrix<f64>, values: &[f64]) -> DMatrix<f64> {
    let scaled = DVector::from_column_slice(values);
    let mut vs = vectors.clone();
    for (c, s) in scaled.iter().enumerate() {
        vs.column_mut(c).scale_mut(*s);
    }
    let out = &vs * vectors.transpose();
    hermitize(&out)
}
