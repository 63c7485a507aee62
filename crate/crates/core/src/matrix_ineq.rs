//! Determinant inequalities for positive semidefinite Hermitian matrices and
//! the bordered-determinant (Sylvester) identity, with randomized suites.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{DppError, Result};
use crate::linalg::{self, block, log_det, principal};
use crate::operators::projection_inversion_gap;
use crate::rng::{stream, StreamRng};

pub type CMatrix = DMatrix<Complex64>;

/// Relative-absolute hybrid tolerance `tol * max(1, |rhs|)`.
pub fn hybrid_tol(tol: f64, rhs: f64) -> f64 {
    tol * rhs.abs().max(1.0)
}

#[derive(Clone, Debug)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Symmetrises its input, so the result is Hermitian exactly.
    pub fn new(m: CMatrix) -> Self {
        assert!(m.is_square());
        HermitianMatrix(linalg::hermitize(&m))
    }

    pub fn from_real(m: &DMatrix<f64>) -> Self {
        HermitianMatrix::new(m.map(|v| Complex64::new(v, 0.0)))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    fn det_sub(&self, idx: &[usize]) -> f64 {
        log_det(&principal(&self.0, idx)).to_value().re
    }

    /// Fails with `NotPsd` when the smallest eigenvalue is below `-1e-9 * scale`.
    pub fn check_psd(&self) -> Result<()> {
        let min = linalg::min_eigenvalue(&self.0);
        let scale = self.0.iter().fold(0.0f64, |a, v| a.max(v.norm())).max(1.0);
        if min < -1e-9 * scale {
            return Err(DppError::NotPsd(min));
        }
        Ok(())
    }
}

fn complement(n: usize, parts: &[&[usize]]) -> Vec<usize> {
    (0..n).filter(|i| !parts.iter().any(|p| p.contains(i))).collect()
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = a.iter().chain(b).copied().collect();
    v.sort_unstable();
    v
}

/// `(det A, det A_αα det A_ββ)` with `β` the complement of `α`.
pub fn fischer(a: &HermitianMatrix, alpha: &[usize]) -> Result<(f64, f64)> {
    a.check_psd()?;
    let beta = complement(a.size(), &[alpha]);
    if alpha.is_empty() || beta.is_empty() {
        return Err(DppError::DomainError("Fischer split needs two nonempty parts".into()));
    }
    let all: Vec<usize> = (0..a.size()).collect();
    Ok((a.det_sub(&all), a.det_sub(alpha) * a.det_sub(&beta)))
}

/// `(det A det A_ββ, det A_{α∪β} det A_{β∪γ})` with `γ` the complement of `α ∪ β`.
pub fn three_block(a: &HermitianMatrix, alpha: &[usize], beta: &[usize]) -> Result<(f64, f64)> {
    a.check_psd()?;
    let gamma = complement(a.size(), &[alpha, beta]);
    let all: Vec<usize> = (0..a.size()).collect();
    let lhs = a.det_sub(&all) * a.det_sub(beta);
    let rhs = a.det_sub(&union(alpha, beta)) * a.det_sub(&union(beta, &gamma));
    Ok((lhs, rhs))
}

fn condition_number(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `(det A / det A_ββ, det(a^β_kl))` where
/// `a^β_kl = det A_{β∪{k}, β∪{l}} / det A_ββ` over `k, l` outside `β`.
pub fn det_ratio_identity(a: &CMatrix, beta: &[usize]) -> Result<(Complex64, Complex64)> {
    let n = a.nrows();
    let bb = principal(a, beta);
    let cond = condition_number(&bb);
    if cond >= 1e12 {
        return Err(DppError::SingularBlock(cond));
    }
    let d_bb = log_det(&bb).to_value();
    let direct = log_det(a).to_value() / d_bb;
    let rest = complement(n, &[beta]);
    let mut bordered = CMatrix::zeros(rest.len(), rest.len());
    for (r, &k) in rest.iter().enumerate() {
        for (c, &l) in rest.iter().enumerate() {
            let mut rows = beta.to_vec();
            rows.push(k);
            let mut cols = beta.to_vec();
            cols.push(l);
            bordered[(r, c)] = log_det(&block(a, &rows, &cols)).to_value() / d_bb;
        }
    }
    Ok((direct, log_det(&bordered).to_value()))
}

/// `det(A_αα - A_αβ A_ββ^{-1} A_βα)`, the Schur-complement route to
/// `det A / det A_ββ`.
pub fn schur_ratio(a: &CMatrix, beta: &[usize]) -> Result<Complex64> {
    let rest = complement(a.nrows(), &[beta]);
    let bb = principal(a, beta);
    let inv = bb.clone().try_inverse().ok_or(DppError::SingularBlock(f64::INFINITY))?;
    let s = principal(a, &rest) - block(a, &rest, beta) * inv * block(a, beta, &rest);
    Ok(log_det(&s).to_value())
}

pub fn random_complex_gaussian(rng: &mut StreamRng, rows: usize, cols: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(s * re, s * im)
    })
}

/// `G^H G + shift I` with i.i.d. complex standard normal `G`.
pub fn random_psd(rng: &mut StreamRng, n: usize, shift: f64) -> HermitianMatrix {
    let g = random_complex_gaussian(rng, n, n);
    let mut a = g.adjoint() * g;
    for i in 0..n {
        a[(i, i)] += Complex64::new(shift, 0.0);
    }
    HermitianMatrix::new(a)
}

/// Positive definite with eigenvalues drawn uniformly from `[lo, hi]`.
pub fn random_spectrum_psd(rng: &mut StreamRng, n: usize, lo: f64, hi: f64) -> CMatrix {
    let g = random_complex_gaussian(rng, n, n);
    let q = g.qr().q();
    let d =
        CMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| Complex64::new(rng.random_range(lo..=hi), 0.0)));
    linalg::hermitize(&(&q * d * q.adjoint()))
}

/// Random labels in `0..parts`, each part nonempty when `n >= parts`.
fn random_partition(rng: &mut StreamRng, n: usize, parts: usize) -> Vec<usize> {
    loop {
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..parts)).collect();
        if (0..parts).all(|p| labels.contains(&p)) || n < parts {
            return labels;
        }
    }
}

fn indices_with(labels: &[usize], which: usize) -> Vec<usize> {
    (0..labels.len()).filter(|&i| labels[i] == which).collect()
}

#[derive(Clone, Debug, Default)]
pub struct CheckSummary {
    pub name: &'static str,
    pub trials: usize,
    pub violations: usize,
    /// Largest `(lhs - rhs) / max(1, |rhs|)` seen (negative when every trial holds strictly).
    pub worst: f64,
    pub failing_trials: Vec<usize>,
}

impl CheckSummary {
    fn new(name: &'static str) -> Self {
        CheckSummary { name, worst: f64::NEG_INFINITY, ..Default::default() }
    }

    fn record(&mut self, trial: usize, excess: f64, ok: bool) {
        self.trials += 1;
        self.worst = self.worst.max(excess);
        if !ok {
            self.violations += 1;
            if self.failing_trials.len() < 20 {
                self.failing_trials.push(trial);
            }
        }
    }

    fn merge(mut self, other: CheckSummary) -> CheckSummary {
        self.trials += other.trials;
        self.violations += other.violations;
        self.worst = self.worst.max(other.worst);
        self.failing_trials.extend(other.failing_trials);
        self.failing_trials.sort_unstable();
        self.failing_trials.truncate(20);
        self
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub trials: usize,
    pub projection_trials: usize,
    pub min_size: usize,
    pub max_size: usize,
    pub tol: f64,
    pub ratio_tol: f64,
    pub gap_tol: f64,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            trials: 100_000,
            projection_trials: 10_000,
            min_size: 2,
            max_size: 8,
            tol: 1e-9,
            ratio_tol: 1e-8,
            gap_tol: 1e-9,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub checks: Vec<CheckSummary>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }

    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.name == name)
    }
}

const CHECKS: [&str; 6] =
    ["fischer", "three_block", "det_ratio", "schur_identity", "det_monotone", "projection_inversion"];

fn run_trial(cfg: &SuiteConfig, trial: usize, out: &mut [CheckSummary]) -> Result<()> {
    let mut rng = stream(cfg.seed, trial as u64);
    let n = rng.random_range(cfg.min_size..=cfg.max_size);
    let shift = if rng.random_bool(0.5) { 0.0 } else { 1e-3 };
    let a = random_psd(&mut rng, n, shift);

    let labels = random_partition(&mut rng, n, 2);
    let (lhs, rhs) = fischer(&a, &indices_with(&labels, 0))?;
    out[0].record(trial, (lhs - rhs) / rhs.abs().max(1.0), lhs <= rhs + hybrid_tol(cfg.tol, rhs));

    let labels = random_partition(&mut rng, n, 3);
    let (lhs, rhs) = three_block(&a, &indices_with(&labels, 0), &indices_with(&labels, 1))?;
    out[1].record(trial, (lhs - rhs) / rhs.abs().max(1.0), lhs <= rhs + hybrid_tol(cfg.tol, rhs));

    // Sylvester's identity on a general complex matrix, sizes 2..=10.
    let m = rng.random_range(2..=10usize);
    let g = random_complex_gaussian(&mut rng, m, m);
    let beta: Vec<usize> = (0..m).filter(|_| rng.random_bool(0.5)).collect();
    match det_ratio_identity(&g, &beta) {
        Ok((direct, bordered)) => {
            let err = (direct - bordered).norm() / direct.norm().max(f64::MIN_POSITIVE);
            out[2].record(trial, err - cfg.ratio_tol, err <= cfg.ratio_tol);
            let schur = schur_ratio(&g, &beta)?;
            let err = (direct - schur).norm() / direct.norm().max(f64::MIN_POSITIVE);
            out[3].record(trial, err - cfg.ratio_tol, err <= cfg.ratio_tol);
        }
        Err(DppError::SingularBlock(_)) => {}
        Err(e) => return Err(e),
    }

    let g = random_complex_gaussian(&mut rng, n, n);
    let b = HermitianMatrix::new(a.matrix() + g.adjoint() * g);
    let all: Vec<usize> = (0..n).collect();
    let (da, db) = (a.det_sub(&all), b.det_sub(&all));
    out[4].record(trial, (da - db) / db.abs().max(1.0), da <= db + hybrid_tol(cfg.tol, db));

    if trial < cfg.projection_trials {
        let t = random_spectrum_psd(&mut rng, n, 0.1, 2.0);
        let labels = random_partition(&mut rng, n, 2);
        let mask: Vec<bool> = labels.iter().map(|&l| l == 0).collect();
        let gap = projection_inversion_gap(&t, &mask)?;
        out[5].record(trial, -gap, gap >= -cfg.gap_tol);
    }
    Ok(())
}

/// Runs every check over `cfg.trials` seeded trials in parallel.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let empty = || CHECKS.iter().map(|&n| CheckSummary::new(n)).collect::<Vec<_>>();
    let checks = (0..cfg.trials.max(cfg.projection_trials))
        .into_par_iter()
        .try_fold(empty, |mut acc, trial| {
            run_trial(cfg, trial, &mut acc)?;
            Ok::<_, DppError>(acc)
        })
        .try_reduce(empty, |a, b| Ok(a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect()))?;
    Ok(SuiteReport { checks })
}

/// Writes each failing trial's PSD matrix and partition as CSV for triage.
pub fn dump_failures(cfg: &SuiteConfig, report: &SuiteReport, dir: &Path) -> Result<usize> {
    fs::create_dir_all(dir)?;
    let mut written = 0;
    for check in &report.checks {
        for &trial in &check.failing_trials {
            let mut rng = stream(cfg.seed, trial as u64);
            let n = rng.random_range(cfg.min_size..=cfg.max_size);
            let shift = if rng.random_bool(0.5) { 0.0 } else { 1e-3 };
            let a = random_psd(&mut rng, n, shift);
            let labels = random_partition(&mut rng, n, 2);
            let path = dir.join(format!("{}_trial{}.csv", check.name, trial));
            let mut w = csv::Writer::from_path(&path)?;
            for r in 0..n {
                let mut rec: Vec<String> =
                    (0..n).map(|c| format!("{:.17e}{:+.17e}i", a.matrix()[(r, c)].re, a.matrix()[(r, c)].im)).collect();
                rec.push(format!("part={}", labels[r]));
                w.write_record(&rec)?;
            }
            w.flush()?;
            written += 1;
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(rows: usize, v: &[f64]) -> HermitianMatrix {
        HermitianMatrix::from_real(&DMatrix::from_row_slice(rows, rows, v))
    }

    #[test]
    fn fischer_two_by_two() {
        let (lhs, rhs) = fischer(&real(2, &[2.0, 1.0, 1.0, 2.0]), &[0]).unwrap();
        assert!((lhs - 3.0).abs() < 1e-14 && (rhs - 4.0).abs() < 1e-14);
    }

    #[test]
    fn fischer_diagonal_is_equality() {
        let (lhs, rhs) = fischer(&real(3, &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 5.0]), &[1]).unwrap();
        assert!((lhs - rhs).abs() < 1e-13);
    }

    #[test]
    fn fischer_rejects_indefinite() {
        assert!(matches!(fischer(&real(2, &[1.0, 2.0, 2.0, 1.0]), &[0]), Err(DppError::NotPsd(_))));
    }

    #[test]
    fn three_block_with_small_middle_block_holds() {
        let a = real(3, &[2.0, 0.5, 0.3, 0.5, 10.0, 0.4, 0.3, 0.4, 3.0]);
        let (lhs, rhs) = three_block(&a, &[0], &[1]).unwrap();
        assert!(lhs <= rhs);
        // empty middle block is Fischer
        let (l3, r3) = three_block(&a, &[0], &[]).unwrap();
        let (lf, rf) = fischer(&a, &[0]).unwrap();
        assert!((l3 - lf).abs() < 1e-12 && (r3 - rf).abs() < 1e-12);
    }

    #[test]
    fn three_block_block_diagonal_is_equality() {
        // γ = {2} decoupled from α ∪ β
        let a = real(3, &[2.0, 0.5, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 4.0]);
        let (lhs, rhs) = three_block(&a, &[0], &[1]).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn det_ratio_small_cases() {
        let a = CMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(3.0, 1.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0), Complex64::new(2.0, 0.0)],
        );
        let (d, b) = det_ratio_identity(&a, &[]).unwrap();
        assert!((d - a.clone().determinant()).norm() < 1e-13 && (b - d).norm() < 1e-13);
        let (d, b) = det_ratio_identity(&a, &[1]).unwrap();
        let schur = a[(0, 0)] - a[(0, 1)] * a[(1, 0)] / a[(1, 1)];
        assert!((d - schur).norm() < 1e-13 && (b - schur).norm() < 1e-13);
        let sing = CMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
        );
        assert!(matches!(det_ratio_identity(&sing, &[1]), Err(DppError::SingularBlock(_))));
    }

    #[test]
    fn small_suite_passes() {
        let cfg = SuiteConfig { trials: 2000, projection_trials: 500, ..Default::default() };
        let report = run_suite(&cfg).unwrap();
        for c in &report.checks {
            assert!(c.passed(), "{} failed: {:?}", c.name, c);
            assert!(c.trials > 0);
        }
        assert_eq!(report.check("projection_inversion").unwrap().trials, 500);
    }

    #[test]
    fn suite_is_deterministic() {
        let cfg = SuiteConfig { trials: 300, projection_trials: 50, seed: 99, ..Default::default() };
        let a = run_suite(&cfg).unwrap();
        let b = run_suite(&cfg).unwrap();
        for (x, y) in a.checks.iter().zip(&b.checks) {
            assert_eq!(x.worst.to_bits(), y.worst.to_bits());
        }
    }
}
