//! Point-process samplers on windows: Poisson by thinning, the exact
//! spectral sampler on a Nyström discretisation, and the birth-death
//! dynamics whose stationary law is the DPP; plus the stochastic domination
//! harness.

use std::io::Write;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};
use rayon::prelude::*;

use crate::error::{DppError, Result};
use crate::kernels::KernelSpec;
use crate::linalg::log_det;
use crate::operators::{discretize, DiscretizedOperator, LocalInteraction, Which};
use crate::quadrature::Quadrature;
use crate::rng::{stream, StreamRng};
use crate::space::{Configuration, Point, Window};

#[derive(Clone, Debug)]
pub struct SampleBatch {
    pub window: Window,
    pub configs: Vec<Configuration>,
    pub seed: u64,
    pub method: String,
    pub params: Vec<(String, String)>,
    /// Nodes per dimension of the discretisation, for grid-based samplers.
    pub grid_n: Option<usize>,
    pub elapsed_secs: f64,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.configs.iter().map(|c| c.len()).collect()
    }

    pub fn count_in(&self, w: &Window) -> Vec<usize> {
        self.configs.iter().map(|c| c.count_in(w)).collect()
    }

    /// One row per point: `sample_id,x[,y]`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.window.dim() == 1 {
            w.write_record(["sample_id", "x"])?;
        } else {
            w.write_record(["sample_id", "x", "y"])?;
        }
        for (id, cfg) in self.configs.iter().enumerate() {
            for p in cfg {
                let mut rec = vec![id.to_string()];
                rec.extend(p.coords().iter().map(|c| format!("{c:.17e}")));
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// `key = value` sidecar with seed, method, parameters, grid and timing.
    pub fn write_metadata<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "method = {:?}", self.method)?;
        writeln!(out, "seed = {}", self.seed)?;
        writeln!(out, "samples = {}", self.configs.len())?;
        let lo: Vec<String> = (0..self.window.dim()).map(|i| self.window.lo(i).to_string()).collect();
        let hi: Vec<String> = (0..self.window.dim()).map(|i| self.window.hi(i).to_string()).collect();
        writeln!(out, "window_lo = [{}]", lo.join(", "))?;
        writeln!(out, "window_hi = [{}]", hi.join(", "))?;
        if let Some(n) = self.grid_n {
            writeln!(out, "grid_n = {n}")?;
        }
        writeln!(out, "elapsed_secs = {:.3}", self.elapsed_secs)?;
        if !self.params.is_empty() {
            writeln!(out, "\n[parameters]")?;
            for (k, v) in &self.params {
                writeln!(out, "{k} = {v:?}")?;
            }
        }
        Ok(())
    }
}

fn uniform_in(rng: &mut StreamRng, lo: &Point, hi: &Point) -> Point {
    let d = lo.dim();
    let mut c = [0.0; 2];
    for (i, v) in c.iter_mut().enumerate().take(d) {
        let (a, b) = (lo.coord(i), hi.coord(i));
        *v = a + (b - a) * rng.random::<f64>();
    }
    Point::from_slice(&c[..d]).expect("finite")
}

/// Intensity function handle for inhomogeneous Poisson sampling.
pub type Intensity<'a> = &'a (dyn Fn(&Point) -> f64 + Sync);

fn poisson_one(z: Intensity, z_max: f64, window: &Window, rng: &mut StreamRng) -> Result<Configuration> {
    let mean = z_max * window.volume();
    if mean <= 0.0 {
        return Ok(Configuration::empty());
    }
    let n = Poisson::new(mean).map_err(|e| DppError::ParameterOutOfRange(e.to_string()))?.sample(rng) as usize;
    let mut pts = Vec::with_capacity(n);
    for _ in 0..n {
        let x = uniform_in(rng, window.lower(), window.upper());
        let zx = z(&x);
        if zx > z_max * (1.0 + 1e-12) {
            return Err(DppError::BadBound { value: zx, bound: z_max });
        }
        if rng.random::<f64>() * z_max < zx {
            pts.push(x);
        }
    }
    Configuration::new(pts)
}

/// Poisson process with intensity `z <= z_max`, by thinning a homogeneous
/// process of rate `z_max`.
pub fn sample_poisson(z: Intensity, z_max: f64, window: &Window, count: usize, seed: u64) -> Result<SampleBatch> {
    let start = Instant::now();
    let configs = (0..count)
        .into_par_iter()
        .map(|i| poisson_one(z, z_max, window, &mut stream(seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleBatch {
        window: *window,
        configs,
        seed,
        method: "poisson".into(),
        params: vec![("z_max".into(), z_max.to_string())],
        grid_n: None,
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}

/// Exact sampler for the DPP of a discretised kernel: select eigenvectors
/// with probability `λ_i`, sample the projection DPP on the nodes, then
/// place each chosen node uniformly in its quadrature cell.
pub struct SpectralSampler {
    window: Window,
    quad: std::sync::Arc<Quadrature>,
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    n: usize,
}

impl SpectralSampler {
    pub fn new(spec: &KernelSpec, window: &Window, n: usize) -> Result<SpectralSampler> {
        let mut s = SpectralSampler::from_operator(&discretize(spec, Which::K, window, n)?)?;
        s.n = n;
        Ok(s)
    }

    /// Sampler for an already discretised correlation kernel, e.g. a Palm
    /// kernel that is not one of the built-in families.
    pub fn from_operator(op: &DiscretizedOperator) -> Result<SpectralSampler> {
        op.check_gate()?;
        let spectrum = op.spectrum();
        Ok(SpectralSampler {
            window: *op.quadrature().window(),
            quad: op.quadrature_arc(),
            values: spectrum.clipped(),
            vectors: spectrum.vectors.clone(),
            n: op.len(),
        })
    }

    pub fn expected_count(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quad
    }

    /// Exact intensity of the discretised process at `x`: `M_ii / w_i` for
    /// the cell containing `x`.
    pub fn intensity_at(&self, x: &Point) -> Option<f64> {
        let q = &self.quad;
        let i = (0..q.len()).find(|&i| {
            let (lo, hi) = q.cell(i);
            (0..x.dim()).all(|d| x.coord(d) >= lo.coord(d) && x.coord(d) <= hi.coord(d))
        })?;
        let m: f64 = (0..self.values.len()).map(|l| self.values[l] * self.vectors[(i, l)].powi(2)).sum();
        Some(m / q.weights()[i])
    }

    pub fn sample(&self, rng: &mut StreamRng) -> Configuration {
        let sel: Vec<usize> = (0..self.values.len()).filter(|&l| rng.random::<f64>() < self.values[l]).collect();
        let k = sel.len();
        if k == 0 {
            return Configuration::empty();
        }
        let n = self.vectors.nrows();
        let v = DMatrix::from_fn(n, k, |r, c| self.vectors[(r, sel[c])]);
        // Sequential conditioning on the projection kernel P = V V^T, via the
        // Cholesky-like update of the residual diagonal.
        let mut resid: Vec<f64> = (0..n).map(|r| v.row(r).norm_squared()).collect();
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(k);
        let mut pts = Vec::with_capacity(k);
        for _ in 0..k {
            let total: f64 = resid.iter().map(|r| r.max(0.0)).sum();
            let mut u = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, r) in resid.iter().enumerate() {
                let r = r.max(0.0);
                if u < r {
                    pick = i;
                    break;
                }
                u -= r;
            }
            let mut col = &v * v.row(pick).transpose();
            for b in &basis {
                let s = b[pick];
                col.axpy(-s, b, 1.0);
            }
            let norm = col[pick].max(f64::MIN_POSITIVE).sqrt();
            col /= norm;
            for (r, c) in resid.iter_mut().zip(col.iter()) {
                *r -= c * c;
            }
            resid[pick] = 0.0;
            basis.push(col);
            let (lo, hi) = self.quad.cell(pick);
            pts.push(uniform_in(rng, lo, hi));
        }
        Configuration::new(pts).expect("distinct cells give distinct points")
    }

    pub fn sample_batch(&self, count: usize, seed: u64) -> SampleBatch {
        let start = Instant::now();
        let configs: Vec<Configuration> =
            (0..count).into_par_iter().map(|i| self.sample(&mut stream(seed, i as u64))).collect();
        SampleBatch {
            window: self.window,
            configs,
            seed,
            method: "dpp-spectral".into(),
            params: vec![("expected_count".into(), format!("{:.12}", self.expected_count()))],
            grid_n: Some(self.n),
            elapsed_secs: start.elapsed().as_secs_f64(),
        }
    }
}

pub fn sample_dpp_spectral(
    spec: &KernelSpec,
    window: &Window,
    n: usize,
    count: usize,
    seed: u64,
) -> Result<SampleBatch> {
    Ok(SpectralSampler::new(spec, window, n)?.sample_batch(count, seed))
}

/// Probe points at 10%, 30%, ..., 90% along the window's diagonal.
fn probes(window: &Window) -> Vec<Point> {
    [0.1, 0.3, 0.5, 0.7, 0.9].iter().map(|&u| window.at(&vec![u; window.dim()])).collect()
}

/// Grid refinement for the spectral sampler: double `n` until the sampler's
/// intensity at five probe points moves by less than half the standard
/// error that `planned_count` samples would give in a probe bin of 5% of
/// the window side. Returns the final `n`.
pub fn refine_grid(spec: &KernelSpec, window: &Window, n0: usize, n_max: usize, planned_count: usize) -> Result<usize> {
    let bin: f64 = (0..window.dim()).map(|i| 0.05 * window.side(i)).product();
    let mut n = n0;
    let mut prev: Option<Vec<f64>> = None;
    loop {
        let s = SpectralSampler::new(spec, window, n)?;
        let cur: Vec<f64> = probes(window).iter().map(|p| s.intensity_at(p).unwrap_or(0.0)).collect();
        if let Some(p) = &prev {
            let settled = cur.iter().zip(p).all(|(c, q)| {
                let se = (c.max(1e-12) / (bin * planned_count as f64)).sqrt();
                (c - q).abs() < 0.5 * se
            });
            if settled {
                return Ok(n);
            }
        }
        if 2 * n > n_max {
            return Ok(n);
        }
        prev = Some(cur);
        n *= 2;
    }
}

/// Birth-death dynamics with unit death rate and birth rate `c_Λ(x, ξ)`.
/// Births are proposed from the constant envelope `z_max >= J_[Λ](x, x)`
/// and thinned in two stages: first by `J_[Λ](x, x) / z_max`, then by
/// `c_Λ(x, ξ) / J_[Λ](x, x)`, a ratio that must not exceed 1.
pub struct BirthDeathSampler {
    li: LocalInteraction,
    z_max: f64,
    expected_population: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct BirthDeathSchedule {
    pub burn_in: f64,
    pub thinning: f64,
    /// Independent chains; `None` runs one chain per sample.
    pub chains: Option<usize>,
}

impl Default for BirthDeathSchedule {
    /// At stationarity births and deaths each occur at rate `E[N]`, so 20
    /// and 5 expected population-sized rounds of events take 10 and 2.5
    /// time units.
    fn default() -> Self {
        BirthDeathSchedule { burn_in: 10.0, thinning: 2.5, chains: None }
    }
}

struct Chain {
    points: Vec<Point>,
    feats: Vec<DVector<f64>>,
    gram: DMatrix<f64>,
    log_det: f64,
}

impl BirthDeathSampler {
    pub fn new(spec: &KernelSpec, window: &Window, n: usize) -> Result<BirthDeathSampler> {
        let li = LocalInteraction::new(spec, window, n)?;
        let expected_population = li.k_operator().trace();
        let grid = Quadrature::gauss_legendre(window, 64)?;
        let sup = grid.nodes().iter().chain(probes(window).iter()).map(|x| li.diag(x)).fold(0.0f64, f64::max);
        Ok(BirthDeathSampler { li, z_max: 1.1 * sup, expected_population })
    }

    pub fn envelope(&self) -> f64 {
        self.z_max
    }

    pub fn local_interaction(&self) -> &LocalInteraction {
        &self.li
    }

    fn j_entry(&self, a: &Point, fa: &DVector<f64>, b: &Point, fb: &DVector<f64>) -> f64 {
        self.li.eval_k(a, b) + fa.dot(fb)
    }

    /// Advances the chain by `duration` time units.
    fn run(&self, chain: &mut Chain, duration: f64, rng: &mut StreamRng) -> Result<()> {
        let window = self.li.window();
        let birth_rate = self.z_max * window.volume();
        let mut t = 0.0;
        loop {
            let total = birth_rate + chain.points.len() as f64;
            if total <= 0.0 {
                return Ok(());
            }
            t += Exp::new(total).expect("positive rate").sample(rng);
            if t > duration {
                return Ok(());
            }
            let u: f64 = rng.random::<f64>() * total;
            if u >= birth_rate {
                let i = rng.random_range(0..chain.points.len());
                chain.points.swap_remove(i);
                chain.feats.swap_remove(i);
                self.rebuild(chain);
                continue;
            }
            let x = uniform_in(rng, window.lower(), window.upper());
            let fx = self.li.features(&x);
            let jxx = self.li.eval_k(&x, &x) + fx.dot(&fx);
            if jxx > self.z_max {
                return Err(DppError::BadBound { value: jxx, bound: self.z_max });
            }
            if rng.random::<f64>() * self.z_max >= jxx {
                continue;
            }
            let m = chain.points.len();
            let mut grown = DMatrix::zeros(m + 1, m + 1);
            grown.view_mut((0, 0), (m, m)).copy_from(&chain.gram);
            for i in 0..m {
                let v = self.j_entry(&chain.points[i], &chain.feats[i], &x, &fx);
                grown[(i, m)] = v;
                grown[(m, i)] = v;
            }
            grown[(m, m)] = jxx;
            let ld = log_det(&grown);
            let c = if ld.is_positive() { (ld.log_abs - chain.log_det).exp() } else { 0.0 };
            let ratio = c / jxx;
            if ratio > 1.0 + 1e-9 {
                return Err(DppError::NumericalBreakdown(format!(
                    "birth acceptance probability {ratio} > 1 at x = {:?} with {m} points",
                    x.coords()
                )));
            }
            if rng.random::<f64>() < ratio {
                chain.points.push(x);
                chain.feats.push(fx);
                chain.gram = grown;
                chain.log_det = ld.log_abs;
            }
        }
    }

    fn rebuild(&self, chain: &mut Chain) {
        let m = chain.points.len();
        chain.gram = DMatrix::from_fn(m, m, |i, j| {
            self.j_entry(&chain.points[i], &chain.feats[i], &chain.points[j], &chain.feats[j])
        });
        chain.log_det = log_det(&chain.gram).log_abs;
    }

    fn snapshot(chain: &Chain) -> Configuration {
        Configuration::new(chain.points.clone()).expect("births are a.s. distinct")
    }

    /// `samples` states of one chain started empty, spaced by the schedule.
    fn run_chain(
        &self,
        schedule: &BirthDeathSchedule,
        samples: usize,
        rng: &mut StreamRng,
    ) -> Result<Vec<Configuration>> {
        let mut chain = Chain { points: Vec::new(), feats: Vec::new(), gram: DMatrix::zeros(0, 0), log_det: 0.0 };
        self.run(&mut chain, schedule.burn_in, rng)?;
        let mut out = Vec::with_capacity(samples);
        for s in 0..samples {
            if s > 0 {
                self.run(&mut chain, schedule.thinning, rng)?;
            }
            out.push(Self::snapshot(&chain));
        }
        Ok(out)
    }

    pub fn sample_batch(&self, schedule: &BirthDeathSchedule, count: usize, seed: u64) -> Result<SampleBatch> {
        let start = Instant::now();
        let chains = schedule.chains.unwrap_or(count).clamp(1, count.max(1));
        let per_chain: Vec<usize> = (0..chains).map(|c| count / chains + usize::from(c < count % chains)).collect();
        let parts = (0..chains)
            .into_par_iter()
            .map(|c| self.run_chain(schedule, per_chain[c], &mut stream(seed, c as u64)))
            .collect::<Result<Vec<_>>>()?;
        let configs: Vec<Configuration> = if count == 0 { Vec::new() } else { parts.into_iter().flatten().collect() };
        Ok(SampleBatch {
            window: *self.li.window(),
            configs,
            seed,
            method: "dpp-birthdeath".into(),
            params: vec![
                ("burn_in".into(), schedule.burn_in.to_string()),
                ("thinning".into(), schedule.thinning.to_string()),
                ("chains".into(), chains.to_string()),
                ("envelope".into(), self.z_max.to_string()),
                ("expected_population".into(), format!("{:.12}", self.expected_population)),
            ],
            grid_n: Some(self.li.quadrature().len()),
            elapsed_secs: start.elapsed().as_secs_f64(),
        })
    }
}

#[allow(clippy::too_many_arguments)]
pub fn sample_dpp_birthdeath(
    spec: &KernelSpec,
    window: &Window,
    n: usize,
    burn_in: f64,
    count: usize,
    thinning: f64,
    seed: u64,
) -> Result<SampleBatch> {
    let schedule = BirthDeathSchedule { burn_in, thinning, chains: None };
    BirthDeathSampler::new(spec, window, n)?.sample_batch(&schedule, count, seed)
}

/// Increasing statistics of a configuration on a window.
#[derive(Clone, Debug, PartialEq)]
pub enum Functional {
    /// `N_Λ`.
    Count,
    /// Largest count over a `cells^d` grid of subwindows.
    MaxSubwindowCount { cells: usize },
    /// Number of points with another point within distance `r`.
    CloseNeighbours { r: f64 },
}

impl Functional {
    /// The three default functionals, scaled to the window.
    pub fn defaults(window: &Window) -> Vec<Functional> {
        vec![
            Functional::Count,
            Functional::MaxSubwindowCount { cells: 5 },
            Functional::CloseNeighbours { r: 0.1 * window.side(0) },
        ]
    }

    pub fn name(&self) -> String {
        match self {
            Functional::Count => "count".into(),
            Functional::MaxSubwindowCount { cells } => format!("max_subwindow_count[{cells}]"),
            Functional::CloseNeighbours { r } => format!("close_neighbours[r={r}]"),
        }
    }

    pub fn eval(&self, cfg: &Configuration, window: &Window) -> f64 {
        match self {
            Functional::Count => cfg.count_in(window) as f64,
            Functional::MaxSubwindowCount { cells } => {
                let d = window.dim();
                let total = cells.pow(d as u32);
                let mut counts = vec![0usize; total];
                for p in cfg.iter().filter(|p| window.contains(p)) {
                    let mut idx = 0;
                    for i in 0..d {
                        let u = (p.coord(i) - window.lo(i)) / window.side(i);
                        let c = ((u * *cells as f64) as usize).min(cells - 1);
                        idx = idx * cells + c;
                    }
                    counts[idx] += 1;
                }
                counts.into_iter().max().unwrap_or(0) as f64
            }
            Functional::CloseNeighbours { r } => {
                let pts: Vec<&Point> = cfg.iter().filter(|p| window.contains(p)).collect();
                (0..pts.len()).filter(|&i| (0..pts.len()).any(|j| j != i && pts[i].dist(pts[j]) <= *r)).count() as f64
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct DominationRow {
    pub functional: String,
    pub mean_a: f64,
    pub se_a: f64,
    pub mean_b: f64,
    pub se_b: f64,
    /// `(mean_a - mean_b) / sqrt(se_a^2 + se_b^2)`.
    pub z: f64,
    pub violation: bool,
}

#[derive(Clone, Debug)]
pub struct DominationReport {
    pub rows: Vec<DominationRow>,
}

impl DominationReport {
    pub fn any_violation(&self) -> bool {
        self.rows.iter().any(|r| r.violation)
    }
}

/// Sample mean and standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Checks `E_A f <= E_B f` for increasing `f`: a violation is flagged when
/// `mean_A > mean_B + 3 SE` of the difference.
pub fn domination_test(a: &SampleBatch, b: &SampleBatch, functionals: &[Functional]) -> Result<DominationReport> {
    if a.window.lower() != b.window.lower() || a.window.upper() != b.window.upper() {
        return Err(DppError::InvalidWindow("domination test needs batches on the same window".into()));
    }
    let w = a.window;
    let rows = functionals
        .iter()
        .map(|f| {
            let fa: Vec<f64> = a.configs.iter().map(|c| f.eval(c, &w)).collect();
            let fb: Vec<f64> = b.configs.iter().map(|c| f.eval(c, &w)).collect();
            let (mean_a, se_a) = mean_se(&fa);
            let (mean_b, se_b) = mean_se(&fb);
            let se = (se_a * se_a + se_b * se_b).sqrt();
            let z = if se > 0.0 { (mean_a - mean_b) / se } else { 0.0 };
            DominationRow { functional: f.name(), mean_a, se_a, mean_b, se_b, z, violation: mean_a > mean_b + 3.0 * se }
        })
        .collect();
    Ok(DominationReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gof;

    fn unit() -> Window {
        Window::interval(0.0, 1.0).unwrap()
    }

    #[test]
    fn poisson_zero_intensity_is_empty() {
        let b = sample_poisson(&|_| 0.0, 0.0, &unit(), 100, 1).unwrap();
        assert!(b.configs.iter().all(|c| c.is_empty()));
    }

    #[test]
    fn poisson_mean_and_pmf() {
        let reps = 100_000;
        let b = sample_poisson(&|_| 2.0, 2.0, &unit(), reps, 3).unwrap();
        let counts: Vec<f64> = b.counts().iter().map(|&c| c as f64).collect();
        let (m, _) = mean_se(&counts);
        assert!((m - 2.0).abs() < 3.0 * (2.0 / reps as f64).sqrt(), "mean {m}");
        let pmf = |k: usize| {
            let mut p = (-2.0f64).exp();
            for i in 1..=k {
                p *= 2.0 / i as f64;
            }
            p
        };
        let p = gof::chi_square_gof(&b.counts(), pmf).unwrap();
        assert!(p > 0.001, "p = {p}");
    }

    #[test]
    fn poisson_thinning_respects_bound() {
        let z = |p: &Point| 3.0 * p.x();
        assert!(matches!(sample_poisson(&z, 1.0, &unit(), 50, 1), Err(DppError::BadBound { .. })));
        let b = sample_poisson(&z, 3.0, &unit(), 20_000, 2).unwrap();
        let counts: Vec<f64> = b.counts().iter().map(|&c| c as f64).collect();
        let (m, se) = mean_se(&counts);
        assert!((m - 1.5).abs() < 3.0 * se);
    }

    #[test]
    fn batches_are_reproducible() {
        let spec = KernelSpec::renewal(0.25, 1.0).unwrap();
        let s = SpectralSampler::new(&spec, &Window::interval(0.0, 5.0).unwrap(), 64).unwrap();
        let a = s.sample_batch(50, 11);
        let b = s.sample_batch(50, 11);
        let mut ca = Vec::new();
        let mut cb = Vec::new();
        a.write_csv(&mut ca).unwrap();
        b.write_csv(&mut cb).unwrap();
        assert_eq!(ca, cb);
        assert_ne!(s.sample_batch(50, 12).configs, a.configs);
    }

    #[test]
    fn zero_kernel_samples_are_empty() {
        let spec = KernelSpec::finite_range_gaussian(1, 1.0, 0.0).unwrap();
        let w = Window::interval(0.0, 2.0).unwrap();
        let b = sample_dpp_spectral(&spec, &w, 32, 20, 1).unwrap();
        assert!(b.configs.iter().all(|c| c.is_empty()));
        let bd = sample_dpp_birthdeath(&spec, &w, 32, 5.0, 20, 1.0, 1).unwrap();
        assert!(bd.configs.iter().all(|c| c.is_empty()));
    }

    #[test]
    fn spectral_intensity_matches_trace() {
        let spec = KernelSpec::renewal(0.25, 1.0).unwrap();
        let w = Window::interval(0.0, 10.0).unwrap();
        let s = SpectralSampler::new(&spec, &w, 128).unwrap();
        assert!((s.expected_count() - 2.5).abs() < 1e-9);
        let b = s.sample_batch(20_000, 5);
        let counts: Vec<f64> = b.counts().iter().map(|&c| c as f64).collect();
        let (m, se) = mean_se(&counts);
        assert!((m - 2.5).abs() < 3.0 * se, "{m} ± {se}");
        assert!(b.configs.iter().all(|c| c.iter().all(|p| w.contains(p))));
    }

    #[test]
    fn refinement_stops_at_a_settled_grid() {
        let spec = KernelSpec::renewal(0.25, 1.0).unwrap();
        let w = Window::interval(0.0, 4.0).unwrap();
        let n = refine_grid(&spec, &w, 16, 1024, 10_000).unwrap();
        assert!((16..=1024).contains(&n));
    }

    #[test]
    fn birthdeath_counts_agree_with_spectral() {
        let spec = KernelSpec::renewal(0.25, 1.0).unwrap();
        let w = Window::interval(0.0, 4.0).unwrap();
        let reps = 4000;
        let bd = sample_dpp_birthdeath(&spec, &w, 64, 10.0, reps, 2.5, 8).unwrap();
        let sp = sample_dpp_spectral(&spec, &w, 64, reps, 9).unwrap();
        let p = gof::chi_square_two_sample(&bd.counts(), &sp.counts()).unwrap();
        assert!(p > 0.001, "p = {p}");
    }

    #[test]
    fn domination_flags_inverted_poisson_pair() {
        let w = Window::interval(0.0, 5.0).unwrap();
        let hi = sample_poisson(&|_| 1.0, 1.0, &w, 5000, 1).unwrap();
        let lo = sample_poisson(&|_| 0.5, 0.5, &w, 5000, 2).unwrap();
        let r = domination_test(&hi, &lo, &[Functional::Count]).unwrap();
        assert!(r.any_violation());
        let r = domination_test(&lo, &hi, &Functional::defaults(&w)).unwrap();
        assert!(!r.any_violation());
        let same = domination_test(&hi, &hi, &Functional::defaults(&w)).unwrap();
        assert!(!same.any_violation());
    }

    #[test]
    fn functionals_are_increasing_on_examples() {
        let w = Window::interval(0.0, 10.0).unwrap();
        let small = Configuration::from_1d(&[1.0, 5.0]).unwrap();
        let big = Configuration::from_1d(&[1.0, 1.5, 5.0, 9.0]).unwrap();
        for f in Functional::defaults(&w) {
            assert!(f.eval(&small, &w) <= f.eval(&big, &w), "{}", f.name());
        }
        assert_eq!(Functional::CloseNeighbours { r: 1.0 }.eval(&big, &w), 2.0);
        assert_eq!(Functional::MaxSubwindowCount { cells: 5 }.eval(&big, &w), 2.0);
    }
}
