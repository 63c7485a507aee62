//! Boolean-model clusters: the connected components of the union of closed
//! radius-`R` balls around the points, i.e. chains of distances `<= 2R`.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{DppError, Result};
use crate::samplers::{mean_se, SampleBatch};
use crate::space::{Configuration, Point, Window};

#[derive(Clone, Debug)]
pub struct ClusterInfo {
    pub size: usize,
    pub lower: Point,
    pub upper: Point,
    pub diameter: f64,
    pub members: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct ClusterDecomposition {
    pub radius: f64,
    parent: Vec<usize>,
    /// Cluster label per point, numbered by first appearance.
    pub labels: Vec<usize>,
    pub clusters: Vec<ClusterInfo>,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn unite(parent: &mut [usize], rank: &mut [u8], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra == rb {
        return;
    }
    match rank[ra].cmp(&rank[rb]) {
        std::cmp::Ordering::Less => parent[ra] = rb,
        std::cmp::Ordering::Greater => parent[rb] = ra,
        std::cmp::Ordering::Equal => {
            parent[rb] = ra;
            rank[ra] += 1;
        }
    }
}

impl ClusterDecomposition {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn same_cluster(&mut self, a: usize, b: usize) -> bool {
        find(&mut self.parent, a) == find(&mut self.parent, b)
    }

    pub fn largest(&self) -> usize {
        self.clusters.iter().map(|c| c.size).max().unwrap_or(0)
    }

    /// True when one cluster's ball union meets both faces of the window
    /// orthogonal to the first axis.
    pub fn spans(&self, window: &Window) -> bool {
        let r = self.radius;
        self.clusters.iter().any(|c| c.lower.coord(0) - r <= window.lo(0) && c.upper.coord(0) + r >= window.hi(0))
    }
}

/// Union-find over the configuration with grid buckets of side `2R`, so
/// only neighbouring buckets are compared.
pub fn decompose(xi: &Configuration, radius: f64) -> Result<ClusterDecomposition> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(DppError::ParameterOutOfRange(format!("radius {radius} must be positive")));
    }
    let pts = xi.points();
    let n = pts.len();
    let link = 2.0 * radius;
    let mut parent: Vec<usize> = (0..n).collect();
    let mut rank = vec![0u8; n];
    let d = xi.dim().unwrap_or(1);
    let cell = |p: &Point| -> (i64, i64) {
        let c0 = (p.coord(0) / link).floor() as i64;
        let c1 = if d > 1 { (p.coord(1) / link).floor() as i64 } else { 0 };
        (c0, c1)
    };
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in pts.iter().enumerate() {
        buckets.entry(cell(p)).or_default().push(i);
    }
    let reach: i64 = if d > 1 { 1 } else { 0 };
    for (i, p) in pts.iter().enumerate() {
        let (c0, c1) = cell(p);
        for dx in -1..=1 {
            for dy in -reach..=reach {
                if let Some(bucket) = buckets.get(&(c0 + dx, c1 + dy)) {
                    for &j in bucket {
                        if j > i && p.dist(&pts[j]) <= link {
                            unite(&mut parent, &mut rank, i, j);
                        }
                    }
                }
            }
        }
    }
    let mut root_label: HashMap<usize, usize> = HashMap::new();
    let mut labels = Vec::with_capacity(n);
    let mut clusters: Vec<ClusterInfo> = Vec::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        let next = root_label.len();
        let l = *root_label.entry(root).or_insert(next);
        labels.push(l);
        if l == clusters.len() {
            clusters.push(ClusterInfo { size: 0, lower: pts[i], upper: pts[i], diameter: 0.0, members: Vec::new() });
        }
        let c = &mut clusters[l];
        c.size += 1;
        c.members.push(i);
        let mut lo = [0.0; 2];
        let mut hi = [0.0; 2];
        for k in 0..d {
            lo[k] = c.lower.coord(k).min(pts[i].coord(k));
            hi[k] = c.upper.coord(k).max(pts[i].coord(k));
        }
        c.lower = Point::from_slice(&lo[..d])?;
        c.upper = Point::from_slice(&hi[..d])?;
    }
    for c in &mut clusters {
        c.diameter = if d == 1 {
            c.upper.coord(0) - c.lower.coord(0)
        } else {
            let m = &c.members;
            let mut best = 0.0f64;
            for a in 0..m.len() {
                for b in a + 1..m.len() {
                    best = best.max(pts[m[a]].dist(&pts[m[b]]));
                }
            }
            best
        };
    }
    Ok(ClusterDecomposition { radius, parent, labels, clusters })
}

/// `W(α, ξ)`: the points of `αξ` in clusters of `B_R(αξ)` that contain a
/// point of `α`.
pub fn hull_w(alpha: &Configuration, xi: &Configuration, radius: f64) -> Result<Configuration> {
    let all = alpha.union(xi)?;
    let dec = decompose(&all, radius)?;
    let hit: Vec<usize> =
        all.iter().enumerate().filter(|(_, p)| alpha.contains(p)).map(|(i, _)| dec.labels[i]).collect();
    let mask: Vec<bool> = dec.labels.iter().map(|l| hit.contains(l)).collect();
    Ok(all.select(&mask))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveRow {
    pub window_size: f64,
    pub mean_largest_fraction: f64,
    pub largest_se: f64,
    pub spanning_prob: f64,
    pub spanning_se: f64,
}

/// Sampler handle for percolation curves: `(window, reps, seed) -> batch`.
pub type BatchSampler<'a> = &'a (dyn Fn(&Window, usize, u64) -> Result<SampleBatch> + Sync);

/// Largest-cluster fraction and spanning indicator of one configuration.
pub fn cluster_stats(cfg: &Configuration, radius: f64, window: &Window) -> Result<(f64, bool)> {
    let dec = decompose(cfg, radius)?;
    let frac = if cfg.is_empty() { 0.0 } else { dec.largest() as f64 / cfg.len() as f64 };
    Ok((frac, dec.spans(window)))
}

/// Monte Carlo largest-cluster fraction and spanning probability per window.
/// Window `i` is sampled with seed `seed + i`.
pub fn percolation_curve(
    sampler: BatchSampler,
    radius: f64,
    windows: &[Window],
    reps: usize,
    seed: u64,
) -> Result<Vec<CurveRow>> {
    windows
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let batch = sampler(w, reps, seed.wrapping_add(i as u64))?;
            let stats = batch.configs.par_iter().map(|c| cluster_stats(c, radius, w)).collect::<Result<Vec<_>>>()?;
            let fracs: Vec<f64> = stats.iter().map(|s| s.0).collect();
            let spans: Vec<f64> = stats.iter().map(|s| f64::from(u8::from(s.1))).collect();
            let (mean_largest_fraction, largest_se) = mean_se(&fracs);
            let (spanning_prob, spanning_se) = mean_se(&spans);
            Ok(CurveRow { window_size: w.side(0), mean_largest_fraction, largest_se, spanning_prob, spanning_se })
        })
        .collect()
}

pub fn write_curve_csv<W: Write>(rows: &[CurveRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["window_size", "mean_largest_fraction", "se", "spanning_prob", "se"])?;
    for r in rows {
        w.write_record([
            r.window_size.to_string(),
            format!("{:.10}", r.mean_largest_fraction),
            format!("{:.10}", r.largest_se),
            format!("{:.10}", r.spanning_prob),
            format!("{:.10}", r.spanning_se),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;
    use rand::Rng;

    fn brute_labels(cfg: &Configuration, r: f64) -> Vec<Vec<bool>> {
        let n = cfg.len();
        let p = cfg.points();
        let mut reach = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                reach[i][j] = i == j || p[i].dist(&p[j]) <= 2.0 * r;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if reach[i][k] && reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
        reach
    }

    #[test]
    fn empty_and_touching_conventions() {
        assert!(decompose(&Configuration::empty(), 1.0).unwrap().is_empty());
        let touch = Configuration::from_1d(&[0.0, 2.0]).unwrap();
        assert_eq!(decompose(&touch, 1.0).unwrap().len(), 1);
        let apart = Configuration::from_1d(&[0.0, 2.0 + 1e-9]).unwrap();
        assert_eq!(decompose(&apart, 1.0).unwrap().len(), 2);
        assert!(decompose(&touch, 0.0).is_err());
    }

    #[test]
    fn hull_examples() {
        let r = 1.0;
        let alpha = Configuration::from_1d(&[0.0]).unwrap();
        assert_eq!(hull_w(&alpha, &Configuration::empty(), r).unwrap().len(), 1);
        let far = Configuration::from_1d(&[10.0, 20.0]).unwrap();
        assert_eq!(hull_w(&alpha, &far, r).unwrap().len(), 1);
        let chain: Vec<f64> = (1..=5).map(|k| 1.9 * r * k as f64).collect();
        let xi = Configuration::from_1d(&chain).unwrap();
        assert_eq!(hull_w(&alpha, &xi, r).unwrap().len(), 6);
        assert!(hull_w(&alpha, &alpha, r).is_err());
    }

    #[test]
    fn union_find_matches_transitive_closure() {
        for trial in 0..40 {
            let mut rng = stream(17, trial);
            let n = rng.random_range(0..200);
            let d = 1 + (trial % 2) as usize;
            let pts: Vec<Point> = (0..n)
                .map(|_| {
                    let c: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..20.0)).collect();
                    Point::from_slice(&c).unwrap()
                })
                .collect();
            let cfg = Configuration::new(pts).unwrap();
            let r = rng.random_range(0.05..0.8);
            let dec = decompose(&cfg, r).unwrap();
            let reach = brute_labels(&cfg, r);
            for i in 0..cfg.len() {
                for j in 0..cfg.len() {
                    assert_eq!(dec.labels[i] == dec.labels[j], reach[i][j]);
                }
            }
            assert_eq!(dec.clusters.iter().map(|c| c.size).sum::<usize>(), cfg.len());
        }
    }

    #[test]
    fn spanning_examples() {
        let w = Window::interval(0.0, 10.0).unwrap();
        let cfg = Configuration::from_1d(&[1.0, 3.0, 5.0, 7.0, 9.0]).unwrap();
        assert!(decompose(&cfg, 1.0).unwrap().spans(&w));
        let gap = Configuration::from_1d(&[1.0, 3.0, 7.0, 9.0]).unwrap();
        assert!(!decompose(&gap, 1.0).unwrap().spans(&w));
        assert!(!decompose(&Configuration::empty(), 1.0).unwrap().spans(&w));
    }

    #[test]
    fn zero_intensity_never_spans() {
        let sampler =
            |w: &Window, reps: usize, seed: u64| crate::samplers::sample_poisson(&|_| 0.0, 0.0, w, reps, seed);
        let ws: Vec<Window> = [5.0, 10.0].iter().map(|&l| Window::interval(0.0, l).unwrap()).collect();
        let rows = percolation_curve(&sampler, 1.0, &ws, 100, 1).unwrap();
        assert!(rows.iter().all(|r| r.spanning_prob == 0.0));
    }

    proptest! {
        #[test]
        fn invariant_under_translation_and_permutation(
            xs in proptest::collection::vec((0.0f64..10.0, 0.0f64..10.0), 0..40),
            shift in (-50.0f64..50.0, -50.0f64..50.0),
        ) {
            let pts: Vec<Point> = xs.iter().map(|&(x, y)| Point::new2(x, y)).collect();
            let Ok(cfg) = Configuration::new(pts.clone()) else { return Ok(()) };
            let moved = Configuration::new(pts.iter().rev().map(|p| p.translate(&[shift.0, shift.1])).collect()).unwrap();
            let a = decompose(&cfg, 0.7).unwrap();
            let b = decompose(&moved, 0.7).unwrap();
            let mut sa: Vec<usize> = a.clusters.iter().map(|c| c.size).collect();
            let mut sb: Vec<usize> = b.clusters.iter().map(|c| c.size).collect();
            sa.sort_unstable();
            sb.sort_unstable();
            prop_assert_eq!(sa, sb);
        }

        #[test]
        fn hull_is_monotone_in_xi(xs in proptest::collection::vec(0.5f64..30.0, 0..30), keep in proptest::collection::vec(any::<bool>(), 30)) {
            let Ok(eta) = Configuration::from_1d(&xs) else { return Ok(()) };
            let mask: Vec<bool> = (0..eta.len()).map(|i| keep[i]).collect();
            let xi = eta.select(&mask);
            let alpha = Configuration::from_1d(&[0.0]).unwrap();
            let small = hull_w(&alpha, &xi, 1.0).unwrap();
            let big = hull_w(&alpha, &eta, 1.0).unwrap();
            prop_assert!(small.iter().all(|p| big.contains(p)));
            prop_assert!(small.contains(&Point::new1(0.0)));
        }
    }
}
