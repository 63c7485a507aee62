//! Goodness-of-fit helpers: chi-square tests on count histograms and the
//! Kolmogorov–Smirnov statistic.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{DppError, Result};

fn chi_square_p(stat: f64, df: usize) -> Result<f64> {
    if df == 0 {
        return Ok(1.0);
    }
    let dist = ChiSquared::new(df as f64).map_err(|e| DppError::DomainError(e.to_string()))?;
    Ok(dist.sf(stat))
}

fn histogram(xs: &[usize], len: usize) -> Vec<f64> {
    let mut h = vec![0.0; len];
    for &x in xs {
        h[x] += 1.0;
    }
    h
}

/// Goodness of fit of integer counts against a pmf on `0, 1, ...`. Bins are
/// merged left to right until each has expected count at least 5; the last
/// bin absorbs the tail. Returns the p-value.
pub fn chi_square_gof(counts: &[usize], pmf: impl Fn(usize) -> f64) -> Result<f64> {
    let total = counts.len() as f64;
    let max = counts.iter().copied().max().unwrap_or(0);
    let obs = histogram(counts, max + 1);
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    let mut cum = 0.0;
    for (k, &ok) in obs.iter().enumerate() {
        let p = pmf(k);
        cum += p;
        o += ok;
        e += p * total;
        if e >= 5.0 {
            bins.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    let tail = (1.0 - cum).max(0.0) * total;
    match bins.last_mut() {
        Some(last) => {
            last.0 += o;
            last.1 += e + tail;
        }
        None => return Ok(1.0),
    }
    let stat: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    chi_square_p(stat, bins.len() - 1)
}

/// Two-sample chi-square homogeneity test on count histograms; bins are
/// merged until the pooled count is at least 10. Returns the p-value.
pub fn chi_square_two_sample(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(DppError::DomainError("two-sample test needs two nonempty samples".into()));
    }
    let len = a.iter().chain(b).copied().max().unwrap_or(0) + 1;
    let (ha, hb) = (histogram(a, len), histogram(b, len));
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut x, mut y) = (0.0, 0.0);
    for k in 0..len {
        x += ha[k];
        y += hb[k];
        if x + y >= 10.0 {
            bins.push((x, y));
            x = 0.0;
            y = 0.0;
        }
    }
    match bins.last_mut() {
        Some(last) => {
            last.0 += x;
            last.1 += y;
        }
        None => return Ok(1.0),
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ra, rb) = ((nb / na).sqrt(), (na / nb).sqrt());
    let stat: f64 = bins.iter().map(|(x, y)| (ra * x - rb * y).powi(2) / (x + y)).sum();
    chi_square_p(stat, bins.len() - 1)
}

/// `sup |F_n - F|` for a sample against a continuous cdf.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max)
}

/// Limiting Kolmogorov distribution `P(sqrt(n) D_n <= x)`.
pub fn kolmogorov_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * x * x).exp();
        s += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    1.0 - 2.0 * s
}

/// Critical value of `D_n` at level `alpha`, with Stephens' finite-sample
/// scaling `sqrt(n) + 0.12 + 0.11 / sqrt(n)`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 5.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_cdf(mid) < 1.0 - alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let rn = (n as f64).sqrt();
    0.5 * (lo + hi) / (rn + 0.12 + 0.11 / rn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    #[test]
    fn kolmogorov_quantiles() {
        // Standard tabulated asymptotic quantiles.
        assert!((ks_critical(1_000_000, 0.01) * 1000.0 - 1.6276).abs() < 1e-3);
        assert!((ks_critical(1_000_000, 0.05) * 1000.0 - 1.3581).abs() < 1e-3);
    }

    #[test]
    fn ks_accepts_uniform_sample() {
        let mut r = stream(1, 0);
        let xs: Vec<f64> = (0..10_000).map(|_| r.random::<f64>()).collect();
        assert!(ks_statistic(&xs, |x| x.clamp(0.0, 1.0)) < ks_critical(xs.len(), 0.01));
        assert!(ks_statistic(&xs, |x| x.clamp(0.0, 1.0).powi(2)) > ks_critical(xs.len(), 0.01));
    }

    #[test]
    fn two_sample_detects_shift() {
        let a: Vec<usize> = (0..2000).map(|i| i % 5).collect();
        let b: Vec<usize> = (0..2000).map(|i| i % 5 + 1).collect();
        assert!(chi_square_two_sample(&a, &a).unwrap() > 0.99);
        assert!(chi_square_two_sample(&a, &b).unwrap() < 1e-6);
    }
}
