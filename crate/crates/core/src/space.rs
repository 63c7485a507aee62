//! Points, finite configurations and rectangular windows in R^1 or R^2.
//!
//! Configurations are kept in lexicographic order so that every matrix built
//! from them has a fixed row order, which makes determinants reproducible
//! bit for bit.

use std::cmp::Ordering;
use std::io::{Read, Write};

use crate::error::{DppError, Result};

/// Points closer than this are treated as the same point.
pub const COINCIDENCE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    coords: [f64; 2],
    dim: u8,
}

impl Point {
    pub fn new1(x: f64) -> Self {
        Point { coords: [x, 0.0], dim: 1 }
    }

    pub fn new2(x: f64, y: f64) -> Self {
        Point { coords: [x, y], dim: 2 }
    }

    pub fn from_slice(c: &[f64]) -> Result<Self> {
        let p = match c.len() {
            1 => Point::new1(c[0]),
            2 => Point::new2(c[0], c[1]),
            n => return Err(DppError::DimensionMismatch { expected: 2, got: n }),
        };
        if c.iter().any(|v| !v.is_finite()) {
            return Err(DppError::NonFinite(c.to_vec()));
        }
        Ok(p)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        self.coords[i]
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.coords[0]
    }

    #[inline]
    pub fn dist(&self, other: &Point) -> f64 {
        let dx = self.coords[0] - other.coords[0];
        let dy = self.coords[1] - other.coords[1];
        (dx * dx + dy * dy).sqrt()
    }

    /// Coordinate-wise difference `self - other`.
    #[inline]
    pub fn sub(&self, other: &Point) -> Point {
        Point { coords: [self.coords[0] - other.coords[0], self.coords[1] - other.coords[1]], dim: self.dim }
    }

    pub fn translate(&self, shift: &[f64]) -> Point {
        let mut c = self.coords;
        for (i, s) in shift.iter().enumerate().take(self.dim as usize) {
            c[i] += s;
        }
        Point { coords: c, dim: self.dim }
    }

    pub fn lex_cmp(&self, other: &Point) -> Ordering {
        self.coords[0].total_cmp(&other.coords[0]).then(self.coords[1].total_cmp(&other.coords[1]))
    }
}

/// A finite simple point configuration in canonical (lexicographic) order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Configuration {
    points: Vec<Point>,
}

impl Configuration {
    pub fn empty() -> Self {
        Configuration { points: Vec::new() }
    }

    /// Sorts the points and rejects coincident pairs and mixed dimensions.
    pub fn new(mut points: Vec<Point>) -> Result<Self> {
        if let Some(first) = points.first() {
            let d = first.dim();
            for p in &points {
                if p.dim() != d {
                    return Err(DppError::DimensionMismatch { expected: d, got: p.dim() });
                }
                if p.coords().iter().any(|v| !v.is_finite()) {
                    return Err(DppError::NonFinite(p.coords().to_vec()));
                }
            }
        }
        points.sort_by(|a, b| a.lex_cmp(b));
        check_simple(&points)?;
        Ok(Configuration { points })
    }

    pub fn from_1d(xs: &[f64]) -> Result<Self> {
        Configuration::new(xs.iter().map(|&x| Point::new1(x)).collect())
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.points.iter().any(|q| q.dist(p) < COINCIDENCE_TOL)
    }

    /// `xi ∩ window`, boundary inclusive.
    pub fn restrict(&self, window: &Window) -> Configuration {
        Configuration { points: self.points.iter().filter(|p| window.contains(p)).copied().collect() }
    }

    pub fn count_in(&self, window: &Window) -> usize {
        self.points.iter().filter(|p| window.contains(p)).count()
    }

    /// Disjoint union `alpha xi`. Fails if the two share a point.
    pub fn union(&self, other: &Configuration) -> Result<Configuration> {
        let mut merged = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.points.len() && j < other.points.len() {
            if self.points[i].lex_cmp(&other.points[j]) == Ordering::Greater {
                merged.push(other.points[j]);
                j += 1;
            } else {
                merged.push(self.points[i]);
                i += 1;
            }
        }
        merged.extend_from_slice(&self.points[i..]);
        merged.extend_from_slice(&other.points[j..]);
        check_simple(&merged)?;
        Ok(Configuration { points: merged })
    }

    /// Points of `self` whose indices are flagged in `mask`.
    pub fn select(&self, mask: &[bool]) -> Configuration {
        Configuration { points: self.points.iter().zip(mask).filter(|(_, &m)| m).map(|(p, _)| *p).collect() }
    }

    pub fn dim(&self) -> Option<usize> {
        self.points.first().map(|p| p.dim())
    }

    pub fn write_csv<W: Write>(&self, dim: usize, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if dim == 1 {
            w.write_record(["x"])?;
        } else {
            w.write_record(["x", "y"])?;
        }
        for p in &self.points {
            let rec: Vec<String> = p.coords().iter().map(|c| format!("{c:.17e}")).collect();
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Configuration> {
        let mut r = csv::Reader::from_reader(input);
        let dim = r.headers()?.len();
        let mut pts = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            if rec.len() != dim {
                return Err(DppError::DimensionMismatch { expected: dim, got: rec.len() });
            }
            let c: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| DppError::DomainError(format!("bad coordinate: {e}")))?;
            pts.push(Point::from_slice(&c)?);
        }
        Configuration::new(pts)
    }
}

impl<'a> IntoIterator for &'a Configuration {
    type Item = &'a Point;
    type IntoIter = std::slice::Iter<'a, Point>;
    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

fn check_simple(sorted: &[Point]) -> Result<()> {
    // Sorted on the first coordinate, so a near-coincident partner of p lies
    // within COINCIDENCE_TOL of p.x() in the sequence.
    for i in 0..sorted.len() {
        for q in &sorted[i + 1..] {
            if q.x() - sorted[i].x() >= COINCIDENCE_TOL {
                break;
            }
            if q.dist(&sorted[i]) < COINCIDENCE_TOL {
                return Err(DppError::DuplicatePoint(q.coords().to_vec()));
            }
        }
    }
    Ok(())
}

/// Closed axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    lower: Point,
    upper: Point,
}

impl Window {
    pub fn new(lower: Point, upper: Point) -> Result<Self> {
        if lower.dim() != upper.dim() {
            return Err(DppError::DimensionMismatch { expected: lower.dim(), got: upper.dim() });
        }
        for i in 0..lower.dim() {
            let (a, b) = (lower.coord(i), upper.coord(i));
            if !a.is_finite() || !b.is_finite() || a >= b {
                return Err(DppError::InvalidWindow(format!("need lower < upper in coordinate {i}, got [{a}, {b}]")));
            }
        }
        Ok(Window { lower, upper })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Window::new(Point::new1(a), Point::new1(b))
    }

    pub fn rect(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        Window::new(Point::new2(x0, y0), Point::new2(x1, y1))
    }

    /// `[0, side]^dim`.
    pub fn cube(dim: usize, side: f64) -> Result<Self> {
        match dim {
            1 => Window::interval(0.0, side),
            2 => Window::rect(0.0, side, 0.0, side),
            d => Err(DppError::DimensionMismatch { expected: 2, got: d }),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn lower(&self) -> &Point {
        &self.lower
    }

    pub fn upper(&self) -> &Point {
        &self.upper
    }

    pub fn lo(&self, i: usize) -> f64 {
        self.lower.coord(i)
    }

    pub fn hi(&self, i: usize) -> f64 {
        self.upper.coord(i)
    }

    pub fn side(&self, i: usize) -> f64 {
        self.hi(i) - self.lo(i)
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.side(i)).product()
    }

    #[inline]
    pub fn contains(&self, p: &Point) -> bool {
        (0..self.dim()).all(|i| p.coord(i) >= self.lo(i) && p.coord(i) <= self.hi(i))
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        self.contains(&other.lower) && self.contains(&other.upper)
    }

    pub fn intersect(&self, other: &Window) -> Option<Window> {
        let lo: Vec<f64> = (0..self.dim()).map(|i| self.lo(i).max(other.lo(i))).collect();
        let hi: Vec<f64> = (0..self.dim()).map(|i| self.hi(i).min(other.hi(i))).collect();
        Window::new(Point::from_slice(&lo).ok()?, Point::from_slice(&hi).ok()?).ok()
    }

    /// Window grown by `margin` on every side.
    pub fn pad(&self, margin: f64) -> Window {
        let lo: Vec<f64> = (0..self.dim()).map(|i| self.lo(i) - margin).collect();
        let hi: Vec<f64> = (0..self.dim()).map(|i| self.hi(i) + margin).collect();
        Window { lower: Point::from_slice(&lo).expect("finite"), upper: Point::from_slice(&hi).expect("finite") }
    }

    /// Point at relative position `u ∈ [0,1]^d`.
    pub fn at(&self, u: &[f64]) -> Point {
        let c: Vec<f64> = (0..self.dim()).map(|i| self.lo(i) + u[i] * self.side(i)).collect();
        Point::from_slice(&c).expect("finite")
    }

    pub fn center(&self) -> Point {
        self.at(&[0.5, 0.5])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(xs: &[f64]) -> Configuration {
        Configuration::from_1d(xs).unwrap()
    }

    #[test]
    fn restrict_examples() {
        let w = Window::interval(0.0, 1.0).unwrap();
        assert_eq!(cfg(&[0.2, 0.7, 1.5]).restrict(&w), cfg(&[0.2, 0.7]));
        assert!(Configuration::empty().restrict(&w).is_empty());
        assert_eq!(cfg(&[0.0, 1.0]).restrict(&w), cfg(&[0.0, 1.0]));
    }

    #[test]
    fn union_examples() {
        assert_eq!(cfg(&[1.0]).union(&cfg(&[2.0, 3.0])).unwrap(), cfg(&[1.0, 2.0, 3.0]));
        let xi = cfg(&[0.5, 2.0]);
        assert_eq!(Configuration::empty().union(&xi).unwrap(), xi);
        assert!(matches!(cfg(&[1.0]).union(&cfg(&[1.0])), Err(DppError::DuplicatePoint(_))));
    }

    #[test]
    fn count_examples() {
        let w = Window::interval(0.0, 1.0).unwrap();
        assert_eq!(cfg(&[0.2, 1.5]).count_in(&w), 1);
        assert_eq!(Configuration::empty().count_in(&w), 0);
        assert_eq!(cfg(&[0.1, 0.2, 0.3]).count_in(&w), 3);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Window::interval(1.0, 1.0).is_err());
        assert!(Window::interval(0.0, f64::INFINITY).is_err());
        assert!(Point::from_slice(&[f64::NAN]).is_err());
        assert!(Configuration::from_1d(&[0.3, 0.3 + 1e-14]).is_err());
        assert!(Configuration::new(vec![Point::new1(0.0), Point::new2(1.0, 1.0)]).is_err());
    }

    #[test]
    fn canonical_order_is_lexicographic() {
        let c = Configuration::new(vec![Point::new2(1.0, 0.0), Point::new2(0.0, 2.0), Point::new2(0.0, 1.0)]).unwrap();
        let xs: Vec<_> = c.iter().map(|p| (p.coord(0), p.coord(1))).collect();
        assert_eq!(xs, vec![(0.0, 1.0), (0.0, 2.0), (1.0, 0.0)]);
    }

    #[test]
    fn csv_round_trip_2d() {
        let c = Configuration::new(vec![Point::new2(0.1, 0.2), Point::new2(-3.0, 4.5)]).unwrap();
        let mut buf = Vec::new();
        c.write_csv(2, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("x,y\n"));
        assert_eq!(Configuration::read_csv(&buf[..]).unwrap(), c);
    }

    fn arb_cfg() -> impl Strategy<Value = Configuration> {
        prop::collection::vec(-2.0f64..4.0, 0..20).prop_map(|mut v| {
            v.sort_by(f64::total_cmp);
            v.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            Configuration::from_1d(&v).unwrap()
        })
    }

    proptest! {
        #[test]
        fn restrict_idempotent_and_nested(xi in arb_cfg(), a in -1.0f64..0.5, b in 1.0f64..3.0) {
            let big = Window::interval(a, b).unwrap();
            let small = Window::interval(a + 0.1, b - 0.1).unwrap();
            let r = xi.restrict(&big);
            prop_assert_eq!(r.restrict(&big), r.clone());
            prop_assert_eq!(r.restrict(&small), xi.restrict(&big.intersect(&small).unwrap()));
        }

        #[test]
        fn count_additive(xi in arb_cfg(), cut in 0.0f64..2.0) {
            let left = Window::interval(-2.0, cut).unwrap();
            let right = Window::interval(cut + 1e-9, 4.0).unwrap();
            let all = Window::interval(-2.0, 4.0).unwrap();
            let on_gap = xi.iter().filter(|p| p.x() > cut && p.x() < cut + 1e-9).count();
            prop_assert_eq!(xi.count_in(&left) + xi.count_in(&right) + on_gap, xi.count_in(&all));
        }

        #[test]
        fn union_commutes(xi in arb_cfg(), shift in 10.0f64..20.0) {
            let eta = Configuration::new(xi.iter().map(|p| p.translate(&[shift])).collect()).unwrap();
            let ab = xi.union(&eta).unwrap();
            prop_assert_eq!(ab.len(), xi.len() + eta.len());
            prop_assert_eq!(ab, eta.union(&xi).unwrap());
        }
    }
}
