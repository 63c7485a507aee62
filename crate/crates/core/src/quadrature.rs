//! Composite tensor Gauss–Legendre rules on windows.
//!
//! Every node also owns a cell: in one dimension the cells are consecutive
//! intervals of length equal to the node weights (Gauss nodes interlace with
//! the cumulative weights), in two dimensions products of those. Samplers
//! use the cells to place a point continuously once a node has been chosen.

use std::f64::consts::PI;

use crate::error::{DppError, Result};
use crate::space::{Point, Window};

/// Nodes per panel for rules with more than this many nodes per dimension.
pub const PANEL_ORDER: usize = 16;

/// Gauss–Legendre nodes and weights on [-1, 1], ascending.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    if order == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

#[derive(Clone, Debug)]
struct Rule1d {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    edges: Vec<f64>,
}

fn composite_1d(lo: f64, hi: f64, panels: usize, order: usize) -> Rule1d {
    let (t, w) = gauss_legendre(order);
    let h = (hi - lo) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for k in 0..panels {
        let a = lo + h * k as f64;
        for (ti, wi) in t.iter().zip(&w) {
            nodes.push(a + 0.5 * h * (ti + 1.0));
            weights.push(0.5 * h * wi);
        }
    }
    let mut edges = Vec::with_capacity(nodes.len() + 1);
    edges.push(lo);
    for k in 0..panels {
        let a = lo + h * k as f64;
        let mut acc = a;
        for wi in &w[..order - 1] {
            acc += 0.5 * h * wi;
            edges.push(acc);
        }
        edges.push(if k + 1 == panels { hi } else { lo + h * (k + 1) as f64 });
    }
    Rule1d { nodes, weights, edges }
}

/// Panel layout per dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Grid {
    pub panels: usize,
    pub order: usize,
}

impl Grid {
    /// At least `n` nodes: one panel of order `n` up to `PANEL_ORDER`,
    /// otherwise `ceil(n / PANEL_ORDER)` panels of order `PANEL_ORDER`.
    pub fn with_nodes(n: usize) -> Grid {
        if n <= PANEL_ORDER {
            Grid { panels: 1, order: n.max(1) }
        } else {
            Grid { panels: n.div_ceil(PANEL_ORDER), order: PANEL_ORDER }
        }
    }

    pub fn nodes(&self) -> usize {
        self.panels * self.order
    }
}

#[derive(Clone, Debug)]
pub struct Quadrature {
    window: Window,
    nodes: Vec<Point>,
    weights: Vec<f64>,
    cells: Vec<(Point, Point)>,
    /// Panel width per dimension, when the rule is a full tensor grid.
    panel_width: Option<[f64; 2]>,
    order: usize,
}

impl Quadrature {
    /// Tensor composite Gauss–Legendre rule with at least `n` nodes per dimension.
    pub fn gauss_legendre(window: &Window, n: usize) -> Result<Quadrature> {
        if n < 2 {
            return Err(DppError::ParameterOutOfRange(format!("grid size {n} < 2")));
        }
        Quadrature::from_grid(window, Grid::with_nodes(n))
    }

    pub fn from_grid(window: &Window, grid: Grid) -> Result<Quadrature> {
        let d = window.dim();
        let rules: Vec<Rule1d> =
            (0..d).map(|i| composite_1d(window.lo(i), window.hi(i), grid.panels, grid.order)).collect();
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut cells = Vec::new();
        match d {
            1 => {
                let r = &rules[0];
                for k in 0..r.nodes.len() {
                    nodes.push(Point::new1(r.nodes[k]));
                    weights.push(r.weights[k]);
                    cells.push((Point::new1(r.edges[k]), Point::new1(r.edges[k + 1])));
                }
            }
            2 => {
                let (rx, ry) = (&rules[0], &rules[1]);
                for i in 0..rx.nodes.len() {
                    for j in 0..ry.nodes.len() {
                        nodes.push(Point::new2(rx.nodes[i], ry.nodes[j]));
                        weights.push(rx.weights[i] * ry.weights[j]);
                        cells.push((
                            Point::new2(rx.edges[i], ry.edges[j]),
                            Point::new2(rx.edges[i + 1], ry.edges[j + 1]),
                        ));
                    }
                }
            }
            _ => return Err(DppError::DimensionMismatch { expected: 2, got: d }),
        }
        let mut pw = [0.0; 2];
        for (i, w) in pw.iter_mut().enumerate().take(d) {
            *w = window.side(i) / grid.panels as f64;
        }
        Ok(Quadrature { window: *window, nodes, weights, cells, panel_width: Some(pw), order: grid.order })
    }

    /// Rule on `window` padded by at least `margin`, whose panels coincide with
    /// those of `Quadrature::gauss_legendre(window, n)`. The nodes of the
    /// unpadded rule are exactly the padded rule's nodes inside `window`.
    pub fn padded(window: &Window, n: usize, margin: f64) -> Result<Quadrature> {
        let grid = Grid::with_nodes(n);
        let d = window.dim();
        let h = window.side(0) / grid.panels as f64;
        if d == 2 && (window.side(1) - window.side(0)).abs() > 1e-12 * window.side(0) {
            return Err(DppError::InvalidWindow("padded rules need square windows".into()));
        }
        let extra = (margin / h).ceil() as usize;
        let big = window.pad(extra as f64 * h);
        let padded_grid = Grid { panels: grid.panels + 2 * extra, order: grid.order };
        Quadrature::from_grid(&big, padded_grid)
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn cell(&self, i: usize) -> &(Point, Point) {
        &self.cells[i]
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn panel_width(&self) -> Option<[f64; 2]> {
        self.panel_width
    }

    pub fn integrate(&self, f: impl Fn(&Point) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }

    /// Indices of the nodes inside `sub` and the sub-rule they form. Fails
    /// unless the selected weights integrate `sub`'s volume exactly, i.e.
    /// unless `sub`'s boundary falls on panel boundaries.
    pub fn restrict(&self, sub: &Window) -> Result<(Vec<usize>, Quadrature)> {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| sub.contains(&self.nodes[i])).collect();
        let q = self.subset(&idx, *sub);
        let vol: f64 = q.weights.iter().sum();
        if (vol - sub.volume()).abs() > 1e-10 * sub.volume().max(1.0) {
            return Err(DppError::QuadratureMismatch);
        }
        Ok((idx, q))
    }

    fn subset(&self, idx: &[usize], window: Window) -> Quadrature {
        Quadrature {
            window,
            nodes: idx.iter().map(|&i| self.nodes[i]).collect(),
            weights: idx.iter().map(|&i| self.weights[i]).collect(),
            cells: idx.iter().map(|&i| self.cells[i]).collect(),
            panel_width: None,
            order: self.order,
        }
    }

    /// Concatenation of rules on disjoint windows; `hull` is the bounding window.
    pub fn concat(parts: &[&Quadrature], hull: Window) -> Quadrature {
        let mut out = Quadrature {
            window: hull,
            nodes: Vec::new(),
            weights: Vec::new(),
            cells: Vec::new(),
            panel_width: None,
            order: parts.first().map_or(1, |q| q.order),
        };
        for q in parts {
            out.nodes.extend_from_slice(&q.nodes);
            out.weights.extend_from_slice(&q.weights);
            out.cells.extend_from_slice(&q.cells);
        }
        out
    }

    /// Same node set (bitwise) as `other`.
    pub fn same_as(&self, other: &Quadrature) -> bool {
        self.nodes == other.nodes && self.weights == other.weights
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_is_exact_to_degree_2n_minus_1() {
        for order in 1..=20 {
            let (x, w) = gauss_legendre(order);
            for deg in 0..(2 * order) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "order {order} degree {deg}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn weights_sum_to_volume_and_cells_tile() {
        let w = Window::rect(0.0, 2.0, -1.0, 0.5).unwrap();
        let q = Quadrature::gauss_legendre(&w, 20).unwrap();
        let s: f64 = q.weights().iter().sum();
        assert!((s - 3.0).abs() < 1e-12);
        for i in 0..q.len() {
            let (lo, hi) = q.cell(i);
            let vol = (hi.coord(0) - lo.coord(0)) * (hi.coord(1) - lo.coord(1));
            assert!((vol - q.weights()[i]).abs() < 1e-12);
            let p = &q.nodes()[i];
            assert!(p.coord(0) >= lo.coord(0) && p.coord(0) <= hi.coord(0));
            assert!(p.coord(1) >= lo.coord(1) && p.coord(1) <= hi.coord(1));
        }
    }

    #[test]
    fn padded_rule_contains_inner_nodes() {
        let w = Window::interval(0.0, 1.0).unwrap();
        let inner = Quadrature::gauss_legendre(&w, 64).unwrap();
        let outer = Quadrature::padded(&w, 64, 0.3).unwrap();
        let (idx, sub) = outer.restrict(&w).unwrap();
        assert_eq!(idx.len(), inner.len());
        for (a, b) in sub.nodes().iter().zip(inner.nodes()) {
            assert!((a.x() - b.x()).abs() < 1e-14);
        }
    }

    #[test]
    fn misaligned_restriction_is_rejected() {
        let w = Window::interval(0.0, 1.0).unwrap();
        let q = Quadrature::gauss_legendre(&w, 32).unwrap();
        assert!(q.restrict(&Window::interval(0.0, 0.3).unwrap()).is_err());
        assert!(q.restrict(&Window::interval(0.0, 0.5).unwrap()).is_ok());
    }
}
