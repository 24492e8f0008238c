//! Radial grids and C² radial profiles.
//!
//! A [`RadialFunction`] stores value, first and second derivative at every
//! node and interpolates with the quintic Hermite polynomial matching all
//! three at both cell ends, so f, f' and f'' are continuous on [0, r_max].

use serde::{Deserialize, Serialize};

use crate::quadrature::{fornberg_weights, GaussLegendre};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    nodes: Vec<f64>,
}

impl RadialGrid {
    /// Nodes must start at 0 and increase strictly.
    pub fn from_nodes(nodes: Vec<f64>) -> Self {
        assert!(nodes.len() >= 2, "grid needs at least two nodes");
        assert!(nodes[0] == 0.0, "grid must start at the origin");
        assert!(
            nodes.windows(2).all(|w| w[1] > w[0]),
            "grid nodes must increase strictly"
        );
        Self { nodes }
    }

    /// Graded grid r(s) = r_max (s + g s²) / (1 + g), s uniform on [0, 1]:
    /// spacing near the origin is (1 + 2g) times finer than at r_max.
    pub fn graded(r_max: f64, cells: usize, grading: f64) -> Self {
        let nodes = (0..=cells)
            .map(|i| {
                let s = i as f64 / cells as f64;
                r_max * (s + grading * s * s) / (1.0 + grading)
            })
            .collect::<Vec<_>>();
        let mut nodes = nodes;
        nodes[cells] = r_max;
        Self::from_nodes(nodes)
    }

    pub fn uniform(r_max: f64, cells: usize) -> Self {
        Self::graded(r_max, cells, 0.0)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Index i of the cell [r_i, r_{i+1}] containing r (clamped to the grid).
    pub fn cell(&self, r: f64) -> usize {
        let idx = self.nodes.partition_point(|&x| x <= r);
        idx.saturating_sub(1).min(self.nodes.len() - 2)
    }

    /// Grid truncated to nodes with r <= r_cut (r_cut snapped to a node).
    pub fn truncated(&self, r_cut: f64) -> Self {
        let end = self.nodes.partition_point(|&x| x <= r_cut).max(2);
        Self::from_nodes(self.nodes[..end].to_vec())
    }

    /// Composite Gauss–Legendre quadrature of `f(cell, r)` over [0, r_max].
    pub fn integrate<F: FnMut(usize, f64) -> f64>(&self, gl: &GaussLegendre, mut f: F) -> f64 {
        let mut total = 0.0;
        for (i, ab) in self.nodes.windows(2).enumerate() {
            let mut cell = 0.0;
            for (x, w) in gl.mapped(ab[0], ab[1]) {
                cell += w * f(i, x);
            }
            total += cell;
        }
        total
    }

    /// Stable hex digest of the node positions, used for cache keys.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for x in &self.nodes {
            h.update(x.to_bits().to_le_bytes());
        }
        let out = h.finalize();
        out.iter().take(12).map(|b| format!("{b:02x}")).collect()
    }
}

/// Asymptotic form amp · r^power · e^{-rate r} used beyond r_max.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tail {
    pub amp: f64,
    pub power: f64,
    pub rate: f64,
}

impl Tail {
    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        let f = self.amp * r.powf(self.power) * (-self.rate * r).exp();
        let g = self.power / r - self.rate;
        (f, f * g, f * (g * g - self.power / (r * r)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialFunction {
    grid: RadialGrid,
    values: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    tail: Option<Tail>,
}

/// Half-width of the finite-difference stencils used to recover derivatives
/// from node values.
const STENCIL_HALF: usize = 4;

impl RadialFunction {
    pub fn from_hermite(grid: RadialGrid, values: Vec<f64>, d1: Vec<f64>, d2: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len());
        assert_eq!(d1.len(), grid.len());
        assert_eq!(d2.len(), grid.len());
        Self {
            grid,
            values,
            d1,
            d2,
            tail: None,
        }
    }

    /// Recovers f' and f'' by high-order finite differences. The profile is
    /// taken to be even in r (a smooth radial function), so nodes are mirrored
    /// across the origin near r = 0.
    pub fn from_values(grid: RadialGrid, values: Vec<f64>) -> Self {
        let (d1, d2) = even_derivatives(&grid, &values);
        Self::from_hermite(grid, values, d1, d2)
    }

    pub fn with_tail(mut self, tail: Tail) -> Self {
        self.tail = Some(tail);
        self
    }

    pub fn tail(&self) -> Option<Tail> {
        self.tail
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn d1(&self) -> &[f64] {
        &self.d1
    }

    pub fn d2(&self) -> &[f64] {
        &self.d2
    }

    pub fn r_max(&self) -> f64 {
        self.grid.r_max()
    }

    /// (f, f', f'') at r >= 0. Beyond r_max the tail form is used, or zero
    /// when the profile carries no tail.
    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        if r > self.grid.r_max() {
            return match self.tail {
                Some(t) => t.eval(r),
                None => (0.0, 0.0, 0.0),
            };
        }
        self.eval_cell(self.grid.cell(r), r)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval(r).0
    }

    /// Evaluation inside a known cell (no search).
    pub fn eval_cell(&self, i: usize, r: f64) -> (f64, f64, f64) {
        let x = self.grid.nodes();
        let (x0, x1) = (x[i], x[i + 1]);
        let h = x1 - x0;
        let t = (r - x0) / h;
        if t <= 0.0 {
            return (self.values[i], self.d1[i], self.d2[i]);
        }
        if t >= 1.0 {
            return (self.values[i + 1], self.d1[i + 1], self.d2[i + 1]);
        }
        let (f0, f1) = (self.values[i], self.values[i + 1]);
        let (g0, g1) = (self.d1[i] * h, self.d1[i + 1] * h);
        let (k0, k1) = (self.d2[i] * h * h, self.d2[i + 1] * h * h);
        // p(t) = sum c_j t^j with the six Hermite conditions at t = 0, 1.
        let c0 = f0;
        let c1 = g0;
        let c2 = 0.5 * k0;
        let c3 = 10.0 * (f1 - f0) - 6.0 * g0 - 4.0 * g1 - 1.5 * k0 + 0.5 * k1;
        let c4 = -15.0 * (f1 - f0) + 8.0 * g0 + 7.0 * g1 + 1.5 * k0 - k1;
        let c5 = 6.0 * (f1 - f0) - 3.0 * (g0 + g1) - 0.5 * k0 + 0.5 * k1;
        let p = c0 + t * (c1 + t * (c2 + t * (c3 + t * (c4 + t * c5))));
        let dp = c1 + t * (2.0 * c2 + t * (3.0 * c3 + t * (4.0 * c4 + t * 5.0 * c5)));
        let ddp = 2.0 * c2 + t * (6.0 * c3 + t * (12.0 * c4 + t * 20.0 * c5));
        (p, dp / h, ddp / (h * h))
    }

    /// Pointwise map of node data into a new profile on the same grid.
    pub fn map_values<F: Fn(f64, f64) -> f64>(&self, f: F) -> RadialFunction {
        let values = self
            .grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&r, &v)| f(r, v))
            .collect();
        RadialFunction::from_values(self.grid.clone(), values)
    }
}

fn even_derivatives(grid: &RadialGrid, values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let x = grid.nodes();
    let n = x.len();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    let width = 2 * STENCIL_HALF + 1;
    for i in 0..n {
        let (xs, fs): (Vec<f64>, Vec<f64>) = if i < STENCIL_HALF {
            // mirror: f(-r) = f(r); keep the `width` points closest to x[i]
            let mut pts: Vec<(f64, f64)> = (1..width.min(n))
                .map(|k| (-x[k], values[k]))
                .chain((0..width.min(n)).map(|k| (x[k], values[k])))
                .collect();
            pts.sort_by(|a, b| (a.0 - x[i]).abs().total_cmp(&(b.0 - x[i]).abs()));
            pts.truncate(width);
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            pts.into_iter().unzip()
        } else {
            let start = i.saturating_sub(STENCIL_HALF).min(n.saturating_sub(width));
            (start..(start + width).min(n))
                .map(|k| (x[k], values[k]))
                .unzip()
        };
        let w = fornberg_weights(x[i], &xs, 2);
        d1[i] = w[1].iter().zip(&fs).map(|(c, f)| c * f).sum();
        d2[i] = w[2].iter().zip(&fs).map(|(c, f)| c * f).sum();
    }
    d1[0] = 0.0;
    (d1, d2)
}
