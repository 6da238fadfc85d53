//! Symmetric log-dyadic grid: annuli `C_k = {2^(k-1) ≤ |x| < 2^k}` with a
//! fixed number of midpoint nodes per annulus on each sign.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::testfns::PointwiseFunction;

pub const DEFAULT_K_MIN: i32 = -60;
pub const DEFAULT_K_MAX: i32 = 2;
pub const DEFAULT_POINTS_PER_ANNULUS: usize = 64;

#[derive(Clone, Debug, Serialize)]
pub struct Node {
    pub x: f64,
    pub w: f64,
    pub k: i32,
}

#[derive(Clone, Debug)]
pub struct LogDyadicGrid {
    k_min: i32,
    k_max: i32,
    points_per_annulus: usize,
    nodes: Vec<Node>,
}

impl LogDyadicGrid {
    pub fn k_min(&self) -> i32 {
        self.k_min
    }
    pub fn k_max(&self) -> i32 {
        self.k_max
    }
    pub fn points_per_annulus(&self) -> usize {
        self.points_per_annulus
    }
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    /// Number of annuli, `k_max - k_min`.
    pub fn annuli(&self) -> usize {
        (self.k_max - self.k_min) as usize
    }
    /// Smallest and largest |x| covered: `[2^(k_min-1), 2^(k_max-1))`.
    pub fn inner_radius(&self) -> f64 {
        2f64.powi(self.k_min - 1)
    }
    pub fn outer_radius(&self) -> f64 {
        2f64.powi(self.k_max - 1)
    }
    /// Index of the node `-x` for node `i`.
    pub fn mirror(&self, i: usize) -> usize {
        self.nodes.len() - 1 - i
    }
    /// Indices of the positive-side nodes, in increasing order of x.
    pub fn positive_range(&self) -> std::ops::Range<usize> {
        self.nodes.len() / 2..self.nodes.len()
    }
    /// Annulus slot (0-based, ordered by k) of node `i`.
    pub fn slot(&self, i: usize) -> usize {
        (self.nodes[i].k - self.k_min) as usize
    }
}

/// Annulus of a point: `ceil(log2 |x|)`.
pub fn annulus_index(x: f64) -> i32 {
    x.abs().log2().ceil() as i32
}

/// Builds annuli `k_min..k_max` (exclusive), each with `points_per_annulus`
/// midpoint nodes per sign; node count `2 (k_max - k_min) points_per_annulus`.
pub fn build_grid(k_min: i32, k_max: i32, points_per_annulus: usize) -> Result<LogDyadicGrid> {
    if k_min >= k_max {
        return Err(Error::InvalidParams(format!("k_min ({k_min}) ≥ k_max ({k_max})")));
    }
    if points_per_annulus < 2 {
        return Err(Error::InvalidParams("points_per_annulus < 2".into()));
    }
    if k_min < -1000 || k_max > 1000 {
        return Err(Error::InvalidParams("annulus range exceeds double precision".into()));
    }
    let mut positive = Vec::with_capacity((k_max - k_min) as usize * points_per_annulus);
    for k in k_min..k_max {
        let lo = 2f64.powi(k - 1);
        let w = lo / points_per_annulus as f64;
        for i in 0..points_per_annulus {
            positive.push(Node { x: lo + (i as f64 + 0.5) * w, w, k });
        }
    }
    let mut nodes: Vec<Node> = positive.iter().rev().map(|n| Node { x: -n.x, ..*n }).collect();
    nodes.extend(positive);
    Ok(LogDyadicGrid { k_min, k_max, points_per_annulus, nodes })
}

pub fn default_grid() -> LogDyadicGrid {
    build_grid(DEFAULT_K_MIN, DEFAULT_K_MAX, DEFAULT_POINTS_PER_ANNULUS).expect("default grid")
}

#[derive(Clone, Debug)]
pub struct GridFunction {
    pub grid: Arc<LogDyadicGrid>,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<LogDyadicGrid>, values: Vec<f64>) -> Result<GridFunction> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParams(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("value at node x = {:e}", grid.nodes()[i].x)));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn zeros(grid: Arc<LogDyadicGrid>) -> GridFunction {
        let n = grid.len();
        GridFunction { grid, values: vec![0.0; n] }
    }

    pub fn from_fn(grid: Arc<LogDyadicGrid>, f: impl Fn(f64) -> f64) -> Result<GridFunction> {
        let values = grid.nodes().iter().map(|n| f(n.x)).collect();
        GridFunction::new(grid, values)
    }

    pub fn scaled(&self, c: f64) -> GridFunction {
        GridFunction { grid: self.grid.clone(), values: self.values.iter().map(|v| c * v).collect() }
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        if !Arc::ptr_eq(&self.grid, &other.grid) && self.grid.len() != other.grid.len() {
            return Err(Error::InvalidParams("grid functions live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(GridFunction { grid: self.grid.clone(), values })
    }
}

/// `values[i] = f(x_i)`.
pub fn sample(f: &PointwiseFunction, grid: &Arc<LogDyadicGrid>) -> Result<GridFunction> {
    GridFunction::from_fn(grid.clone(), |x| f.eval(x))
}

/// Multiplication by the indicator of `C_k`; `k` must be one of the grid's annuli.
pub fn annulus_restrict(gf: &GridFunction, k: i32) -> Result<GridFunction> {
    let g = &gf.grid;
    if k < g.k_min() || k >= g.k_max() {
        return Err(Error::OutOfRange(format!(
            "annulus {k} outside [{}, {}]",
            g.k_min(),
            g.k_max() - 1
        )));
    }
    let values = g
        .nodes()
        .iter()
        .zip(&gf.values)
        .map(|(n, v)| if n.k == k { *v } else { 0.0 })
        .collect();
    Ok(GridFunction { grid: gf.grid.clone(), values })
}
