//! Uniform grids on [0, 1], sampled functions and function pairs.

use serde::Serialize;
use thiserror::Error;

/// Tolerance for deciding that a query point coincides with a grid node.
pub const NODE_SNAP_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GridError {
    #[error("grid must have an even panel count n >= 2, got {0}")]
    BadPanelCount(usize),
    #[error("value vector has length {got}, expected {expected}")]
    BadLength { got: usize, expected: usize },
    #[error("non-finite sample value at node {0}")]
    NonFiniteValue(usize),
    #[error("point {0} outside the domain [0, 1]")]
    OutOfDomain(f64),
    #[error("grids do not match: n = {0} vs n = {1}")]
    Mismatch(usize, usize),
}

/// A uniform grid `t_k = k/n`, `k = 0..=n`, with an even panel count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Grid, GridError> {
        if n < 2 || n % 2 != 0 {
            return Err(GridError::BadPanelCount(n));
        }
        Ok(Grid { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        k as f64 / self.n as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(move |k| self.node(k))
    }

    /// Index of the node nearest to `x`, if `x` lies within `NODE_SNAP_TOL`.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let k = (x * self.n as f64).round();
        if k < 0.0 || k > self.n as f64 {
            return None;
        }
        let k = k as usize;
        if (x - self.node(k)).abs() <= NODE_SNAP_TOL {
            Some(k)
        } else {
            None
        }
    }
}

/// A function sampled at the nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<GridFunction, GridError> {
        if values.len() != grid.n() + 1 {
            return Err(GridError::BadLength {
                got: values.len(),
                expected: grid.n() + 1,
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFiniteValue(k));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> GridFunction {
        let values = grid.nodes().map(f).collect();
        GridFunction { grid, values }
    }

    pub fn constant(grid: Grid, c: f64) -> GridFunction {
        GridFunction {
            grid,
            values: vec![c; grid.n() + 1],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, v| m.min(*v))
    }

    /// Minimum of the sampled values over nodes inside `[lo, hi]`.
    pub fn min_on(&self, lo: f64, hi: f64) -> f64 {
        let n = self.grid.n() as f64;
        let mut m = f64::INFINITY;
        for (k, v) in self.values.iter().enumerate() {
            let t = k as f64 / n;
            if t >= lo - NODE_SNAP_TOL && t <= hi + NODE_SNAP_TOL {
                m = m.min(*v);
            }
        }
        m
    }

    /// Value at `x`: the exact sample when `x` is (numerically) a node,
    /// otherwise linear interpolation between the neighboring nodes.
    pub fn point_eval(&self, x: f64) -> Result<f64, GridError> {
        if !(x >= -NODE_SNAP_TOL && x <= 1.0 + NODE_SNAP_TOL) {
            return Err(GridError::OutOfDomain(x));
        }
        let x = x.clamp(0.0, 1.0);
        if let Some(k) = self.grid.node_index(x) {
            return Ok(self.values[k]);
        }
        let n = self.grid.n();
        let k0 = ((x * n as f64).floor() as usize).min(n - 1);
        let t0 = self.grid.node(k0);
        let theta = (x - t0) * n as f64;
        Ok(self.values[k0] * (1.0 - theta) + self.values[k0 + 1] * theta)
    }
}

/// A pair `(u1, u2)` of grid functions on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPair {
    u1: GridFunction,
    u2: GridFunction,
}

impl GridPair {
    pub fn new(u1: GridFunction, u2: GridFunction) -> Result<GridPair, GridError> {
        if u1.grid() != u2.grid() {
            return Err(GridError::Mismatch(u1.grid().n(), u2.grid().n()));
        }
        Ok(GridPair { u1, u2 })
    }

    pub fn constant(grid: Grid, c1: f64, c2: f64) -> GridPair {
        GridPair {
            u1: GridFunction::constant(grid, c1),
            u2: GridFunction::constant(grid, c2),
        }
    }

    pub fn grid(&self) -> Grid {
        self.u1.grid()
    }

    pub fn component(&self, i: usize) -> &GridFunction {
        match i {
            0 => &self.u1,
            1 => &self.u2,
            _ => panic!("component index must be 0 or 1"),
        }
    }

    pub fn u1(&self) -> &GridFunction {
        &self.u1
    }

    pub fn u2(&self) -> &GridFunction {
        &self.u2
    }

    /// Product norm: `max(||u1||_inf, ||u2||_inf)` over the grid nodes.
    pub fn norm_y(&self) -> f64 {
        self.u1.max_abs().max(self.u2.max_abs())
    }

    /// `||self - other||_Y` on a shared grid.
    pub fn dist_y(&self, other: &GridPair) -> Result<f64, GridError> {
        if self.grid() != other.grid() {
            return Err(GridError::Mismatch(self.grid().n(), other.grid().n()));
        }
        let mut d: f64 = 0.0;
        for i in 0..2 {
            let a = self.component(i).values();
            let b = other.component(i).values();
            for (x, y) in a.iter().zip(b) {
                d = d.max((x - y).abs());
            }
        }
        Ok(d)
    }

    /// Evaluate `u_component(point)`; `component` is 1-based as in problem files.
    pub fn eval_component(&self, component: u8, point: f64) -> Result<f64, GridError> {
        match component {
            1 => self.u1.point_eval(point),
            2 => self.u2.point_eval(point),
            _ => panic!("component must be 1 or 2"),
        }
    }
}

impl Serialize for GridPair {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("GridPair", 3)?;
        s.serialize_field("n", &self.grid().n())?;
        s.serialize_field("u1", self.u1.values())?;
        s.serialize_field("u2", self.u2.values())?;
        s.end()
    }
}
