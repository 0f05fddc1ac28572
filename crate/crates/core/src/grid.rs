//! Uniform tensor grids over boxes and the node-valued fields living on them.
//!
//! # Binary layout (`.hqlg`)
//!
//! All integers and floats little-endian:
//!
//! | offset | size | field                               |
//! |--------|------|-------------------------------------|
//! | 0      | 4    | magic `b"HQLG"`                     |
//! | 4      | 4    | format version, `u32`, currently 1  |
//! | 8      | 4    | dimension n, `u32`                  |
//! | 12     | 4    | nodes per axis m, `u32`             |
//! | 16     | 8    | half width L, `f64`                 |
//! | 24     | 8·mⁿ | node values, `f64`, row-major       |
//!
//! Row-major means the last axis varies fastest. Only cube grids centered at
//! the origin have a binary form.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"HQLG";
const FORMAT_VERSION: u32 = 1;

/// A uniform grid with `m` nodes per axis over the box `center ± half_width`.
///
/// Coordinates are computed as `center + (i − (m−1)/2)·h`, so on grids with
/// odd `m` and zero center the middle node is exactly the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    nodes_per_axis: usize,
    center: Vec<f64>,
    half_width: Vec<f64>,
}

impl Grid {
    /// The cube `[−L, L]ⁿ` with `m` nodes per axis; `m` must be odd and ≥ 5.
    pub fn cube(dim: usize, nodes_per_axis: usize, half_width: f64) -> Result<Self> {
        if nodes_per_axis < 5 || nodes_per_axis.is_multiple_of(2) {
            return Err(Error::domain(format!(
                "nodes per axis must be odd and at least 5, got {nodes_per_axis}"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::domain(format!("half width must be positive, got {half_width}")));
        }
        Self::boxed(vec![-half_width; dim], vec![half_width; dim], nodes_per_axis)
    }

    /// An axis-aligned box `[lower, upper]` with `m ≥ 3` nodes per axis.
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>, nodes_per_axis: usize) -> Result<Self> {
        let dim = lower.len();
        if dim == 0 || upper.len() != dim {
            return Err(Error::domain("box corners must have the same positive dimension"));
        }
        if nodes_per_axis < 3 {
            return Err(Error::domain("a box grid needs at least 3 nodes per axis"));
        }
        let mut center = Vec::with_capacity(dim);
        let mut half = Vec::with_capacity(dim);
        for (a, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::domain(format!("axis {a}: degenerate extent [{lo}, {hi}]")));
            }
            center.push(0.5 * (lo + hi));
            half.push(0.5 * (hi - lo));
        }
        Ok(Self { dim, nodes_per_axis, center, half_width: half })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    pub fn len(&self) -> usize {
        self.nodes_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `Some(L)` when the grid is the cube `[−L, L]ⁿ`.
    pub fn cube_half_width(&self) -> Option<f64> {
        let l = self.half_width[0];
        let cube = self.center.iter().all(|&c| c == 0.0) && self.half_width.iter().all(|&h| h == l);
        cube.then_some(l)
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * self.half_width[axis] / (self.nodes_per_axis - 1) as f64
    }

    pub fn lower(&self, axis: usize) -> f64 {
        self.coordinate(axis, 0)
    }

    pub fn upper(&self, axis: usize) -> f64 {
        self.coordinate(axis, self.nodes_per_axis - 1)
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        let mid = (self.nodes_per_axis - 1) as f64 / 2.0;
        self.center[axis] + (i as f64 - mid) * self.spacing(axis)
    }

    /// Row-major stride of `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.nodes_per_axis.pow((self.dim - 1 - axis) as u32)
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.nodes_per_axis + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        for a in (0..self.dim).rev() {
            idx[a] = flat % self.nodes_per_axis;
            flat /= self.nodes_per_axis;
        }
        idx
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.coordinate(a, i))
            .collect()
    }

    pub fn is_boundary(&self, flat: usize) -> bool {
        let last = self.nodes_per_axis - 1;
        self.multi_index(flat).iter().any(|&i| i == 0 || i == last)
    }

    /// Flat indices of nodes with every index in `1..m−1`, in row-major order.
    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&p| !self.is_boundary(p)).collect()
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&p| self.is_boundary(p)).collect()
    }

    /// Flat index of the node nearest to the box center.
    pub fn center_node(&self) -> usize {
        self.flat_index(&vec![(self.nodes_per_axis - 1) / 2; self.dim])
    }
}

/// Real values at every node of a grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::domain(format!(
                "grid has {} nodes but {} values were given",
                grid.len(),
                values.len()
            )));
        }
        if let Some(p) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("value at node {p} is not finite")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|p| f(&grid.point(p))).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Grid) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, idx: &[usize]) -> f64 {
        self.values[self.grid.flat_index(idx)]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest absolute nodewise difference; the grids must match.
    pub fn sup_distance(&self, other: &GridFunction) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::domain("grid functions live on different grids"));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let l = self
            .grid
            .cube_half_width()
            .ok_or_else(|| Error::Format("only origin-centered cube grids have a binary form".into()))?;
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.grid.dim as u32).to_le_bytes())?;
        w.write_all(&(self.grid.nodes_per_axis as u32).to_le_bytes())?;
        w.write_all(&l.to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn to_binary(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::with_capacity(24 + 8 * self.values.len());
        self.write_binary(&mut buf)?;
        Ok(buf)
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut head = [0u8; 24];
        r.read_exact(&mut head)?;
        if &head[0..4] != MAGIC {
            return Err(Error::Format("bad magic; not a grid function file".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(head[o..o + 4].try_into().unwrap());
        let version = u32_at(4);
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported format version {version}")));
        }
        let dim = u32_at(8) as usize;
        let m = u32_at(12) as usize;
        let l = f64::from_le_bytes(head[16..24].try_into().unwrap());
        let grid = Grid::cube(dim, m, l).map_err(|e| Error::Format(e.to_string()))?;
        let mut bytes = vec![0u8; 8 * grid.len()];
        r.read_exact(&mut bytes)?;
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(Error::Format("trailing bytes after grid values".into()));
        }
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::new(grid, values).map_err(|e| Error::Format(e.to_string()))
    }

    /// CSV with header `x1,…,xn,value`, one row per node in row-major order.
    pub fn to_csv(&self) -> String {
        let n = self.grid.dim;
        let mut out = String::new();
        let header: Vec<String> = (1..=n).map(|a| format!("x{a}")).collect();
        out.push_str(&header.join(","));
        out.push_str(",value\n");
        for (p, v) in self.values.iter().enumerate() {
            for x in self.grid.point(p) {
                out.push_str(&format!("{x},"));
            }
            out.push_str(&format!("{v}\n"));
        }
        out
    }
}
