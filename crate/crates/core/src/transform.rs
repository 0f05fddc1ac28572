//! Solution-level transformations: subtracting |x|²/(2(n−1)), the matching
//! Hessian shift, and a brute-force discrete Legendre transform.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::pde::stencil::HessianStencil;
use crate::spectral::{self, SymMatrix};

/// q(x) = ½xᵀAx + bᵀx + c.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawQuadratic", into = "RawQuadratic")]
pub struct QuadraticForm {
    a: SymMatrix,
    b: Vec<f64>,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct RawQuadratic {
    a: SymMatrix,
    #[serde(default)]
    b: Vec<f64>,
    #[serde(default)]
    c: f64,
}

impl TryFrom<RawQuadratic> for QuadraticForm {
    type Error = Error;

    fn try_from(r: RawQuadratic) -> Result<Self> {
        let b = if r.b.is_empty() { vec![0.0; r.a.dim()] } else { r.b };
        Self::new(r.a, b, r.c)
    }
}

impl From<QuadraticForm> for RawQuadratic {
    fn from(q: QuadraticForm) -> Self {
        RawQuadratic { a: q.a, b: q.b, c: q.c }
    }
}

impl QuadraticForm {
    pub fn new(a: SymMatrix, b: Vec<f64>, c: f64) -> Result<Self> {
        if b.len() != a.dim() {
            return Err(Error::domain(format!(
                "linear term has length {}, matrix is {}x{}",
                b.len(),
                a.dim(),
                a.dim()
            )));
        }
        if !c.is_finite() || b.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("quadratic coefficients must be finite"));
        }
        Ok(Self { a, b, c })
    }

    /// ½xᵀAx.
    pub fn pure(a: SymMatrix) -> Self {
        let n = a.dim();
        Self { a, b: vec![0.0; n], c: 0.0 }
    }

    /// ½·s·|x|² in dimension `n`.
    pub fn isotropic(n: usize, s: f64) -> Self {
        Self::pure(SymMatrix::identity(n).scaled(s))
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn hessian(&self) -> &SymMatrix {
        &self.a
    }

    pub fn linear(&self) -> &[f64] {
        &self.b
    }

    pub fn constant(&self) -> f64 {
        self.c
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let mut v = self.c;
        for i in 0..n {
            v += self.b[i] * x[i];
            let row: f64 = x.iter().enumerate().map(|(j, xj)| self.a.get(i, j) * xj).sum();
            v += 0.5 * x[i] * row;
        }
        v
    }

    /// Coefficientwise sum.
    pub fn plus(&self, other: &QuadraticForm) -> Result<QuadraticForm> {
        if self.dim() != other.dim() {
            return Err(Error::domain("quadratic forms of different dimension"));
        }
        let a = SymMatrix::from_row_major(
            self.dim(),
            &self
                .a
                .as_row_major()
                .iter()
                .zip(other.a.as_row_major())
                .map(|(x, y)| x + y)
                .collect::<Vec<_>>(),
        )?;
        let b = self.b.iter().zip(&other.b).map(|(x, y)| x + y).collect();
        Self::new(a, b, self.c + other.c)
    }
}

/// Samples `q` at every node of `grid`.
pub fn eval_quadratic(q: &QuadraticForm, grid: &Grid) -> Result<GridFunction> {
    if q.dim() != grid.dim() {
        return Err(Error::domain(format!(
            "quadratic of dimension {} on a {}-d grid",
            q.dim(),
            grid.dim()
        )));
    }
    GridFunction::from_fn(grid.clone(), |x| q.eval(x))
}

/// |x|²/(2(n−1)), the quadratic removed by [`subtract_shift_quadratic`].
pub fn shift_quadratic(n: usize) -> QuadraticForm {
    QuadraticForm::isotropic(n, 1.0 / (n as f64 - 1.0))
}

/// v(x) = u(x) − |x|²/(2(n−1)) at every node, with x measured from the origin.
pub fn subtract_shift_quadratic(u: &GridFunction) -> Result<GridFunction> {
    let grid = u.grid();
    let n = grid.dim();
    if n < 2 {
        return Err(Error::domain("the quadratic correction needs dimension at least 2"));
    }
    let k = 1.0 / (2.0 * (n as f64 - 1.0));
    let values = u
        .values()
        .iter()
        .enumerate()
        .map(|(p, v)| {
            let r2: f64 = grid.point(p).iter().map(|x| x * x).sum();
            v - k * r2
        })
        .collect();
    GridFunction::new(grid.clone(), values)
}

/// S − I/(n−1).
pub fn hessian_shift(s: &SymMatrix, n: usize) -> Result<SymMatrix> {
    if n < 2 || s.dim() != n {
        return Err(Error::domain(format!(
            "expected a {n}x{n} matrix with n >= 2, got {}x{}",
            s.dim(),
            s.dim()
        )));
    }
    Ok(s.add_identity(-1.0 / (n as f64 - 1.0)))
}

/// Discrete Legendre–Fenchel conjugate of a grid function.
#[derive(Debug, Clone)]
pub struct LegendreTransform {
    /// w(y) = max over input nodes x of ⟨x, y⟩ − u(x), sampled on a grid over
    /// the bounding box of the discrete gradient range.
    pub conjugate: GridFunction,
    /// Input node attaining the maximum, per output node.
    pub argmax: Vec<usize>,
    /// Output nodes whose maximizer is an interior input node. Only there does
    /// the conjugate over the box agree with the global one.
    pub faithful: Vec<bool>,
}

impl LegendreTransform {
    /// The largest index box `[k, m−1−k]ⁿ` of output nodes that are all
    /// faithful, returned as `k`.
    pub fn usable_window(&self) -> Option<usize> {
        let grid = self.conjugate.grid();
        let m = grid.nodes_per_axis();
        (0..m.div_ceil(2)).find(|&k| {
            (0..grid.len()).all(|p| {
                let idx = grid.multi_index(p);
                let inside = idx.iter().all(|&i| i >= k && i + k < m);
                !inside || self.faithful[p]
            })
        })
    }
}

/// Per-axis min and max of the discrete gradient over all nodes.
///
/// Central differences at interior indices, second-order one-sided
/// differences on the faces; both are exact on quadratics.
pub fn gradient_range(u: &GridFunction) -> (Vec<f64>, Vec<f64>) {
    let grid = u.grid();
    let m = grid.nodes_per_axis();
    let vals = u.values();
    let mut lo = vec![f64::INFINITY; grid.dim()];
    let mut hi = vec![f64::NEG_INFINITY; grid.dim()];
    for p in 0..grid.len() {
        let idx = grid.multi_index(p);
        for a in 0..grid.dim() {
            let s = grid.stride(a);
            let h = grid.spacing(a);
            let d = if idx[a] == 0 {
                (-3.0 * vals[p] + 4.0 * vals[p + s] - vals[p + 2 * s]) / (2.0 * h)
            } else if idx[a] == m - 1 {
                (3.0 * vals[p] - 4.0 * vals[p - s] + vals[p - 2 * s]) / (2.0 * h)
            } else {
                (vals[p + s] - vals[p - s]) / (2.0 * h)
            };
            lo[a] = lo[a].min(d);
            hi[a] = hi[a].max(d);
        }
    }
    (lo, hi)
}

/// Interior nodes whose discrete Hessian is not positive definite.
pub fn nonconvex_nodes(u: &GridFunction) -> Result<Vec<usize>> {
    let grid = u.grid();
    let st = HessianStencil::new(grid);
    let mut bad = Vec::new();
    for p in grid.interior_nodes() {
        let h = SymMatrix::from_row_major(grid.dim(), &st.hessian(u.values(), p))?;
        if !(spectral::eigen(&h)?.lambda_min() > 0.0) {
            bad.push(p);
        }
    }
    Ok(bad)
}

/// max over the nodes x of `u` of ⟨x, y⟩ − u(x), for each target point y.
/// Returns the value and the maximizing node.
pub fn conjugate_at(u: &GridFunction, targets: &[Vec<f64>]) -> Vec<(f64, usize)> {
    let grid = u.grid();
    let points: Vec<Vec<f64>> = (0..grid.len()).map(|p| grid.point(p)).collect();
    let vals = u.values();
    targets
        .par_iter()
        .map(|y| {
            let mut best = (f64::NEG_INFINITY, 0);
            for (p, x) in points.iter().enumerate() {
                let v = x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() - vals[p];
                if v > best.0 {
                    best = (v, p);
                }
            }
            best
        })
        .collect()
}

/// Brute-force discrete Legendre transform.
///
/// The output grid has the input's node count per axis and spans the bounding
/// box of [`gradient_range`]. With `check_convexity`, every interior discrete
/// Hessian must be positive definite.
pub fn discrete_legendre(u: &GridFunction, check_convexity: bool) -> Result<LegendreTransform> {
    let grid = u.grid();
    if check_convexity {
        let bad = nonconvex_nodes(u)?;
        if !bad.is_empty() {
            let shown: Vec<String> = bad
                .iter()
                .take(10)
                .map(|&p| format!("{:?}", grid.multi_index(p)))
                .collect();
            return Err(Error::domain(format!(
                "{} interior nodes fail discrete strict convexity, first: {}",
                bad.len(),
                shown.join(" ")
            )));
        }
    }
    let (lo, hi) = gradient_range(u);
    let out_grid = Grid::boxed(lo, hi, grid.nodes_per_axis())
        .map_err(|e| Error::domain(format!("gradient range is degenerate: {e}")))?;
    let targets: Vec<Vec<f64>> = (0..out_grid.len()).map(|p| out_grid.point(p)).collect();
    let sup = conjugate_at(u, &targets);
    let faithful = sup.iter().map(|&(_, p)| !grid.is_boundary(p)).collect();
    let argmax = sup.iter().map(|&(_, p)| p).collect();
    let conjugate = GridFunction::new(out_grid, sup.into_iter().map(|(v, _)| v).collect())?;
    Ok(LegendreTransform { conjugate, argmax, faithful })
}
