//! Second-order central-difference Hessians.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::spectral::SymMatrix;

/// Precomputed neighbor offsets for the Hessian stencil on one grid.
#[derive(Debug, Clone)]
pub(crate) struct HessianStencil {
    dim: usize,
    strides: Vec<usize>,
    inv_h2: Vec<f64>,
    inv_4hh: Vec<f64>,
}

impl HessianStencil {
    pub(crate) fn new(grid: &Grid) -> Self {
        let dim = grid.dim();
        let strides = (0..dim).map(|a| grid.stride(a)).collect();
        let h: Vec<f64> = (0..dim).map(|a| grid.spacing(a)).collect();
        let inv_h2 = h.iter().map(|x| 1.0 / (x * x)).collect();
        let mut inv_4hh = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                inv_4hh[i * dim + j] = 1.0 / (4.0 * h[i] * h[j]);
            }
        }
        Self { dim, strides, inv_h2, inv_4hh }
    }

    /// Row-major Hessian entries at an interior node `p`.
    pub(crate) fn hessian(&self, u: &[f64], p: usize) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        let c = u[p];
        for i in 0..n {
            let si = self.strides[i];
            out[i * n + i] = (u[p + si] - 2.0 * c + u[p - si]) * self.inv_h2[i];
            for j in i + 1..n {
                let sj = self.strides[j];
                let v = (u[p + si + sj] - u[p + si - sj] - u[p - si + sj] + u[p - si - sj])
                    * self.inv_4hh[i * n + j];
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        out
    }

    /// Applies the linear map w ↦ Σᵢⱼ Fⁱʲ (D²ₕw)ᵢⱼ at node `p`, where `f` is
    /// row-major symmetric.
    pub(crate) fn contract(&self, f: &[f64], w: &[f64], p: usize) -> f64 {
        let n = self.dim;
        let h = self.hessian(w, p);
        let mut acc = 0.0;
        for i in 0..n {
            acc += f[i * n + i] * h[i * n + i];
            for j in i + 1..n {
                acc += 2.0 * f[i * n + j] * h[i * n + j];
            }
        }
        acc
    }

    /// Stencil weights of w ↦ Σᵢⱼ Fⁱʲ (D²ₕw)ᵢⱼ at node `p` as
    /// (node, weight) pairs. Order is fixed so assembly is deterministic.
    pub(crate) fn weights(&self, f: &[f64], p: usize) -> Vec<(usize, f64)> {
        let n = self.dim;
        let mut out = Vec::with_capacity(1 + 2 * n + 2 * n * (n - 1));
        let mut center = 0.0;
        for i in 0..n {
            let si = self.strides[i];
            let a = f[i * n + i] * self.inv_h2[i];
            out.push((p + si, a));
            out.push((p - si, a));
            center -= 2.0 * a;
            for j in i + 1..n {
                let sj = self.strides[j];
                let b = 2.0 * f[i * n + j] * self.inv_4hh[i * n + j];
                out.push((p + si + sj, b));
                out.push((p + si - sj, -b));
                out.push((p - si + sj, -b));
                out.push((p - si - sj, b));
            }
        }
        out.push((p, center));
        out
    }
}

/// Central-difference Hessian of `u` at the interior node `node`
/// (a multi-index). Exact, up to rounding, on quadratic polynomials.
pub fn discrete_hessian(u: &GridFunction, node: &[usize]) -> Result<SymMatrix> {
    let grid = u.grid();
    if node.len() != grid.dim() {
        return Err(Error::domain(format!(
            "node index has {} components, grid dimension is {}",
            node.len(),
            grid.dim()
        )));
    }
    let m = grid.nodes_per_axis();
    if node.iter().any(|&i| i == 0 || i + 1 >= m) {
        return Err(Error::domain(format!("node {node:?} is not interior")));
    }
    let st = HessianStencil::new(grid);
    let h = st.hessian(u.values(), grid.flat_index(node));
    SymMatrix::from_row_major(grid.dim(), &h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::spectral::random_orthogonal;

    #[test]
    fn exact_on_quadratics() {
        let mut rng = SplitMix64::new(12);
        for n in 2..=3 {
            let g = Grid::cube(n, 7, 1.3).unwrap();
            let q = random_orthogonal(&mut rng, n);
            let d: Vec<f64> = (0..n).map(|_| rng.uniform(-2.0, 4.0)).collect();
            let a = SymMatrix::from_spectral(&q, &d).unwrap();
            let b: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
            let u = GridFunction::from_fn(g.clone(), |x| {
                let mut v = 3.0;
                for i in 0..n {
                    v += b[i] * x[i];
                    for j in 0..n {
                        v += 0.5 * x[i] * a.get(i, j) * x[j];
                    }
                }
                v
            })
            .unwrap();
            for p in g.interior_nodes() {
                let h = discrete_hessian(&u, &g.multi_index(p)).unwrap();
                assert!(h.sub(&a).max_abs() <= 1e-12 * a.max_abs().max(1.0));
            }
        }
    }

    #[test]
    fn quartic_truncation_is_2h2() {
        for m in [9usize, 17, 33] {
            let g = Grid::cube(2, m, 1.0).unwrap();
            let h = g.spacing(0);
            let u = GridFunction::from_fn(g.clone(), |x| x[0].powi(4)).unwrap();
            let c = g.multi_index(g.center_node());
            let d = discrete_hessian(&u, &c).unwrap();
            assert!((d.get(0, 0) - 2.0 * h * h).abs() < 1e-12);
            assert_eq!(d.get(1, 1), 0.0);
        }
    }

    #[test]
    fn constant_gives_zero() {
        let g = Grid::cube(3, 5, 1.0).unwrap();
        let u = GridFunction::new(g.clone(), vec![2.5; g.len()]).unwrap();
        assert_eq!(discrete_hessian(&u, &[2, 2, 2]).unwrap(), SymMatrix::zeros(3));
    }

    #[test]
    fn rejects_boundary_nodes() {
        let g = Grid::cube(2, 5, 1.0).unwrap();
        let u = GridFunction::zeros(g);
        assert!(discrete_hessian(&u, &[0, 2]).is_err());
        assert!(discrete_hessian(&u, &[2, 4]).is_err());
        assert!(discrete_hessian(&u, &[2]).is_err());
    }

    #[test]
    fn weights_agree_with_contract() {
        let mut rng = SplitMix64::new(2);
        let g = Grid::cube(3, 5, 1.0).unwrap();
        let st = HessianStencil::new(&g);
        let w: Vec<f64> = (0..g.len()).map(|_| rng.normal()).collect();
        let f = SymMatrix::from_row_major(3, &(0..9).map(|_| rng.normal()).collect::<Vec<_>>()).unwrap();
        for p in g.interior_nodes() {
            let direct = st.contract(f.as_row_major(), &w, p);
            let via: f64 = st.weights(f.as_row_major(), p).iter().map(|&(q, c)| c * w[q]).sum();
            assert!((direct - via).abs() <= 1e-11 * direct.abs().max(1.0));
        }
    }
}
