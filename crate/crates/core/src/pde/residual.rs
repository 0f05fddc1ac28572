use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::pde::linear::CsrMatrix;
use crate::pde::problem::{Operator, ProblemSpec};
use crate::pde::stencil::HessianStencil;
use crate::spectral::{self, EigenDecomposition, SymMatrix};
use crate::symfun::{self, Spectrum};

/// Operator data at one interior node.
#[derive(Debug, Clone)]
pub(crate) struct NodeEval {
    pub eig: EigenDecomposition,
    /// min(σ₁, σ₂) of the local spectrum.
    pub margin: f64,
    /// operator − rhs; NaN when the node is outside Γ₂.
    pub residual: f64,
}

/// Evaluations at every interior node, in `grid.interior_nodes()` order.
#[derive(Debug, Clone)]
pub(crate) struct FieldEval {
    pub nodes: Vec<NodeEval>,
}

impl FieldEval {
    pub fn min_margin(&self) -> f64 {
        self.nodes.iter().map(|e| e.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn residual_sup(&self) -> f64 {
        self.nodes.iter().fold(0.0, |m, e| m.max(e.residual.abs()))
    }

    pub fn residuals(&self) -> Vec<f64> {
        self.nodes.iter().map(|e| e.residual).collect()
    }

    /// Index (into the interior list) of the node with the smallest margin.
    pub fn worst(&self) -> usize {
        let mut k = 0;
        for (i, e) in self.nodes.iter().enumerate() {
            if e.margin < self.nodes[k].margin {
                k = i;
            }
        }
        k
    }
}

/// Interior indexing shared by residual, Jacobian and Newton updates.
#[derive(Debug, Clone)]
pub(crate) struct Discretization {
    pub grid: Grid,
    pub stencil: HessianStencil,
    pub interior: Vec<usize>,
    /// Unknown number of each grid node, `usize::MAX` on the boundary.
    pub unknown: Vec<usize>,
}

impl Discretization {
    pub fn new(grid: &Grid) -> Self {
        let interior = grid.interior_nodes();
        let mut unknown = vec![usize::MAX; grid.len()];
        for (k, &p) in interior.iter().enumerate() {
            unknown[p] = k;
        }
        Self { grid: grid.clone(), stencil: HessianStencil::new(grid), interior, unknown }
    }

    pub fn evaluate(&self, u: &[f64], op: Operator, rhs: f64) -> Result<FieldEval> {
        let n = self.grid.dim();
        let nodes = self
            .interior
            .par_iter()
            .map(|&p| {
                let h = SymMatrix::from_row_major(n, &self.stencil.hessian(u, p))?;
                let eig = spectral::eigen(&h)?;
                let lam = Spectrum::new(eig.eigenvalues.clone())?;
                let e = symfun::elementary_symmetric(lam.values(), 2);
                let margin = e[1].min(e[2]);
                let residual = if e[1] > 0.0 && e[2] > 0.0 { op.value(&lam)? - rhs } else { f64::NAN };
                Ok(NodeEval { eig, margin, residual })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FieldEval { nodes })
    }

    pub fn admissibility_error(&self, eval: &FieldEval, context: &str) -> String {
        let k = eval.worst();
        let node = &eval.nodes[k];
        format!(
            "{context}: node {:?} has spectrum {:?} (min(sigma_1, sigma_2) = {:e})",
            self.grid.multi_index(self.interior[k]),
            node.eig.eigenvalues,
            node.margin
        )
    }

    /// Fⁱʲ = Σₖ fₖ qᵢ⁽ᵏ⁾ qⱼ⁽ᵏ⁾ at each interior node.
    pub fn coefficients(&self, eval: &FieldEval, op: Operator) -> Result<Vec<Vec<f64>>> {
        let n = self.grid.dim();
        eval.nodes
            .par_iter()
            .map(|e| {
                let lam = Spectrum::new(e.eig.eigenvalues.clone())?;
                let f = op.gradient(&lam)?;
                let mut c = vec![0.0; n * n];
                for i in 0..n {
                    for j in 0..n {
                        c[i * n + j] = (0..n).map(|k| f[k] * e.eig.vector_entry(i, k) * e.eig.vector_entry(j, k)).sum();
                    }
                }
                Ok(c)
            })
            .collect()
    }
}

/// Residual operator(D²ₕu) − rhs at the interior nodes, zero on the boundary.
///
/// Fails with a domain error naming the worst node when some interior
/// discrete Hessian is outside Γ₂.
pub fn residual(u: &GridFunction, spec: &ProblemSpec) -> Result<GridFunction> {
    check_grid(u, spec)?;
    let disc = Discretization::new(u.grid());
    let eval = disc.evaluate(u.values(), spec.operator, spec.rhs)?;
    if !(eval.min_margin() > 0.0) {
        return Err(Error::domain(disc.admissibility_error(&eval, "residual needs Gamma_2")));
    }
    let mut out = GridFunction::zeros(u.grid().clone());
    for (k, &p) in disc.interior.iter().enumerate() {
        out.values_mut()[p] = eval.nodes[k].residual;
    }
    Ok(out)
}

fn check_grid(u: &GridFunction, spec: &ProblemSpec) -> Result<()> {
    let g = u.grid();
    if g.dim() != spec.dimension || g.nodes_per_axis() != spec.nodes_per_axis || g.cube_half_width() != Some(spec.half_width) {
        return Err(Error::domain("grid function does not live on the problem grid"));
    }
    Ok(())
}

/// Jacobian of [`residual`] with respect to the interior values.
#[derive(Debug, Clone)]
pub struct LinearizedOperator {
    disc: Discretization,
    coeffs: Vec<Vec<f64>>,
}

impl LinearizedOperator {
    pub(crate) fn from_parts(disc: Discretization, coeffs: Vec<Vec<f64>>) -> Self {
        Self { disc, coeffs }
    }

    /// Number of unknowns (interior nodes).
    pub fn size(&self) -> usize {
        self.disc.interior.len()
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.disc.interior
    }

    /// The ellipticity coefficients Fⁱʲ at interior node `k`.
    pub fn coefficients(&self, k: usize) -> Result<SymMatrix> {
        SymMatrix::from_row_major(self.disc.grid.dim(), &self.coeffs[k])
    }

    /// Matrix-free product with a vector of interior values; boundary values
    /// are taken as zero.
    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.disc.grid.len()];
        for (k, &p) in self.disc.interior.iter().enumerate() {
            full[p] = w[k];
        }
        self.apply_full(&full)
    }

    /// Σᵢⱼ Fⁱʲ (D²ₕw)ᵢⱼ at each interior node for a field given on the whole
    /// grid, boundary values included.
    pub fn apply_full(&self, w: &[f64]) -> Vec<f64> {
        self.disc
            .interior
            .par_iter()
            .zip(&self.coeffs)
            .map(|(&p, c)| self.disc.stencil.contract(c, w, p))
            .collect()
    }

    /// Explicit sparse matrix over the interior unknowns.
    pub fn assemble(&self) -> CsrMatrix {
        let rows = self
            .disc
            .interior
            .par_iter()
            .zip(&self.coeffs)
            .map(|(&p, c)| {
                self.disc
                    .stencil
                    .weights(c, p)
                    .into_iter()
                    .filter(|&(q, _)| self.disc.unknown[q] != usize::MAX)
                    .map(|(q, w)| (self.disc.unknown[q], w))
                    .collect()
            })
            .collect();
        CsrMatrix::from_rows(self.size(), rows)
    }
}

/// Linearizes the residual at `u`; requires every interior node in Γ₂.
pub fn linearize(u: &GridFunction, spec: &ProblemSpec) -> Result<LinearizedOperator> {
    check_grid(u, spec)?;
    let disc = Discretization::new(u.grid());
    let eval = disc.evaluate(u.values(), spec.operator, spec.rhs)?;
    if !(eval.min_margin() > 0.0) {
        return Err(Error::domain(disc.admissibility_error(&eval, "linearization needs Gamma_2")));
    }
    let coeffs = disc.coefficients(&eval, spec.operator)?;
    Ok(LinearizedOperator::from_parts(disc, coeffs))
}
