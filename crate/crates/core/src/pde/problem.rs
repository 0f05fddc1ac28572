use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::pde::linear::{BandedLu, CsrMatrix};
use crate::symfun::{self, Spectrum};
use crate::transform::{self, QuadraticForm};

/// The fully nonlinear operator applied to the discrete Hessian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operator {
    /// σ₂/σ₁.
    Quotient21,
    /// σ₂.
    Sigma2,
}

impl Operator {
    pub fn value(self, lam: &Spectrum) -> Result<f64> {
        match self {
            Operator::Quotient21 => symfun::quotient_21(lam),
            Operator::Sigma2 => symfun::sigma_k(lam, 2),
        }
    }

    pub fn gradient(self, lam: &Spectrum) -> Result<Vec<f64>> {
        match self {
            Operator::Quotient21 => symfun::quotient_21_gradient(lam),
            Operator::Sigma2 => Ok(symfun::sigma2_gradient(lam)),
        }
    }

    /// The scale `a` with operator(a·I) = rhs in dimension `n`.
    pub fn isotropic_scale(self, n: usize, rhs: f64) -> f64 {
        let nf = n as f64;
        match self {
            // σ₂/σ₁(aI) = a(n−1)/2
            Operator::Quotient21 => 2.0 * rhs / (nf - 1.0),
            // σ₂(aI) = a²n(n−1)/2
            Operator::Sigma2 => (2.0 * rhs / (nf * (nf - 1.0))).sqrt(),
        }
    }
}

/// Dirichlet data. Analytic variants can be sampled anywhere; tabulated data
/// is extended into the interior harmonically when a full field is needed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryData {
    Quadratic {
        form: QuadraticForm,
    },
    /// (a − x₁)³/6 + x₂²/(2(a − x₁)) + |x|²/2 in two dimensions. The cubic
    /// part has Monge–Ampère determinant 1, so this is an exact smooth
    /// solution of σ₂/σ₁ = 1 wherever x₁ < a.
    ExactCubic {
        a: f64,
    },
    /// q(x) + amplitude·∏ᵢ cos(frequency·xᵢ).
    Perturbed {
        form: QuadraticForm,
        amplitude: f64,
        frequency: f64,
    },
    /// One value per node in row-major order; interior entries are ignored.
    Tabulated {
        values: Vec<f64>,
    },
    Sum {
        terms: Vec<BoundaryData>,
    },
}

impl BoundaryData {
    pub fn quadratic(form: QuadraticForm) -> Self {
        BoundaryData::Quadratic { form }
    }

    /// The data minus |x|²/(2(n−1)).
    pub fn minus_shift_quadratic(self, n: usize) -> Self {
        let correction = transform::shift_quadratic(n);
        let neg = QuadraticForm::pure(correction.hessian().scaled(-1.0));
        BoundaryData::Sum { terms: vec![self, BoundaryData::Quadratic { form: neg }] }
    }

    /// Dimension implied by the data, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            BoundaryData::Quadratic { form } | BoundaryData::Perturbed { form, .. } => Some(form.dim()),
            BoundaryData::ExactCubic { .. } => Some(2),
            BoundaryData::Tabulated { .. } => None,
            BoundaryData::Sum { terms } => terms.iter().find_map(|t| t.dim()),
        }
    }

    /// Pointwise value for analytic data.
    pub fn value_at(&self, x: &[f64]) -> Option<f64> {
        match self {
            BoundaryData::Quadratic { form } => Some(form.eval(x)),
            BoundaryData::ExactCubic { a } => {
                let d = a - x[0];
                Some(d * d * d / 6.0 + x[1] * x[1] / (2.0 * d) + 0.5 * (x[0] * x[0] + x[1] * x[1]))
            }
            BoundaryData::Perturbed { form, amplitude, frequency } => {
                let bump: f64 = x.iter().map(|xi| (frequency * xi).cos()).product();
                Some(form.eval(x) + amplitude * bump)
            }
            BoundaryData::Tabulated { .. } => None,
            BoundaryData::Sum { terms } => terms.iter().map(|t| t.value_at(x)).sum(),
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if let Some(n) = self.dim() {
            if n != grid.dim() {
                return Err(Error::domain(format!(
                    "boundary data is {n}-dimensional, grid is {}-dimensional",
                    grid.dim()
                )));
            }
        }
        match self {
            BoundaryData::ExactCubic { a } => {
                if !(*a > grid.upper(0)) {
                    return Err(Error::domain(format!(
                        "exact cubic needs a > {} (the box edge), got {a}",
                        grid.upper(0)
                    )));
                }
            }
            BoundaryData::Perturbed { amplitude, frequency, .. } => {
                if !amplitude.is_finite() || !frequency.is_finite() {
                    return Err(Error::domain("perturbation parameters must be finite"));
                }
            }
            BoundaryData::Tabulated { values } => {
                if values.len() != grid.len() {
                    return Err(Error::domain(format!(
                        "tabulated boundary has {} values, grid has {} nodes",
                        values.len(),
                        grid.len()
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::domain("tabulated boundary values must be finite"));
                }
            }
            BoundaryData::Sum { terms } => {
                for t in terms {
                    t.validate(grid)?;
                }
            }
            BoundaryData::Quadratic { .. } => {}
        }
        Ok(())
    }

    /// A field on the whole grid whose boundary trace is this data: the data
    /// itself where analytic, the discrete harmonic extension where tabulated.
    pub fn field(&self, grid: &Grid) -> Result<GridFunction> {
        self.validate(grid)?;
        match self {
            BoundaryData::Tabulated { values } => harmonic_extension(grid, values),
            BoundaryData::Sum { terms } => {
                let mut acc = vec![0.0; grid.len()];
                for t in terms {
                    for (a, v) in acc.iter_mut().zip(t.field(grid)?.values()) {
                        *a += v;
                    }
                }
                GridFunction::new(grid.clone(), acc)
            }
            analytic => GridFunction::from_fn(grid.clone(), |x| analytic.value_at(x).unwrap()),
        }
    }
}

/// Discrete harmonic function with the boundary entries of `values`.
pub fn harmonic_extension(grid: &Grid, values: &[f64]) -> Result<GridFunction> {
    let interior = grid.interior_nodes();
    let mut unknown = vec![usize::MAX; grid.len()];
    for (k, &p) in interior.iter().enumerate() {
        unknown[p] = k;
    }
    let mut rhs = vec![0.0; interior.len()];
    let rows = interior
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let mut row = Vec::with_capacity(1 + 2 * grid.dim());
            let mut diag = 0.0;
            for a in 0..grid.dim() {
                let s = grid.stride(a);
                let w = 1.0 / (grid.spacing(a) * grid.spacing(a));
                diag -= 2.0 * w;
                for q in [p + s, p - s] {
                    if unknown[q] == usize::MAX {
                        rhs[k] -= w * values[q];
                    } else {
                        row.push((unknown[q], w));
                    }
                }
            }
            row.push((k, diag));
            row
        })
        .collect();
    let lap = CsrMatrix::from_rows(interior.len(), rows);
    let sol = BandedLu::factor(&lap)?.solve(&rhs)?;
    let mut out = values.to_vec();
    for (k, &p) in interior.iter().enumerate() {
        out[p] = sol[k];
    }
    GridFunction::new(grid.clone(), out)
}

fn default_continuation_steps() -> usize {
    4
}

/// A Dirichlet problem operator(D²u) = rhs on the cube `[−L, L]ⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub dimension: usize,
    pub nodes_per_axis: usize,
    pub half_width: f64,
    pub operator: Operator,
    pub rhs: f64,
    pub boundary: BoundaryData,
    #[serde(default = "default_continuation_steps")]
    pub continuation_steps: usize,
}

impl ProblemSpec {
    pub fn new(
        dimension: usize,
        nodes_per_axis: usize,
        half_width: f64,
        operator: Operator,
        rhs: f64,
        boundary: BoundaryData,
    ) -> Self {
        Self {
            dimension,
            nodes_per_axis,
            half_width,
            operator,
            rhs,
            boundary,
            continuation_steps: default_continuation_steps(),
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::cube(self.dimension, self.nodes_per_axis, self.half_width)
    }

    pub fn validate(&self) -> Result<Grid> {
        if !(2..=3).contains(&self.dimension) {
            return Err(Error::domain(format!(
                "solves are supported in dimension 2 or 3, got {}",
                self.dimension
            )));
        }
        if !(self.rhs > 0.0 && self.rhs.is_finite()) {
            return Err(Error::domain(format!("right-hand side must be positive, got {}", self.rhs)));
        }
        if self.continuation_steps == 0 {
            return Err(Error::domain("continuation needs at least one step"));
        }
        let grid = self.grid()?;
        self.boundary.validate(&grid)?;
        Ok(grid)
    }

    /// ½a|x|² with operator(aI) = rhs: the admissible starting field.
    pub fn start_quadratic(&self) -> QuadraticForm {
        QuadraticForm::isotropic(self.dimension, self.operator.isotropic_scale(self.dimension, self.rhs))
    }
}

fn default_max_iterations() -> usize {
    50
}
fn default_tolerance_factor() -> f64 {
    1e-10
}
fn default_decrease() -> f64 {
    0.9
}
fn default_max_halvings() -> usize {
    40
}
fn default_margin_floor() -> f64 {
    1e-12
}
fn default_refinements() -> usize {
    6
}

/// Newton and continuation controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Newton iterations allowed per continuation level.
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    /// Converged when the residual sup-norm is at most this times (1 + rhs).
    #[serde(default = "default_tolerance_factor")]
    pub tolerance_factor: f64,
    /// A damped step must shrink the residual sup-norm by at least this factor.
    #[serde(default = "default_decrease")]
    pub sufficient_decrease: f64,
    #[serde(default = "default_max_halvings")]
    pub max_halvings: usize,
    /// Every interior min(σ₁, σ₂) of an accepted iterate must reach this.
    #[serde(default = "default_margin_floor")]
    pub margin_floor: f64,
    /// How many times a failed continuation step may be halved.
    #[serde(default = "default_refinements")]
    pub max_continuation_refinements: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: default_max_iterations(),
            tolerance_factor: default_tolerance_factor(),
            sufficient_decrease: default_decrease(),
            max_halvings: default_max_halvings(),
            margin_floor: default_margin_floor(),
            max_continuation_refinements: default_refinements(),
        }
    }
}
