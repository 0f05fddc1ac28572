//! Desk-scale experiments: quadratic rigidity fits, the semi-convexity
//! condition with c(n), and the interior-estimate refinement study.
//!
//! The interior estimate has no explicit constant, so the experiment reports
//! trends (refinement drift, growth against the Lipschitz proxy) rather than
//! asserting a bound.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::pde::stencil::HessianStencil;
use crate::pde::{newton_solve_with, BoundaryData, Operator, ProblemSpec, SolverOptions};
use crate::rng::{stream_id, SplitMix64};
use crate::spectral::{self, SymMatrix};
use crate::symfun;
use crate::transform::QuadraticForm;

/// c(n) = (√(3n²+1) − n + 1)/(2n).
pub fn c_of_n(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!("c(n) needs n >= 2, got {n}")));
    }
    let nf = n as f64;
    Ok(((3.0 * nf * nf + 1.0).sqrt() - nf + 1.0) / (2.0 * nf))
}

fn interior_hessians(u: &GridFunction) -> Result<Vec<SymMatrix>> {
    let grid = u.grid();
    let interior = grid.interior_nodes();
    if interior.is_empty() {
        return Err(Error::domain("grid has no interior nodes"));
    }
    let stencil = HessianStencil::new(grid);
    interior
        .par_iter()
        .map(|&p| SymMatrix::from_row_major(grid.dim(), &stencil.hessian(u.values(), p)))
        .collect()
}

/// min over interior nodes of λ_min(D²u) − 1/(n−1) + c(n)·(Δu − n/(n−1)).
/// Nonnegative means the semi-convexity condition holds at every node.
pub fn semiconvexity_margin(u: &GridFunction) -> Result<f64> {
    let n = u.grid().dim();
    let c = c_of_n(n)?;
    let nf = n as f64;
    let margins = interior_hessians(u)?
        .par_iter()
        .map(|s| Ok(spectral::eigen(s)?.lambda_min() - 1.0 / (nf - 1.0) + c * (s.trace() - nf / (nf - 1.0))))
        .collect::<Result<Vec<f64>>>()?;
    Ok(margins.into_iter().fold(f64::INFINITY, f64::min))
}

/// Least-squares quadratic fit of a grid function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub form: QuadraticForm,
    /// max over all nodes of |u − q|.
    pub residual: f64,
    /// max over interior nodes of the largest entry of |D²ₕu − A|.
    pub hessian_spread: f64,
}

/// Fits q(x) = ½xᵀAx + bᵀx + c to all nodes by Householder QR. Coordinates
/// are centered and scaled to the box before fitting.
pub fn fit_quadratic(u: &GridFunction) -> Result<RigidityReport> {
    let grid = u.grid();
    let n = grid.dim();
    let npair = n * (n + 1) / 2;
    let ncoef = npair + n + 1;
    let rows = grid.len();
    if rows < ncoef {
        return Err(Error::domain(format!("{rows} nodes cannot determine {ncoef} coefficients")));
    }
    let center: Vec<f64> = (0..n).map(|a| 0.5 * (grid.lower(a) + grid.upper(a))).collect();
    let scale: Vec<f64> = (0..n).map(|a| 0.5 * (grid.upper(a) - grid.lower(a))).collect();

    // Column-major design matrix: ½x̃ᵢ², x̃ᵢx̃ⱼ (i<j), x̃ᵢ, 1.
    let mut design = vec![0.0; rows * ncoef];
    let mut rhs = u.values().to_vec();
    for p in 0..rows {
        let x: Vec<f64> = grid.point(p).iter().enumerate().map(|(a, v)| (v - center[a]) / scale[a]).collect();
        let mut col = 0;
        for i in 0..n {
            for j in i..n {
                design[col * rows + p] = if i == j { 0.5 * x[i] * x[i] } else { x[i] * x[j] };
                col += 1;
            }
        }
        for xi in &x {
            design[col * rows + p] = *xi;
            col += 1;
        }
        design[col * rows + p] = 1.0;
    }
    let coef = householder_least_squares(&mut design, &mut rhs, rows, ncoef)?;

    // Undo the coordinate map x̃ = D⁻¹(x − x₀).
    let mut a_t = SymMatrix::zeros(n);
    let mut col = 0;
    for i in 0..n {
        for j in i..n {
            a_t.set(i, j, coef[col]);
            col += 1;
        }
    }
    let b_t = &coef[npair..npair + n];
    let c_t = coef[ncoef - 1];
    let mut a = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            a.set(i, j, a_t.get(i, j) / (scale[i] * scale[j]));
        }
    }
    let b: Vec<f64> = (0..n)
        .map(|i| b_t[i] / scale[i] - (0..n).map(|j| a.get(i, j) * center[j]).sum::<f64>())
        .collect();
    let quad0: f64 = (0..n).map(|i| (0..n).map(|j| center[i] * a.get(i, j) * center[j]).sum::<f64>()).sum();
    let lin0: f64 = (0..n).map(|i| b_t[i] * center[i] / scale[i]).sum();
    let form = QuadraticForm::new(a, b, c_t - lin0 + 0.5 * quad0)?;

    let residual = (0..rows).map(|p| (u.values()[p] - form.eval(&grid.point(p))).abs()).fold(0.0, f64::max);
    let hessian_spread = interior_hessians(u)?
        .iter()
        .map(|s| s.sub(form.hessian()).max_abs())
        .fold(0.0, f64::max);
    Ok(RigidityReport { form, residual, hessian_spread })
}

/// Solves min ‖Ax − b‖ for column-major `a` (rows × cols), destroying both
/// inputs. Columns with a negligible pivot make the problem rank deficient.
fn householder_least_squares(a: &mut [f64], b: &mut [f64], rows: usize, cols: usize) -> Result<Vec<f64>> {
    let col_norm = |a: &[f64], c: usize| a[c * rows..(c + 1) * rows].iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = (0..cols).map(|c| col_norm(a, c)).fold(0.0, f64::max);
    for k in 0..cols {
        let tail = &a[k * rows + k..(k + 1) * rows];
        let norm = tail.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 1e-12 * scale) {
            return Err(Error::domain(format!("quadratic fit is rank deficient at coefficient {k}")));
        }
        let alpha = if tail[0] > 0.0 { -norm } else { norm };
        let mut v = tail.to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        for c in k..cols {
            let colv = &mut a[c * rows + k..(c + 1) * rows];
            let d: f64 = colv.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>() * 2.0 / vnorm2;
            colv.iter_mut().zip(&v).for_each(|(x, y)| *x -= d * y);
        }
        let d: f64 = b[k..].iter().zip(&v).map(|(x, y)| x * y).sum::<f64>() * 2.0 / vnorm2;
        b[k..].iter_mut().zip(&v).for_each(|(x, y)| *x -= d * y);
    }
    let mut x = vec![0.0; cols];
    for k in (0..cols).rev() {
        let s: f64 = (k + 1..cols).map(|c| a[c * rows + k] * x[c]).sum();
        x[k] = (b[k] - s) / a[k * rows + k];
    }
    Ok(x)
}

/// A random symmetric matrix with σ₂/σ₁ = 1 whose eigenvalues lie in Γ₂.
/// Eigenvalues are drawn from Γ₂ ∩ [−½, 3]ⁿ, rescaled by the quotient, and
/// redrawn if the rescaled spectrum exceeds 6 in magnitude.
pub fn random_unit_quotient_matrix(rng: &mut SplitMix64, n: usize) -> Result<SymMatrix> {
    loop {
        let lam = symfun::sample_gamma2(rng, n, -0.5, 3.0);
        let q = symfun::quotient_21(&lam)?;
        let scaled: Vec<f64> = lam.values().iter().map(|v| v / q).collect();
        if scaled.iter().all(|v| v.abs() <= 6.0) {
            return spectral::random_with_spectrum(rng, &scaled);
        }
    }
}

fn default_rigidity_tolerance() -> f64 {
    1e-8
}

/// Quadratic Dirichlet data ½xᵀAx + bᵀx + c with σ₂/σ₁(A) = 1, A ∈ Γ₂.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleFixture {
    pub id: String,
    pub nodes_per_axis: usize,
    pub form: QuadraticForm,
}

impl LiouvilleFixture {
    pub fn validate(&self) -> Result<()> {
        let a = self.form.hessian();
        if !spectral::matrix_admissible(a, 2)? {
            return Err(Error::domain(format!("fixture {}: eigenvalues of A are not in Gamma_2", self.id)));
        }
        let q = spectral::matrix_operator(a, spectral::MatrixOperator::Quotient21)?;
        if (q - 1.0).abs() > 1e-10 {
            return Err(Error::domain(format!("fixture {}: sigma_2/sigma_1(A) = {q}, expected 1", self.id)));
        }
        Ok(())
    }
}

/// `count` seeded fixtures in one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomFixtures {
    pub dimension: usize,
    pub count: usize,
    pub nodes_per_axis: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default)]
    pub fixtures: Vec<LiouvilleFixture>,
    #[serde(default)]
    pub random: Vec<RandomFixtures>,
    /// Bound on both the fit residual and the Hessian-field spread.
    #[serde(default = "default_rigidity_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub solver: SolverOptions,
}

impl Default for LiouvilleConfig {
    fn default() -> Self {
        let fixture = |id: &str, m: usize, a: SymMatrix, b: Vec<f64>, c: f64| LiouvilleFixture {
            id: id.into(),
            nodes_per_axis: m,
            form: QuadraticForm::new(a, b, c).expect("consistent fixture"),
        };
        Self {
            seed: 20240611,
            half_width: default_half_width(),
            fixtures: vec![
                fixture("aniso2", 33, SymMatrix::diagonal(&[3.0, 1.5]), vec![0.5, -0.25], 1.0),
                fixture("iso2", 33, SymMatrix::identity(2).scaled(2.0), vec![0.0, 0.0], 0.0),
                fixture("iso3", 13, SymMatrix::identity(3), vec![0.0; 3], 0.0),
                fixture("aniso3", 13, SymMatrix::diagonal(&[2.0, 1.0, 0.5]), vec![-0.3, 0.2, 0.1], -0.5),
                // Admissible but not convex: σ₁ = σ₂ = 5.4.
                fixture("saddle3", 13, SymMatrix::diagonal(&[3.0, 3.0, -0.6]), vec![0.0; 3], 0.0),
            ],
            random: vec![
                RandomFixtures { dimension: 2, count: 3, nodes_per_axis: 33 },
                RandomFixtures { dimension: 3, count: 3, nodes_per_axis: 13 },
            ],
            tolerance: default_rigidity_tolerance(),
            solver: SolverOptions::default(),
        }
    }
}

impl LiouvilleConfig {
    pub fn uses_randomness(&self) -> bool {
        self.random.iter().any(|r| r.count > 0)
    }

    /// Explicit fixtures followed by the seeded ones, which use rotated
    /// [`random_unit_quotient_matrix`] Hessians and linear and constant
    /// parts uniform in [−1, 1).
    pub fn all_fixtures(&self) -> Result<Vec<LiouvilleFixture>> {
        let mut out = self.fixtures.clone();
        for r in &self.random {
            let mut rng = SplitMix64::stream(self.seed, stream_id("liouville", r.dimension));
            for k in 0..r.count {
                let a = random_unit_quotient_matrix(&mut rng, r.dimension)?;
                let b = (0..r.dimension).map(|_| rng.uniform(-1.0, 1.0)).collect();
                let c = rng.uniform(-1.0, 1.0);
                out.push(LiouvilleFixture {
                    id: format!("random{}-{}", r.dimension, k),
                    nodes_per_axis: r.nodes_per_axis,
                    form: QuadraticForm::new(a, b, c)?,
                });
            }
        }
        if out.is_empty() {
            return Err(Error::domain("Liouville probe needs at least one fixture"));
        }
        for f in &out {
            f.validate()?;
            self.problem(f).validate()?;
        }
        Ok(out)
    }

    fn problem(&self, f: &LiouvilleFixture) -> ProblemSpec {
        ProblemSpec::new(
            f.form.dim(),
            f.nodes_per_axis,
            self.half_width,
            Operator::Quotient21,
            1.0,
            BoundaryData::quadratic(f.form.clone()),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleEntry {
    pub id: String,
    pub n: usize,
    pub m: usize,
    pub boundary: QuadraticForm,
    pub fit: RigidityReport,
    pub newton_iters: usize,
    pub final_residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleReport {
    pub seed: u64,
    pub tolerance: f64,
    pub entries: Vec<LiouvilleEntry>,
    pub all_pass: bool,
}

/// Solves σ₂/σ₁(D²u) = 1 with each quadratic fixture as boundary data and
/// fits a quadratic to the result. The first solver error, in fixture order,
/// aborts the batch.
pub fn liouville_probe(cfg: &LiouvilleConfig) -> Result<LiouvilleReport> {
    if !(cfg.tolerance > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let fixtures = cfg.all_fixtures()?;
    let entries = fixtures
        .par_iter()
        .map(|f| {
            let n = f.form.dim();
            let (u, rep) = newton_solve_with(&cfg.problem(f), &cfg.solver)?;
            let fit = fit_quadratic(&u)?;
            let pass = fit.residual <= cfg.tolerance && fit.hessian_spread <= cfg.tolerance;
            Ok(LiouvilleEntry {
                id: f.id.clone(),
                n,
                m: f.nodes_per_axis,
                boundary: f.form.clone(),
                fit,
                newton_iters: rep.iterations,
                final_residual: rep.final_residual,
                pass,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let all_pass = entries.iter().all(|e| e.pass);
    Ok(LiouvilleReport { seed: cfg.seed, tolerance: cfg.tolerance, entries, all_pass })
}

/// Where a family's boundary data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum FamilySource {
    Fixed { boundary: BoundaryData },
    /// Quadratic data ½xᵀAx with a seeded [`random_unit_quotient_matrix`].
    RandomUnitQuadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteriorFamily {
    pub id: String,
    pub dimension: usize,
    pub resolutions: Vec<usize>,
    #[serde(flatten)]
    pub source: FamilySource,
    /// Whether the exact solution is a quadratic polynomial. Non-quadratic
    /// families are the ones whose refinement drift is checked.
    #[serde(default)]
    pub quadratic: bool,
}

impl InteriorFamily {
    pub fn fixed(id: &str, dimension: usize, resolutions: &[usize], boundary: BoundaryData) -> Self {
        let quadratic = matches!(boundary, BoundaryData::Quadratic { .. });
        Self {
            id: id.to_string(),
            dimension,
            resolutions: resolutions.to_vec(),
            source: FamilySource::Fixed { boundary },
            quadratic,
        }
    }

    pub fn boundary(&self, seed: u64) -> Result<BoundaryData> {
        match &self.source {
            FamilySource::Fixed { boundary } => Ok(boundary.clone()),
            FamilySource::RandomUnitQuadratic => {
                let mut rng = SplitMix64::stream(seed, stream_id(&self.id, self.dimension));
                let a = random_unit_quotient_matrix(&mut rng, self.dimension)?;
                Ok(BoundaryData::quadratic(QuadraticForm::pure(a)))
            }
        }
    }
}

fn default_half_width() -> f64 {
    1.0
}
fn default_stress_multiple() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteriorConfig {
    pub families: Vec<InteriorFamily>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    /// Runs with |D²u(0)| above this multiple of the Lipschitz proxy are
    /// flagged for review.
    #[serde(default = "default_stress_multiple")]
    pub stress_multiple: f64,
    #[serde(default)]
    pub solver: SolverOptions,
}

impl Default for InteriorConfig {
    fn default() -> Self {
        let unit = |n: usize, a: f64| QuadraticForm::isotropic(n, a);
        let diag = |d: &[f64]| QuadraticForm::pure(SymMatrix::diagonal(d));
        let fine2 = [17, 33, 65];
        let fine3 = [9, 17];
        Self {
            families: vec![
                InteriorFamily::fixed("quad2-iso", 2, &fine2, BoundaryData::quadratic(unit(2, 2.0))),
                InteriorFamily::fixed("quad2-aniso", 2, &fine2, BoundaryData::quadratic(diag(&[3.0, 1.5]))),
                InteriorFamily::fixed("cubic2-a3", 2, &fine2, BoundaryData::ExactCubic { a: 3.0 }),
                InteriorFamily::fixed("cubic2-a4", 2, &fine2, BoundaryData::ExactCubic { a: 4.0 }),
                InteriorFamily::fixed(
                    "wave2",
                    2,
                    &fine2,
                    BoundaryData::Perturbed { form: diag(&[3.0, 1.5]), amplitude: 0.2, frequency: 2.0 },
                ),
                InteriorFamily::fixed("quad3-iso", 3, &fine3, BoundaryData::quadratic(unit(3, 1.0))),
                InteriorFamily::fixed(
                    "wave3",
                    3,
                    &fine3,
                    BoundaryData::Perturbed { form: diag(&[2.0, 1.0, 0.5]), amplitude: 0.1, frequency: 2.0 },
                ),
                InteriorFamily {
                    id: "randquad3".into(),
                    dimension: 3,
                    resolutions: fine3.to_vec(),
                    source: FamilySource::RandomUnitQuadratic,
                    quadratic: true,
                },
            ],
            seed: 20240611,
            half_width: default_half_width(),
            stress_multiple: default_stress_multiple(),
            solver: SolverOptions::default(),
        }
    }
}

impl InteriorConfig {
    /// Every (family, resolution) problem in config order, validated.
    fn jobs(&self) -> Result<Vec<(&InteriorFamily, usize, ProblemSpec)>> {
        if self.families.is_empty() {
            return Err(Error::domain("interior experiment needs at least one family"));
        }
        if !(self.half_width > 0.0) || !(self.stress_multiple > 0.0) {
            return Err(Error::domain("half_width and stress_multiple must be positive"));
        }
        let mut jobs = Vec::new();
        for fam in &self.families {
            if !(2..=3).contains(&fam.dimension) || fam.resolutions.is_empty() {
                return Err(Error::domain(format!(
                    "family {}: dimension must be 2 or 3 and resolutions non-empty",
                    fam.id
                )));
            }
            let boundary = fam.boundary(self.seed)?;
            for &m in &fam.resolutions {
                let spec = ProblemSpec::new(fam.dimension, m, self.half_width, Operator::Quotient21, 1.0, boundary.clone());
                spec.validate()?;
                jobs.push((fam, m, spec));
            }
        }
        Ok(jobs)
    }

    pub fn validate(&self) -> Result<()> {
        self.jobs().map(|_| ())
    }

    pub fn uses_randomness(&self) -> bool {
        self.families.iter().any(|f| f.source == FamilySource::RandomUnitQuadratic)
    }
}

/// One solve of the interior-estimate study. Measured fields are `None` when
/// the solve failed; `error` then carries the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteriorRun {
    pub run_id: String,
    pub boundary_id: String,
    pub n: usize,
    pub m: usize,
    pub half_width: f64,
    pub lip_norm: Option<f64>,
    /// Largest |entry| of the discrete Hessian at the origin.
    pub hess0_max: Option<f64>,
    /// Spectral radius of the same matrix.
    pub hess0_spec: Option<f64>,
    pub k_semiconvex: Option<f64>,
    pub thm31_margin: Option<f64>,
    pub newton_iters: Option<usize>,
    pub final_residual: Option<f64>,
    pub estimate_stress: bool,
    pub error: Option<String>,
}

/// Relative change of |D²u(0)| between a family's two finest grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyDrift {
    pub boundary_id: String,
    pub quadratic: bool,
    pub coarse_m: usize,
    pub fine_m: usize,
    /// `None` if either of the two runs failed.
    pub drift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteriorReport {
    pub seed: u64,
    pub runs: Vec<InteriorRun>,
    pub drift: Vec<FamilyDrift>,
    pub notes: Vec<String>,
}

pub const INTERIOR_CSV_HEADER: &str =
    "run_id,n,m,L,boundary_id,lip_norm,hess0_max,hess0_spec,K_semiconvex,thm31_margin,newton_iters,final_residual";

impl InteriorReport {
    /// Failed runs keep their identifying columns, show `failed` for the
    /// iteration count and leave the measured columns empty.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
        let mut out = String::from(INTERIOR_CSV_HEADER);
        out.push('\n');
        for r in &self.runs {
            let iters = r.newton_iters.map_or_else(|| "failed".to_string(), |k| k.to_string());
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.run_id,
                r.n,
                r.m,
                r.half_width,
                r.boundary_id,
                opt(r.lip_norm),
                opt(r.hess0_max),
                opt(r.hess0_spec),
                opt(r.k_semiconvex),
                opt(r.thm31_margin),
                iters,
                opt(r.final_residual)
            );
        }
        out
    }

    pub fn max_nonquadratic_drift(&self) -> Option<f64> {
        self.drift.iter().filter(|d| !d.quadratic).map(|d| d.drift.unwrap_or(f64::INFINITY)).reduce(f64::max)
    }
}

/// Shortest round-trip decimal, switching to exponent form outside
/// [1e−4, 1e15) so tiny residuals stay readable.
fn format_float(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

/// max over grid edges of |Δu|/h, plus ‖u‖∞.
pub fn lipschitz_estimate(u: &GridFunction) -> f64 {
    let grid = u.grid();
    let v = u.values();
    let m = grid.nodes_per_axis();
    let mut slope = 0.0f64;
    for a in 0..grid.dim() {
        let (s, h) = (grid.stride(a), grid.spacing(a));
        for p in 0..grid.len() {
            if grid.multi_index(p)[a] + 1 < m {
                slope = slope.max((v[p + s] - v[p]).abs() / h);
            }
        }
    }
    slope + u.sup_norm()
}

struct Measured {
    lip: f64,
    hess0_max: f64,
    hess0_spec: f64,
    k: f64,
    margin: f64,
    iters: usize,
    residual: f64,
}

fn measure(spec: &ProblemSpec, opts: &SolverOptions) -> Result<Measured> {
    let (u, report) = newton_solve_with(spec, opts)?;
    let grid = u.grid();
    let center = grid.multi_index(grid.center_node());
    let h0 = crate::pde::discrete_hessian(&u, &center)?;
    let eig0 = spectral::eigen(&h0)?;
    let k = interior_hessians(&u)?
        .iter()
        .map(spectral::semiconvexity_constant)
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(Measured {
        lip: lipschitz_estimate(&u),
        hess0_max: h0.max_abs(),
        hess0_spec: eig0.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        k,
        margin: semiconvexity_margin(&u)?,
        iters: report.iterations,
        residual: report.final_residual,
    })
}

/// Runs every (family, resolution) pair of σ₂/σ₁(D²u) = 1 on `[−L, L]ⁿ`.
/// Solver failures are recorded per run and do not stop the batch; runs are
/// independent and reported in config order.
pub fn interior_estimate_experiment(config: &InteriorConfig) -> Result<InteriorReport> {
    let jobs = config.jobs()?;

    let runs: Vec<InteriorRun> = jobs
        .par_iter()
        .map(|(fam, m, spec)| {
            let mut run = InteriorRun {
                run_id: format!("{}-m{}", fam.id, m),
                boundary_id: fam.id.clone(),
                n: fam.dimension,
                m: *m,
                half_width: config.half_width,
                lip_norm: None,
                hess0_max: None,
                hess0_spec: None,
                k_semiconvex: None,
                thm31_margin: None,
                newton_iters: None,
                final_residual: None,
                estimate_stress: false,
                error: None,
            };
            match measure(spec, &config.solver) {
                Ok(r) => {
                    run.lip_norm = Some(r.lip);
                    run.hess0_max = Some(r.hess0_max);
                    run.hess0_spec = Some(r.hess0_spec);
                    run.k_semiconvex = Some(r.k);
                    run.thm31_margin = Some(r.margin);
                    run.newton_iters = Some(r.iters);
                    run.final_residual = Some(r.residual);
                    run.estimate_stress = r.hess0_max > config.stress_multiple * r.lip;
                }
                Err(e) => run.error = Some(format!("{}: {e}", e.kind())),
            }
            run
        })
        .collect();

    let drift = config
        .families
        .iter()
        .filter_map(|fam| {
            let mut ms = fam.resolutions.clone();
            ms.sort_unstable();
            ms.dedup();
            if ms.len() < 2 {
                return None;
            }
            let (coarse_m, fine_m) = (ms[ms.len() - 2], ms[ms.len() - 1]);
            let pick = |m: usize| runs.iter().find(|r| r.boundary_id == fam.id && r.m == m).and_then(|r| r.hess0_max);
            let drift = match (pick(coarse_m), pick(fine_m)) {
                (Some(c), Some(f)) => Some((f - c).abs() / f.abs().max(f64::MIN_POSITIVE)),
                _ => None,
            };
            Some(FamilyDrift { boundary_id: fam.id.clone(), quadratic: fam.quadratic, coarse_m, fine_m, drift })
        })
        .collect();

    Ok(InteriorReport {
        seed: config.seed,
        runs,
        drift,
        notes: vec![
            "domain is the cube [-L, L]^n rather than a ball; |D2u(0)| uses the central-difference Hessian at the center node".into(),
            "thm31_margin is an a-posteriori check on the computed field, evaluated in every dimension".into(),
            "K_semiconvex is recorded without a threshold".into(),
            "lip_norm = max over grid edges of |du|/h plus the sup norm".into(),
        ],
    })
}
