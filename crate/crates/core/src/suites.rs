//! Sampled property suites behind `hql verify` and the acceptance tests.
//!
//! Every property is run per dimension on its own random stream,
//! `SplitMix64::stream(seed, stream_id(property, n))`, so results do not
//! depend on which other properties or dimensions are selected, nor on
//! thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::pde::discrete_hessian;
use crate::rng::{stream_id, SplitMix64};
use crate::spectral::{self, MatrixOperator};
use crate::symfun::{self, Spectrum};
use crate::transform;

fn default_dimensions() -> Vec<usize> {
    (2..=10).collect()
}
fn default_samples() -> usize {
    10_000
}
fn default_duality_samples() -> usize {
    1_000
}
fn default_grid_samples() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    #[serde(default = "default_dimensions")]
    pub dimensions: Vec<usize>,
    /// Samples per dimension for the eigenvalue-level properties.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Dimensions for the matrix duality check; `dimensions` when absent.
    #[serde(default)]
    pub duality_dimensions: Option<Vec<usize>>,
    #[serde(default = "default_duality_samples")]
    pub duality_samples: usize,
    /// Random grid functions per dimension for the grid-level shift check,
    /// which only runs for n ≤ 4.
    #[serde(default = "default_grid_samples")]
    pub grid_samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            dimensions: default_dimensions(),
            samples: default_samples(),
            duality_dimensions: Some((3..=8).collect()),
            duality_samples: default_duality_samples(),
            grid_samples: default_grid_samples(),
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        let dual = self.duality_dims();
        if self.dimensions.is_empty() || dual.is_empty() {
            return Err(Error::domain("dimension lists must be non-empty"));
        }
        if let Some(&n) = self.dimensions.iter().chain(dual).find(|&&n| !(2..=64).contains(&n)) {
            return Err(Error::domain(format!("dimensions must lie in 2..=64, got {n}")));
        }
        if self.samples == 0 || self.duality_samples == 0 {
            return Err(Error::domain("sample counts must be positive"));
        }
        Ok(())
    }

    pub fn duality_dims(&self) -> &[usize] {
        self.duality_dimensions.as_deref().unwrap_or(&self.dimensions)
    }
}

/// Outcome of one property in one dimension.
///
/// `worst` is the largest normalized violation seen (negative when every
/// sample clears the bound with room to spare); `violations` counts samples
/// with `worst`-quantity above `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub property: String,
    pub n: usize,
    pub samples: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub violations: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub seed: u64,
    pub results: Vec<PropertyResult>,
    pub all_pass: bool,
}

impl VerifySummary {
    /// Results of one property across dimensions.
    pub fn property(&self, name: &str) -> impl Iterator<Item = &PropertyResult> {
        let name = name.to_string();
        self.results.iter().filter(move |r| r.property == name)
    }
}

pub const LEMMA_IDENTITY: &str = "lemma_identity";
pub const LEMMA_SIGMA1_BOUND: &str = "lemma_sigma1_bound";
pub const LEMMA_CONE: &str = "lemma_shift_in_gamma2";
pub const NEWTON_MACLAURIN: &str = "newton_maclaurin";
pub const ELLIPTICITY: &str = "quotient_ellipticity";
pub const DUALITY: &str = "inverse_duality";
pub const SHIFT_MATRIX: &str = "hessian_shift_sigma2";
pub const SHIFT_GRID: &str = "subtract_quadratic_commutes";

struct Tally {
    worst: f64,
    violations: usize,
    samples: usize,
}

impl Tally {
    fn new() -> Self {
        Self { worst: f64::NEG_INFINITY, violations: 0, samples: 0 }
    }

    fn add(&mut self, v: f64, tolerance: f64) {
        self.samples += 1;
        // NaN counts as a violation and poisons `worst`.
        if v.is_nan() || v > self.worst {
            self.worst = if self.worst.is_nan() { self.worst } else { v };
        }
        if !(v <= tolerance) {
            self.violations += 1;
        }
    }

    fn finish(self, property: &str, n: usize, tolerance: f64) -> PropertyResult {
        PropertyResult {
            property: property.to_string(),
            n,
            samples: self.samples,
            worst: self.worst,
            tolerance,
            violations: self.violations,
            pass: self.violations == 0,
        }
    }
}

/// λ ∈ Γ₂ ∩ [−1, 1)ⁿ scaled by 10^u, u uniform in [−1, 1).
fn scaled_gamma2(rng: &mut SplitMix64, n: usize) -> Spectrum {
    let lam = symfun::sample_gamma2(rng, n, -1.0, 1.0);
    let t = 10f64.powf(rng.uniform(-1.0, 1.0));
    lam.scaled(t).expect("positive scale keeps the spectrum valid")
}

/// Lemma checks on one shared sample set: the σ₂ identity, the σ₁ bound and
/// cone membership of the shifted spectrum.
fn lemma_suite(seed: u64, n: usize, samples: usize) -> Result<[PropertyResult; 3]> {
    let mut rng = SplitMix64::stream(seed, stream_id("lemma", n));
    let (mut ident, mut bound, mut cone) = (Tally::new(), Tally::new(), Tally::new());
    let c = n as f64 / (2.0 * (n as f64 - 1.0));
    for _ in 0..samples {
        let lam = scaled_gamma2(&mut rng, n);
        let q = symfun::quotient_21(&lam)?;
        let s1 = symfun::sigma_k(&lam, 1)?;
        let mu = symfun::lemma_shift(&lam)?;
        let s2mu = symfun::sigma_k(&mu, 2)?;
        ident.add((s2mu - c * q * q).abs() / (1.0 + s1 * s1), 1e-12);
        bound.add(0.5 - symfun::sigma_k(&mu, 1)? / s1, 1e-12);
        let inside = symfun::in_gamma_k(&mu, 2)?;
        cone.add(if inside { -symfun::cone_margin(&mu, 2)? / (1.0 + s1 * s1) } else { 1.0 }, 0.0);
    }
    Ok([
        ident.finish(LEMMA_IDENTITY, n, 1e-12),
        bound.finish(LEMMA_SIGMA1_BOUND, n, 1e-12),
        cone.finish(LEMMA_CONE, n, 0.0),
    ])
}

fn newton_maclaurin_suite(seed: u64, n: usize, samples: usize) -> Result<PropertyResult> {
    let mut rng = SplitMix64::stream(seed, stream_id(NEWTON_MACLAURIN, n));
    let mut t = Tally::new();
    for _ in 0..samples {
        let scale = 10f64.powf(rng.uniform(-1.0, 1.0));
        let lam = Spectrum::new((0..n).map(|_| scale * rng.uniform(-1.0, 1.0)).collect())?;
        let s1 = symfun::sigma_k(&lam, 1)?;
        t.add(-symfun::newton_maclaurin_gap(&lam) / (1.0 + s1 * s1), 1e-12);
    }
    Ok(t.finish(NEWTON_MACLAURIN, n, 1e-12))
}

/// ∂(σ₂/σ₁)/∂λᵢ > 0 on Γ₂; the recorded quantity is −min gradient entry,
/// normalized by the largest one.
fn ellipticity_suite(seed: u64, n: usize, samples: usize) -> Result<PropertyResult> {
    let mut rng = SplitMix64::stream(seed, stream_id(ELLIPTICITY, n));
    let mut t = Tally::new();
    for _ in 0..samples {
        let lam = scaled_gamma2(&mut rng, n);
        let g = symfun::quotient_21_gradient(&lam)?;
        let lo = g.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = g.iter().copied().fold(0.0, f64::max);
        t.add(if lo > 0.0 { -lo / hi } else { 1.0 }, 0.0);
    }
    Ok(t.finish(ELLIPTICITY, n, 0.0))
}

/// Random SPD matrices with eigenvalues in [0.1, 10): relative gap between
/// the two sides of the inverse duality.
fn duality_suite(seed: u64, n: usize, samples: usize) -> Result<PropertyResult> {
    let mut rng = SplitMix64::stream(seed, stream_id(DUALITY, n));
    let mut t = Tally::new();
    for _ in 0..samples {
        let ev: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.uniform(-1.0, 1.0))).collect();
        let s = spectral::random_with_spectrum(&mut rng, &ev)?;
        let (a, b) = spectral::duality_pair(&s)?;
        t.add((a - b).abs() / a.abs().max(b.abs()), 1e-10);
    }
    Ok(t.finish(DUALITY, n, 1e-10))
}

/// For rotated S with σ₂/σ₁(S) = 1: σ₂(S − I/(n−1)) = n/(2(n−1)).
fn shift_matrix_suite(seed: u64, n: usize, samples: usize) -> Result<PropertyResult> {
    let mut rng = SplitMix64::stream(seed, stream_id(SHIFT_MATRIX, n));
    let target = n as f64 / (2.0 * (n as f64 - 1.0));
    let mut t = Tally::new();
    for _ in 0..samples {
        let lam = scaled_gamma2(&mut rng, n);
        let q = symfun::quotient_21(&lam)?;
        let unit: Vec<f64> = lam.values().iter().map(|v| v / q).collect();
        let s = spectral::random_with_spectrum(&mut rng, &unit)?;
        let shifted = transform::hessian_shift(&s, n)?;
        let s2 = spectral::matrix_operator(&shifted, MatrixOperator::Sigma(2))?;
        let s1 = unit.iter().sum::<f64>();
        t.add((s2 - target).abs() / (1.0 + s1 * s1), 1e-10);
    }
    Ok(t.finish(SHIFT_MATRIX, n, 1e-10))
}

/// Random smooth grid functions on [−1, 1]ⁿ with 5 nodes per axis: the
/// discrete Hessian of u − |x|²/(2(n−1)) equals the shifted discrete Hessian
/// of u at every interior node.
fn shift_grid_suite(seed: u64, n: usize, samples: usize) -> Result<PropertyResult> {
    let mut rng = SplitMix64::stream(seed, stream_id(SHIFT_GRID, n));
    let grid = Grid::cube(n, 5, 1.0)?;
    let mut t = Tally::new();
    for _ in 0..samples {
        let coef: Vec<f64> = (0..3 * n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let u = GridFunction::from_fn(grid.clone(), |x| {
            x.iter()
                .enumerate()
                .map(|(i, &xi)| coef[3 * i] * xi * xi + coef[3 * i + 1] * (2.0 * xi).sin() + coef[3 * i + 2] * xi * xi * xi)
                .sum::<f64>()
                + x[0] * x[n - 1]
        })?;
        let v = transform::subtract_shift_quadratic(&u)?;
        let mut worst = 0.0f64;
        for p in grid.interior_nodes() {
            let idx = grid.multi_index(p);
            let lhs = discrete_hessian(&v, &idx)?;
            let rhs = transform::hessian_shift(&discrete_hessian(&u, &idx)?, n)?;
            worst = worst.max(lhs.sub(&rhs).max_abs());
        }
        t.add(worst / (1.0 + u.sup_norm()), 1e-10);
    }
    Ok(t.finish(SHIFT_GRID, n, 1e-10))
}

/// Runs every suite. Results are ordered by property, then by dimension.
pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifySummary> {
    cfg.validate()?;
    let seed = cfg.seed;
    let dims = &cfg.dimensions;

    let lemma: Vec<[PropertyResult; 3]> =
        dims.par_iter().map(|&n| lemma_suite(seed, n, cfg.samples)).collect::<Result<_>>()?;
    let nm: Vec<PropertyResult> =
        dims.par_iter().map(|&n| newton_maclaurin_suite(seed, n, cfg.samples)).collect::<Result<_>>()?;
    let ell: Vec<PropertyResult> =
        dims.par_iter().map(|&n| ellipticity_suite(seed, n, cfg.samples)).collect::<Result<_>>()?;
    let dual: Vec<PropertyResult> = cfg
        .duality_dims()
        .par_iter()
        .map(|&n| duality_suite(seed, n, cfg.duality_samples))
        .collect::<Result<_>>()?;
    let shift: Vec<PropertyResult> =
        dims.par_iter().map(|&n| shift_matrix_suite(seed, n, cfg.duality_samples)).collect::<Result<_>>()?;
    let grid: Vec<PropertyResult> = dims
        .par_iter()
        .filter(|&&n| n <= 4)
        .map(|&n| shift_grid_suite(seed, n, cfg.grid_samples))
        .collect::<Result<_>>()?;

    let mut results = Vec::new();
    for k in 0..3 {
        results.extend(lemma.iter().map(|r| r[k].clone()));
    }
    results.extend(nm);
    results.extend(ell);
    results.extend(dual);
    results.extend(shift);
    results.extend(grid);
    let all_pass = results.iter().all(|r| r.pass);
    Ok(VerifySummary { seed, results, all_pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(dims: Vec<usize>) -> VerifyConfig {
        VerifyConfig {
            seed: 7,
            dimensions: dims,
            samples: 500,
            duality_dimensions: None,
            duality_samples: 100,
            grid_samples: 3,
        }
    }

    #[test]
    fn small_run_passes_and_is_deterministic() {
        let cfg = small(vec![2, 3, 5]);
        let a = run_verify(&cfg).unwrap();
        assert!(a.all_pass, "{a:#?}");
        assert_eq!(a, run_verify(&cfg).unwrap());
        assert_eq!(a.property(LEMMA_IDENTITY).count(), 3);
        assert_eq!(a.property(SHIFT_GRID).count(), 2);
        assert!(a.property(LEMMA_IDENTITY).all(|r| r.samples == 500 && r.worst <= 1e-12));
    }

    #[test]
    fn results_do_not_depend_on_other_dimensions() {
        let a = run_verify(&small(vec![3])).unwrap();
        let b = run_verify(&small(vec![2, 3, 4])).unwrap();
        let pick = |s: &VerifySummary| s.property(DUALITY).find(|r| r.n == 3).cloned();
        assert_eq!(pick(&a), pick(&b));
    }

    #[test]
    fn dimension_two_duality_reduces_to_reciprocal_trace() {
        let s = run_verify(&small(vec![2])).unwrap();
        let d: Vec<_> = s.property(DUALITY).collect();
        assert_eq!(d.len(), 1);
        assert!(d[0].pass);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(small(vec![]).validate().is_err());
        assert!(small(vec![1]).validate().is_err());
        let mut c = small(vec![2]);
        c.samples = 0;
        assert!(c.validate().is_err());
        let c: VerifyConfig = serde_json::from_str(r#"{"seed": 3}"#).unwrap();
        assert_eq!(c.dimensions, (2..=10).collect::<Vec<_>>());
        assert_eq!(c.duality_dims(), &c.dimensions[..]);
    }

    #[test]
    fn tally_counts_nan_as_violation() {
        let mut t = Tally::new();
        t.add(-1.0, 0.0);
        t.add(f64::NAN, 0.0);
        t.add(-2.0, 0.0);
        let r = t.finish("x", 2, 0.0);
        assert_eq!(r.violations, 1);
        assert!(r.worst.is_nan());
        assert!(!r.pass);
    }
}
