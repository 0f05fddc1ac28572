//! Elementary symmetric functions of an eigenvalue vector, Gårding cones and
//! the eigenvalue shift that turns the quotient σ₂/σ₁ into σ₂.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An eigenvalue vector λ ∈ ℝⁿ with n ≥ 2 and finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::domain(format!(
                "a spectrum needs at least 2 entries, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("spectrum entry {i} is not finite")));
        }
        Ok(Self(values))
    }

    /// The all-ones vector of length `n`.
    pub fn ones(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| t * v).collect())
    }
}

impl TryFrom<Vec<f64>> for Spectrum {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<Spectrum> for Vec<f64> {
    fn from(s: Spectrum) -> Self {
        s.0
    }
}

/// All of σ₀..σ_k of `values` by the prefix recurrence
/// e_j(λ₁..λ_m) = e_j(λ₁..λ_{m−1}) + λ_m e_{j−1}(λ₁..λ_{m−1}).
///
/// No length or range checks; `k` may exceed `values.len()`, in which case the
/// tail entries are zero.
pub fn elementary_symmetric(values: &[f64], k: usize) -> Vec<f64> {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for (m, &x) in values.iter().enumerate() {
        // Only degrees up to m+1 can be nonzero after m+1 entries.
        let top = k.min(m + 1);
        for j in (1..=top).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e
}

fn check_k(n: usize, k: usize, lo: usize) -> Result<()> {
    if k < lo || k > n {
        return Err(Error::domain(format!("k = {k} outside {lo}..={n}")));
    }
    Ok(())
}

/// σ_k(λ), with σ₀ = 1.
pub fn sigma_k(lambda: &Spectrum, k: usize) -> Result<f64> {
    check_k(lambda.dim(), k, 0)?;
    Ok(elementary_symmetric(lambda.values(), k)[k])
}

/// ∂σ_k/∂λ_i = σ_{k−1}(λ | i), the symmetric function of λ with entry `i`
/// removed. `i` is zero-based.
pub fn sigma_k_partial(lambda: &Spectrum, k: usize, i: usize) -> Result<f64> {
    let n = lambda.dim();
    check_k(n, k, 1)?;
    if i >= n {
        return Err(Error::domain(format!("index {i} out of range for n = {n}")));
    }
    Ok(sigma_without(lambda.values(), i, k - 1))
}

fn sigma_without(values: &[f64], skip: usize, k: usize) -> f64 {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for (m, &x) in values.iter().enumerate() {
        if m == skip {
            continue;
        }
        for j in (1..=k).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e[k]
}

/// min over l = 1..=k of σ_l(λ). Positive exactly when λ ∈ Γ_k.
pub fn cone_margin(lambda: &Spectrum, k: usize) -> Result<f64> {
    check_k(lambda.dim(), k, 1)?;
    let e = elementary_symmetric(lambda.values(), k);
    Ok(e[1..].iter().copied().fold(f64::INFINITY, f64::min))
}

/// Membership in the open Gårding cone Γ_k, evaluated with strict `> 0`.
pub fn in_gamma_k(lambda: &Spectrum, k: usize) -> Result<bool> {
    Ok(first_cone_failure(lambda, k)?.is_none())
}

/// The smallest l ≤ k with σ_l(λ) ≤ 0, together with that value.
pub fn first_cone_failure(lambda: &Spectrum, k: usize) -> Result<Option<(usize, f64)>> {
    check_k(lambda.dim(), k, 1)?;
    let e = elementary_symmetric(lambda.values(), k);
    Ok((1..=k).find(|&l| !(e[l] > 0.0)).map(|l| (l, e[l])))
}

/// (n−1)/(2n)·σ₁² − σ₂, non-negative for every real λ.
pub fn newton_maclaurin_gap(lambda: &Spectrum) -> f64 {
    let n = lambda.dim() as f64;
    let e = elementary_symmetric(lambda.values(), 2);
    (n - 1.0) / (2.0 * n) * e[1] * e[1] - e[2]
}

fn require_positive_trace(e1: f64) -> Result<()> {
    if !(e1 > 0.0) {
        return Err(Error::domain(format!(
            "sigma_2/sigma_1 is undefined outside Gamma_1: sigma_1 = {e1:e}"
        )));
    }
    Ok(())
}

/// σ₂(λ)/σ₁(λ).
pub fn quotient_21(lambda: &Spectrum) -> Result<f64> {
    let e = elementary_symmetric(lambda.values(), 2);
    require_positive_trace(e[1])?;
    Ok(e[2] / e[1])
}

/// Gradient of σ₂/σ₁ in λ: (σ₁(λ|i)·σ₁ − σ₂)/σ₁².
pub fn quotient_21_gradient(lambda: &Spectrum) -> Result<Vec<f64>> {
    let e = elementary_symmetric(lambda.values(), 2);
    require_positive_trace(e[1])?;
    let (s1, s2) = (e[1], e[2]);
    Ok(lambda
        .values()
        .iter()
        .map(|&x| ((s1 - x) * s1 - s2) / (s1 * s1))
        .collect())
}

/// Gradient of σ₂ in λ: σ₁(λ|i).
pub fn sigma2_gradient(lambda: &Spectrum) -> Vec<f64> {
    let s1: f64 = lambda.values().iter().sum();
    lambda.values().iter().map(|&x| s1 - x).collect()
}

/// μ = λ − q/(n−1)·(1,…,1) with q = σ₂/σ₁(λ).
///
/// For λ ∈ Γ₂ the result satisfies σ₂(μ) = n/(2(n−1))·q², σ₁(μ) ≥ σ₁(λ)/2
/// and μ ∈ Γ₂. Inputs on or outside ∂Γ₂ are rejected.
pub fn lemma_shift(lambda: &Spectrum) -> Result<Spectrum> {
    if let Some((l, v)) = first_cone_failure(lambda, 2)? {
        return Err(Error::domain(format!(
            "shift requires lambda in Gamma_2, sigma_{l} = {v:e}"
        )));
    }
    let q = quotient_21(lambda)?;
    let shift = q / (lambda.dim() as f64 - 1.0);
    Spectrum::new(lambda.values().iter().map(|v| v - shift).collect())
}

/// Draws λ uniformly from `[lo, hi)ⁿ` until λ ∈ Γ₂.
pub fn sample_gamma2(rng: &mut crate::rng::SplitMix64, n: usize, lo: f64, hi: f64) -> Spectrum {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.uniform(lo, hi)).collect();
        let e = elementary_symmetric(&v, 2);
        if e[1] > 0.0 && e[2] > 0.0 {
            return Spectrum(v);
        }
    }
}
