//! Symmetric matrices and the symmetric-function operators evaluated on
//! their spectra.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::symfun::{self, Spectrum};

/// Dense symmetric n×n matrix, row-major. Symmetrized on construction, so
/// `get(i, j) == get(j, i)` holds bitwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds from row-major entries; the result is (A + Aᵀ)/2.
    pub fn from_row_major(n: usize, data: &[f64]) -> Result<Self> {
        if n == 0 || data.len() != n * n {
            return Err(Error::domain(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        if let Some(p) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!(
                "matrix entry ({}, {}) is not finite",
                p / n,
                p % n
            )));
        }
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            out[i * n + i] = data[i * n + i];
            for j in i + 1..n {
                let v = 0.5 * (data[i * n + j] + data[j * n + i]);
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        Ok(Self { n, data: out })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::domain("matrix rows must all have length n"));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_row_major(n, &flat)
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n);
        for (i, &v) in d.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    /// Q·diag(d)·Qᵀ for a row-major n×n matrix `q`.
    pub fn from_spectral(q: &[f64], d: &[f64]) -> Result<Self> {
        let n = d.len();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = (0..n).map(|k| q[i * n + k] * d[k] * q[j * n + k]).sum();
            }
        }
        Self::from_row_major(n, &out)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets both (i, j) and (j, i).
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n);
        SymMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add_identity(&self, t: f64) -> SymMatrix {
        let mut out = self.clone();
        for i in 0..self.n {
            out.data[i * self.n + i] += t;
        }
        out
    }

    pub fn scaled(&self, t: f64) -> SymMatrix {
        SymMatrix { n: self.n, data: self.data.iter().map(|v| t * v).collect() }
    }

    /// Q S Qᵀ for row-major orthogonal `q`.
    pub fn conjugated(&self, q: &[f64]) -> Result<SymMatrix> {
        let n = self.n;
        let mut tmp = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                tmp[i * n + j] = (0..n).map(|k| q[i * n + k] * self.data[k * n + j]).sum();
            }
        }
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = (0..n).map(|k| tmp[i * n + k] * q[j * n + k]).sum();
            }
        }
        Self::from_row_major(n, &out)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        m.to_rows()
    }
}

/// Ascending eigenvalues and the matching orthonormal eigenvectors, stored as
/// the columns of a row-major matrix.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        Spectrum::new(self.eigenvalues.clone())
    }

    /// Entry i of eigenvector k.
    pub fn vector_entry(&self, i: usize, k: usize) -> f64 {
        self.eigenvectors[i * self.dim() + k]
    }

    pub fn reconstruct(&self) -> Result<SymMatrix> {
        SymMatrix::from_spectral(&self.eigenvectors, &self.eigenvalues)
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }
}

const JACOBI_MAX_SWEEPS: usize = 30;
const JACOBI_REL_TOL: f64 = 1e-14;

/// Cyclic Jacobi eigen-decomposition.
///
/// Sweeps over all (p, q) pairs until the off-diagonal Frobenius mass falls to
/// `1e-14·‖S‖_F` or 30 sweeps have run.
pub fn eigen(s: &SymMatrix) -> Result<EigenDecomposition> {
    let n = s.n;
    if let Some(p) = s.data.iter().position(|v| !v.is_finite()) {
        return Err(Error::domain(format!("matrix entry ({}, {}) is not finite", p / n, p % n)));
    }
    let mut a = s.data.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let target = JACOBI_REL_TOL * s.frobenius();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                // A ← Jᵀ A J with J the (p, q) rotation.
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - sn * akq;
                    a[k * n + q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - sn * aqk;
                    a[q * n + k] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - sn * vkq;
                    v[k * n + q] = sn * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut eigenvectors = vec![0.0; n * n];
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            eigenvectors[r * n + col] = v[r * n + src];
        }
    }
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

/// Eigenvalues only.
pub fn spectrum_of(s: &SymMatrix) -> Result<Spectrum> {
    eigen(s)?.spectrum()
}

/// Operators that act on a symmetric matrix through its eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "op", content = "k")]
pub enum MatrixOperator {
    /// σ_k.
    Sigma(usize),
    /// σ₂/σ₁, defined on Γ₁.
    Quotient21,
    /// σ_{n−1}/σ_{n−2}, defined on Γ_{n−2}.
    QuotientDual,
}

/// Evaluates `op` at λ(S).
pub fn matrix_operator(s: &SymMatrix, op: MatrixOperator) -> Result<f64> {
    let lam = spectrum_of(s)?;
    spectral_operator(&lam, op)
}

pub(crate) fn spectral_operator(lam: &Spectrum, op: MatrixOperator) -> Result<f64> {
    let n = lam.dim();
    match op {
        MatrixOperator::Sigma(k) => symfun::sigma_k(lam, k),
        MatrixOperator::Quotient21 => {
            let e = symfun::elementary_symmetric(lam.values(), 2);
            if !(e[1] > 0.0) {
                return Err(Error::domain(format!(
                    "sigma_2/sigma_1 needs lambda in Gamma_1; sigma_1 = {:e}",
                    e[1]
                )));
            }
            Ok(e[2] / e[1])
        }
        MatrixOperator::QuotientDual => {
            let e = symfun::elementary_symmetric(lam.values(), n);
            if let Some(l) = (1..=n - 2).find(|&l| !(e[l] > 0.0)) {
                return Err(Error::domain(format!(
                    "sigma_{}/sigma_{} needs lambda in Gamma_{}; sigma_{l} = {:e}",
                    n - 1,
                    n - 2,
                    n - 2,
                    e[l]
                )));
            }
            Ok(e[n - 1] / e[n - 2])
        }
    }
}

/// λ(S) ∈ Γ_k.
pub fn matrix_admissible(s: &SymMatrix, k: usize) -> Result<bool> {
    symfun::in_gamma_k(&spectrum_of(s)?, k)
}

/// max(0, −λ_min(S)): the smallest K ≥ 0 with S ≥ −K·I.
pub fn semiconvexity_constant(s: &SymMatrix) -> Result<f64> {
    Ok((-eigen(s)?.lambda_min()).max(0.0))
}

/// The two sides of the inverse-Hessian duality for positive definite `S`:
/// σ₂/σ₁ at the reciprocals of λ(S), and σ_{n−2}/σ_{n−1} at λ(S).
pub fn duality_pair(s: &SymMatrix) -> Result<(f64, f64)> {
    let lam = spectrum_of(s)?;
    duality_pair_spectrum(&lam)
}

pub(crate) fn duality_pair_spectrum(lam: &Spectrum) -> Result<(f64, f64)> {
    let n = lam.dim();
    if let Some(&m) = lam.values().iter().find(|&&x| !(x > 0.0)) {
        return Err(Error::domain(format!("matrix is not positive definite: eigenvalue {m:e}")));
    }
    let inv = Spectrum::new(lam.values().iter().map(|x| 1.0 / x).collect())?;
    let left = symfun::quotient_21(&inv)?;
    let e = symfun::elementary_symmetric(lam.values(), n);
    Ok((left, e[n - 2] / e[n - 1]))
}

/// Random orthogonal matrix (row-major): Gram-Schmidt on a Gaussian matrix,
/// twice for stability, with the sign convention of a positive-diagonal R.
pub fn random_orthogonal(rng: &mut SplitMix64, n: usize) -> Vec<f64> {
    let mut cols: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.normal()).collect()).collect();
    for j in 0..n {
        let mut r_jj_sign = 1.0;
        for pass in 0..2 {
            for i in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let (ci, cj) = (&done[i], &mut rest[0]);
                let d: f64 = ci.iter().zip(cj.iter()).map(|(a, b)| a * b).sum();
                for (c, a) in cj.iter_mut().zip(ci) {
                    *c -= d * a;
                }
            }
            let norm = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
            if pass == 0 {
                r_jj_sign = if norm > 0.0 { 1.0 } else { -1.0 };
            }
            for x in cols[j].iter_mut() {
                *x /= norm;
            }
        }
        for x in cols[j].iter_mut() {
            *x *= r_jj_sign;
        }
    }
    let mut q = vec![0.0; n * n];
    for (j, col) in cols.iter().enumerate() {
        for i in 0..n {
            q[i * n + j] = col[i];
        }
    }
    q
}

/// Random symmetric matrix with the given eigenvalues.
pub fn random_with_spectrum(rng: &mut SplitMix64, eigenvalues: &[f64]) -> Result<SymMatrix> {
    let q = random_orthogonal(rng, eigenvalues.len());
    SymMatrix::from_spectral(&q, eigenvalues)
}
