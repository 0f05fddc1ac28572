//! Compressed-row sparse matrices and a banded LU factorization with partial
//! pivoting for the structured-grid Jacobians.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row (column, value) lists. Duplicate columns within a
    /// row are summed in list order and columns are sorted, so the result is
    /// independent of how rows were produced.
    pub fn from_rows(ncols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let nrows = rows.len();
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut iter = row.into_iter().peekable();
            while let Some((c, mut v)) = iter.next() {
                while let Some(&(c2, v2)) = iter.peek() {
                    if c2 != c {
                        break;
                    }
                    v += v2;
                    iter.next();
                }
                debug_assert!(c < ncols);
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Self { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nrows).map(|i| self.row(i).map(|(c, v)| v * x[c]).sum()).collect()
    }

    /// (lower, upper) bandwidths.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for i in 0..self.nrows {
            for (c, _) in self.row(i) {
                if c < i {
                    kl = kl.max(i - c);
                } else {
                    ku = ku.max(c - i);
                }
            }
        }
        (kl, ku)
    }
}

/// LU factors of a square band matrix in LAPACK `gbtrf` layout: entry (r, c)
/// lives at `ab[c·ldab + kl + ku + r − c]`, with `kl` extra rows for the fill
/// created by row interchanges.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::LinearSolveFailure(format!(
                "matrix is {}x{}, not square",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        let (kl, ku) = a.bandwidths();
        let ldab = 2 * kl + ku + 1;
        let mut lu = Self { n, kl, ku, ldab, ab: vec![0.0; ldab * n], pivots: vec![0; n] };
        for i in 0..n {
            for (c, v) in a.row(i) {
                *lu.at_mut(i, c) = v;
            }
        }

        // Last column touched by the pivots chosen so far.
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut jp = 0;
            let mut best = lu.at(j, j).abs();
            for r in 1..=km {
                let v = lu.at(j + r, j).abs();
                if v > best {
                    best = v;
                    jp = r;
                }
            }
            lu.pivots[j] = j + jp;
            if !(best > 0.0 && best.is_finite()) {
                return Err(Error::LinearSolveFailure(format!(
                    "zero or non-finite pivot in column {j} of {n}"
                )));
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let a1 = lu.idx(j, c);
                    let a2 = lu.idx(j + jp, c);
                    lu.ab.swap(a1, a2);
                }
            }
            if km > 0 {
                let inv = 1.0 / lu.at(j, j);
                for r in 1..=km {
                    *lu.at_mut(j + r, j) *= inv;
                }
                // Column j's multipliers and each updated column segment are
                // contiguous in band storage.
                let l0 = lu.idx(j + 1, j);
                let l = lu.ab[l0..l0 + km].to_vec();
                for c in j + 1..=ju {
                    let f = lu.at(j, c);
                    if f != 0.0 {
                        let c0 = lu.idx(j + 1, c);
                        for (a, m) in lu.ab[c0..c0 + km].iter_mut().zip(&l) {
                            *a -= m * f;
                        }
                    }
                }
            }
        }
        Ok(lu)
    }

    #[inline]
    fn idx(&self, r: usize, c: usize) -> usize {
        c * self.ldab + self.kl + self.ku + r - c
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.ab[self.idx(r, c)]
    }

    #[inline]
    fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        let i = self.idx(r, c);
        &mut self.ab[i]
    }

    /// Overwrites `b` with the solution of A x = b.
    pub fn solve_in_place(&self, b: &mut [f64]) -> Result<()> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::LinearSolveFailure(format!(
                "right-hand side has length {}, expected {n}",
                b.len()
            )));
        }
        for j in 0..n {
            let p = self.pivots[j];
            if p != j {
                b.swap(j, p);
            }
            let km = self.kl.min(n - 1 - j);
            let bj = b[j];
            if bj != 0.0 {
                for r in 1..=km {
                    b[j + r] -= self.at(j + r, j) * bj;
                }
            }
        }
        let kv = self.kl + self.ku;
        for j in (0..n).rev() {
            b[j] /= self.at(j, j);
            let bj = b[j];
            if bj != 0.0 {
                let lo = j.saturating_sub(kv);
                for (r, br) in b[lo..j].iter_mut().enumerate() {
                    *br -= self.at(lo + r, j) * bj;
                }
            }
        }
        if let Some(i) = b.iter().position(|v| !v.is_finite()) {
            return Err(Error::LinearSolveFailure(format!("solution entry {i} is not finite")));
        }
        Ok(())
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }
}
