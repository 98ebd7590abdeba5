//! Dense linear algebra: row-major matrices and LU with partial pivoting.
//!
//! Problem sizes here are desk scale (a few hundred unknowns in 1D, a few
//! thousand in 2D), so one dense factorization per Newton step is cheap and
//! avoids the fill-in pathologies a banded LU develops when the border row
//! of an augmented system must pivot.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Dense square matrix, row-major.
#[derive(Clone, Debug)]
pub struct DenseMatrix {
    n: usize,
    a: Vec<f64>,
}

impl DenseMatrix {
    /// Zero matrix of size n x n.
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, a: vec![0.0; n * n] }
    }

    /// Matrix dimension.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Entry (i, j).
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    /// Mutable entry (i, j).
    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.a[i * self.n + j]
    }

    /// Raw row-major storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.a
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (row, yi) in self.a.chunks_exact(self.n).zip(y.iter_mut()) {
            let mut s = 0.0;
            for (aij, xj) in row.iter().zip(x.iter()) {
                s += aij * xj;
            }
            *yi = s;
        }
    }

    /// LU factorization with partial (row) pivoting, consuming the matrix.
    ///
    /// # Errors
    ///
    /// [`Error::SingularMatrix`] when a pivot column is exactly zero.
    pub fn factorize(mut self) -> Result<LuFactors> {
        let n = self.n;
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut pmax = self.at(k, k).abs();
            for i in (k + 1)..n {
                let v = self.at(i, k).abs();
                if v > pmax {
                    pmax = v;
                    p = i;
                }
            }
            if pmax == 0.0 {
                return Err(Error::SingularMatrix { pivot_index: k });
            }
            if p != k {
                piv.swap(p, k);
                for j in 0..n {
                    let tmp = self.at(k, j);
                    *self.at_mut(k, j) = self.at(p, j);
                    *self.at_mut(p, j) = tmp;
                }
            }
            let pivot = self.at(k, k);
            for i in (k + 1)..n {
                let m = self.at(i, k) / pivot;
                *self.at_mut(i, k) = m;
                if m != 0.0 {
                    for j in (k + 1)..n {
                        let upd = m * self.at(k, j);
                        *self.at_mut(i, j) -= upd;
                    }
                }
            }
        }
        Ok(LuFactors { n, lu: self.a, piv })
    }
}

/// Packed LU factors with the pivot permutation applied during solves.
#[derive(Clone, Debug)]
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

impl LuFactors {
    /// System dimension.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solve A x = b, returning x.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        // Forward substitution with unit lower factor.
        for i in 1..n {
            let row = &self.lu[i * n..i * n + i];
            let mut s = x[i];
            for (lij, xj) in row.iter().zip(x.iter()) {
                s -= lij * xj;
            }
            x[i] = s;
        }
        // Back substitution with the upper factor.
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= row[j] * x[j];
            }
            x[i] = s / row[i];
        }
        x
    }

    /// Solve with one round of iterative refinement against the original
    /// matrix, for systems pushed close to singularity.
    pub fn solve_refined(&self, original: &DenseMatrix, b: &[f64]) -> Vec<f64> {
        let mut x = self.solve(b);
        let mut r = vec![0.0; self.n];
        original.matvec(&x, &mut r);
        for (ri, bi) in r.iter_mut().zip(b.iter()) {
            *ri = bi - *ri;
        }
        let dx = self.solve(&r);
        for (xi, di) in x.iter_mut().zip(dx.iter()) {
            *xi += di;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_solves_exactly() {
        let mut m = DenseMatrix::zeros(4);
        for i in 0..4 {
            *m.at_mut(i, i) = 1.0;
        }
        let lu = m.factorize().unwrap();
        let b = [1.0, -2.0, 3.0, 0.5];
        let x = lu.solve(&b);
        assert_eq!(x, b);
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // [[0, 1], [2, 1]] x = [3, 4] has solution x = [0.5, 3].
        let mut m = DenseMatrix::zeros(2);
        *m.at_mut(0, 1) = 1.0;
        *m.at_mut(1, 0) = 2.0;
        *m.at_mut(1, 1) = 1.0;
        let lu = m.factorize().unwrap();
        let x = lu.solve(&[3.0, 4.0]);
        assert!((x[0] - 0.5).abs() < 1e-14);
        assert!((x[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut m = DenseMatrix::zeros(2);
        *m.at_mut(0, 0) = 1.0;
        *m.at_mut(0, 1) = 2.0;
        *m.at_mut(1, 0) = 2.0;
        *m.at_mut(1, 1) = 4.0;
        match m.factorize() {
            Err(Error::SingularMatrix { pivot_index }) => assert_eq!(pivot_index, 1),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn random_system_residual_small() {
        // Deterministic pseudo-random fill; checks A x - b ~ 0.
        let n = 30;
        let mut m = DenseMatrix::zeros(n);
        let mut state = 1234567u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        for i in 0..n {
            for j in 0..n {
                *m.at_mut(i, j) = next();
            }
            *m.at_mut(i, i) += 3.0;
        }
        let b: Vec<f64> = (0..n).map(|_| next()).collect();
        let lu = m.clone().factorize().unwrap();
        let x = lu.solve(&b);
        let mut r = vec![0.0; n];
        m.matvec(&x, &mut r);
        let err = r
            .iter()
            .zip(b.iter())
            .map(|(ri, bi)| (ri - bi).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-12, "residual {err}");
    }
}
