use num_complex::Complex64 as C64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Pivots smaller than this fraction of ‖A‖_F count as singular.
pub const SINGULAR_PIVOT_RTOL: f64 = 1e-14;

/// LU factorization `P A = L U` with partial (row) pivoting.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    // L (unit lower, below the diagonal) and U packed together.
    lu: Vec<C64>,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &ComplexMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidInput(format!("solve needs a square matrix, got {}x{}", a.rows(), a.cols())));
        }
        let n = a.rows();
        let threshold = SINGULAR_PIVOT_RTOL * a.frobenius_norm();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let (p, pmag) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmag <= threshold || pmag == 0.0 {
                return Err(Error::SingularMatrix { pivot: pmag });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[k * n + j];
                    lu[i * n + j] -= f * u;
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: C64 = (0..i).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: C64 = (i + 1..n).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }

    /// Smallest pivot magnitude, a cheap singularity indicator.
    pub fn min_pivot(&self) -> f64 {
        (0..self.n).map(|i| self.lu[i * self.n + i].norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn inverse(&self) -> ComplexMatrix {
        let n = self.n;
        let cols: Vec<Vec<C64>> = (0..n)
            .map(|j| {
                let mut e = vec![C64::new(0.0, 0.0); n];
                e[j] = C64::new(1.0, 0.0);
                self.solve(&e)
            })
            .collect();
        ComplexMatrix::from_columns(&cols)
    }
}

/// Solves `A x = b` by partially pivoted LU.
pub fn solve(a: &ComplexMatrix, b: &[C64]) -> Result<Vec<C64>> {
    if b.len() != a.rows() {
        return Err(Error::InvalidInput(format!("rhs has length {}, matrix has {} rows", b.len(), a.rows())));
    }
    Ok(Lu::factor(a)?.solve(b))
}
