//! Dense complex LU with partial pivoting.

use num_complex::Complex64;

use crate::error::{DsmError, Result};

/// Pivot-ratio estimates above this are treated as singular.
const MAX_CONDITION: f64 = 1e13;

#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
    condition: f64,
}

impl LuFactors {
    /// Factors the row-major `n × n` matrix `a` in place.
    pub fn factor(mut a: Vec<Complex64>, n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut max_pivot = 0.0f64;
        let mut min_pivot = f64::INFINITY;
        for col in 0..n {
            let (p, best) = (col..n)
                .map(|r| (r, a[r * n + col].norm()))
                .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if !(best > 0.0) || !best.is_finite() {
                return Err(DsmError::Solver {
                    condition: f64::INFINITY,
                });
            }
            max_pivot = max_pivot.max(best);
            min_pivot = min_pivot.min(best);
            if p != col {
                for j in 0..n {
                    a.swap(col * n + j, p * n + j);
                }
                perm.swap(col, p);
            }
            let inv = 1.0 / a[col * n + col];
            for r in (col + 1)..n {
                let f = a[r * n + col] * inv;
                a[r * n + col] = f;
                if f == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let (top, bottom) = a.split_at_mut(r * n);
                let pivot_row = &top[col * n..col * n + n];
                let row = &mut bottom[..n];
                for j in (col + 1)..n {
                    row[j] -= f * pivot_row[j];
                }
            }
        }
        let condition = if n == 0 { 1.0 } else { max_pivot / min_pivot };
        if condition > MAX_CONDITION {
            return Err(DsmError::Solver { condition });
        }
        Ok(Self {
            n,
            lu: a,
            perm,
            condition,
        })
    }

    /// Ratio of largest to smallest pivot magnitude.
    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solves_small_system() {
        // needs pivoting: zero in the leading position
        let a = vec![
            c(0.0, 0.0),
            c(2.0, 1.0),
            c(1.0, 0.0),
            c(1.0, -1.0),
            c(0.0, 3.0),
            c(2.0, 0.0),
            c(4.0, 0.0),
            c(1.0, 1.0),
            c(0.5, 0.0),
        ];
        let x_true = vec![c(1.0, 2.0), c(-0.5, 0.25), c(3.0, -1.0)];
        let b: Vec<Complex64> = (0..3)
            .map(|i| (0..3).map(|j| a[i * 3 + j] * x_true[j]).sum())
            .collect();
        let lu = LuFactors::factor(a, 3).unwrap();
        let x = lu.solve(&b);
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).norm() < 1e-13);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)];
        match LuFactors::factor(a, 2) {
            Err(DsmError::Solver { condition }) => assert!(condition > MAX_CONDITION),
            other => panic!("expected solver error, got {other:?}"),
        }
    }
}
