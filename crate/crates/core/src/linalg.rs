//! Dense Cholesky factorization for the symmetric correlation matrix.

use crate::error::{Error, Result};

/// Lower-triangular factor `L` with `A = L Lᵀ`, stored row-major and packed.
#[derive(Debug, Clone)]
pub(crate) struct Cholesky {
    n: usize,
    // row i occupies packed[i(i+1)/2 .. i(i+1)/2 + i + 1]
    packed: Vec<f64>,
}

impl Cholesky {
    /// Factors a symmetric matrix given as a full row-major `n×n` slice.
    ///
    /// A pivot below `n·ε·max|diag|` is treated as loss of positive
    /// definiteness.
    pub(crate) fn factor(a: &[f64], n: usize) -> Result<Self> {
        debug_assert_eq!(a.len(), n * n);
        let diag_max = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max);
        let threshold = (n as f64) * f64::EPSILON * diag_max;
        let mut packed = vec![0.0; n * (n + 1) / 2];
        for i in 0..n {
            let ri = i * (i + 1) / 2;
            for k in 0..=i {
                let rk = k * (k + 1) / 2;
                let dot: f64 = packed[ri..ri + k]
                    .iter()
                    .zip(&packed[rk..rk + k])
                    .map(|(x, y)| x * y)
                    .sum();
                let s = a[i * n + k] - dot;
                if k == i {
                    if s.is_nan() || s <= threshold {
                        return Err(Error::CorrelationNotPd { row: i, pivot: s });
                    }
                    packed[ri + i] = s.sqrt();
                } else {
                    packed[ri + k] = s / packed[rk + k];
                }
            }
        }
        Ok(Self { n, packed })
    }

    pub(crate) fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b`.
    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        // L y = b
        for i in 0..n {
            let ri = i * (i + 1) / 2;
            let dot: f64 = self.packed[ri..ri + i]
                .iter()
                .zip(&y[..i])
                .map(|(l, v)| l * v)
                .sum();
            y[i] = (y[i] - dot) / self.packed[ri + i];
        }
        // Lᵀ x = y, column sweep so the packed rows are read contiguously
        for i in (0..n).rev() {
            let ri = i * (i + 1) / 2;
            y[i] /= self.packed[ri + i];
            let xi = y[i];
            for (k, l) in self.packed[ri..ri + i].iter().enumerate() {
                y[k] -= l * xi;
            }
        }
        y
    }
}
