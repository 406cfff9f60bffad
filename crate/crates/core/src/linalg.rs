//! Dense Cholesky factorization for grid covariance matrices.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub const JITTER: f64 = 1e-10;

/// Lower-triangular factor `L` of a symmetric matrix with `A = L Lᵀ`,
/// stored row-major.
#[derive(Clone, Debug)]
pub struct Cholesky {
    n: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    /// Factors `a` (row-major, `n × n`). Retries once with `JITTER` on the
    /// diagonal, scaled by the mean diagonal entry.
    pub fn factor(a: &[f64], n: usize) -> Result<Self> {
        match Self::factor_exact(a, n) {
            Ok(c) => Ok(c),
            Err(_) => {
                let scale = (0..n).map(|i| a[i * n + i]).sum::<f64>() / n.max(1) as f64;
                let mut b = a.to_vec();
                for i in 0..n {
                    b[i * n + i] += JITTER * scale.max(1.0);
                }
                Self::factor_exact(&b, n)
            }
        }
    }

    fn factor_exact(a: &[f64], n: usize) -> Result<Self> {
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = a[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > 0.0) {
                // A zero pivot with an all-zero column is a degenerate but PSD direction.
                if d.abs() <= 1e-300 && (j + 1..n).all(|i| a[i * n + j] == 0.0) {
                    continue;
                }
                return Err(Error::Factorization(j));
            }
            let djj = libm::sqrt(d);
            l[j * n + j] = djj;
            for i in (j + 1)..n {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / djj;
            }
        }
        Ok(Self { n, lower: l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `L z` for a vector `z`.
    pub fn apply(&self, z: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for i in 0..self.n {
            let row = &self.lower[i * self.n..i * self.n + i + 1];
            out.push(row.iter().zip(z).map(|(a, b)| a * b).sum());
        }
    }
}
