//! Cyclic Jacobi eigensolver for dense symmetric matrices.

use crate::error::{Error, Result};

/// Eigenvalues (descending) and matching unit eigenvectors, stored as
/// columns of a row-major `n x n` array.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
    /// Frobenius norm of the off-diagonal part at exit.
    pub offdiag: f64,
    pub sweeps: usize,
}

impl SymmetricEigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        let n = self.values.len();
        (0..n).map(|i| self.vectors[i * n + k]).collect()
    }
}

fn off_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

/// Diagonalises the symmetric row-major matrix `a`. Rotations sweep the
/// upper triangle row by row until the off-diagonal norm is at most `tol`.
pub fn jacobi_eigen(a: &[f64], n: usize, tol: f64, max_sweeps: usize) -> Result<SymmetricEigen> {
    assert_eq!(a.len(), n * n);
    let mut a = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let mut off = off_norm(&a, n);
    let mut sweeps = 0;
    while off > tol {
        if sweeps == max_sweeps {
            return Err(Error::Numerical { residual: off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        off = off_norm(&a, n);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[y * n + y].total_cmp(&a[x * n + x]));
    let values = order.iter().map(|&k| a[k * n + k]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &k) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + col] = v[i * n + k];
        }
    }
    Ok(SymmetricEigen {
        values,
        vectors,
        offdiag: off,
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let e = jacobi_eigen(&[2.0, 1.0, 1.0, 2.0], 2, 1e-14, 10).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let v = e.vector(0);
        assert!((v[0].abs() - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn reconstructs_random_symmetric() {
        let n = 7;
        let mut a = vec![0.0; n * n];
        let mut x = 0.3f64;
        for i in 0..n {
            for j in i..n {
                x = (x * 3.7 + 0.11).fract();
                a[i * n + j] = x - 0.5;
                a[j * n + i] = x - 0.5;
            }
        }
        let e = jacobi_eigen(&a, n, 1e-13, 100).unwrap();
        for i in 0..n {
            for j in 0..n {
                let r: f64 = (0..n).map(|k| e.vectors[i * n + k] * e.values[k] * e.vectors[j * n + k]).sum();
                assert!((r - a[i * n + j]).abs() < 1e-12);
            }
        }
        let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
        assert!((trace - e.values.iter().sum::<f64>()).abs() < 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }
}
