//! Weighted inner products, exact spectra of reversible matrices and cut
//! quantities by subset enumeration.

mod cuts;
mod jacobi;

pub use cuts::{cheeger, cheeger_with, mu, mu_with, Cheeger, Cut};
pub use jacobi::{jacobi_eigen, SymmetricEigen};

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::matrices::{gram, StochasticMatrix};

/// Inner product `<x, y>_pi = sum pi_i x_i y_i` and the projections that go
/// with it.
#[derive(Debug, Clone, PartialEq)]
pub struct PiGeometry {
    pi: Vec<f64>,
}

impl PiGeometry {
    pub fn new(pi: &[f64]) -> Self {
        Self { pi: pi.to_vec() }
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        self.pi.iter().zip(x).zip(y).map(|((p, a), b)| p * a * b).sum()
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        self.inner(x, x).sqrt()
    }

    /// `<x, 1>_pi`, the coordinate of the projection on constants.
    pub fn mean(&self, x: &[f64]) -> f64 {
        self.pi.iter().zip(x).map(|(p, a)| p * a).sum()
    }

    /// Component of `x` orthogonal to the constants.
    pub fn project_out_constants(&self, x: &[f64]) -> Vec<f64> {
        let m = self.mean(x);
        x.iter().map(|v| v - m).collect()
    }

    /// `1/2 sum_ij (x_i - x_j)^2 pi_i pi_j`, equal to the squared norm on
    /// the orthogonal complement of the constants.
    pub fn variance_sum(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, (&pi, &xi)) in self.pi.iter().zip(x).enumerate() {
            for (&pj, &xj) in self.pi[i + 1..].iter().zip(&x[i + 1..]) {
                s += (xi - xj) * (xi - xj) * pi * pj;
            }
        }
        s
    }
}

/// `max x - min x`.
pub fn seminorm(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::Parameter("seminorm of an empty vector".into()));
    }
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    Ok(hi - lo)
}

/// `<x, x - P x>_pi`.
pub fn quadratic_form(p: &StochasticMatrix, pi: &[f64], x: &[f64]) -> f64 {
    let px = p.apply(x);
    let d: Vec<f64> = x.iter().zip(&px).map(|(a, b)| a - b).collect();
    PiGeometry::new(pi).inner(x, &d)
}

/// `1/2 sum_ij pi_i P_ij (x_i - x_j)^2`, which equals the quadratic form
/// for reversible `P`.
pub fn green_sum(p: &StochasticMatrix, pi: &[f64], x: &[f64]) -> f64 {
    let n = p.n();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = x[i] - x[j];
            s += pi[i] * p.get(i, j) * d * d;
        }
    }
    0.5 * s
}

/// `-1 + 2 min_i P_ii`, a lower bound on the smallest eigenvalue of a
/// reversible `P`.
pub fn gershgorin_floor(p: &StochasticMatrix) -> f64 {
    -1.0 + 2.0 * p.diagonal_min()
}

/// Sorted real spectrum of a reversible matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub lambda2: f64,
    pub lambda_n: f64,
    pub method: String,
    /// Off-diagonal Frobenius norm left by the eigensolver.
    #[serde(rename = "offdiag")]
    pub achieved_offdiag: f64,
}

/// Spectrum with right eigenvectors, each of unit `pi`-norm.
#[derive(Debug, Clone)]
pub struct ReversibleEigen {
    pub spectrum: Spectrum,
    vectors: Vec<Vec<f64>>,
}

impl ReversibleEigen {
    /// Right eigenvector for `eigenvalues[k]`.
    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k]
    }
}

/// Eigen-decomposition of a reversible `P` through the symmetric matrix
/// `D^{1/2} P D^{-1/2}`, `D = diag(pi)`.
pub fn reversible_eigen(p: &StochasticMatrix, pi: &[f64], tol: &Tolerances) -> Result<ReversibleEigen> {
    let n = p.n();
    let db = p.detailed_balance_residual(pi);
    if db > tol.reversible {
        return Err(Error::Contract(format!(
            "matrix is not reversible (detailed-balance residual {db:e}); use the spectrum of its gram matrix"
        )));
    }
    let sq: Vec<f64> = pi.iter().map(|v| v.sqrt()).collect();
    let mut s = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            s[i * n + j] = sq[i] * p.get(i, j) / sq[j];
        }
    }
    // exact symmetry; detailed balance only holds to rounding
    for i in 0..n {
        for j in i + 1..n {
            let m = 0.5 * (s[i * n + j] + s[j * n + i]);
            s[i * n + j] = m;
            s[j * n + i] = m;
        }
    }
    let e = jacobi_eigen(&s, n, tol.jacobi_offdiag, tol.jacobi_max_sweeps)?;
    let vectors = (0..n)
        .map(|k| e.vector(k).iter().zip(&sq).map(|(u, r)| u / r).collect())
        .collect();
    let spectrum = Spectrum {
        lambda2: if n > 1 { e.values[1] } else { e.values[0] },
        lambda_n: e.values[n - 1],
        eigenvalues: e.values,
        method: "jacobi".into(),
        achieved_offdiag: e.offdiag,
    };
    Ok(ReversibleEigen { spectrum, vectors })
}

pub fn reversible_spectrum(p: &StochasticMatrix, pi: &[f64]) -> Result<Spectrum> {
    reversible_spectrum_with(p, pi, &Tolerances::default())
}

pub fn reversible_spectrum_with(p: &StochasticMatrix, pi: &[f64], tol: &Tolerances) -> Result<Spectrum> {
    Ok(reversible_eigen(p, pi, tol)?.spectrum)
}

/// `sqrt(lambda_2(P^dagger P))`, the second singular value of `P` in the
/// `pi`-geometry.
pub fn second_singular(p: &StochasticMatrix) -> Result<f64> {
    second_singular_with(p, &Tolerances::default())
}

pub fn second_singular_with(p: &StochasticMatrix, tol: &Tolerances) -> Result<f64> {
    let (g, pi) = gram(p)?;
    let s = reversible_spectrum_with(&g, &pi, tol)?;
    Ok(s.lambda2.max(0.0).sqrt())
}
