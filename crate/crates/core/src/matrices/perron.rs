use std::ops::Deref;

use serde::{Deserialize, Serialize};

use super::StochasticMatrix;
use crate::config::Tolerances;
use crate::error::{Error, Result};

/// Positive left fixed vector of an irreducible stochastic matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerronVector {
    entries: Vec<f64>,
    /// `|P^T pi - pi|_inf` at the returned vector.
    pub residual: f64,
}

impl PerronVector {
    /// Wraps a given positive vector, rescaled to sum to one.
    pub fn from_weights(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() || w.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::Parameter("weights must be positive and finite".into()));
        }
        let s: f64 = w.iter().sum();
        Ok(Self {
            entries: w.into_iter().map(|x| x / s).collect(),
            residual: 0.0,
        })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            entries: vec![1.0 / n as f64; n],
            residual: 0.0,
        }
    }

    pub fn max(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.entries
    }
}

impl Deref for PerronVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.entries
    }
}

fn residual(p: &StochasticMatrix, pi: &[f64]) -> f64 {
    let n = p.n();
    let mut r = vec![0.0; n];
    for (i, &w) in pi.iter().enumerate() {
        for (rj, &pij) in r.iter_mut().zip(p.row(i)) {
            *rj += w * pij;
        }
    }
    r.iter().zip(pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// LU factorisation with partial pivoting, in place; returns the pivots.
fn lu(a: &mut [f64], n: usize) -> Option<Vec<usize>> {
    let mut piv: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (p, big) = (k..n)
            .map(|i| (i, a[i * n + k].abs()))
            .fold((k, -1.0), |b, c| if c.1 > b.1 { c } else { b });
        if big == 0.0 {
            return None;
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            piv.swap(k, p);
        }
        let d = a[k * n + k];
        for i in k + 1..n {
            let f = a[i * n + k] / d;
            a[i * n + k] = f;
            if f != 0.0 {
                for j in k + 1..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
            }
        }
    }
    Some(piv)
}

fn lu_solve(lu: &[f64], piv: &[usize], n: usize, b: &[f64]) -> Vec<f64> {
    let mut x: Vec<f64> = piv.iter().map(|&p| b[p]).collect();
    for i in 0..n {
        for j in 0..i {
            x[i] -= lu[i * n + j] * x[j];
        }
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            x[i] -= lu[i * n + j] * x[j];
        }
        x[i] /= lu[i * n + i];
    }
    x
}

/// Solves `(P^T - I) pi = 0` with the last equation replaced by
/// `sum pi = 1`, followed by iterative refinement.
pub fn perron(p: &StochasticMatrix) -> Result<PerronVector> {
    perron_with(p, &Tolerances::default())
}

pub fn perron_with(p: &StochasticMatrix, tol: &Tolerances) -> Result<PerronVector> {
    if !p.is_irreducible() {
        return Err(Error::Reducible);
    }
    let n = p.n();
    let mut m = vec![0.0; n * n];
    for i in 0..n - 1 {
        for j in 0..n {
            m[i * n + j] = p.get(j, i) - if i == j { 1.0 } else { 0.0 };
        }
    }
    m[(n - 1) * n..].fill(1.0);
    let orig = m.clone();
    let piv = lu(&mut m, n).ok_or(Error::Numerical { residual: f64::INFINITY })?;
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = 1.0;
    let mut x = lu_solve(&m, &piv, n, &rhs);
    for _ in 0..3 {
        let r: Vec<f64> = (0..n)
            .map(|i| rhs[i] - orig[i * n..(i + 1) * n].iter().zip(&x).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let dx = lu_solve(&m, &piv, n, &r);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
    }
    let res = residual(p, &x);
    if x.iter().any(|&v| !(v > 0.0)) || res > tol.perron_residual {
        return Err(Error::Numerical { residual: res });
    }
    let s: f64 = x.iter().sum();
    for v in &mut x {
        *v /= s;
    }
    Ok(PerronVector {
        residual: residual(p, &x),
        entries: x,
    })
}
