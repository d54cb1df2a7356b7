//! Averaging matrices built from communication graphs, Perron vectors and
//! pi-adjoints.
//!
//! The constructors take the communication graph. Agent `i` averages over
//! its in-neighbours, so the support of the matrix is the reverse graph.

mod perron;
pub(crate) mod rules;

pub use perron::{perron, perron_with, PerronVector};
pub use rules::{
    equal_neighbor, fixed_weight, lazy_metropolis, metropolis, schedule_infima, schedule_matrices,
    Rule, RuleParams, ScheduleInfima, StepMatrix,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::DirectedGraph;

/// Dense row-major nonnegative matrix with its support graph.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    n: usize,
    data: Vec<f64>,
    support: DirectedGraph,
}

impl StochasticMatrix {
    /// Validates nonnegativity and unit row sums within `tol`.
    pub fn from_dense(n: usize, data: Vec<f64>, tol: f64) -> Result<Self> {
        if n == 0 || data.len() != n * n {
            return Err(Error::Parameter(format!(
                "expected {n}x{n} entries, got {}",
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::Parameter(format!(
                "entry ({}, {}) = {} is not a nonnegative number",
                k / n + 1,
                k % n + 1,
                data[k]
            )));
        }
        for (i, row) in data.chunks(n).enumerate() {
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > tol {
                return Err(Error::Parameter(format!("row {} sums to {s}", i + 1)));
            }
        }
        Ok(Self::from_raw(n, data))
    }

    pub fn from_rows(rows: &[Vec<f64>], tol: f64) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parameter("matrix rows must all have length n".into()));
        }
        Self::from_dense(n, rows.concat(), tol)
    }

    /// No checks; the support is read off the positive entries.
    pub(crate) fn from_raw(n: usize, data: Vec<f64>) -> Self {
        let edges = (0..n * n)
            .filter(|&k| data[k] > 0.0)
            .map(|k| (k / n, k % n));
        let support = DirectedGraph::new(n, edges).expect("indices in range");
        Self { n, data, support }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// Graph of the positive entries (self-loops always present).
    pub fn support(&self) -> &DirectedGraph {
        &self.support
    }

    pub fn diagonal_min(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).fold(f64::INFINITY, f64::min)
    }

    /// `y = P x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.data
            .chunks(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_row_sum_error(&self) -> f64 {
        self.data
            .chunks(self.n)
            .map(|row| (row.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn is_irreducible(&self) -> bool {
        self.support.is_strongly_connected()
    }

    /// `max |pi_i P_ij - pi_j P_ji|`.
    pub fn detailed_balance_residual(&self, pi: &[f64]) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((pi[i] * self.get(i, j) - pi[j] * self.get(j, i)).abs());
            }
        }
        worst
    }

    /// `P^dagger = D^{-1} P^T D` with `D = diag(pi)`. Rows sum to one when
    /// `pi` is the Perron vector of `P`.
    pub fn adjoint(&self, pi: &[f64]) -> StochasticMatrix {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = pi[j] / pi[i] * self.get(j, i);
            }
        }
        Self::from_raw(n, data)
    }

    pub fn matmul(&self, other: &StochasticMatrix) -> StochasticMatrix {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            let out = &mut data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.get(i, k);
                if a != 0.0 {
                    for (o, b) in out.iter_mut().zip(other.row(k)) {
                        *o += a * b;
                    }
                }
            }
        }
        Self::from_raw(n, data)
    }
}

/// `P^dagger P` with the Perron vector of `P`. The result is stochastic and
/// reversible with respect to that same vector.
pub fn gram(p: &StochasticMatrix) -> Result<(StochasticMatrix, PerronVector)> {
    let pi = perron(p)?;
    let g = p.adjoint(&pi).matmul(p);
    Ok((g, pi))
}

/// Detailed balance with respect to the Perron vector of `p`, within `tol`.
pub fn is_reversible(p: &StochasticMatrix, tol: f64) -> Result<bool> {
    let pi = perron(p)?;
    Ok(p.detailed_balance_residual(&pi) <= tol)
}

/// JSON layout for matrix dumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDump {
    pub n: usize,
    pub rows: Vec<Vec<f64>>,
    pub rule: Option<String>,
    pub graph_ref: Option<String>,
}

impl MatrixDump {
    pub fn new(p: &StochasticMatrix, rule: Option<Rule>, graph_ref: Option<String>) -> Self {
        Self {
            n: p.n(),
            rows: p.rows(),
            rule: rule.map(|r| r.to_string()),
            graph_ref,
        }
    }

    pub fn matrix(&self, tol: f64) -> Result<StochasticMatrix> {
        if self.rows.len() != self.n {
            return Err(Error::Parameter("row count differs from n".into()));
        }
        StochasticMatrix::from_rows(&self.rows, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{make_family, Family};

    #[test]
    fn rejects_bad_rows() {
        assert!(StochasticMatrix::from_rows(&[vec![0.5, 0.4], vec![0.5, 0.5]], 1e-12).is_err());
        assert!(StochasticMatrix::from_rows(&[vec![1.5, -0.5], vec![0.5, 0.5]], 1e-12).is_err());
        assert!(StochasticMatrix::from_rows(&[vec![1.0]], 1e-12).is_ok());
    }

    #[test]
    fn adjoint_is_an_involution() {
        let g = make_family(Family::Butterfly, 4).unwrap();
        let b = equal_neighbor(&g).unwrap();
        let pi = perron(&b).unwrap();
        let bd = b.adjoint(&pi);
        assert!(bd.max_row_sum_error() < 1e-12);
        let back = bd.adjoint(&pi);
        for (x, y) in back.data().iter().zip(b.data()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn gram_of_reversible_is_square() {
        let g = make_family(Family::Star, 5).unwrap();
        let p = equal_neighbor(&g).unwrap();
        let (gp, _) = gram(&p).unwrap();
        let sq = p.matmul(&p);
        for (x, y) in gp.data().iter().zip(sq.data()) {
            assert!((x - y).abs() < 1e-14);
        }
        let k2 = metropolis(&make_family(Family::Complete, 2).unwrap()).unwrap();
        let (g2, _) = gram(&k2).unwrap();
        assert!(g2.data().iter().all(|&x| (x - 0.5).abs() < 1e-15));
    }

    #[test]
    fn reversibility() {
        let ring = make_family(Family::Ring, 7).unwrap();
        assert!(is_reversible(&equal_neighbor(&ring).unwrap(), 1e-12).unwrap());
        let star = make_family(Family::Star, 6).unwrap();
        assert!(is_reversible(&equal_neighbor(&star).unwrap(), 1e-12).unwrap());
        let b = make_family(Family::Butterfly, 3).unwrap();
        assert!(!is_reversible(&equal_neighbor(&b).unwrap(), 1e-10).unwrap());
    }

    #[test]
    fn dump_round_trip() {
        let g = make_family(Family::Butterfly, 5).unwrap();
        let p = equal_neighbor(&g).unwrap();
        let dump = MatrixDump::new(&p, Some(Rule::EqualNeighbor), Some("butterfly:5".into()));
        let text = serde_json::to_string(&dump).unwrap();
        let back: MatrixDump = serde_json::from_str(&text).unwrap();
        assert_eq!(back.matrix(1e-12).unwrap(), p);
    }
}
