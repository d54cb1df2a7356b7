//! Exact cut quantities by Gray-code enumeration of node subsets.

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::matrices::StochasticMatrix;

/// A minimising subset, 0-based, and its exact value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub value: f64,
    pub subset: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cheeger {
    pub h: f64,
    pub subset: Vec<usize>,
    /// `1 - 2h`.
    pub lower: f64,
    /// `1 - h^2 / 2`.
    pub upper: f64,
}

fn flow(p: &StochasticMatrix, pi: &[f64]) -> Vec<f64> {
    let n = p.n();
    let mut f = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                f[i * n + j] = pi[i] * p.get(i, j);
            }
        }
    }
    f
}

fn members(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask & (1 << i) != 0).collect()
}

fn exact_cut(f: &[f64], n: usize, mask: u32) -> f64 {
    let mut s = 0.0;
    for i in (0..n).filter(|&i| mask & (1 << i) != 0) {
        for j in (0..n).filter(|&j| mask & (1 << j) == 0) {
            s += f[i * n + j];
        }
    }
    s
}

/// Walks every nonempty proper subset in Gray-code order, keeping
/// `cut(S) = sum_{i in S, j notin S} pi_i P_ij` and `pi(S)` up to date, and
/// hands `(mask, cut, mass)` to `visit`.
fn enumerate(p: &StochasticMatrix, pi: &[f64], tol: &Tolerances, mut visit: impl FnMut(u32, f64, f64)) -> Result<Vec<f64>> {
    let n = p.n();
    if n > tol.max_enumeration || n > 30 {
        return Err(Error::TooLarge {
            n,
            max: tol.max_enumeration.min(30),
        });
    }
    if n < 2 {
        return Err(Error::Parameter("cuts need at least two nodes".into()));
    }
    let f = flow(p, pi);
    let full = (1u32 << n) - 1;
    let mut mask = 0u32;
    let mut cut = 0.0;
    let mut mass = 0.0;
    for k in 1u64..(1u64 << n) {
        let v = k.trailing_zeros() as usize;
        let bit = 1u32 << v;
        if mask & bit == 0 {
            // v joins S
            for u in 0..n {
                if u == v {
                    continue;
                }
                if mask & (1 << u) != 0 {
                    cut -= f[u * n + v];
                } else {
                    cut += f[v * n + u];
                }
            }
            mass += pi[v];
        } else {
            for u in 0..n {
                if u == v {
                    continue;
                }
                if mask & (1 << u) != 0 {
                    cut += f[u * n + v];
                } else {
                    cut -= f[v * n + u];
                }
            }
            mass -= pi[v];
        }
        mask ^= bit;
        if k % 4096 == 0 {
            cut = exact_cut(&f, n, mask);
            mass = (0..n).filter(|&i| mask & (1 << i) != 0).map(|i| pi[i]).sum();
        }
        if mask != full {
            visit(mask, cut, mass);
        }
    }
    Ok(f)
}

/// `mu(P) = min_S sum_{i in S, j notin S} pi_i P_ij` over nonempty proper
/// subsets.
pub fn mu(p: &StochasticMatrix, pi: &[f64]) -> Result<Cut> {
    mu_with(p, pi, &Tolerances::default())
}

pub fn mu_with(p: &StochasticMatrix, pi: &[f64], tol: &Tolerances) -> Result<Cut> {
    let mut best = (f64::INFINITY, 0u32);
    let f = enumerate(p, pi, tol, |mask, cut, _| {
        if cut < best.0 {
            best = (cut, mask);
        }
    })?;
    let n = p.n();
    Ok(Cut {
        value: exact_cut(&f, n, best.1),
        subset: members(best.1, n),
    })
}

/// Cheeger constant `h(P) = min cut(S) / pi(S)` over `S` with
/// `pi(S) <= 1/2`.
pub fn cheeger(p: &StochasticMatrix, pi: &[f64]) -> Result<Cheeger> {
    cheeger_with(p, pi, &Tolerances::default())
}

pub fn cheeger_with(p: &StochasticMatrix, pi: &[f64], tol: &Tolerances) -> Result<Cheeger> {
    let n = p.n();
    let mut best = (f64::INFINITY, 0u32);
    let f = enumerate(p, pi, tol, |mask, cut, mass| {
        // a set of mass exactly 1/2 can land on either side after rounding
        if mass <= 0.5 + 1e-12 {
            let r = cut / mass;
            if r < best.0 {
                best = (r, mask);
            }
        }
    })?;
    let s = members(best.1, n);
    let mass: f64 = s.iter().map(|&i| pi[i]).sum();
    let h = exact_cut(&f, n, best.1) / mass;
    Ok(Cheeger {
        h,
        subset: s,
        lower: 1.0 - 2.0 * h,
        upper: 1.0 - h * h / 2.0,
    })
}
