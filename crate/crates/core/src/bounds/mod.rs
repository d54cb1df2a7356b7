//! Upper bounds on second eigenvalues and on convergence rates.
//!
//! Single-matrix bounds take a stochastic matrix `P` and its Perron vector.
//! The path based bounds live on the support graph `G_P`; for matrices
//! built by [`crate::matrices`] that is the reverse of the communication
//! graph.

mod report;

pub use report::{full_report, matrix_report, BoundReport, Check, CSV_HEADER};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::graphs::{
    bottleneck_measure, diameter, edge_connectivity, geodesic_family, normalized_diameter,
    Bottleneck, DirectedGraph, GeodesicStrategy, GraphSchedule, NormalizedDiameter, PathFamily,
    ScheduleKind,
};
use crate::matrices::{
    rules::{alpha_of, nu_of},
    schedule_matrices, Rule, RuleParams, StepMatrix, StochasticMatrix,
};
use crate::spectral::{mu_with, reversible_spectrum_with, second_singular_with};

/// `alpha(P) = min pi_i P_ij` over the edges of `G_P`, self-loops included.
/// The loops matter for [`analytic_gram_bound`] on matrices with a small
/// diagonal.
pub fn alpha(p: &StochasticMatrix, pi: &[f64]) -> f64 {
    alpha_of(p, pi)
}

fn require_reversible(p: &StochasticMatrix, pi: &[f64], tol: &Tolerances) -> Result<()> {
    let r = p.detailed_balance_residual(pi);
    if r > tol.reversible {
        return Err(Error::Contract(format!(
            "bound needs a reversible matrix (detailed-balance residual {r:e}); apply it to the gram matrix"
        )));
    }
    Ok(())
}

/// `1 - 2 mu(P) / (n - 1)`, from the exact minimum cut.
pub fn eta_bound(p: &StochasticMatrix, pi: &[f64], tol: &Tolerances) -> Result<f64> {
    require_reversible(p, pi, tol)?;
    let mu = mu_with(p, pi, tol)?;
    Ok(1.0 - 2.0 * mu.value / (p.n() - 1) as f64)
}

/// `1 - alpha(A) / (n - 1)`, an upper bound on `lambda_2(A^dagger A)` that
/// needs no reversibility.
pub fn analytic_gram_bound(a: &StochasticMatrix, pi: &[f64]) -> f64 {
    1.0 - alpha(a, pi) / (a.n() - 1) as f64
}

/// `|gamma|_P = sum 1 / (pi_u P_uv)` along the path.
pub fn path_length(p: &StochasticMatrix, pi: &[f64], path: &[usize]) -> Result<f64> {
    let mut len = 0.0;
    for w in path.windows(2) {
        let x = p.get(w[0], w[1]);
        if x <= 0.0 {
            return Err(Error::Contract(format!(
                "path uses ({}, {}) where the matrix entry is zero",
                w[0] + 1,
                w[1] + 1
            )));
        }
        len += 1.0 / (pi[w[0]] * x);
    }
    Ok(len)
}

/// `kappa(P) = max_{i != j} (sum_{gamma in Gamma_ij} 1/|gamma|_P)^{-1}`.
pub fn kappa(p: &StochasticMatrix, pi: &[f64], family: &PathFamily, tol: &Tolerances) -> Result<f64> {
    require_reversible(p, pi, tol)?;
    if !family.edge_disjoint {
        return Err(Error::Contract("kappa needs edge-disjoint path sets".into()));
    }
    let mut worst = 0.0f64;
    for (_, _, paths) in family.pairs() {
        let mut s = 0.0;
        for path in paths {
            s += 1.0 / path_length(p, pi, path)?;
        }
        worst = worst.max(1.0 / s);
    }
    Ok(worst)
}

pub fn kappa_bound(p: &StochasticMatrix, pi: &[f64], family: &PathFamily, tol: &Tolerances) -> Result<f64> {
    Ok(1.0 - 1.0 / kappa(p, pi, family, tol)?)
}

/// `kappa~(P) = max_e sum_{gamma_ij through e} |gamma_ij|_P pi_i pi_j`.
pub fn kappa_tilde(p: &StochasticMatrix, pi: &[f64], family: &PathFamily, tol: &Tolerances) -> Result<f64> {
    require_reversible(p, pi, tol)?;
    if !family.geodesic || family.pairs().any(|(_, _, ps)| ps.len() != 1) {
        return Err(Error::Contract("kappa~ needs one geodesic per pair".into()));
    }
    let n = p.n();
    let mut load = vec![0.0; n * n];
    for (i, j, paths) in family.pairs() {
        let path = &paths[0];
        let w = path_length(p, pi, path)? * pi[i] * pi[j];
        for e in path.windows(2) {
            load[e[0] * n + e[1]] += w;
        }
    }
    Ok(load.into_iter().fold(0.0, f64::max))
}

pub fn kappa_tilde_bound(p: &StochasticMatrix, pi: &[f64], family: &PathFamily, tol: &Tolerances) -> Result<f64> {
    Ok(1.0 - 1.0 / kappa_tilde(p, pi, family, tol)?)
}

/// `1 - alpha(P) / delta_*(G_P)`.
pub fn beta_b(p: &StochasticMatrix, pi: &[f64], geo: &SupportGeometry) -> f64 {
    1.0 - alpha(p, pi) / geo.normalized.value()
}

/// `1 - alpha(P) / (pi_max^2 delta(G_P) b(G_P))`.
pub fn beta_ds(p: &StochasticMatrix, pi: &[f64], geo: &SupportGeometry) -> f64 {
    let pi_max = pi.iter().copied().fold(0.0, f64::max);
    1.0 - alpha(p, pi) / (pi_max * pi_max * geo.diameter as f64 * geo.bottleneck.congestion as f64)
}

/// Metrics of a support graph that feed the path bounds, with the geodesic
/// family used for `kappa~`.
#[derive(Debug, Clone)]
pub struct SupportGeometry {
    pub diameter: usize,
    pub edge_connectivity: usize,
    pub normalized: NormalizedDiameter,
    pub bottleneck: Bottleneck,
    pub geodesics: PathFamily,
}

impl SupportGeometry {
    pub fn of(g: &DirectedGraph) -> Result<Self> {
        let geodesics = geodesic_family(g, GeodesicStrategy::CongestionReroute)?;
        Ok(Self {
            diameter: diameter(g)?,
            edge_connectivity: edge_connectivity(g)?,
            normalized: normalized_diameter(g)?,
            bottleneck: bottleneck_measure(g, &geodesics)?,
            geodesics,
        })
    }
}

/// Inputs of the algorithm-level rate corollaries, taken as suprema and
/// infima over a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorollaryInputs {
    pub a: f64,
    pub alpha: f64,
    pub pi_max: f64,
    pub delta: usize,
    pub delta_star: f64,
    pub b: usize,
}

impl CorollaryInputs {
    pub fn of(p: &StochasticMatrix, pi: &[f64], geo: &SupportGeometry) -> Self {
        Self {
            a: p.diagonal_min(),
            alpha: alpha(p, pi),
            pi_max: pi.iter().copied().fold(0.0, f64::max),
            delta: geo.diameter,
            delta_star: geo.normalized.value(),
            b: geo.bottleneck.congestion,
        }
    }

    /// Worst case over several steps.
    pub fn combine(self, o: Self) -> Self {
        Self {
            a: self.a.min(o.a),
            alpha: self.alpha.min(o.alpha),
            pi_max: self.pi_max.max(o.pi_max),
            delta: self.delta.max(o.delta),
            delta_star: self.delta_star.max(o.delta_star),
            b: self.b.max(o.b),
        }
    }

    /// `1 - min(2a, alpha / delta_*)`.
    pub fn diameter_rate(&self) -> f64 {
        1.0 - (2.0 * self.a).min(self.alpha / self.delta_star)
    }

    /// `1 - min(2a, max(alpha / delta_*, alpha / (pi_max^2 delta b), c / b))`
    /// where the last term (`c = 1/4` for Metropolis, `1/8` for Lazy
    /// Metropolis) comes from the geodesic degree-sum lemma.
    pub fn rate(&self, rule: Option<Rule>) -> f64 {
        let b = self.b as f64;
        let mut geo = (self.alpha / self.delta_star)
            .max(self.alpha / (self.pi_max * self.pi_max * self.delta as f64 * b));
        match rule {
            Some(Rule::Metropolis) => geo = geo.max(1.0 / (4.0 * b)),
            Some(Rule::LazyMetropolis) => geo = geo.max(1.0 / (8.0 * b)),
            _ => {}
        }
        1.0 - (2.0 * self.a).min(geo)
    }
}

/// Rate bounds for a schedule satisfying A1 to A4.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateBounds {
    /// `1 - min(2a, 1 / min(kappa, kappa~))` with suprema over steps.
    pub corollary: f64,
    /// `sup_t sqrt(lambda_2(A(t)^dagger A(t)))`.
    pub theorem: f64,
    /// The rule's corollary in terms of graph metrics.
    pub algorithm: f64,
    pub kappa: f64,
    pub kappa_tilde: f64,
    pub inputs: CorollaryInputs,
    /// `1 - inf A_ij / n` when every step is a symmetric matrix on the
    /// complete graph.
    pub complete_graph: Option<f64>,
}

fn check_constant_perron(steps: &[StepMatrix], tol: &Tolerances) -> Result<()> {
    let first = &steps[0].pi;
    for (k, s) in steps.iter().enumerate().skip(1) {
        let d = s.pi.iter().zip(first.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if d > tol.reversible {
            return Err(Error::Assumption {
                assumption: "A3",
                step: k + 1,
                detail: format!("Perron vector moves by {d:e}"),
            });
        }
    }
    Ok(())
}

struct StepBounds {
    kappa: f64,
    kappa_tilde: f64,
    sigma2: f64,
    inputs: CorollaryInputs,
}

fn step_bounds(s: &StepMatrix, tol: &Tolerances) -> Result<StepBounds> {
    let g = s.matrix.support();
    let geo = SupportGeometry::of(g)?;
    let disjoint = crate::graphs::disjoint_path_family(g, geo.normalized.k)?;
    let spec = reversible_spectrum_with(&s.matrix, &s.pi, tol)?;
    Ok(StepBounds {
        kappa: kappa(&s.matrix, &s.pi, &disjoint, tol)?,
        kappa_tilde: kappa_tilde(&s.matrix, &s.pi, &geo.geodesics, tol)?,
        sigma2: spec.lambda2.abs().max(spec.lambda_n.abs()),
        inputs: CorollaryInputs::of(&s.matrix, &s.pi, &geo),
    })
}

/// `1 - inf A_ij / n` over symmetric matrices supported on the complete
/// graph; `None` otherwise.
pub fn complete_graph_bound(matrices: &[&StochasticMatrix]) -> Option<f64> {
    let n = matrices.first()?.n();
    let mut inf = f64::INFINITY;
    for m in matrices {
        if m.max_asymmetry() > 0.0 || m.data().iter().any(|&x| x <= 0.0) {
            return None;
        }
        inf = inf.min(m.data().iter().copied().fold(f64::INFINITY, f64::min));
    }
    Some(1.0 - inf / n as f64)
}

/// Checks A1 to A4 over the distinct steps of `schedule` and evaluates the
/// reversible rate corollary, the theorem form and the rule's corollary.
pub fn reversible_rate_bound(
    schedule: &GraphSchedule,
    rule: Rule,
    params: &RuleParams,
    tol: &Tolerances,
) -> Result<RateBounds> {
    let steps = schedule_matrices(schedule, rule, params)?;
    check_constant_perron(&steps, tol)?;
    for (k, s) in steps.iter().enumerate() {
        let r = s.matrix.detailed_balance_residual(&s.pi);
        if r > tol.reversible {
            return Err(Error::Assumption {
                assumption: "A4",
                step: k + 1,
                detail: format!("detailed-balance residual {r:e}"),
            });
        }
    }
    let per: Vec<StepBounds> = steps
        .par_iter()
        .map(|s| step_bounds(s, tol))
        .collect::<Result<_>>()?;
    let kappa = per.iter().map(|s| s.kappa).fold(0.0, f64::max);
    let kappa_tilde = per.iter().map(|s| s.kappa_tilde).fold(0.0, f64::max);
    let inputs = per
        .iter()
        .map(|s| s.inputs)
        .reduce(CorollaryInputs::combine)
        .expect("schedule has a step");
    let a = inputs.a;
    let mats: Vec<&StochasticMatrix> = steps.iter().map(|s| &s.matrix).collect();
    Ok(RateBounds {
        corollary: 1.0 - (2.0 * a).min(1.0 / kappa.min(kappa_tilde)),
        theorem: per.iter().map(|s| s.sigma2).fold(0.0, f64::max),
        algorithm: inputs.rate(Some(rule)),
        kappa,
        kappa_tilde,
        inputs,
        complete_graph: complete_graph_bound(&mats),
    })
}

/// `1 - 1/(4 n^2)`.
pub fn quadratic_metropolis_bound(n: usize) -> f64 {
    1.0 - 1.0 / (4.0 * (n * n) as f64)
}

/// `1 - 1/(8 n^2)`.
pub fn quadratic_lazy_bound(n: usize) -> f64 {
    1.0 - 1.0 / (8.0 * (n * n) as f64)
}

/// `1 - 1/((3 + d_max - d_min) n^2)`.
pub fn quadratic_en_bound(n: usize, dmin: usize, dmax: usize) -> f64 {
    assert!(dmin <= dmax, "dmin > dmax");
    1.0 - 1.0 / ((3 + dmax - dmin) as f64 * (n * n) as f64)
}

/// Rate bound for schedules whose Perron vector drifts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallVariation {
    pub nu: f64,
    pub sup_sigma2: f64,
    /// `nu * sup_sigma2`.
    pub bound: f64,
    /// Set when the bound is at least 1 and says nothing.
    pub vacuous: bool,
}

pub fn small_variation_rate_bound(
    schedule: &GraphSchedule,
    rule: Rule,
    params: &RuleParams,
    tol: &Tolerances,
) -> Result<SmallVariation> {
    let steps = schedule_matrices(schedule, rule, params)?;
    let sup_sigma2 = steps
        .par_iter()
        .map(|s| second_singular_with(&s.matrix, tol))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let nu = nu_of(&steps, schedule.kind() != ScheduleKind::Generated);
    let bound = nu * sup_sigma2;
    Ok(SmallVariation {
        nu,
        sup_sigma2,
        bound,
        vacuous: bound >= 1.0,
    })
}
