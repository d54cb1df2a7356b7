use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    analytic_gram_bound, beta_b, beta_ds, eta_bound, kappa_bound, kappa_tilde_bound, CorollaryInputs,
    SupportGeometry,
};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::graphs::{disjoint_path_family, DirectedGraph};
use crate::matrices::{perron_with, Rule, RuleParams, StochasticMatrix};
use crate::spectral::{cheeger_with, gershgorin_floor, reversible_spectrum_with};

pub const CSV_HEADER: &str =
    "graph,rule,n,lambda2,sigma2,eta,kappa,kappa_tilde,beta_b,beta_ds,cheeger_lo,cheeger_hi,rate_bound,sound";

/// One comparison between a bound and the exact value it bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub bound: f64,
    pub exact: f64,
    pub holds: bool,
}

/// Every bound computed for one matrix, next to its exact spectrum.
///
/// For a reversible matrix the eigenvalue bounds apply to the matrix
/// itself. Otherwise they apply to `A^dagger A` and the rate bound is the
/// square root of the best of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub graph_id: String,
    pub rule: Option<Rule>,
    pub n: usize,
    pub reversible: bool,
    pub exact_lambda2: f64,
    pub exact_lambda_n: f64,
    pub exact_sigma2: f64,
    pub eta_bound: Option<f64>,
    pub kappa_bound: Option<f64>,
    pub kappa_tilde_bound: Option<f64>,
    pub beta_b: Option<f64>,
    pub beta_ds: Option<f64>,
    /// Bound on `lambda_2(A^dagger A)` from `alpha(A)` alone.
    pub beta_a: f64,
    pub cheeger_upper: Option<f64>,
    pub cheeger_lower: Option<f64>,
    pub gershgorin_floor: f64,
    pub rate_bound: f64,
    /// `1 - min(2a, 1/min(kappa, kappa~))`, reversible case only.
    pub rate_bound_kappa: Option<f64>,
    pub inputs: CorollaryInputs,
    /// Why a bound is missing.
    pub absent: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub sound: bool,
}

fn optional(name: &str, r: Result<f64>, absent: &mut BTreeMap<String, String>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e @ Error::TooLarge { .. }) => {
            absent.insert(name.into(), e.to_string());
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Report for the matrix of `rule` on the communication graph `g`.
pub fn full_report(
    graph_id: &str,
    g: &DirectedGraph,
    rule: Rule,
    params: &RuleParams,
    tol: &Tolerances,
) -> Result<BoundReport> {
    let a = rule.matrix(g, params)?;
    matrix_report(graph_id, Some(rule), &a, tol)
}

pub fn matrix_report(
    graph_id: &str,
    rule: Option<Rule>,
    a: &StochasticMatrix,
    tol: &Tolerances,
) -> Result<BoundReport> {
    let n = a.n();
    if n < 2 {
        return Err(Error::Parameter("bounds need at least two nodes".into()));
    }
    let pi = perron_with(a, tol)?;
    let reversible = a.detailed_balance_residual(&pi) <= tol.reversible;
    let target = if reversible {
        a.clone()
    } else {
        a.adjoint(&pi).matmul(a)
    };
    let spec = reversible_spectrum_with(&target, &pi, tol)?;
    let sigma2 = if reversible {
        spec.lambda2.abs().max(spec.lambda_n.abs())
    } else {
        spec.lambda2.max(0.0).sqrt()
    };

    let mut absent = BTreeMap::new();
    let geo = SupportGeometry::of(target.support())?;
    let disjoint = disjoint_path_family(target.support(), geo.normalized.k)?;
    let eta = optional("eta", eta_bound(&target, &pi, tol), &mut absent)?;
    let cheeger = match cheeger_with(&target, &pi, tol) {
        Ok(c) => Some(c),
        Err(e @ Error::TooLarge { .. }) => {
            absent.insert("cheeger".into(), e.to_string());
            None
        }
        Err(e) => return Err(e),
    };
    let kb = kappa_bound(&target, &pi, &disjoint, tol)?;
    let kt = kappa_tilde_bound(&target, &pi, &geo.geodesics, tol)?;
    let bb = beta_b(&target, &pi, &geo);
    let bds = beta_ds(&target, &pi, &geo);
    let ba = analytic_gram_bound(a, &pi);
    let inputs = CorollaryInputs::of(&target, &pi, &geo);

    let (rate_bound, rate_bound_kappa) = if reversible {
        let k = (1.0 - kb).recip().min((1.0 - kt).recip());
        (inputs.rate(rule), Some(1.0 - (2.0 * inputs.a).min(1.0 / k)))
    } else {
        absent.insert(
            "rate_bound_kappa".into(),
            "matrix is not reversible; the rate bound is the root of the best gram bound".into(),
        );
        let best = [Some(ba), Some(bb), Some(bds), Some(kb), Some(kt), eta, cheeger.as_ref().map(|c| c.upper)]
            .into_iter()
            .flatten()
            .fold(f64::INFINITY, f64::min);
        (best.max(0.0).sqrt(), None)
    };

    let slack = tol.soundness;
    let mut checks = Vec::new();
    let mut upper = |name: &str, bound: f64, exact: f64| {
        checks.push(Check {
            name: name.into(),
            bound,
            exact,
            holds: exact <= bound + slack,
        })
    };
    let l2 = spec.lambda2;
    if let Some(v) = eta {
        upper("eta", v, l2);
    }
    upper("kappa", kb, l2);
    upper("kappa_tilde", kt, l2);
    upper("beta_b", bb, l2);
    upper("beta_ds", bds, l2);
    if let Some(c) = &cheeger {
        upper("cheeger_upper", c.upper, l2);
    }
    upper("beta_a", ba, sigma2 * sigma2);
    upper("rate_bound", rate_bound, sigma2);
    if let Some(v) = rate_bound_kappa {
        upper("rate_bound_kappa", v, sigma2);
    }
    let floor = gershgorin_floor(&target);
    checks.push(Check {
        name: "gershgorin_floor".into(),
        bound: floor,
        exact: spec.lambda_n,
        holds: floor <= spec.lambda_n + slack,
    });
    if let Some(c) = &cheeger {
        checks.push(Check {
            name: "cheeger_lower".into(),
            bound: c.lower,
            exact: l2,
            holds: c.lower <= l2 + slack,
        });
    }
    let sound = checks.iter().all(|c| c.holds);

    Ok(BoundReport {
        graph_id: graph_id.into(),
        rule,
        n,
        reversible,
        exact_lambda2: l2,
        exact_lambda_n: spec.lambda_n,
        exact_sigma2: sigma2,
        eta_bound: eta,
        kappa_bound: Some(kb),
        kappa_tilde_bound: Some(kt),
        beta_b: Some(bb),
        beta_ds: Some(bds),
        beta_a: ba,
        cheeger_upper: cheeger.as_ref().map(|c| c.upper),
        cheeger_lower: cheeger.as_ref().map(|c| c.lower),
        gershgorin_floor: floor,
        rate_bound,
        rate_bound_kappa,
        inputs,
        absent,
        checks,
        sound,
    })
}

fn field(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl BoundReport {
    /// Row matching [`CSV_HEADER`]; absent bounds are empty fields.
    pub fn csv_row(&self) -> String {
        [
            quote(&self.graph_id),
            self.rule.map(|r| r.to_string()).unwrap_or_default(),
            self.n.to_string(),
            self.exact_lambda2.to_string(),
            self.exact_sigma2.to_string(),
            field(self.eta_bound),
            field(self.kappa_bound),
            field(self.kappa_tilde_bound),
            field(self.beta_b),
            field(self.beta_ds),
            field(self.cheeger_lower),
            field(self.cheeger_upper),
            self.rate_bound.to_string(),
            self.sound.to_string(),
        ]
        .join(",")
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.holds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{make_family, Family};

    fn report(f: Family, size: usize, rule: Rule) -> BoundReport {
        let g = make_family(f, size).unwrap();
        full_report(&format!("{f}_{size}"), &g, rule, &RuleParams::default(), &Tolerances::default()).unwrap()
    }

    #[test]
    fn ring_prefers_ds() {
        let r = report(Family::Ring, 21, Rule::EqualNeighbor);
        assert!(r.sound, "{:?}", r.failed_checks().collect::<Vec<_>>());
        assert!(r.beta_ds.unwrap() < r.beta_b.unwrap() && r.beta_b.unwrap() < 1.0);
        assert_eq!(r.csv_row().split(',').count(), CSV_HEADER.split(',').count());
    }

    #[test]
    fn star_prefers_b() {
        let r = report(Family::Star, 16, Rule::EqualNeighbor);
        assert!(r.sound);
        assert!(r.beta_b.unwrap() < r.beta_ds.unwrap());
    }

    #[test]
    fn butterfly_goes_through_gram() {
        let r = report(Family::Butterfly, 5, Rule::EqualNeighbor);
        assert!(!r.reversible && r.sound);
        assert!(r.rate_bound_kappa.is_none());
        assert!(r.rate_bound < 1.0 && r.rate_bound >= r.exact_sigma2);
    }

    #[test]
    fn large_graph_drops_enumeration() {
        let r = report(Family::Ring, 25, Rule::Metropolis);
        assert!(r.eta_bound.is_none() && r.cheeger_upper.is_none());
        assert!(r.absent.contains_key("eta"));
        assert!(r.sound);
    }
}
