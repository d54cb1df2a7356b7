//! Verification suites behind `consensus-spectra verify`.

use anyhow::Result;
use clap::ValueEnum;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use consensus_spectra::bounds::{alpha, analytic_gram_bound, matrix_report, quadratic_lazy_bound, quadratic_metropolis_bound};
use consensus_spectra::graphs::make_family;
use consensus_spectra::graphs::random::{random_connected, random_strongly_connected, rng};
use consensus_spectra::matrices::{equal_neighbor, gram, perron_with};
use consensus_spectra::sim::{contraction_check, ot_two_star_schedule, random_x0, simulate};
use consensus_spectra::spectral::{green_sum, quadratic_form, reversible_spectrum_with, seminorm};
use consensus_spectra::{Family, GraphSchedule, PiGeometry, Rule, RuleParams, StochasticMatrix, Tolerances};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Suite {
    Soundness,
    Identities,
    Quadratic,
    SlowExamples,
    All,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Soundness => "soundness",
            Suite::Identities => "identities",
            Suite::Quadratic => "quadratic",
            Suite::SlowExamples => "slow_examples",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub suite: &'static str,
    pub case: String,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteCount {
    pub suite: &'static str,
    pub cases: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub seed: u64,
    pub suites: Vec<SuiteCount>,
    pub failures: Vec<Failure>,
}

impl Outcome {
    pub fn csv(&self) -> String {
        let mut s = String::from("suite,case,detail\n");
        for f in &self.failures {
            s.push_str(&format!("{},{},\"{}\"\n", f.suite, f.case, f.detail.replace('"', "\"\"")));
        }
        s
    }

    pub fn summary(&self) -> String {
        self.suites
            .iter()
            .map(|c| {
                let k = self.failures.iter().filter(|f| f.suite == c.suite).count();
                format!("{}: {} cases, {k} failures", c.suite, c.cases)
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

pub fn run(suite: Suite, seed: u64, tol: &Tolerances) -> Result<Outcome> {
    let suites = match suite {
        Suite::All => vec![Suite::Soundness, Suite::Identities, Suite::Quadratic, Suite::SlowExamples],
        s => vec![s],
    };
    let mut out = Outcome {
        seed,
        suites: Vec::new(),
        failures: Vec::new(),
    };
    for s in suites {
        let (cases, failures) = match s {
            Suite::Soundness => soundness(seed, tol)?,
            Suite::Identities => identities(seed, tol)?,
            Suite::Quadratic => quadratic(seed, tol)?,
            Suite::SlowExamples => slow_examples(seed, tol)?,
            Suite::All => unreachable!(),
        };
        out.suites.push(SuiteCount { suite: s.name(), cases });
        out.failures.extend(failures);
    }
    Ok(out)
}

fn fail(suite: Suite, case: impl Into<String>, detail: impl Into<String>) -> Failure {
    Failure {
        suite: suite.name(),
        case: case.into(),
        detail: detail.into(),
    }
}

/// Every bound against the exact spectrum on 200 random graphs.
fn soundness(seed: u64, tol: &Tolerances) -> Result<(usize, Vec<Failure>)> {
    let mut r = rng(seed);
    let graphs: Vec<_> = (0..200)
        .map(|_| {
            let n = r.gen_range(4..=12);
            random_connected(n, r.gen_range(0.05..0.6), &mut r)
        })
        .collect();
    let rules = [Rule::Metropolis, Rule::LazyMetropolis, Rule::EqualNeighbor];
    let per: Vec<Vec<Failure>> = graphs
        .par_iter()
        .enumerate()
        .map(|(k, g)| -> Result<Vec<Failure>> {
            let mut f = Vec::new();
            for rule in rules {
                let a = rule.matrix(g, &RuleParams::default())?;
                let rep = matrix_report(&format!("random_{k}"), Some(rule), &a, tol)?;
                for c in rep.failed_checks() {
                    f.push(fail(
                        Suite::Soundness,
                        format!("random_{k}/{rule}"),
                        format!("{}: bound {} vs exact {}", c.name, c.bound, c.exact),
                    ));
                }
            }
            Ok(f)
        })
        .collect::<Result<_>>()?;
    Ok((graphs.len() * rules.len(), per.into_iter().flatten().collect()))
}

fn random_weights(g: &consensus_spectra::DirectedGraph, symmetric: bool, r: &mut impl Rng) -> StochasticMatrix {
    let n = g.n();
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        w[i * n + i] = r.gen_range(0.05..1.0);
        for &j in g.in_neighbors(i) {
            if !symmetric || j > i {
                let x = r.gen_range(0.05..1.0);
                w[i * n + j] = x;
                if symmetric {
                    w[j * n + i] = x;
                }
            }
        }
    }
    for i in 0..n {
        let s: f64 = w[i * n..(i + 1) * n].iter().sum();
        w[i * n..(i + 1) * n].iter_mut().for_each(|v| *v /= s);
    }
    StochasticMatrix::from_dense(n, w, 1e-12).expect("rows normalised")
}

/// Green formula, variance identity, seminorm inequality, adjoint
/// involution and the reversible-square identity, 10^4 cases each.
fn identities(seed: u64, tol: &Tolerances) -> Result<(usize, Vec<Failure>)> {
    const CASES: usize = 10_000;
    let mut r = rng(seed);
    let mut failures = Vec::new();
    let mut check = |name: &str, k: usize, err: f64| {
        if !(err <= 1e-9) {
            failures.push(fail(Suite::Identities, format!("{name}/{k}"), format!("error {err:e}")));
        }
    };
    let mut reversible = Vec::new();
    for _ in 0..500 {
        let n = r.gen_range(3..=10);
        let g = random_connected(n, r.gen_range(0.0..0.7), &mut r);
        let a = random_weights(&g, true, &mut r);
        let pi = perron_with(&a, tol)?.into_vec();
        reversible.push((a, pi));
    }
    for k in 0..CASES {
        let (a, pi) = &reversible[k % reversible.len()];
        let geo = PiGeometry::new(pi);
        let x: Vec<f64> = (0..a.n()).map(|_| r.gen_range(-1.0..1.0)).collect();
        check("green", k, (quadratic_form(a, pi, &x) - green_sum(a, pi, &x)).abs());
        let y = geo.project_out_constants(&x);
        check("variance", k, (geo.inner(&y, &y) - geo.variance_sum(&y)).abs());
        check("seminorm", k, (2f64.sqrt() * geo.norm(&y) - seminorm(&y)?).max(0.0));
    }
    for k in 0..CASES {
        let n = r.gen_range(2..=8);
        let g = random_strongly_connected(n, r.gen_range(0.0..0.5), &mut r);
        let a = random_weights(&g, false, &mut r);
        let pi = perron_with(&a, tol)?;
        let adj = a.adjoint(&pi);
        let back = adj.adjoint(&pi);
        let inv = a.data().iter().zip(back.data()).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        check("adjoint_involution", k, inv);
        check("adjoint_stochastic", k, adj.max_row_sum_error());
        let (rev, rpi) = &reversible[k % reversible.len()];
        let s = reversible_spectrum_with(rev, rpi, tol)?;
        let (h, hpi) = gram(rev)?;
        let hl2 = reversible_spectrum_with(&h, &hpi, tol)?.lambda2;
        check("reversible_square", k, (hl2 - s.lambda2.powi(2).max(s.lambda_n.powi(2))).abs());
    }
    Ok((6 * CASES, failures))
}

/// Variance contraction of Metropolis and Lazy Metropolis on 50 generated
/// schedules per size.
fn quadratic(seed: u64, tol: &Tolerances) -> Result<(usize, Vec<Failure>)> {
    let mut r = rng(seed);
    let mut jobs = Vec::new();
    for n in [8usize, 16, 32] {
        for _ in 0..50 {
            jobs.push((n, r.gen::<u64>(), r.gen_range(0.0..0.3)));
        }
    }
    let per: Vec<Vec<Failure>> = jobs
        .par_iter()
        .map(|&(n, s, p)| -> Result<Vec<Failure>> {
            let sched = GraphSchedule::generated(n, s, 200, p)?;
            let mut f = Vec::new();
            for (rule, bound) in [
                (Rule::Metropolis, quadratic_metropolis_bound(n)),
                (Rule::LazyMetropolis, quadratic_lazy_bound(n)),
            ] {
                let rep = contraction_check(&sched, rule, &RuleParams::default(), 200, 2, s, tol)?;
                let cap = bound * bound + 1e-10;
                if rep.worst_ratio > cap || rep.violations > 0 {
                    f.push(fail(
                        Suite::Quadratic,
                        format!("n{n}_seed{s}/{rule}"),
                        format!("worst ratio {} vs {cap}, {} steps above beta", rep.worst_ratio, rep.violations),
                    ));
                }
            }
            Ok(f)
        })
        .collect::<Result<_>>()?;
    Ok((2 * jobs.len(), per.into_iter().flatten().collect()))
}

/// Two-star relabelling, barbell gap scale and butterfly gram bounds.
fn slow_examples(seed: u64, tol: &Tolerances) -> Result<(usize, Vec<Failure>)> {
    let mut failures = Vec::new();
    let mut cases = 0;

    let n = 12;
    let s = ot_two_star_schedule(n)?;
    let x0 = random_x0(n, &mut rng(seed));
    let en = simulate(&s, Rule::EqualNeighbor, &RuleParams::default(), &x0, 100_000, tol)?;
    let met = simulate(&s, Rule::Metropolis, &RuleParams::default(), &x0, 100_000, tol)?;
    cases += 2;
    if en.rho_hat() < 0.875 {
        failures.push(fail(Suite::SlowExamples, "ot_two_star_12/equal_neighbor", format!("rho_hat {} below 0.875", en.rho_hat())));
    }
    let fast = quadratic_metropolis_bound(n);
    if met.rho_hat() > fast {
        failures.push(fail(Suite::SlowExamples, "ot_two_star_12/metropolis", format!("rho_hat {} above {fast}", met.rho_hat())));
    }

    for p in 3..=8 {
        cases += 1;
        let g = make_family(Family::Barbell, p)?;
        let a = equal_neighbor(&g)?;
        let pi = perron_with(&a, tol)?;
        let l2 = reversible_spectrum_with(&a, &pi, tol)?.lambda2;
        let scaled = (1.0 - l2) * (g.n() as f64).powi(3);
        if !(1.0..=80.0).contains(&scaled) {
            failures.push(fail(Suite::SlowExamples, format!("barbell_{p}"), format!("(1 - lambda2) n^3 = {scaled}")));
        }
    }

    for m in 3..=7 {
        cases += 1;
        let g = make_family(Family::Butterfly, m)?;
        let b = equal_neighbor(&g)?;
        let (h, pi) = gram(&b)?;
        let l2 = reversible_spectrum_with(&h, &pi, tol)?.lambda2;
        let ba = analytic_gram_bound(&b, &pi);
        if l2 > ba + tol.soundness || alpha(&b, &pi) <= 0.0 {
            failures.push(fail(Suite::SlowExamples, format!("butterfly_{m}"), format!("lambda2(B^dag B) {l2} vs beta_a {ba}")));
        }
    }
    Ok((cases, failures))
}
