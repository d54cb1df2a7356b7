//! Simulation of `x(t) = A(t) x(t-1)` over a schedule, empirical rates and
//! the slow-convergence scenarios.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::graphs::{DirectedGraph, GraphSchedule};
use crate::matrices::{schedule_matrices, Rule, RuleParams, StepMatrix};
use crate::spectral::{second_singular_with, seminorm, PiGeometry};

/// `x` uniform in `[-1, 1]^n` with its arithmetic mean removed.
pub fn random_x0(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let m = x.iter().sum::<f64>() / n as f64;
    for v in &mut x {
        *v -= m;
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: usize,
    /// Variance `|x - <x,1>_pi|_pi^2` with the Perron vector of step `t`
    /// (step 1 at `t = 0`).
    #[serde(rename = "V")]
    pub v: f64,
    /// Seminorm `max x - min x`.
    #[serde(rename = "N")]
    pub n: f64,
}

/// Log-slope estimate of the convergence rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalRate {
    /// `0` when the trajectory converged before the window had enough
    /// points.
    pub rho: f64,
    pub converged: bool,
    /// Snapshots used by the fit.
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub schedule_ref: Option<String>,
    pub rule: Rule,
    pub seed: Option<u64>,
    pub x0: Vec<f64>,
    /// Steps actually run.
    pub steps: usize,
    pub snapshots: Vec<Snapshot>,
    pub final_state: Vec<f64>,
    pub pi_constant: bool,
    /// `<x(0), 1>_pi` when the Perron vector is constant.
    pub consensus_value: Option<f64>,
    /// Largest drift of `<x(t), 1>_pi`, constant Perron vector only.
    pub conservation_error: Option<f64>,
    /// Stopped early because the seminorm fell below the threshold.
    pub converged: bool,
    pub rate: EmpiricalRate,
}

/// Header written above the `t,V,N` rows of a trajectory dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryHeader {
    pub schedule_ref: Option<String>,
    pub rule: Rule,
    pub seed: Option<u64>,
    pub n: usize,
    pub steps: usize,
    pub rho_hat: f64,
    pub converged: bool,
    pub consensus_value: Option<f64>,
}

impl Trajectory {
    pub fn rho_hat(&self) -> f64 {
        self.rate.rho
    }

    pub fn header(&self) -> TrajectoryHeader {
        TrajectoryHeader {
            schedule_ref: self.schedule_ref.clone(),
            rule: self.rule,
            seed: self.seed,
            n: self.x0.len(),
            steps: self.steps,
            rho_hat: self.rate.rho,
            converged: self.converged,
            consensus_value: self.consensus_value,
        }
    }

    /// `t,V,N` rows with a header line.
    pub fn csv(&self) -> String {
        let mut s = String::from("t,V,N\n");
        for p in &self.snapshots {
            s.push_str(&format!("{},{},{}\n", p.t, p.v, p.n));
        }
        s
    }
}

fn pi_is_constant(steps: &[StepMatrix], tol: f64) -> bool {
    steps.iter().all(|s| {
        s.pi.iter()
            .zip(steps[0].pi.iter())
            .all(|(a, b)| (a - b).abs() <= tol)
    })
}

fn variance(geo: &PiGeometry, x: &[f64]) -> f64 {
    let y = geo.project_out_constants(x);
    geo.inner(&y, &y)
}

/// Runs `steps` updates from `x0`, stopping early once the seminorm drops
/// below `tol.converged`.
pub fn simulate(
    schedule: &GraphSchedule,
    rule: Rule,
    params: &RuleParams,
    x0: &[f64],
    steps: usize,
    tol: &Tolerances,
) -> Result<Trajectory> {
    let n = schedule.n();
    if x0.len() != n {
        return Err(Error::Parameter(format!("x0 has {} entries, schedule has {n} nodes", x0.len())));
    }
    if steps > tol.max_steps {
        return Err(Error::Parameter(format!("{steps} steps exceed the cap of {}", tol.max_steps)));
    }
    if let Some(h) = schedule.horizon().filter(|&h| h < steps) {
        return Err(Error::Parameter(format!("schedule ends at step {h}, {steps} requested")));
    }
    let mats = schedule_matrices(schedule, rule, params)?;
    let geos: Vec<PiGeometry> = mats.iter().map(|s| PiGeometry::new(&s.pi)).collect();
    let pi_constant = pi_is_constant(&mats, tol.reversible);
    let mean0 = geos[0].mean(x0);

    let mut x = x0.to_vec();
    let mut snapshots = vec![Snapshot {
        t: 0,
        v: variance(&geos[0], &x),
        n: seminorm(&x)?,
    }];
    let mut drift = 0.0f64;
    let mut converged = snapshots[0].n < tol.converged;
    let mut done = 0;
    while !converged && done < steps {
        let t = done + 1;
        let k = schedule.step_index(t).expect("horizon checked");
        x = mats[k].matrix.apply(&x);
        if pi_constant {
            drift = drift.max((geos[k].mean(&x) - mean0).abs());
        }
        let s = Snapshot {
            t,
            v: variance(&geos[k], &x),
            n: seminorm(&x)?,
        };
        converged = s.n < tol.converged;
        snapshots.push(s);
        done = t;
    }
    let mut traj = Trajectory {
        schedule_ref: None,
        rule,
        seed: None,
        x0: x0.to_vec(),
        steps: done,
        snapshots,
        final_state: x,
        pi_constant,
        consensus_value: pi_constant.then_some(mean0),
        conservation_error: pi_constant.then_some(drift),
        converged,
        rate: EmpiricalRate {
            rho: 0.0,
            converged: true,
            points: 0,
        },
    };
    traj.rate = empirical_rate(&traj, tol.rate_window)?;
    Ok(traj)
}

/// Least-squares slope of `ln N(x(t))` over the trailing `window` fraction
/// of the steps, exponentiated.
pub fn empirical_rate(traj: &Trajectory, window: f64) -> Result<EmpiricalRate> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::Parameter(format!("rate window {window} outside (0, 1]")));
    }
    let last = traj.snapshots.last().map_or(0, |s| s.t);
    let start = ((last as f64) * (1.0 - window)).floor() as usize;
    let floor = 10.0 * f64::EPSILON;
    let pts: Vec<(f64, f64)> = traj
        .snapshots
        .iter()
        .filter(|s| s.t >= start && s.n > floor)
        .map(|s| (s.t as f64, s.n.ln()))
        .collect();
    if pts.len() < 10 {
        if traj.converged {
            return Ok(EmpiricalRate {
                rho: 0.0,
                converged: true,
                points: pts.len(),
            });
        }
        return Err(Error::Parameter(format!(
            "only {} usable snapshots in the rate window; run more steps",
            pts.len()
        )));
    }
    let m = pts.len() as f64;
    let (st, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mt, my) = (st / m, sy / m);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), p| {
        (a + (p.0 - mt) * (p.1 - my), b + (p.0 - mt) * (p.0 - mt))
    });
    Ok(EmpiricalRate {
        rho: (num / den).exp(),
        converged: false,
        points: pts.len(),
    })
}

/// Period-`n/2` schedule of bidirectional two-stars on two fixed halves
/// of the agents. At step `t` the centres are agents `k` and `n/2 + k`
/// with `k = (t - 1) mod n/2`, so the hub role rotates through each half.
pub fn ot_two_star_schedule(n: usize) -> Result<GraphSchedule> {
    if n % 2 != 0 || n < 6 {
        return Err(Error::Parameter(format!("two-star schedule needs an even n >= 6, got {n}")));
    }
    let h = n / 2;
    let graphs = (0..h)
        .map(|k| {
            let (ca, cb) = (k, h + k);
            let mut links = vec![(ca, cb)];
            links.extend((0..h).filter(|&i| i != ca).map(|i| (ca, i)));
            links.extend((h..n).filter(|&i| i != cb).map(|i| (cb, i)));
            DirectedGraph::new(n, links.into_iter().flat_map(|(a, b)| [(a, b), (b, a)]))
        })
        .collect::<Result<Vec<_>>>()?;
    GraphSchedule::periodic(graphs)
}

/// Outcome of [`contraction_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    /// `sup_t lambda_2(A(t)^dagger A(t))`.
    pub beta: f64,
    /// Largest observed `V(t) / V(t-1)`.
    pub worst_ratio: f64,
    pub violations: usize,
    pub checked: usize,
}

/// Checks `V(t) <= beta V(t-1)` along `trials` random starts. Ratios are
/// only examined while `V(t-1)` is above `tol.contraction_floor * V(0)`,
/// where rounding would dominate.
pub fn contraction_check(
    schedule: &GraphSchedule,
    rule: Rule,
    params: &RuleParams,
    steps: usize,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<ContractionReport> {
    let n = schedule.n();
    if let Some(h) = schedule.horizon().filter(|&h| h < steps) {
        return Err(Error::Parameter(format!("schedule ends at step {h}, {steps} requested")));
    }
    let mats = schedule_matrices(schedule, rule, params)?;
    if let Some(k) = mats.iter().position(|s| {
        s.pi.iter().zip(mats[0].pi.iter()).any(|(a, b)| (a - b).abs() > tol.reversible)
    }) {
        return Err(Error::Assumption {
            assumption: "A3",
            step: k + 1,
            detail: "Perron vector differs from step 1".into(),
        });
    }
    let beta = mats
        .par_iter()
        .map(|s| second_singular_with(&s.matrix, tol).map(|x| x * x))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let geo = PiGeometry::new(&mats[0].pi);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<Vec<f64>> = (0..trials).map(|_| random_x0(n, &mut rng)).collect();
    let per: Vec<(f64, usize, usize)> = starts
        .par_iter()
        .map(|x0| {
            let mut x = x0.clone();
            let v0 = variance(&geo, &x);
            let mut prev = v0;
            let (mut worst, mut bad, mut checked) = (0.0f64, 0, 0);
            for t in 1..=steps {
                if prev <= tol.contraction_floor * v0 {
                    break;
                }
                let k = schedule.step_index(t).expect("horizon checked");
                x = mats[k].matrix.apply(&x);
                let v = variance(&geo, &x);
                worst = worst.max(v / prev);
                if v > beta * prev + tol.contraction_slack {
                    bad += 1;
                }
                checked += 1;
                prev = v;
            }
            (worst, bad, checked)
        })
        .collect();
    Ok(ContractionReport {
        beta,
        worst_ratio: per.iter().map(|p| p.0).fold(0.0, f64::max),
        violations: per.iter().map(|p| p.1).sum(),
        checked: per.iter().map(|p| p.2).sum(),
    })
}
