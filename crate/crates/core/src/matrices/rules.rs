use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{perron, PerronVector, StochasticMatrix};
use crate::error::{Error, Result};
use crate::graphs::{DirectedGraph, GraphSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Metropolis,
    LazyMetropolis,
    EqualNeighbor,
    FixedWeight,
}

impl Rule {
    pub const ALL: [Rule; 4] = [
        Rule::Metropolis,
        Rule::LazyMetropolis,
        Rule::EqualNeighbor,
        Rule::FixedWeight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Metropolis => "metropolis",
            Rule::LazyMetropolis => "lazy_metropolis",
            Rule::EqualNeighbor => "equal_neighbor",
            Rule::FixedWeight => "fixed_weight",
        }
    }

    /// Whether the rule is only defined on bidirectional graphs.
    pub fn needs_bidirectional(self) -> bool {
        matches!(self, Rule::Metropolis | Rule::LazyMetropolis)
    }

    pub fn matrix(self, g: &DirectedGraph, params: &RuleParams) -> Result<StochasticMatrix> {
        match self {
            Rule::Metropolis => metropolis(g),
            Rule::LazyMetropolis => lazy_metropolis(g),
            Rule::EqualNeighbor => equal_neighbor(g),
            Rule::FixedWeight => fixed_weight(g, &params.q_for(g)),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "metropolis" | "met" | "m" => Ok(Rule::Metropolis),
            "lazy_metropolis" | "lazy" | "l" => Ok(Rule::LazyMetropolis),
            "equal_neighbor" | "equalneighbor" | "en" | "n" => Ok(Rule::EqualNeighbor),
            "fixed_weight" | "fixedweight" | "fw" | "w" => Ok(Rule::FixedWeight),
            _ => Err(Error::Parameter(format!("unknown rule `{s}`"))),
        }
    }
}

/// Extra inputs of the FixedWeight rule.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RuleParams {
    /// Per-node bounds `q_i >= d_i`. When absent every node uses the
    /// largest degree of the graph (or of the whole schedule).
    pub q: Option<Vec<usize>>,
}

impl RuleParams {
    pub fn with_q(q: Vec<usize>) -> Self {
        Self { q: Some(q) }
    }

    pub fn q_for(&self, g: &DirectedGraph) -> Vec<usize> {
        self.q
            .clone()
            .unwrap_or_else(|| vec![g.max_degree(); g.n()])
    }

    /// Pins the default `q` to the largest degree over the whole schedule so
    /// the FixedWeight Perron vector stays constant in time.
    pub fn resolved(&self, schedule: &GraphSchedule) -> Self {
        match &self.q {
            Some(_) => self.clone(),
            None => {
                let d = schedule.graphs().iter().map(DirectedGraph::max_degree).max().unwrap_or(1);
                Self::with_q(vec![d; schedule.n()])
            }
        }
    }
}

fn require_bidirectional(g: &DirectedGraph, rule: Rule) -> Result<()> {
    if g.is_bidirectional() {
        Ok(())
    } else {
        Err(Error::Contract(format!("{rule} weights need a bidirectional graph")))
    }
}

/// Row `i` gets `weight(i, j)` on every in-neighbour `j` and the remainder
/// on the diagonal.
fn build(g: &DirectedGraph, weight: impl Fn(usize, usize) -> f64) -> StochasticMatrix {
    let n = g.n();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        let mut off = 0.0;
        for &j in g.in_neighbors(i) {
            let w = weight(i, j);
            data[i * n + j] = w;
            off += w;
        }
        data[i * n + i] = 1.0 - off;
    }
    StochasticMatrix::from_raw(n, data)
}

/// `M_ij = 1 / max(d_i, d_j)`.
pub fn metropolis(g: &DirectedGraph) -> Result<StochasticMatrix> {
    require_bidirectional(g, Rule::Metropolis)?;
    let d = g.degrees();
    Ok(build(g, |i, j| 1.0 / d[i].max(d[j]) as f64))
}

/// `L_ij = 1 / (2 max(d_i - 1, d_j - 1))`.
pub fn lazy_metropolis(g: &DirectedGraph) -> Result<StochasticMatrix> {
    require_bidirectional(g, Rule::LazyMetropolis)?;
    let d = g.degrees();
    Ok(build(g, |i, j| 1.0 / (2 * (d[i] - 1).max(d[j] - 1)) as f64))
}

/// `N_ij = 1 / d_i` on the in-neighbours of `i`, itself included.
pub fn equal_neighbor(g: &DirectedGraph) -> Result<StochasticMatrix> {
    let d = g.degrees();
    let n = g.n();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        let w = 1.0 / d[i] as f64;
        data[i * n + i] = w;
        for &j in g.in_neighbors(i) {
            data[i * n + j] = w;
        }
    }
    Ok(StochasticMatrix::from_raw(n, data))
}

/// `W_ij = 1 / q_i` off the diagonal, `W_ii = 1 - (d_i - 1) / q_i`.
pub fn fixed_weight(g: &DirectedGraph, q: &[usize]) -> Result<StochasticMatrix> {
    if q.len() != g.n() {
        return Err(Error::Parameter(format!("q has {} entries, expected {}", q.len(), g.n())));
    }
    if let Some(i) = (0..g.n()).find(|&i| q[i] < g.degree(i)) {
        return Err(Error::Parameter(format!(
            "q_{} = {} is below the degree {} of node {}",
            i + 1,
            q[i],
            g.degree(i),
            i + 1
        )));
    }
    let n = g.n();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        let w = 1.0 / q[i] as f64;
        for &j in g.in_neighbors(i) {
            data[i * n + j] = w;
        }
        // 1 - (d_i - 1) / q_i, written so that q = d matches EqualNeighbor bit for bit
        data[i * n + i] = (q[i] + 1 - g.degree(i)) as f64 / q[i] as f64;
    }
    Ok(StochasticMatrix::from_raw(n, data))
}

/// Matrix and Perron vector of one distinct schedule step.
#[derive(Debug, Clone)]
pub struct StepMatrix {
    pub matrix: StochasticMatrix,
    pub pi: PerronVector,
}

/// One entry per distinct graph of the schedule, in order. Fails on the
/// first step whose graph breaks strong connectivity or the rule's
/// requirements.
pub fn schedule_matrices(
    schedule: &GraphSchedule,
    rule: Rule,
    params: &RuleParams,
) -> Result<Vec<StepMatrix>> {
    let params = params.resolved(schedule);
    schedule
        .graphs()
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let step = k + 1;
            if !g.is_strongly_connected() {
                return Err(Error::Assumption {
                    assumption: "A1",
                    step,
                    detail: "communication graph is not strongly connected".into(),
                });
            }
            let matrix = rule.matrix(g, &params).map_err(|e| Error::Assumption {
                assumption: "A2",
                step,
                detail: e.to_string(),
            })?;
            let pi = perron(&matrix)?;
            Ok(StepMatrix { matrix, pi })
        })
        .collect()
}

/// Schedule-wide infima of the diagonal and of `pi_i A_ij`, and the Perron
/// drift `nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleInfima {
    pub a: f64,
    pub alpha: f64,
    pub nu: f64,
}

/// `alpha(A) = min pi_i A_ij` over the support edges, self-loops included.
pub(crate) fn alpha_of(a: &StochasticMatrix, pi: &[f64]) -> f64 {
    let n = a.n();
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            let x = a.get(i, j);
            if x > 0.0 {
                best = best.min(pi[i] * x);
            }
        }
    }
    best
}

pub(crate) fn nu_of(steps: &[StepMatrix], periodic: bool) -> f64 {
    if steps.len() < 2 {
        return 1.0;
    }
    let mut pairs: Vec<(usize, usize)> = (0..steps.len() - 1).map(|k| (k, k + 1)).collect();
    if periodic {
        pairs.push((steps.len() - 1, 0));
    }
    let mut worst = 1.0f64;
    for (a, b) in pairs {
        for (x, y) in steps[a].pi.iter().zip(steps[b].pi.iter()) {
            worst = worst.max((y / x).sqrt());
        }
    }
    worst
}

pub fn schedule_infima(
    schedule: &GraphSchedule,
    rule: Rule,
    params: &RuleParams,
) -> Result<ScheduleInfima> {
    let steps = schedule_matrices(schedule, rule, params)?;
    let a = steps
        .iter()
        .map(|s| s.matrix.diagonal_min())
        .fold(f64::INFINITY, f64::min);
    let alpha = steps
        .iter()
        .map(|s| alpha_of(&s.matrix, &s.pi))
        .fold(f64::INFINITY, f64::min);
    let periodic = schedule.kind() != crate::graphs::ScheduleKind::Generated;
    Ok(ScheduleInfima {
        a,
        alpha,
        nu: nu_of(&steps, periodic),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{make_family, Family};
    use crate::matrices::perron;

    #[test]
    fn metropolis_star() {
        let g = make_family(Family::Star, 4).unwrap();
        let m = metropolis(&g).unwrap();
        assert_eq!(m.get(1, 0), 0.25);
        assert_eq!(m.get(1, 1), 0.75);
        assert_eq!(m.max_asymmetry(), 0.0);
        let k2 = metropolis(&make_family(Family::Complete, 2).unwrap()).unwrap();
        assert_eq!(k2.rows(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
    }

    #[test]
    fn lazy_metropolis_entries() {
        let g = make_family(Family::Star, 4).unwrap();
        let l = lazy_metropolis(&g).unwrap();
        assert!((l.get(1, 0) - 1.0 / 6.0).abs() < 1e-16);
        assert!(l.diagonal_min() >= 0.5);
        // d = 2 on both ends: 1 / (2 max(1, 1)) = 1/2
        let k2 = lazy_metropolis(&make_family(Family::Complete, 2).unwrap()).unwrap();
        assert_eq!(k2.rows(), vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
    }

    #[test]
    fn metropolis_rejects_one_way_edges() {
        let g = make_family(Family::Butterfly, 3).unwrap();
        assert!(matches!(metropolis(&g), Err(Error::Contract(_))));
        assert!(matches!(lazy_metropolis(&g), Err(Error::Contract(_))));
    }

    #[test]
    fn equal_neighbor_ring_and_butterfly() {
        let g = make_family(Family::Ring, 5).unwrap();
        let p = equal_neighbor(&g).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let d = (i + 5 - j) % 5;
                let want = if d <= 1 || d == 4 { 1.0 / 3.0 } else { 0.0 };
                assert_eq!(p.get(i, j), want);
            }
        }
        // support is the reverse graph: row i lists the in-neighbours of i
        let b = make_family(Family::Butterfly, 3).unwrap();
        let pb = equal_neighbor(&b).unwrap();
        assert_eq!(pb.support(), &b.reverse());
        // node m = 3 (index 2) hears from 1, 4 and itself
        let row: Vec<f64> = pb.row(2).to_vec();
        let third = 1.0 / 3.0;
        assert_eq!(row, vec![third, 0.0, third, third, 0.0, 0.0]);
    }

    #[test]
    fn fixed_weight_entries() {
        let g = make_family(Family::Ring, 5).unwrap();
        let w = fixed_weight(&g, &[4; 5]).unwrap();
        assert_eq!(w.get(0, 1), 0.25);
        assert_eq!(w.get(0, 0), 0.5);
        assert_eq!(fixed_weight(&g, &[3; 5]).unwrap(), equal_neighbor(&g).unwrap());
        assert!(fixed_weight(&g, &[2; 5]).is_err());
        let s = make_family(Family::Star, 5).unwrap();
        let q = vec![7, 3, 4, 5, 6];
        let pi = perron(&fixed_weight(&s, &q).unwrap()).unwrap();
        for i in 0..5 {
            assert!((pi[i] - q[i] as f64 / 25.0).abs() < 1e-14);
        }
    }

    #[test]
    fn metropolis_infima() {
        let s = GraphSchedule::generated(9, 4, 6, 0.2).unwrap();
        let inf = schedule_infima(&s, Rule::Metropolis, &RuleParams::default()).unwrap();
        let dmax = s.graphs().iter().map(|g| g.max_degree()).max().unwrap() as f64;
        assert!(inf.a >= 1.0 / dmax - 1e-15);
        assert!(inf.alpha >= 1.0 / (9.0 * dmax) - 1e-15);
        assert!((inf.nu - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disconnected_step_is_named() {
        let a = make_family(Family::Ring, 5).unwrap();
        let b = DirectedGraph::new(5, [(0, 1), (1, 0)]).unwrap();
        let s = GraphSchedule::periodic(vec![a, b]).unwrap();
        match schedule_infima(&s, Rule::EqualNeighbor, &RuleParams::default()) {
            Err(Error::Assumption { assumption, step, .. }) => {
                assert_eq!(assumption, "A1");
                assert_eq!(step, 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_schedule_has_unit_nu() {
        let s = GraphSchedule::constant(make_family(Family::Butterfly, 4).unwrap());
        let inf = schedule_infima(&s, Rule::EqualNeighbor, &RuleParams::default()).unwrap();
        assert_eq!(inf.nu, 1.0);
    }

    #[test]
    fn parse_rules() {
        assert_eq!("EN".parse::<Rule>().unwrap(), Rule::EqualNeighbor);
        assert_eq!("lazy-metropolis".parse::<Rule>().unwrap(), Rule::LazyMetropolis);
        assert!("gossip".parse::<Rule>().is_err());
    }
}
