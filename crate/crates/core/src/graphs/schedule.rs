//! Time-varying communication graphs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::random::{random_connected, rng};
use super::{io, DirectedGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Constant,
    Periodic,
    Generated,
}

/// The graph used at each step `t >= 1`.
#[derive(Debug, Clone)]
pub struct GraphSchedule {
    kind: ScheduleKind,
    n: usize,
    graphs: Vec<DirectedGraph>,
    horizon: Option<usize>,
    seed: Option<u64>,
}

/// On-disk description. Graph paths are resolved against the schedule file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleFile {
    kind: ScheduleKind,
    #[serde(default)]
    graphs: Vec<String>,
    period: Option<usize>,
    n: Option<usize>,
    seed: Option<u64>,
    horizon: Option<usize>,
    extra_edge_prob: Option<f64>,
}

impl GraphSchedule {
    pub fn constant(g: DirectedGraph) -> Self {
        Self {
            kind: ScheduleKind::Constant,
            n: g.n(),
            graphs: vec![g],
            horizon: None,
            seed: None,
        }
    }

    /// Repeats `graphs` with period `graphs.len()`.
    pub fn periodic(graphs: Vec<DirectedGraph>) -> Result<Self> {
        let n = Self::common_n(&graphs)?;
        Ok(Self {
            kind: ScheduleKind::Periodic,
            n,
            graphs,
            horizon: None,
            seed: None,
        })
    }

    /// `horizon` seeded random connected bidirectional graphs on `n` nodes.
    pub fn generated(n: usize, seed: u64, horizon: usize, extra_edge_prob: f64) -> Result<Self> {
        if n == 0 || horizon == 0 {
            return Err(Error::Parameter("generated schedule needs n >= 1 and horizon >= 1".into()));
        }
        if !(0.0..=1.0).contains(&extra_edge_prob) {
            return Err(Error::Parameter(format!("edge probability {extra_edge_prob} outside [0, 1]")));
        }
        let mut r = rng(seed);
        let graphs = (0..horizon)
            .map(|_| random_connected(n, extra_edge_prob, &mut r))
            .collect();
        Ok(Self {
            kind: ScheduleKind::Generated,
            n,
            graphs,
            horizon: Some(horizon),
            seed: Some(seed),
        })
    }

    fn common_n(graphs: &[DirectedGraph]) -> Result<usize> {
        let n = graphs
            .first()
            .ok_or_else(|| Error::Parameter("schedule needs at least one graph".into()))?
            .n();
        if let Some(k) = graphs.iter().position(|g| g.n() != n) {
            return Err(Error::Parameter(format!(
                "graph {} has {} nodes, expected {n}",
                k + 1,
                graphs[k].n()
            )));
        }
        Ok(n)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let spec: ScheduleFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        match spec.kind {
            ScheduleKind::Generated => {
                let n = spec
                    .n
                    .ok_or_else(|| Error::Parameter("generated schedule needs `n`".into()))?;
                Self::generated(
                    n,
                    spec.seed.unwrap_or(0),
                    spec.horizon.unwrap_or(1),
                    spec.extra_edge_prob.unwrap_or(0.0),
                )
            }
            kind => {
                let graphs = spec
                    .graphs
                    .iter()
                    .map(|p| io::read_graph(base.join(p)))
                    .collect::<Result<Vec<_>>>()?;
                if kind == ScheduleKind::Constant {
                    if graphs.len() != 1 {
                        return Err(Error::Parameter("constant schedule takes exactly one graph".into()));
                    }
                    return Ok(Self::constant(graphs.into_iter().next().unwrap()));
                }
                if let Some(p) = spec.period {
                    if p != graphs.len() {
                        return Err(Error::Parameter(format!(
                            "period {p} does not match {} listed graphs",
                            graphs.len()
                        )));
                    }
                }
                let mut s = Self::periodic(graphs)?;
                s.horizon = spec.horizon;
                Ok(s)
            }
        }
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Distinct graphs, in step order.
    pub fn graphs(&self) -> &[DirectedGraph] {
        &self.graphs
    }

    /// Number of distinct steps: 1, the period, or the horizon.
    pub fn period(&self) -> usize {
        self.graphs.len()
    }

    /// Last usable step, if any.
    pub fn horizon(&self) -> Option<usize> {
        self.horizon
    }

    /// Index into [`graphs`](Self::graphs) of the graph used at step
    /// `t >= 1`; `None` past the horizon.
    pub fn step_index(&self, t: usize) -> Option<usize> {
        if t == 0 || self.horizon.is_some_and(|h| t > h) {
            return None;
        }
        let k = match self.kind {
            ScheduleKind::Constant => 0,
            ScheduleKind::Periodic => (t - 1) % self.graphs.len(),
            ScheduleKind::Generated => t - 1,
        };
        (k < self.graphs.len()).then_some(k)
    }

    pub fn graph_at(&self, t: usize) -> Option<&DirectedGraph> {
        self.step_index(t).map(|k| &self.graphs[k])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{make_family, Family};

    #[test]
    fn step_indexing() {
        let a = make_family(Family::Ring, 5).unwrap();
        let b = make_family(Family::Star, 5).unwrap();
        let s = GraphSchedule::periodic(vec![a.clone(), b.clone()]).unwrap();
        assert_eq!(s.graph_at(1), Some(&a));
        assert_eq!(s.graph_at(2), Some(&b));
        assert_eq!(s.graph_at(5), Some(&a));
        assert_eq!(s.graph_at(0), None);
        let c = GraphSchedule::constant(b.clone());
        assert_eq!(c.graph_at(1000), Some(&b));
    }

    #[test]
    fn mixed_sizes_rejected() {
        let a = make_family(Family::Ring, 5).unwrap();
        let b = make_family(Family::Star, 6).unwrap();
        assert!(GraphSchedule::periodic(vec![a, b]).is_err());
    }

    #[test]
    fn generated_has_horizon() {
        let s = GraphSchedule::generated(8, 1, 3, 0.2).unwrap();
        assert!(s.graph_at(3).is_some());
        assert!(s.graph_at(4).is_none());
        assert!(s.graphs().iter().all(|g| g.is_strongly_connected()));
    }

    #[test]
    fn json_file() {
        let dir = std::env::temp_dir().join(format!("cs-sched-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("a.txt"), "n 3\n1 2\n2 1\n2 3\n3 2\n").unwrap();
        std::fs::write(dir.join("b.txt"), "n 3\n1 3\n3 1\n2 3\n3 2\n").unwrap();
        std::fs::write(
            dir.join("s.json"),
            r#"{"kind": "periodic", "period": 2, "graphs": ["a.txt", "b.txt"]}"#,
        )
        .unwrap();
        let s = GraphSchedule::from_json_file(dir.join("s.json")).unwrap();
        assert_eq!(s.period(), 2);
        assert!(s.graph_at(2).unwrap().has_edge(0, 2));
        std::fs::write(dir.join("bad.json"), r#"{"kind": "periodic", "period": 3, "graphs": ["a.txt"]}"#).unwrap();
        assert!(GraphSchedule::from_json_file(dir.join("bad.json")).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
