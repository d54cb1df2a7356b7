//! Communication graphs, the example families, schedules and the
//! combinatorial metrics feeding the geometric bounds.
//!
//! Nodes are `0..n` internally and `1..n` in files. Every graph carries a
//! self-loop at each node. Degrees count the self-loop; distances, flows,
//! paths and congestion ignore it.

mod families;
mod flow;
mod geodesic;
pub mod io;
mod metrics;
pub mod random;
mod schedule;

pub use families::{make_family, Family};
pub use flow::{
    disjoint_path_family, edge_connectivity, k_diameter, k_diameter_profile, min_cost_paths,
    normalized_diameter, NormalizedDiameter,
};
pub use geodesic::{
    bottleneck_measure, geodesic_degree_sum_check, geodesic_family, Bottleneck, GeodesicStrategy,
};
pub use metrics::{diameter, distance_matrix, Distances};
pub use schedule::{GraphSchedule, ScheduleKind};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    n: usize,
    adj: Vec<bool>,
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
    arc_offset: Vec<usize>,
}

impl DirectedGraph {
    /// Builds a graph from 0-based directed edges. Self-loops are added at
    /// every node; duplicates are ignored.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("graph needs at least one node".into()));
        }
        let mut adj = vec![false; n * n];
        for i in 0..n {
            adj[i * n + i] = true;
        }
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::Parameter(format!(
                    "edge ({}, {}) out of range for n = {n}",
                    i + 1,
                    j + 1
                )));
            }
            adj[i * n + j] = true;
        }
        Ok(Self::from_adjacency(n, adj))
    }

    fn from_adjacency(n: usize, adj: Vec<bool>) -> Self {
        let mut out = vec![Vec::new(); n];
        let mut inn = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if i != j && adj[i * n + j] {
                    out[i].push(j);
                    inn[j].push(i);
                }
            }
        }
        let mut arc_offset = Vec::with_capacity(n + 1);
        let mut acc = 0;
        for o in &out {
            arc_offset.push(acc);
            acc += o.len();
        }
        arc_offset.push(acc);
        Self {
            n,
            adj,
            out,
            inn,
            arc_offset,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }

    /// Out-neighbours of `i`, self excluded, ascending.
    pub fn out_neighbors(&self, i: usize) -> &[usize] {
        &self.out[i]
    }

    /// In-neighbours of `i`, self excluded, ascending.
    pub fn in_neighbors(&self, i: usize) -> &[usize] {
        &self.inn[i]
    }

    /// In-degree of `i` including its self-loop.
    pub fn degree(&self, i: usize) -> usize {
        self.inn[i].len() + 1
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.degree(i)).collect()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|i| self.degree(i)).min().unwrap_or(0)
    }

    /// Number of edges, self-loops included.
    pub fn edge_count(&self) -> usize {
        self.arc_count() + self.n
    }

    /// Number of edges that are not self-loops.
    pub fn arc_count(&self) -> usize {
        self.arc_offset[self.n]
    }

    /// Dense index of the non-loop edge `(i, j)`.
    pub fn arc_id(&self, i: usize, j: usize) -> Option<usize> {
        self.out[i]
            .binary_search(&j)
            .ok()
            .map(|k| self.arc_offset[i] + k)
    }

    pub fn arc(&self, id: usize) -> (usize, usize) {
        let i = self.arc_offset.partition_point(|&o| o <= id) - 1;
        (i, self.out[i][id - self.arc_offset[i]])
    }

    /// Non-loop edges in lexicographic order.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.out[i].iter().map(move |&j| (i, j)))
    }

    /// All edges including self-loops, lexicographic.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| (0..self.n).filter(move |&j| self.adj[i * self.n + j]).map(move |j| (i, j)))
    }

    pub fn is_bidirectional(&self) -> bool {
        self.arcs().all(|(i, j)| self.has_edge(j, i))
    }

    /// In-degree equals out-degree at every node.
    pub fn is_eulerian(&self) -> bool {
        (0..self.n).all(|i| self.out[i].len() == self.inn[i].len())
    }

    pub fn is_strongly_connected(&self) -> bool {
        metrics::reaches_all(self, 0, false) && metrics::reaches_all(self, 0, true)
    }

    pub fn reverse(&self) -> Self {
        let n = self.n;
        let mut adj = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                adj[j * n + i] = self.adj[i * n + j];
            }
        }
        Self::from_adjacency(n, adj)
    }

    /// Same graph with node `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::Parameter("permutation length differs from n".into()));
        }
        Self::new(self.n, self.arcs().map(|(i, j)| (perm[i], perm[j])))
    }
}

/// One or more paths for every ordered pair of distinct nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PathFamily {
    n: usize,
    paths: Vec<Vec<Vec<usize>>>,
    /// Paths within each pair share no directed edge.
    pub edge_disjoint: bool,
    /// Every path is a shortest path.
    pub geodesic: bool,
}

impl PathFamily {
    pub(crate) fn new(n: usize, paths: Vec<Vec<Vec<usize>>>, edge_disjoint: bool, geodesic: bool) -> Self {
        debug_assert_eq!(paths.len(), n * n);
        Self {
            n,
            paths,
            edge_disjoint,
            geodesic,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Paths from `i` to `j` as node sequences starting at `i`.
    pub fn paths(&self, i: usize, j: usize) -> &[Vec<usize>] {
        &self.paths[i * self.n + j]
    }

    pub(crate) fn paths_mut(&mut self, i: usize, j: usize) -> &mut Vec<Vec<usize>> {
        &mut self.paths[i * self.n + j]
    }

    /// Ordered pairs `(i, j)`, `i != j`, with their paths.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, &[Vec<usize>])> + '_ {
        let n = self.n;
        (0..n * n)
            .filter(move |&k| k / n != k % n)
            .map(move |k| (k / n, k % n, self.paths[k].as_slice()))
    }

    /// Largest number of edges of any listed path.
    pub fn depth(&self) -> usize {
        self.pairs()
            .flat_map(|(_, _, ps)| ps.iter().map(|p| p.len() - 1))
            .max()
            .unwrap_or(0)
    }

    /// Checks the family against `g` and its own flags.
    pub fn validate(&self, g: &DirectedGraph) -> Result<()> {
        if g.n() != self.n {
            return Err(Error::Contract("family and graph sizes differ".into()));
        }
        let dist = if self.geodesic { Some(distance_matrix(g)) } else { None };
        for (i, j, ps) in self.pairs() {
            if ps.is_empty() {
                return Err(Error::Contract(format!("no path from {} to {}", i + 1, j + 1)));
            }
            let mut used = std::collections::HashSet::new();
            for p in ps {
                if p.first() != Some(&i) || p.last() != Some(&j) {
                    return Err(Error::Contract(format!("path does not join {} to {}", i + 1, j + 1)));
                }
                for w in p.windows(2) {
                    if w[0] == w[1] || !g.has_edge(w[0], w[1]) {
                        return Err(Error::Contract(format!(
                            "path uses missing edge ({}, {})",
                            w[0] + 1,
                            w[1] + 1
                        )));
                    }
                    if self.edge_disjoint && !used.insert((w[0], w[1])) {
                        return Err(Error::Contract(format!(
                            "paths from {} to {} share edge ({}, {})",
                            i + 1,
                            j + 1,
                            w[0] + 1,
                            w[1] + 1
                        )));
                    }
                }
                if let Some(d) = &dist {
                    if Some(p.len() - 1) != d.get(i, j) {
                        return Err(Error::Contract(format!(
                            "path from {} to {} is not a geodesic",
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_loops_are_added() {
        let g = DirectedGraph::new(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        assert!((0..3).all(|i| g.has_edge(i, i)));
        assert_eq!(g.edge_count(), 6);
        assert_eq!(g.degree(0), 2);
        assert!(g.is_strongly_connected());
        assert!(!g.is_bidirectional());
        assert!(g.is_eulerian());
    }

    #[test]
    fn arc_ids_round_trip() {
        let g = make_family(Family::Butterfly, 4).unwrap();
        for (id, (i, j)) in g.arcs().enumerate() {
            assert_eq!(g.arc_id(i, j), Some(id));
            assert_eq!(g.arc(id), (i, j));
        }
        assert_eq!(g.arc_id(0, 0), None);
    }

    #[test]
    fn out_of_range_edge() {
        assert!(DirectedGraph::new(2, [(0, 2)]).is_err());
        assert!(DirectedGraph::new(0, []).is_err());
    }

    #[test]
    fn reverse_of_chain_is_not_connected_forward() {
        let g = DirectedGraph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert!(!g.is_strongly_connected());
        let r = g.reverse();
        assert!(r.has_edge(2, 1) && !r.has_edge(1, 2));
    }
}
