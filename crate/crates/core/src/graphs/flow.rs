//! Unit-capacity flows on the non-loop edges: edge connectivity, edge-disjoint
//! path systems and the k-diameter estimates built from them.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::bfs_from;
use super::{DirectedGraph, PathFamily};
use crate::error::{Error, Result};

/// Residual network with one unit of capacity per arc.
struct Network<'g> {
    g: &'g DirectedGraph,
    tail: Vec<usize>,
    head: Vec<usize>,
    in_arcs: Vec<Vec<usize>>,
    flow: Vec<bool>,
}

impl<'g> Network<'g> {
    fn new(g: &'g DirectedGraph) -> Self {
        let (tail, head): (Vec<_>, Vec<_>) = g.arcs().unzip();
        let mut in_arcs = vec![Vec::new(); g.n()];
        for (a, &v) in head.iter().enumerate() {
            in_arcs[v].push(a);
        }
        let m = tail.len();
        Self {
            g,
            tail,
            head,
            in_arcs,
            flow: vec![false; m],
        }
    }

    fn reset(&mut self) {
        self.flow.fill(false);
    }

    fn out_arcs(&self, u: usize) -> std::ops::Range<usize> {
        self.g.arc_offset[u]..self.g.arc_offset[u + 1]
    }

    /// Residual moves out of `u` as `(next, arc, forward)`.
    fn residual(&self, u: usize) -> impl Iterator<Item = (usize, usize, bool)> + '_ {
        let fwd = self
            .out_arcs(u)
            .filter(|&a| !self.flow[a])
            .map(|a| (self.head[a], a, true));
        let back = self.in_arcs[u]
            .iter()
            .filter(|&&a| self.flow[a])
            .map(|&a| (self.tail[a], a, false));
        fwd.chain(back)
    }

    fn push(&mut self, pred: &[Option<(usize, bool)>], t: usize) {
        let mut v = t;
        while let Some((a, forward)) = pred[v] {
            self.flow[a] = forward;
            v = if forward { self.tail[a] } else { self.head[a] };
        }
    }

    /// Max flow from `s` to `t`, stopping once `limit` units are routed.
    fn max_flow(&mut self, s: usize, t: usize, limit: usize) -> usize {
        self.reset();
        let n = self.g.n();
        let mut value = 0;
        let mut pred = vec![None; n];
        let mut seen = vec![false; n];
        while value < limit {
            seen.fill(false);
            pred.fill(None);
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            'bfs: while let Some(u) = queue.pop_front() {
                for (v, a, fwd) in self.residual(u) {
                    if !seen[v] {
                        seen[v] = true;
                        pred[v] = Some((a, fwd));
                        if v == t {
                            break 'bfs;
                        }
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                break;
            }
            self.push(&pred, t);
            value += 1;
        }
        value
    }

    /// Successive shortest paths from `s` to `t`. After the k-th augmentation
    /// the flow has minimum total length among k-unit flows; `visit` sees it.
    fn min_cost_flows(&mut self, s: usize, t: usize, k_max: usize, mut visit: impl FnMut(usize, &Self)) {
        self.reset();
        let n = self.g.n();
        let mut pot: Vec<i64> = {
            let mut d = vec![0u32; n];
            bfs_from(self.g, s, &mut d);
            let far = d.iter().filter(|&&x| x != u32::MAX).max().copied().unwrap_or(0);
            d.iter().map(|&x| if x == u32::MAX { far as i64 } else { x as i64 }).collect()
        };
        let mut dist = vec![i64::MAX; n];
        let mut pred = vec![None; n];
        let mut heap = BinaryHeap::new();
        for k in 1..=k_max {
            dist.fill(i64::MAX);
            pred.fill(None);
            dist[s] = 0;
            heap.clear();
            heap.push(Reverse((0i64, s)));
            while let Some(Reverse((d, u))) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for (v, a, fwd) in self.residual(u) {
                    let cost = if fwd { 1 } else { -1 };
                    let nd = d + cost + pot[u] - pot[v];
                    debug_assert!(cost + pot[u] - pot[v] >= 0);
                    if nd < dist[v] {
                        dist[v] = nd;
                        pred[v] = Some((a, fwd));
                        heap.push(Reverse((nd, v)));
                    }
                }
            }
            if dist[t] == i64::MAX {
                return;
            }
            let far = dist.iter().filter(|&&x| x != i64::MAX).max().copied().unwrap_or(0);
            for (p, &d) in pot.iter_mut().zip(&dist) {
                *p += if d == i64::MAX { far } else { d };
            }
            self.push(&pred, t);
            visit(k, self);
        }
    }

    /// Splits the current flow into paths, shortest first.
    fn decompose(&self, s: usize, t: usize) -> Vec<Vec<usize>> {
        let n = self.g.n();
        let mut left = self.flow.clone();
        let mut paths = Vec::new();
        let mut pred = vec![usize::MAX; n];
        loop {
            pred.fill(usize::MAX);
            pred[s] = s;
            let mut queue = VecDeque::from([s]);
            'bfs: while let Some(u) = queue.pop_front() {
                for a in self.out_arcs(u) {
                    let v = self.head[a];
                    if left[a] && pred[v] == usize::MAX {
                        pred[v] = u;
                        if v == t {
                            break 'bfs;
                        }
                        queue.push_back(v);
                    }
                }
            }
            if pred[t] == usize::MAX {
                return paths;
            }
            let mut path = vec![t];
            let mut v = t;
            while v != s {
                let u = pred[v];
                left[self.g.arc_id(u, v).expect("flow arc")] = false;
                path.push(u);
                v = u;
            }
            path.reverse();
            paths.push(path);
        }
    }
}

fn require_connected(g: &DirectedGraph) -> Result<()> {
    if g.n() < 2 {
        return Err(Error::Parameter("flow metrics need at least two nodes".into()));
    }
    if !g.is_strongly_connected() {
        return Err(Error::NotStronglyConnected);
    }
    Ok(())
}

/// Smallest number of non-loop edges whose removal breaks strong
/// connectivity.
pub fn edge_connectivity(g: &DirectedGraph) -> Result<usize> {
    require_connected(g)?;
    let mut net = Network::new(g);
    let mut best = g.out_neighbors(0).len();
    for v in 1..g.n() {
        best = best.min(net.max_flow(0, v, best));
        best = best.min(net.max_flow(v, 0, best));
    }
    Ok(best)
}

/// Up to `k` edge-disjoint paths from `s` to `t` of least total length,
/// shortest first. Fewer are returned when the cut between them is smaller.
pub fn min_cost_paths(g: &DirectedGraph, s: usize, t: usize, k: usize) -> Vec<Vec<usize>> {
    if s == t || k == 0 {
        return Vec::new();
    }
    let mut net = Network::new(g);
    let mut out = Vec::new();
    net.min_cost_flows(s, t, k, |kk, net| {
        if kk == k {
            out = net.decompose(s, t);
        }
    });
    if out.is_empty() {
        // fewer than k units fit; return what the max flow allows
        let f = net.max_flow(s, t, k);
        if f > 0 {
            return min_cost_paths(g, s, t, f);
        }
    }
    out
}

/// Estimated `delta_k` for `k = 1..=edge_connectivity`, as entry `k - 1`.
///
/// Each entry is the largest path length over all pairs after splitting a
/// least-total-length k-unit flow into paths. This can exceed the true
/// min-max value but never falls below it; the `k = 1` entry is exact.
pub fn k_diameter_profile(g: &DirectedGraph) -> Result<Vec<usize>> {
    let tau = edge_connectivity(g)?;
    let n = g.n();
    let per_source: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|s| {
            let mut net = Network::new(g);
            let mut worst = vec![0; tau];
            for t in (0..n).filter(|&t| t != s) {
                net.min_cost_flows(s, t, tau, |k, net| {
                    let len = net.decompose(s, t).iter().map(|p| p.len() - 1).max().unwrap_or(0);
                    worst[k - 1] = worst[k - 1].max(len);
                });
            }
            worst
        })
        .collect();
    Ok((0..tau)
        .map(|k| per_source.iter().map(|w| w[k]).max().unwrap_or(0))
        .collect())
}

/// Estimated `delta_k`; `None` when `k` exceeds the edge connectivity.
pub fn k_diameter(g: &DirectedGraph, k: usize) -> Result<Option<usize>> {
    if k == 0 {
        return Err(Error::Parameter("k-diameter needs k >= 1".into()));
    }
    let profile = k_diameter_profile(g)?;
    Ok(profile.get(k - 1).copied())
}

/// `depth / k` at the minimising `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedDiameter {
    pub k: usize,
    pub depth: usize,
}

impl NormalizedDiameter {
    pub fn value(&self) -> f64 {
        self.depth as f64 / self.k as f64
    }
}

/// Minimum of `delta_k / k` over the profile; ties go to the smaller `k`.
pub fn normalized_diameter(g: &DirectedGraph) -> Result<NormalizedDiameter> {
    let profile = k_diameter_profile(g)?;
    Ok(best_ratio(&profile))
}

pub(crate) fn best_ratio(profile: &[usize]) -> NormalizedDiameter {
    let mut best = NormalizedDiameter { k: 1, depth: profile[0] };
    for (i, &depth) in profile.iter().enumerate().skip(1) {
        let k = i + 1;
        // depth / k < best.depth / best.k
        if depth * best.k < best.depth * k {
            best = NormalizedDiameter { k, depth };
        }
    }
    best
}

/// `k` edge-disjoint paths for every ordered pair.
pub fn disjoint_path_family(g: &DirectedGraph, k: usize) -> Result<PathFamily> {
    let tau = edge_connectivity(g)?;
    if k == 0 || k > tau {
        return Err(Error::Parameter(format!(
            "k = {k} edge-disjoint paths exist between every pair only for 1 <= k <= {tau} (Menger)"
        )));
    }
    let n = g.n();
    let rows: Vec<Vec<Vec<Vec<usize>>>> = (0..n)
        .into_par_iter()
        .map(|s| {
            let mut net = Network::new(g);
            (0..n)
                .map(|t| {
                    if s == t {
                        return Vec::new();
                    }
                    let mut paths = Vec::new();
                    net.min_cost_flows(s, t, k, |kk, net| {
                        if kk == k {
                            paths = net.decompose(s, t);
                        }
                    });
                    paths
                })
                .collect()
        })
        .collect();
    let paths = rows.into_iter().flatten().collect();
    Ok(PathFamily::new(n, paths, true, k == 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{diameter, make_family, Family};

    /// Max flow by brute force over edge subsets: smallest cut separating s
    /// from t.
    fn brute_min_cut(g: &DirectedGraph, s: usize, t: usize) -> usize {
        let arcs: Vec<_> = g.arcs().collect();
        assert!(arcs.len() <= 20);
        let mut best = usize::MAX;
        for mask in 0u32..(1 << arcs.len()) {
            let removed = mask.count_ones() as usize;
            if removed >= best {
                continue;
            }
            let kept = arcs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) == 0)
                .map(|(_, &a)| a);
            let h = DirectedGraph::new(g.n(), kept).unwrap();
            let mut d = vec![0; g.n()];
            bfs_from(&h, s, &mut d);
            if d[t] == u32::MAX {
                best = removed;
            }
        }
        best
    }

    #[test]
    fn connectivity_matches_brute_force() {
        for g in [
            make_family(Family::Ring, 5).unwrap(),
            make_family(Family::Star, 5).unwrap(),
            make_family(Family::Butterfly, 3).unwrap(),
            make_family(Family::Complete, 4).unwrap(),
        ] {
            let brute = (0..g.n())
                .flat_map(|s| (0..g.n()).filter(move |&t| t != s).map(move |t| (s, t)))
                .map(|(s, t)| brute_min_cut(&g, s, t))
                .min()
                .unwrap();
            assert_eq!(edge_connectivity(&g).unwrap(), brute);
        }
    }

    #[test]
    fn connectivity_examples() {
        assert_eq!(edge_connectivity(&make_family(Family::Star, 9).unwrap()).unwrap(), 1);
        assert_eq!(edge_connectivity(&make_family(Family::Ring, 11).unwrap()).unwrap(), 2);
        assert_eq!(edge_connectivity(&make_family(Family::Complete, 6).unwrap()).unwrap(), 5);
        assert_eq!(edge_connectivity(&make_family(Family::Hypercube, 4).unwrap()).unwrap(), 4);
    }

    #[test]
    fn ring_profile() {
        for m in 2..=3 {
            let g = make_family(Family::Ring, 2 * m + 1).unwrap();
            let profile = k_diameter_profile(&g).unwrap();
            assert_eq!(profile, vec![m, 2 * m]);
            assert_eq!(normalized_diameter(&g).unwrap().value(), m as f64);
        }
    }

    #[test]
    fn first_entry_is_the_diameter() {
        for (f, s) in [(Family::Grid, 4), (Family::Barbell, 3), (Family::Butterfly, 5)] {
            let g = make_family(f, s).unwrap();
            assert_eq!(k_diameter(&g, 1).unwrap(), Some(diameter(&g).unwrap()));
        }
        let star = make_family(Family::Star, 6).unwrap();
        assert_eq!(k_diameter(&star, 2).unwrap(), None);
        assert!(k_diameter(&star, 0).is_err());
    }

    #[test]
    fn complete_four_three_paths() {
        let g = make_family(Family::Complete, 4).unwrap();
        let fam = disjoint_path_family(&g, 3).unwrap();
        fam.validate(&g).unwrap();
        for (_, _, ps) in fam.pairs() {
            assert_eq!(ps.len(), 3);
            assert!(ps.iter().all(|p| p.len() - 1 <= 2));
        }
        assert!(disjoint_path_family(&g, 4).is_err());
    }

    #[test]
    fn ring_two_paths_go_both_ways() {
        let g = make_family(Family::Ring, 5).unwrap();
        let fam = disjoint_path_family(&g, 2).unwrap();
        fam.validate(&g).unwrap();
        for (i, j, ps) in fam.pairs() {
            let mut lens: Vec<_> = ps.iter().map(|p| p.len() - 1).collect();
            lens.sort();
            let d = (j + 5 - i) % 5;
            let d = d.min(5 - d);
            assert_eq!(lens, vec![d, 5 - d]);
        }
    }
}
