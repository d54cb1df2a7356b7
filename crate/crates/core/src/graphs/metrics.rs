use std::collections::VecDeque;

use super::DirectedGraph;
use crate::error::{Error, Result};

const UNREACHED: u32 = u32::MAX;

/// All-pairs hop distances, self-loops ignored.
#[derive(Debug, Clone)]
pub struct Distances {
    n: usize,
    d: Vec<u32>,
}

impl Distances {
    pub fn get(&self, i: usize, j: usize) -> Option<usize> {
        match self.d[i * self.n + j] {
            UNREACHED => None,
            v => Some(v as usize),
        }
    }

    pub(crate) fn raw(&self, i: usize, j: usize) -> u32 {
        self.d[i * self.n + j]
    }

    pub fn max(&self) -> Option<usize> {
        if self.d.contains(&UNREACHED) {
            None
        } else {
            self.d.iter().max().map(|&v| v as usize)
        }
    }
}

pub(crate) fn bfs_from(g: &DirectedGraph, s: usize, dist: &mut [u32]) {
    dist.fill(UNREACHED);
    dist[s] = 0;
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        for &v in g.out_neighbors(u) {
            if dist[v] == UNREACHED {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
}

pub(crate) fn reaches_all(g: &DirectedGraph, s: usize, reversed: bool) -> bool {
    let mut seen = vec![false; g.n()];
    seen[s] = true;
    let mut stack = vec![s];
    let mut count = 1;
    while let Some(u) = stack.pop() {
        let next = if reversed { g.in_neighbors(u) } else { g.out_neighbors(u) };
        for &v in next {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == g.n()
}

pub fn distance_matrix(g: &DirectedGraph) -> Distances {
    let n = g.n();
    let mut d = vec![0; n * n];
    for (s, row) in d.chunks_mut(n).enumerate() {
        bfs_from(g, s, row);
    }
    Distances { n, d }
}

/// Largest distance over ordered pairs.
pub fn diameter(g: &DirectedGraph) -> Result<usize> {
    distance_matrix(g).max().ok_or(Error::NotStronglyConnected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{make_family, Family};

    #[test]
    fn family_diameters() {
        for m in 1..8 {
            let g = make_family(Family::Ring, 2 * m + 1).unwrap();
            assert_eq!(diameter(&g).unwrap(), m);
        }
        for n in 3..10 {
            assert_eq!(diameter(&make_family(Family::Star, n).unwrap()).unwrap(), 2);
            assert_eq!(diameter(&make_family(Family::Complete, n).unwrap()).unwrap(), 1);
        }
    }

    #[test]
    fn disconnected_has_no_diameter() {
        let g = DirectedGraph::new(3, [(0, 1), (1, 0)]).unwrap();
        assert!(matches!(diameter(&g), Err(Error::NotStronglyConnected)));
    }

    #[test]
    fn directed_distances_are_asymmetric() {
        let g = make_family(Family::Butterfly, 4).unwrap();
        let d = distance_matrix(&g);
        // node 1 reaches every node of its half in one hop, not the other way round
        assert_eq!(d.get(0, 2), Some(1));
        assert_eq!(d.get(2, 0), Some(2));
    }
}
