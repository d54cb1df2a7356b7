use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DirectedGraph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Ring,
    Chain,
    Hypercube,
    Star,
    TwoStar,
    BinaryTree,
    Grid,
    Barbell,
    Butterfly,
    Complete,
}

impl Family {
    pub const ALL: [Family; 10] = [
        Family::Ring,
        Family::Chain,
        Family::Hypercube,
        Family::Star,
        Family::TwoStar,
        Family::BinaryTree,
        Family::Grid,
        Family::Barbell,
        Family::Butterfly,
        Family::Complete,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Ring => "ring",
            Family::Chain => "chain",
            Family::Hypercube => "hypercube",
            Family::Star => "star",
            Family::TwoStar => "two_star",
            Family::BinaryTree => "binary_tree",
            Family::Grid => "grid",
            Family::Barbell => "barbell",
            Family::Butterfly => "butterfly",
            Family::Complete => "complete",
        }
    }

    /// Number of nodes for a given size parameter.
    pub fn node_count(self, size: usize) -> usize {
        match self {
            Family::Hypercube => 1 << size,
            Family::BinaryTree => (1 << (size + 1)) - 1,
            Family::Grid => size * size,
            Family::Barbell => 4 * size - 1,
            Family::Butterfly => 2 * size,
            _ => size,
        }
    }

    fn check(self, size: usize) -> Result<()> {
        let ok = match self {
            Family::Ring => size >= 3 && size % 2 == 1,
            Family::Chain => size >= 2,
            Family::Hypercube => (1..=16).contains(&size),
            Family::Star => size >= 2,
            Family::TwoStar => size >= 4 && size % 2 == 0,
            Family::BinaryTree => (2..=16).contains(&size),
            Family::Grid => size >= 2 && size % 2 == 0,
            Family::Barbell => size >= 2,
            Family::Butterfly => size >= 3,
            Family::Complete => size >= 1,
        };
        if ok {
            Ok(())
        } else {
            let rule = match self {
                Family::Ring => "ring needs an odd node count n >= 3",
                Family::Chain => "chain needs n >= 2",
                Family::Hypercube => "hypercube needs a dimension p in 1..=16",
                Family::Star => "star needs n >= 2",
                Family::TwoStar => "two-star needs an even node count n >= 4",
                Family::BinaryTree => "binary tree needs a depth p in 2..=16",
                Family::Grid => "grid needs an even side p >= 2",
                Family::Barbell => "barbell needs a clique size p >= 2",
                Family::Butterfly => "butterfly needs a half-size m >= 3",
                Family::Complete => "complete graph needs n >= 1",
            };
            Err(Error::Parameter(format!("{rule}, got {size}")))
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Family::ALL
            .into_iter()
            .find(|f| f.name() == key || f.name().replace('_', "") == key)
            .ok_or_else(|| Error::Parameter(format!("unknown family `{s}`")))
    }
}

fn undirected(n: usize, links: impl IntoIterator<Item = (usize, usize)>) -> Result<DirectedGraph> {
    DirectedGraph::new(n, links.into_iter().flat_map(|(a, b)| [(a, b), (b, a)]))
}

/// Builds a member of one of the example families.
///
/// The size parameter is the node count for ring, chain, star, two-star and
/// complete graphs, the dimension for the hypercube, the depth for the
/// binary tree, the side for the grid, the clique size for the barbell and
/// the half-size for the butterfly.
pub fn make_family(family: Family, size: usize) -> Result<DirectedGraph> {
    family.check(size)?;
    let n = family.node_count(size);
    match family {
        Family::Ring => undirected(n, (0..n).map(|i| (i, (i + 1) % n))),
        Family::Chain => undirected(n, (1..n).map(|i| (i - 1, i))),
        Family::Hypercube => undirected(
            n,
            (0..n).flat_map(|v| (0..size).map(move |k| (v, v ^ (1 << k)))),
        ),
        Family::Star => undirected(n, (1..n).map(|i| (0, i))),
        Family::TwoStar => {
            let h = n / 2;
            undirected(
                n,
                (1..h)
                    .map(|i| (0, i))
                    .chain((h + 1..n).map(|i| (h, i)))
                    .chain([(0, h)]),
            )
        }
        // heap order: children of v are 2v+1 and 2v+2
        Family::BinaryTree => undirected(n, (1..n).map(|i| (i, (i - 1) / 2))),
        Family::Grid => {
            let p = size;
            let links = (0..p).flat_map(move |r| {
                (0..p).flat_map(move |c| {
                    let v = r * p + c;
                    let right = (c + 1 < p).then_some((v, v + 1));
                    let down = (r + 1 < p).then_some((v, v + p));
                    right.into_iter().chain(down)
                })
            });
            undirected(n, links)
        }
        Family::Barbell => {
            // line nodes -p..=p sit at indices 0..=2p; index 0 and 2p also
            // belong to the left and right cliques
            let p = size;
            let left: Vec<usize> = std::iter::once(0).chain(2 * p + 1..3 * p).collect();
            let right: Vec<usize> = std::iter::once(2 * p).chain(3 * p..4 * p - 1).collect();
            let mut links: Vec<(usize, usize)> = (0..2 * p).map(|i| (i, i + 1)).collect();
            for clique in [&left, &right] {
                for (a, &u) in clique.iter().enumerate() {
                    for &v in &clique[a + 1..] {
                        links.push((u, v));
                    }
                }
            }
            undirected(n, links)
        }
        Family::Butterfly => {
            let m = size;
            let mirror = |i: usize| n - 1 - i;
            let mut edges = Vec::new();
            for i in 0..m - 1 {
                edges.push((i + 1, i));
            }
            for i in 1..m {
                edges.push((0, i));
            }
            let half = edges.clone();
            edges.extend(half.into_iter().map(|(a, b)| (mirror(a), mirror(b))));
            edges.push((m - 1, mirror(m - 1)));
            edges.push((mirror(m - 1), m - 1));
            DirectedGraph::new(n, edges)
        }
        Family::Complete => DirectedGraph::new(
            n,
            (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))),
        ),
    }
}
