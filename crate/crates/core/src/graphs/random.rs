//! Seeded random graphs for property tests and generated schedules.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DirectedGraph;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected bidirectional graph: a uniform random labelled tree (random
/// attachment order) plus each remaining link with probability `extra`.
pub fn random_connected<R: Rng>(n: usize, extra: f64, rng: &mut R) -> DirectedGraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut links = Vec::new();
    for k in 1..n {
        let parent = order[rng.gen_range(0..k)];
        links.push((order[k], parent));
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(extra) {
                links.push((i, j));
            }
        }
    }
    DirectedGraph::new(n, links.into_iter().flat_map(|(a, b)| [(a, b), (b, a)]))
        .expect("nodes in range")
}

/// Strongly connected directed graph: a random Hamiltonian cycle plus each
/// remaining arc with probability `extra`. Usually not bidirectional.
pub fn random_strongly_connected<R: Rng>(n: usize, extra: f64, rng: &mut R) -> DirectedGraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut arcs: Vec<(usize, usize)> = (0..n).map(|k| (order[k], order[(k + 1) % n])).collect();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.gen_bool(extra) {
                arcs.push((i, j));
            }
        }
    }
    DirectedGraph::new(n, arcs).expect("nodes in range")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn always_connected() {
        let mut r = rng(7);
        for n in 1..15 {
            let g = random_connected(n, 0.1, &mut r);
            assert!(g.is_strongly_connected() && g.is_bidirectional());
            let h = random_strongly_connected(n, 0.1, &mut r);
            assert!(h.is_strongly_connected());
        }
    }

    #[test]
    fn seeded() {
        let a = random_connected(10, 0.3, &mut rng(3));
        let b = random_connected(10, 0.3, &mut rng(3));
        assert_eq!(a, b);
    }
}
