#![allow(dead_code)]

use arrival_core::graph::{families, Edge, MultiGraph};
use arrival_core::scalar::ratio;
use arrival_core::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A graph with the terminal pair used for it.
pub struct Case {
    pub label: String,
    pub graph: MultiGraph,
    pub s: usize,
    pub t: usize,
}

pub fn edge_probabilities() -> Vec<BigRational> {
    vec![ratio(1, 4), ratio(1, 3), ratio(1, 2), ratio(2, 3), ratio(1, 1)]
}

/// 50 seeded random connected multigraphs on 2..=7 vertices.
pub fn random_corpus() -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let probs = edge_probabilities();
    (0..50)
        .map(|i| {
            let n = 2 + i % 6;
            let extra = i % 5;
            let graph = families::random_connected(&mut rng, n, extra, &probs);
            Case { label: format!("random#{i}"), graph, s: 0, t: n - 1 }
        })
        .collect()
}

/// Complete graphs, cycles and parallel-path graphs.
pub fn family_corpus() -> Vec<Case> {
    let half = ratio(1, 2);
    let mut out = Vec::new();
    for n in 2..=6 {
        out.push(Case { label: format!("K{n}"), graph: families::complete(n, &half), s: 0, t: n - 1 });
    }
    for n in 3..=7 {
        out.push(Case { label: format!("C{n}"), graph: families::cycle(n, &half), s: 0, t: n / 2 });
    }
    for lengths in [vec![1, 1], vec![1, 2], vec![2, 2], vec![2, 3], vec![1, 2, 3], vec![3, 3], vec![1, 1, 2]] {
        out.push(Case {
            label: format!("H{lengths:?}"),
            graph: families::parallel_paths(&lengths, &half),
            s: 0,
            t: 1,
        });
    }
    out
}

pub fn full_corpus() -> Vec<Case> {
    let mut all = random_corpus();
    all.extend(family_corpus());
    all
}

/// Disjoint union of `a` and `b` with `b`'s vertex `j` identified with
/// `a`'s vertex `i` for every `(i, j)` in `identify`.
pub fn glue(a: &MultiGraph, b: &MultiGraph, identify: &[(usize, usize)]) -> MultiGraph {
    let mut names: Vec<String> = a.names().to_vec();
    let mut index = vec![usize::MAX; b.vertex_count()];
    for &(i, j) in identify {
        index[j] = i;
    }
    for (j, slot) in index.iter_mut().enumerate() {
        if *slot == usize::MAX {
            *slot = names.len();
            names.push(format!("b{j}"));
        }
    }
    let mut edges: Vec<Edge> = a.edges().to_vec();
    edges.extend(b.edges().iter().map(|e| Edge { u: index[e.u], v: index[e.v], p: e.p.clone() }));
    MultiGraph::new(names, edges).unwrap()
}
