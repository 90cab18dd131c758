//! Builders for the graph families used throughout the crate.

use num_rational::BigRational;
use rand::Rng;

use super::{Edge, MultiGraph};

fn build(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>, p: &BigRational) -> MultiGraph {
    let names = (0..n).map(|i| format!("v{i}")).collect();
    let edges = pairs
        .into_iter()
        .map(|(u, v)| Edge { u, v, p: p.clone() })
        .collect();
    MultiGraph::new(names, edges).expect("family builders produce valid graphs")
}

/// `P_n`: `n` edges on vertices `0..=n`; the endpoints are `0` and `n`.
pub fn path(n: usize, p: &BigRational) -> MultiGraph {
    build(n + 1, (0..n).map(|i| (i, i + 1)), p)
}

/// `C_n` on vertices `0..n`.
pub fn cycle(n: usize, p: &BigRational) -> MultiGraph {
    assert!(n >= 3, "a cycle needs at least 3 vertices");
    build(n, (0..n).map(|i| (i, (i + 1) % n)), p)
}

/// `K_n` on vertices `0..n`.
pub fn complete(n: usize, p: &BigRational) -> MultiGraph {
    build(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))), p)
}

/// Star with centre `0` and leaves `1..=leaves`.
pub fn star(leaves: usize, p: &BigRational) -> MultiGraph {
    build(leaves + 1, (1..=leaves).map(|v| (0, v)), p)
}

/// `k` parallel edges between vertices `0` and `1`.
pub fn parallel_edges(k: usize, p: &BigRational) -> MultiGraph {
    build(2, (0..k).map(|_| (0, 1)), p)
}

/// `H(m_1, ..., m_n)`: internally disjoint paths of the given lengths between
/// `s = 0` and `t = 1`. Internal vertices follow, path by path.
pub fn parallel_paths(lengths: &[usize], p: &BigRational) -> MultiGraph {
    let mut pairs = Vec::new();
    let mut next = 2;
    for &m in lengths {
        assert!(m >= 1, "path lengths must be positive");
        let mut prev = 0;
        for _ in 1..m {
            pairs.push((prev, next));
            prev = next;
            next += 1;
        }
        pairs.push((prev, 1));
    }
    build(next, pairs, p)
}

/// Random connected multigraph on `n` vertices: a random spanning tree plus
/// `extra` further edges, which may duplicate existing ones. Each edge draws
/// its probability from `probs`.
pub fn random_connected<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    extra: usize,
    probs: &[BigRational],
) -> MultiGraph {
    assert!(n >= 2 && !probs.is_empty());
    let pick_p = |rng: &mut R| probs[rng.random_range(0..probs.len())].clone();
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        edges.push(Edge { u, v, p: pick_p(rng) });
    }
    for _ in 0..extra {
        let u = rng.random_range(0..n);
        let mut v = rng.random_range(0..n - 1);
        if v >= u {
            v += 1;
        }
        edges.push(Edge { u, v, p: pick_p(rng) });
    }
    let names = (0..n).map(|i| format!("v{i}")).collect();
    MultiGraph::new(names, edges).expect("random builder produces valid graphs")
}
