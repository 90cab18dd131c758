//! Loopless undirected multigraphs with per-edge infection probabilities.

pub mod families;
mod parse;

use std::collections::VecDeque;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Vertex count cap; states are subsets of the vertex set.
pub const MAX_VERTICES: usize = 30;

/// A subset of the vertices of a host graph, one bit per vertex index.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexSet {
    bits: u64,
    width: usize,
}

impl VertexSet {
    pub fn empty(width: usize) -> Self {
        assert!(width <= MAX_VERTICES, "vertex set wider than {MAX_VERTICES}");
        VertexSet { bits: 0, width }
    }

    pub fn full(width: usize) -> Self {
        let mut set = Self::empty(width);
        set.bits = (1u64 << width) - 1;
        set
    }

    pub fn singleton(width: usize, v: usize) -> Self {
        let mut set = Self::empty(width);
        set.insert(v);
        set
    }

    pub fn from_indices(width: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::empty(width);
        for v in indices {
            set.insert(v);
        }
        set
    }

    pub fn from_bits(width: usize, bits: u64) -> Self {
        let mut set = Self::empty(width);
        set.bits = bits & Self::full(width).bits;
        set
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.width && self.bits >> v & 1 == 1
    }

    pub fn insert(&mut self, v: usize) {
        assert!(v < self.width, "vertex {v} outside width {}", self.width);
        self.bits |= 1 << v;
    }

    pub fn remove(&mut self, v: usize) {
        self.bits &= !(1 << v);
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        VertexSet { bits: self.bits | other.bits, width: self.width }
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        VertexSet { bits: self.bits & other.bits, width: self.width }
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet { bits: self.bits & !other.bits, width: self.width }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let bits = self.bits;
        (0..self.width).filter(move |v| bits >> v & 1 == 1)
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    /// Infection probability, in `(0, 1]`.
    pub p: BigRational,
}

impl Edge {
    pub fn q(&self) -> BigRational {
        BigRational::one() - &self.p
    }

    pub fn other(&self, x: usize) -> usize {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }

    fn touches(&self, x: usize) -> bool {
        self.u == x || self.v == x
    }
}

/// Immutable loopless multigraph. Vertex `i` is bit `i` of every
/// [`VertexSet`] over this graph.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiGraph {
    names: Vec<String>,
    edges: Vec<Edge>,
    uniform_p: Option<BigRational>,
    adjacency: Vec<u64>,
}

impl MultiGraph {
    pub fn new(names: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        if names.len() > MAX_VERTICES {
            return Err(Error::InvalidGraph(format!(
                "{} vertices exceed the cap of {MAX_VERTICES}",
                names.len()
            )));
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(Error::InvalidGraph(format!("duplicate vertex `{name}`")));
            }
        }
        let n = names.len();
        let mut adjacency = vec![0u64; n];
        for e in &edges {
            if e.u >= n || e.v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) references a missing vertex",
                    e.u, e.v
                )));
            }
            if e.u == e.v {
                return Err(Error::InvalidGraph(format!("loop at `{}`", names[e.u])));
            }
            if e.p <= BigRational::zero() || e.p > BigRational::one() {
                return Err(Error::InvalidGraph(format!(
                    "probability {} outside (0, 1]",
                    e.p
                )));
            }
            adjacency[e.u] |= 1 << e.v;
            adjacency[e.v] |= 1 << e.u;
        }
        let uniform_p = match edges.split_first() {
            Some((first, rest)) if rest.iter().all(|e| e.p == first.p) => Some(first.p.clone()),
            _ => None,
        };
        Ok(MultiGraph { names, edges, uniform_p, adjacency })
    }

    /// Builds a graph with vertices named `0..n` and one probability for all edges.
    pub fn from_edge_list(n: usize, edges: &[(usize, usize)], p: &BigRational) -> Result<Self> {
        let names = (0..n).map(|i| i.to_string()).collect();
        let edges = edges
            .iter()
            .map(|&(u, v)| Edge { u, v, p: p.clone() })
            .collect();
        Self::new(names, edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn vertex_index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// The common infection probability, if every edge carries the same one.
    pub fn uniform_p(&self) -> Option<&BigRational> {
        self.uniform_p.as_ref()
    }

    pub fn empty_set(&self) -> VertexSet {
        VertexSet::empty(self.vertex_count())
    }

    pub fn singleton(&self, v: usize) -> VertexSet {
        VertexSet::singleton(self.vertex_count(), v)
    }

    pub fn vertex_set(&self) -> VertexSet {
        VertexSet::full(self.vertex_count())
    }

    /// Neighbours of `v` as a bitmask.
    pub fn neighbor_bits(&self, v: usize) -> u64 {
        self.adjacency[v]
    }

    /// `N(A)`: every vertex adjacent to some member of `a`, minus `a` itself.
    pub fn open_neighborhood(&self, a: &VertexSet) -> VertexSet {
        let bits = a.iter().fold(0u64, |acc, v| acc | self.adjacency[v]);
        VertexSet::from_bits(self.vertex_count(), bits & !a.bits())
    }

    /// Indices of the edges with one endpoint in `a` and the other in `b`.
    pub fn cut_edges(&self, a: &VertexSet, b: &VertexSet) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| {
                (a.contains(e.u) && b.contains(e.v)) || (a.contains(e.v) && b.contains(e.u))
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Contracts `x` into one vertex.
    ///
    /// The merged vertex takes the slot of the lowest index in `x` and is
    /// named by joining the member names with `+`; the remaining vertices keep
    /// their relative order. Edges inside `x` are dropped, boundary edges keep
    /// their probabilities, so the result may have parallel edges.
    pub fn merge_vertices(&self, x: &VertexSet) -> Result<MultiGraph> {
        let first = x.iter().next().ok_or(Error::EmptyMergeSet)?;
        let mut index = vec![0usize; self.vertex_count()];
        let mut names = Vec::new();
        for v in 0..self.vertex_count() {
            if x.contains(v) {
                if v == first {
                    index[v] = names.len();
                    names.push(x.iter().map(|m| self.names[m].as_str()).collect::<Vec<_>>().join("+"));
                } else {
                    index[v] = index[first];
                }
            } else {
                index[v] = names.len();
                names.push(self.names[v].clone());
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| !(x.contains(e.u) && x.contains(e.v)))
            .map(|e| Edge { u: index[e.u], v: index[e.v], p: e.p.clone() })
            .collect();
        MultiGraph::new(names, edges)
    }

    /// Replaces every class of parallel edges by one edge with
    /// `p = 1 - prod(1 - p_i)`. Edge order follows first occurrence.
    pub fn simplify_parallel(&self) -> MultiGraph {
        let mut merged: Vec<Edge> = Vec::new();
        for e in &self.edges {
            let (u, v) = (e.u.min(e.v), e.u.max(e.v));
            match merged.iter_mut().find(|m| m.u == u && m.v == v) {
                Some(m) => {
                    let q = (BigRational::one() - &m.p) * e.q();
                    m.p = BigRational::one() - q;
                }
                None => merged.push(Edge { u, v, p: e.p.clone() }),
            }
        }
        MultiGraph::new(self.names.clone(), merged).expect("simplification keeps a valid graph")
    }

    /// Hop distance ignoring probabilities; `None` when `t` is unreachable.
    pub fn distance(&self, s: usize, t: usize) -> Option<usize> {
        let n = self.vertex_count();
        let mut dist = vec![usize::MAX; n];
        let mut queue = VecDeque::from([s]);
        dist[s] = 0;
        while let Some(u) = queue.pop_front() {
            if u == t {
                return Some(dist[u]);
            }
            let mut nb = self.adjacency[u];
            while nb != 0 {
                let v = nb.trailing_zeros() as usize;
                nb &= nb - 1;
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        None
    }

    /// Vertices reachable from `start`, including `start`.
    pub fn component_of(&self, start: &VertexSet) -> VertexSet {
        let mut seen = start.bits();
        let mut frontier = seen;
        while frontier != 0 {
            let mut next = 0;
            let mut f = frontier;
            while f != 0 {
                let v = f.trailing_zeros() as usize;
                f &= f - 1;
                next |= self.adjacency[v];
            }
            frontier = next & !seen;
            seen |= next;
        }
        VertexSet::from_bits(self.vertex_count(), seen)
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count() == 0
            || self.component_of(&self.singleton(0)).len() == self.vertex_count()
    }

    /// Same topology with every edge probability replaced by `p`.
    pub fn with_uniform_p(&self, p: &BigRational) -> Result<MultiGraph> {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge { u: e.u, v: e.v, p: p.clone() })
            .collect();
        MultiGraph::new(self.names.clone(), edges)
    }

    pub fn without_edge(&self, index: usize) -> MultiGraph {
        let mut edges = self.edges.clone();
        edges.remove(index);
        MultiGraph::new(self.names.clone(), edges).expect("edge removal keeps a valid graph")
    }

    /// Number of edges between `v` and the set `a`, i.e. `|({v}, A)|`.
    pub fn multiplicity_into(&self, v: usize, a: &VertexSet) -> usize {
        self.edges
            .iter()
            .filter(|e| e.touches(v) && a.contains(e.other(v)))
            .count()
    }

    /// Parses the line-oriented text format; see [`parse::parse_graph`].
    pub fn parse(text: &str) -> Result<MultiGraph> {
        parse::parse_graph(text, None)
    }

    /// Like [`MultiGraph::parse`], with `p` for edges that have no
    /// probability when the text declares no default.
    pub fn parse_with_default(text: &str, p: &BigRational) -> Result<MultiGraph> {
        parse::parse_graph(text, Some(p))
    }

    /// Renders the graph in the text format accepted by [`MultiGraph::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            out.push_str(&format!(
                "edge {} {} {}\n",
                self.names[e.u],
                self.names[e.v],
                crate::scalar::format_ratio(&e.p)
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn path3() -> MultiGraph {
        MultiGraph::parse("p 1/2\nedge s a\nedge a t\n").unwrap()
    }

    fn triangle() -> MultiGraph {
        MultiGraph::parse("p 1/2\nedge s a\nedge a t\nedge s t\n").unwrap()
    }

    fn set(g: &MultiGraph, names: &[&str]) -> VertexSet {
        VertexSet::from_indices(
            g.vertex_count(),
            names.iter().map(|n| g.vertex_index(n).unwrap()),
        )
    }

    #[test]
    fn open_neighborhood_examples() {
        let g = path3();
        assert_eq!(g.open_neighborhood(&set(&g, &["s"])), set(&g, &["a"]));
        assert_eq!(g.open_neighborhood(&set(&g, &["s", "a"])), set(&g, &["t"]));
        assert!(g.open_neighborhood(&g.vertex_set()).is_empty());
    }

    #[test]
    fn cut_edges_examples() {
        let g = MultiGraph::parse("p 1/2\nedge s t\nedge t s\n").unwrap();
        assert_eq!(g.cut_edges(&set(&g, &["s"]), &set(&g, &["t"])), vec![0, 1]);

        let k3 = triangle();
        let cut = k3.cut_edges(&set(&k3, &["s"]), &set(&k3, &["a", "t"]));
        assert_eq!(cut, vec![0, 2]);

        let two = MultiGraph::parse("p 1/2\nedge a b\nedge c d\n").unwrap();
        assert!(two.cut_edges(&set(&two, &["a"]), &set(&two, &["c"])).is_empty());
    }

    #[test]
    fn merge_examples() {
        let g = path3();
        let m = g.merge_vertices(&set(&g, &["s", "a"])).unwrap();
        assert_eq!(m.vertex_count(), 2);
        assert_eq!(m.edge_count(), 1);
        assert_eq!(m.name(0), "s+a");

        let k3 = triangle();
        let m = k3.merge_vertices(&set(&k3, &["s", "a"])).unwrap();
        assert_eq!(m.vertex_count(), 2);
        assert_eq!(m.edge_count(), 2);
        assert!(m.edges().iter().all(|e| e.u != e.v));

        let all = k3.merge_vertices(&k3.vertex_set()).unwrap();
        assert_eq!(all.vertex_count(), 1);
        assert_eq!(all.edge_count(), 0);

        assert_eq!(k3.merge_vertices(&k3.empty_set()), Err(Error::EmptyMergeSet));
    }

    #[test]
    fn merge_preserves_boundary_multiplicities() {
        let g = MultiGraph::parse("p 1/3\nedge s a\nedge s b\nedge a b\nedge a c\nedge b c\nedge b c\n")
            .unwrap();
        let x = set(&g, &["s", "a", "b"]);
        let m = g.merge_vertices(&x).unwrap();
        let merged = m.singleton(m.vertex_index("s+a+b").unwrap());
        let c = g.vertex_index("c").unwrap();
        let mc = m.singleton(m.vertex_index("c").unwrap());
        assert_eq!(
            g.cut_edges(&x, &g.singleton(c)).len(),
            m.cut_edges(&merged, &mc).len()
        );
    }

    #[test]
    fn simplify_examples() {
        let two = MultiGraph::parse("p 1/2\nedge s t\nedge s t\n").unwrap();
        let s = two.simplify_parallel();
        assert_eq!(s.edge_count(), 1);
        assert_eq!(s.edges()[0].p, ratio(3, 4));

        let three = MultiGraph::parse("p 1/2\nedge s t\nedge t s\nedge s t\n").unwrap();
        assert_eq!(three.simplify_parallel().edges()[0].p, ratio(7, 8));

        let k3 = triangle();
        assert_eq!(k3.simplify_parallel(), k3);
    }

    #[test]
    fn distance_examples() {
        let p4 = families::path(4, &ratio(1, 2));
        assert_eq!(p4.distance(0, 4), Some(4));
        assert_eq!(p4.distance(2, 2), Some(0));
        let two = MultiGraph::parse("p 1/2\nedge a b\nedge c d\n").unwrap();
        assert_eq!(two.distance(0, 2), None);
    }

    #[test]
    fn rejects_bad_graphs() {
        let names = vec!["a".to_string(), "b".to_string()];
        let looped = vec![Edge { u: 0, v: 0, p: ratio(1, 2) }];
        assert!(MultiGraph::new(names.clone(), looped).is_err());
        let zero = vec![Edge { u: 0, v: 1, p: ratio(0, 1) }];
        assert!(MultiGraph::new(names.clone(), zero).is_err());
        let big = vec![Edge { u: 0, v: 1, p: ratio(3, 2) }];
        assert!(MultiGraph::new(names, big).is_err());
        let many: Vec<String> = (0..31).map(|i| format!("v{i}")).collect();
        assert!(MultiGraph::new(many, vec![]).is_err());
    }

    #[test]
    fn uniform_p_detection() {
        assert_eq!(triangle().uniform_p(), Some(&ratio(1, 2)));
        let mixed = MultiGraph::parse("edge a b 1/2\nedge b c 1/3\n").unwrap();
        assert_eq!(mixed.uniform_p(), None);
    }

    #[test]
    fn neighborhood_excludes_its_argument() {
        let g = families::complete(5, &ratio(1, 2));
        for bits in 0..32u64 {
            let a = VertexSet::from_bits(5, bits);
            assert!(g.open_neighborhood(&a).intersection(&a).is_empty());
        }
    }
}
