//! Exact solvers on the subset Markov chain of the spread process.
//!
//! A state is the set of labelled vertices. From state `A` the process moves
//! to a superset `B ⊆ A ∪ N(A)` in one step; every state containing the
//! target is collapsed into a single absorbing state. Transitions only go to
//! strict supersets or stay put, so sorting states by cardinality yields a
//! triangular system that is solved by back substitution.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{MultiGraph, VertexSet};
use crate::scalar::{Mode, Scalar};

pub const DEFAULT_MAX_STATES: usize = 1 << 22;

/// Default tail mass target for float-mode pmfs.
pub const DEFAULT_TAIL: f64 = 1e-9;

/// One-step probability that the labelled set grows from `a` to exactly `b`.
///
/// Uses the per-edge product formula in general and the edge-counting
/// formula when all probabilities coincide. Zero when `b` is not within
/// `a ∪ N(a)`.
pub fn transition_probability<S: Scalar>(g: &MultiGraph, a: &VertexSet, b: &VertexSet) -> Result<S> {
    if !a.is_subset(b) {
        return Err(Error::NotSuperset);
    }
    let nb = g.open_neighborhood(a);
    if !b.is_subset(&a.union(&nb)) {
        return Ok(S::zero());
    }
    let blocked = nb.difference(b);
    let gained = b.difference(a);

    if let Some(p) = g.uniform_p() {
        let q = S::one() - S::from_ratio(p);
        let exponent = g.cut_edges(a, &blocked).len() as u32;
        let mut prob = q.powi(exponent);
        for x in gained.iter() {
            let k = g.multiplicity_into(x, a) as u32;
            prob = prob * (S::one() - q.powi(k));
        }
        return Ok(prob);
    }

    let mut prob = S::one();
    for i in g.cut_edges(a, &blocked) {
        prob = prob * S::from_ratio(&g.edges()[i].q());
    }
    for x in gained.iter() {
        let mut miss = S::one();
        for i in g.cut_edges(&g.singleton(x), a) {
            miss = miss * S::from_ratio(&g.edges()[i].q());
        }
        prob = prob * (S::one() - miss);
    }
    Ok(prob)
}

/// Reachable states of the chain started from a source set, with their
/// one-step transitions.
#[derive(Debug, Clone)]
pub struct StateSpace<S> {
    width: usize,
    target: usize,
    source: VertexSet,
    /// Transient states ordered by cardinality, then bit pattern.
    sets: Vec<VertexSet>,
    /// Moves to strict supersets; index `sets.len()` is the absorbing state.
    moves: Vec<Vec<(usize, S)>>,
    /// `P(A, A)` per transient state.
    stay: Vec<S>,
}

enum Dest {
    Set(u64),
    Absorbed,
}

/// Outgoing moves of one state and its probability of staying put.
type Step<S> = (Vec<(Dest, S)>, S);

impl<S: Scalar> StateSpace<S> {
    pub fn build(g: &MultiGraph, source: &VertexSet, target: usize, max_states: usize) -> Result<Self> {
        build_state_space(g, source, target, max_states)
    }

    /// Number of states, counting the absorbing one.
    pub fn len(&self) -> usize {
        self.sets.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn transient_states(&self) -> &[VertexSet] {
        &self.sets
    }

    pub fn absorbed_index(&self) -> usize {
        self.sets.len()
    }

    pub fn source_index(&self) -> usize {
        if self.source.contains(self.target) {
            self.absorbed_index()
        } else {
            0
        }
    }

    pub fn source(&self) -> &VertexSet {
        &self.source
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Moves out of transient state `i` to strict supersets.
    pub fn moves(&self, i: usize) -> &[(usize, S)] {
        &self.moves[i]
    }

    pub fn stay_probability(&self, i: usize) -> &S {
        &self.stay[i]
    }

    /// Index of a transient state, if it is reachable.
    pub fn index_of(&self, set: &VertexSet) -> Option<usize> {
        if set.contains(self.target) {
            return Some(self.absorbed_index());
        }
        self.sets
            .binary_search_by(|s| (s.len(), s.bits()).cmp(&(set.len(), set.bits())))
            .ok()
    }
}

/// Breadth-first closure of `source` under one-step transitions with positive
/// probability.
pub fn build_state_space<S: Scalar>(
    g: &MultiGraph,
    source: &VertexSet,
    target: usize,
    max_states: usize,
) -> Result<StateSpace<S>> {
    let width = g.vertex_count();
    if source.is_empty() {
        return Err(Error::Domain("source set is empty".into()));
    }
    if target >= width || source.width() != width {
        return Err(Error::Domain("target or source outside the graph".into()));
    }
    if source.contains(target) {
        return Ok(StateSpace {
            width,
            target,
            source: *source,
            sets: Vec::new(),
            moves: Vec::new(),
            stay: Vec::new(),
        });
    }

    let q_edges: Vec<S> = g.edges().iter().map(|e| S::from_ratio(&e.q())).collect();
    let mut found: HashMap<u64, usize> = HashMap::from([(source.bits(), 0)]);
    let mut order = vec![source.bits()];
    let mut raw: Vec<Step<S>> = Vec::new();
    let mut queue = VecDeque::from([source.bits()]);
    let mut absorbed = false;

    while let Some(bits) = queue.pop_front() {
        let (out, stay) = one_step(g, &q_edges, bits, target);
        for (dest, _) in &out {
            match dest {
                Dest::Absorbed => absorbed = true,
                Dest::Set(b) => {
                    if !found.contains_key(b) {
                        found.insert(*b, order.len());
                        order.push(*b);
                        queue.push_back(*b);
                        // +1 for the absorbing state
                        if order.len() + 1 > max_states {
                            return Err(Error::StateSpaceExceeded { limit: max_states });
                        }
                    }
                }
            }
        }
        raw.push((out, stay));
    }
    if !absorbed {
        return Err(Error::UnreachableTarget);
    }

    let mut ranked: Vec<usize> = (0..order.len()).collect();
    ranked.sort_by_key(|&i| (order[i].count_ones(), order[i]));
    let mut rank_of = vec![0usize; order.len()];
    for (rank, &i) in ranked.iter().enumerate() {
        rank_of[i] = rank;
    }
    let absorbed_index = order.len();

    let mut raw: Vec<Option<Step<S>>> = raw.into_iter().map(Some).collect();
    let mut sets = Vec::with_capacity(order.len());
    let mut moves = Vec::with_capacity(order.len());
    let mut stay = Vec::with_capacity(order.len());
    for &i in &ranked {
        let (out, s) = raw[i].take().expect("each state visited once");
        let mut m: Vec<(usize, S)> = out
            .into_iter()
            .map(|(dest, p)| match dest {
                Dest::Absorbed => (absorbed_index, p),
                Dest::Set(b) => (rank_of[found[&b]], p),
            })
            .collect();
        m.sort_by_key(|(d, _)| *d);
        sets.push(VertexSet::from_bits(width, order[i]));
        moves.push(m);
        stay.push(s);
    }

    Ok(StateSpace { width, target, source: *source, sets, moves, stay })
}

/// Transitions out of `bits`: strict-superset moves and the stay probability.
fn one_step<S: Scalar>(g: &MultiGraph, q_edges: &[S], bits: u64, target: usize) -> (Vec<(Dest, S)>, S) {
    let width = g.vertex_count();
    // miss[v] = probability that no edge from the state labels v
    let mut miss: Vec<Option<S>> = vec![None; width];
    for (e, q) in g.edges().iter().zip(q_edges) {
        let (inside_u, inside_v) = (bits >> e.u & 1 == 1, bits >> e.v & 1 == 1);
        let outside = match (inside_u, inside_v) {
            (true, false) => e.v,
            (false, true) => e.u,
            _ => continue,
        };
        miss[outside] = Some(match miss[outside].take() {
            Some(m) => m * q.clone(),
            None => q.clone(),
        });
    }

    let mut out = Vec::new();
    let mut base = S::one();
    if let Some(miss_t) = miss[target].take() {
        let hit = S::one() - miss_t.clone();
        if !hit.is_zero() {
            out.push((Dest::Absorbed, hit));
        }
        base = miss_t;
    }

    let mut partial: Vec<(u64, S)> = Vec::new();
    if !base.is_zero() {
        partial.push((0, base));
    }
    for (v, m) in miss.into_iter().enumerate() {
        let Some(m) = m else { continue };
        let hit = S::one() - m.clone();
        let mut next = Vec::with_capacity(partial.len() * 2);
        for (mask, pr) in partial {
            if !m.is_zero() {
                next.push((mask, pr.clone() * m.clone()));
            }
            if !hit.is_zero() {
                next.push((mask | 1 << v, pr * hit.clone()));
            }
        }
        partial = next;
    }

    let mut stay = S::zero();
    for (mask, pr) in partial {
        if mask == 0 {
            stay = pr;
        } else {
            out.push((Dest::Set(bits | mask), pr));
        }
    }
    (out, stay)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationResult<S> {
    pub value: S,
    pub mode: Mode,
}

/// Expected first arrival time from the source state.
///
/// Back-substitutes `T_A = (1 + Σ_{C ⊋ A} P(A,C) T_C) / (1 - P(A,A))` with
/// `T = 0` on the absorbing state.
pub fn expected_arrival<S: Scalar>(space: &StateSpace<S>) -> ExpectationResult<S> {
    let values = expected_all(space);
    ExpectationResult { value: values[space.source_index()].clone(), mode: S::MODE }
}

/// Expected arrival time from every state, indexed like the state space.
pub fn expected_all<S: Scalar>(space: &StateSpace<S>) -> Vec<S> {
    let n = space.sets.len();
    let mut t = vec![S::zero(); n + 1];
    for i in (0..n).rev() {
        let mut acc = S::one();
        for (dest, p) in &space.moves[i] {
            acc = acc + p.clone() * t[*dest].clone();
        }
        t[i] = acc / (S::one() - space.stay[i].clone());
    }
    t
}

/// Truncated pmf of the first arrival time: `probs[n] = Pr(Z = n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalPmf<S> {
    pub probs: Vec<S>,
    /// `1 - Σ probs`, the mass beyond the truncation point.
    pub tail: S,
}

impl<S: Scalar> ArrivalPmf<S> {
    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    /// `Σ n · Pr(Z = n)` over the retained terms.
    pub fn partial_mean(&self) -> S {
        self.probs
            .iter()
            .enumerate()
            .map(|(n, p)| S::from_i64(n as i64) * p.clone())
            .sum()
    }
}

/// Steps the pmf recursion `Pr(Z_A = n) = Σ_{C ⊇ A} P(A,C) Pr(Z_C = n-1)`.
struct PmfStepper<'a, S> {
    space: &'a StateSpace<S>,
    prev: Vec<S>,
}

impl<'a, S: Scalar> PmfStepper<'a, S> {
    fn new(space: &'a StateSpace<S>) -> Self {
        let mut prev = vec![S::zero(); space.len()];
        prev[space.absorbed_index()] = S::one();
        PmfStepper { space, prev }
    }

    fn current(&self) -> S {
        self.prev[self.space.source_index()].clone()
    }

    fn advance(&mut self) {
        let n = self.space.sets.len();
        let mut next = vec![S::zero(); n + 1];
        for (i, slot) in next.iter_mut().enumerate().take(n) {
            let mut acc = self.space.stay[i].clone() * self.prev[i].clone();
            for (dest, p) in &self.space.moves[i] {
                acc = acc + p.clone() * self.prev[*dest].clone();
            }
            *slot = acc;
        }
        self.prev = next;
    }
}

pub fn arrival_pmf<S: Scalar>(space: &StateSpace<S>, n_max: usize) -> ArrivalPmf<S> {
    let mut stepper = PmfStepper::new(space);
    let mut probs = Vec::with_capacity(n_max + 1);
    probs.push(stepper.current());
    for _ in 0..n_max {
        stepper.advance();
        probs.push(stepper.current());
    }
    let tail = S::one() - probs.iter().cloned().sum::<S>();
    ArrivalPmf { probs, tail }
}

/// Extends the pmf, checking at doubling truncation points (64, 128, ...)
/// until the tail drops below `tail_target` or `n_cap` is reached.
pub fn arrival_pmf_to_tail<S: Scalar>(space: &StateSpace<S>, tail_target: f64, n_cap: usize) -> ArrivalPmf<S> {
    let mut stepper = PmfStepper::new(space);
    let mut probs = vec![stepper.current()];
    let mut mass = probs[0].clone();
    let mut checkpoint = 64;
    loop {
        while probs.len() <= checkpoint.min(n_cap) {
            stepper.advance();
            let p = stepper.current();
            mass = mass + p.clone();
            probs.push(p);
        }
        let tail = S::one() - mass.clone();
        if tail.to_f64() < tail_target || probs.len() > n_cap {
            return ArrivalPmf { probs, tail };
        }
        checkpoint *= 2;
    }
}

/// Evaluates the generating function `Φ(z) = Σ Pr(Z = n) z^n` at `z`.
pub fn ogf_eval<S: Scalar>(space: &StateSpace<S>, z: &S) -> Result<S> {
    let n = space.sets.len();
    let mut phi = vec![S::zero(); n + 1];
    phi[n] = S::one();
    for i in (0..n).rev() {
        let diag = z.clone() * space.stay[i].clone();
        if diag.abs_val() >= S::one() {
            return Err(Error::DivergentDiagonal);
        }
        let mut acc = S::zero();
        for (dest, p) in &space.moves[i] {
            acc = acc + p.clone() * phi[*dest].clone();
        }
        phi[i] = z.clone() * acc / (S::one() - diag);
    }
    Ok(phi[space.source_index()].clone())
}

/// `T_st` with the default state cap.
pub fn expected_time<S: Scalar>(g: &MultiGraph, s: usize, t: usize) -> Result<S> {
    let space = build_state_space::<S>(g, &g.singleton(s), t, DEFAULT_MAX_STATES)?;
    Ok(expected_arrival(&space).value)
}

/// Pmf of `Z_st` up to `n_max` with the default state cap.
pub fn pmf_between<S: Scalar>(g: &MultiGraph, s: usize, t: usize, n_max: usize) -> Result<ArrivalPmf<S>> {
    let space = build_state_space::<S>(g, &g.singleton(s), t, DEFAULT_MAX_STATES)?;
    Ok(arrival_pmf(&space, n_max))
}
