//! Spreading resistance and the exponential-edge-length model.
//!
//! Both quantities satisfy the same single-vertex-growth recursion over the
//! labelled set `A`:
//!
//! `x_A = (c + Σ_{v ∈ N(A)} |(A,{v})| · x_{A ∪ {v}}) / |(A, N(A))|`
//!
//! with `x = 0` once the target is labelled. The spreading resistance uses
//! `c = 1`; the expected shortest path under `Exp(p)` edge lengths uses
//! `c = 1/p`.

use std::collections::{HashMap, VecDeque};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::engine::{self, DEFAULT_MAX_STATES};
use crate::error::{Error, Result};
use crate::graph::{MultiGraph, VertexSet};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct ResistanceResult {
    pub rho: BigRational,
    /// `rho / p`, when an intensity was supplied.
    pub tau: Option<BigRational>,
}

fn require_uniform(g: &MultiGraph) -> Result<()> {
    match g.edges().split_first() {
        Some((first, rest)) if rest.iter().any(|e| e.p != first.p) => {
            Err(Error::NonUniformProbabilities)
        }
        _ => Ok(()),
    }
}

/// Solves the growth recursion with per-step constant `step`.
fn solve_growth<S: Scalar>(g: &MultiGraph, a0: &VertexSet, t: usize, step: S) -> Result<S> {
    require_uniform(g)?;
    if a0.contains(t) {
        return Ok(S::zero());
    }
    if !g.component_of(a0).contains(t) {
        return Err(Error::UnreachableTarget);
    }

    // Enumerate states reachable by single additions, stopping at the target.
    let mut seen: HashMap<u64, usize> = HashMap::from([(a0.bits(), 0)]);
    let mut order = vec![a0.bits()];
    let mut queue = VecDeque::from([a0.bits()]);
    let target_bit = 1u64 << t;
    while let Some(bits) = queue.pop_front() {
        let a = VertexSet::from_bits(g.vertex_count(), bits);
        for v in g.open_neighborhood(&a).iter() {
            let next = bits | 1 << v;
            if next & target_bit != 0 || seen.contains_key(&next) {
                continue;
            }
            seen.insert(next, order.len());
            order.push(next);
            queue.push_back(next);
            if order.len() > DEFAULT_MAX_STATES {
                return Err(Error::StateSpaceExceeded { limit: DEFAULT_MAX_STATES });
            }
        }
    }

    order.sort_by_key(|b| std::cmp::Reverse(b.count_ones()));
    let mut value: HashMap<u64, S> = HashMap::with_capacity(order.len());
    for &bits in &order {
        let mut counts = vec![0usize; g.vertex_count()];
        for e in g.edges() {
            match (bits >> e.u & 1 == 1, bits >> e.v & 1 == 1) {
                (true, false) => counts[e.v] += 1,
                (false, true) => counts[e.u] += 1,
                _ => {}
            }
        }
        let cut: usize = counts.iter().sum();
        let mut acc = step.clone();
        for (v, &k) in counts.iter().enumerate() {
            if k == 0 {
                continue;
            }
            let next = bits | 1 << v;
            let x = if next & target_bit != 0 { S::zero() } else { value[&next].clone() };
            acc = acc + S::from_i64(k as i64) * x;
        }
        value.insert(bits, acc / S::from_i64(cut as i64));
    }
    Ok(value[&a0.bits()].clone())
}

/// The A-t spreading resistance, always exact.
pub fn spreading_resistance(g: &MultiGraph, a0: &VertexSet, t: usize) -> Result<BigRational> {
    solve_growth(g, a0, t, BigRational::one())
}

/// Expected shortest A-t path length when edge lengths are independent
/// exponentials with intensity `p`.
pub fn exponential_expectation<S: Scalar>(g: &MultiGraph, a0: &VertexSet, t: usize, p: &S) -> Result<S> {
    if !(*p > S::zero() && *p <= S::one()) {
        return Err(Error::Domain("intensity must lie in (0, 1]".into()));
    }
    solve_growth(g, a0, t, S::one() / p.clone())
}

pub fn resistance_report(
    g: &MultiGraph,
    a0: &VertexSet,
    t: usize,
    p: Option<&BigRational>,
) -> Result<ResistanceResult> {
    let rho = spreading_resistance(g, a0, t)?;
    let tau = match p {
        Some(p) => Some(exponential_expectation(g, a0, t, p)?),
        None => None,
    };
    Ok(ResistanceResult { rho, tau })
}

/// Returns `((1 - q) T_st, ρ_st)` with every edge set to `p = epsilon`, i.e.
/// at `q = 1 - epsilon`. The first component tends to the second as
/// `epsilon -> 0`.
pub fn resistance_limit_check<S: Scalar>(
    g: &MultiGraph,
    s: usize,
    t: usize,
    epsilon: &BigRational,
) -> Result<(S, S)> {
    if !(*epsilon > BigRational::zero() && *epsilon < BigRational::one()) {
        return Err(Error::Domain("epsilon must lie in (0, 1)".into()));
    }
    let rho = spreading_resistance(g, &g.singleton(s), t)?;
    let scaled = g.with_uniform_p(epsilon)?;
    let t_st = engine::expected_time::<S>(&scaled, s, t)?;
    Ok((S::from_ratio(epsilon) * t_st, S::from_ratio(&rho)))
}
