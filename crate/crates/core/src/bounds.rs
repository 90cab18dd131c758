//! Bounds on the expected first arrival time.
//!
//! All bounds here treat the graph topologically: every edge is given the
//! same noninfection probability `q`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::engine::{build_state_space, expected_arrival};
use crate::error::{Error, Result};
use crate::graph::MultiGraph;
use crate::resistance::spreading_resistance;
use crate::scalar::{binomial, Scalar};

/// Largest edge count accepted by the exhaustive reliability enumeration.
pub const MAX_RELIABILITY_EDGES: usize = 24;

/// Integer coefficients of `R_st(G, q) = Σ c_i q^i`, the probability that
/// `s` and `t` stay connected when each edge fails independently with
/// probability `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReliabilityCoefficients {
    pub c: Vec<BigInt>,
}

impl ReliabilityCoefficients {
    /// Number of edges `m`; the polynomial has degree at most `m`.
    pub fn edges(&self) -> usize {
        self.c.len() - 1
    }

    pub fn evaluate<S: Scalar>(&self, q: &S) -> S {
        self.c
            .iter()
            .rev()
            .fold(S::zero(), |acc, c| acc * q.clone() + S::from_bigint(c))
    }
}

struct UnionFind {
    parent: [u8; 32],
}

impl UnionFind {
    fn new(n: usize) -> Self {
        let mut parent = [0u8; 32];
        for (i, p) in parent.iter_mut().enumerate().take(n) {
            *p = i as u8;
        }
        UnionFind { parent }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let up = self.parent[self.parent[x] as usize];
            self.parent[x] = up;
            x = up as usize;
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb as u8;
        }
    }
}

/// Expands `R_st` by enumerating all `2^m` failure sets.
///
/// Counts `N_f`, the failure sets of size `f` that leave `s` and `t`
/// connected, then `c_i = Σ_{f<=i} N_f C(m-f, i-f) (-1)^{i-f}` from
/// `R = Σ_f N_f (1-q)^{m-f} q^f`.
pub fn reliability_polynomial(g: &MultiGraph, s: usize, t: usize) -> Result<ReliabilityCoefficients> {
    let m = g.edge_count();
    if m > MAX_RELIABILITY_EDGES {
        return Err(Error::TooManyEdges { edges: m, limit: MAX_RELIABILITY_EDGES });
    }
    if s == t {
        let mut c = vec![BigInt::zero(); m + 1];
        c[0] = BigInt::one();
        return Ok(ReliabilityCoefficients { c });
    }

    let n = g.vertex_count();
    let ends: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.u, e.v)).collect();
    let count_block = |block: u64, block_bits: u32| -> Vec<u64> {
        let mut counts = vec![0u64; m + 1];
        let start = block << block_bits;
        for failed in start..start + (1u64 << block_bits) {
            let mut uf = UnionFind::new(n);
            for (i, &(u, v)) in ends.iter().enumerate() {
                if failed >> i & 1 == 0 {
                    uf.union(u, v);
                }
            }
            if uf.find(s) == uf.find(t) {
                counts[failed.count_ones() as usize] += 1;
            }
        }
        counts
    };

    // partition the subsets by their top bits across workers
    let split = m.min(6) as u32;
    let block_bits = m as u32 - split;
    let counts = (0..1u64 << split)
        .into_par_iter()
        .map(|b| count_block(b, block_bits))
        .reduce(
            || vec![0u64; m + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let mut c = vec![BigInt::zero(); m + 1];
    for (f, &nf) in counts.iter().enumerate() {
        if nf == 0 {
            continue;
        }
        let nf = BigInt::from(nf);
        for (i, ci) in c.iter_mut().enumerate().skip(f) {
            let term = &nf * binomial((m - f) as u64, (i - f) as u64);
            if (i - f) % 2 == 0 {
                *ci += term;
            } else {
                *ci -= term;
            }
        }
    }
    Ok(ReliabilityCoefficients { c })
}

/// `R̃_st(G, q) = Σ_{i>=1} c_i / (q^i - 1)`: the expected first round in
/// which the random subgraph process connects `s` and `t`.
pub fn insertion_probability<S: Scalar>(c: &ReliabilityCoefficients, q: &S) -> Result<S> {
    if *q < S::zero() || *q >= S::one() {
        return Err(Error::Domain("insertion probability needs 0 <= q < 1".into()));
    }
    let mut total = S::zero();
    let mut q_pow = S::one();
    for ci in c.c.iter().skip(1) {
        q_pow = q_pow * q.clone();
        if !ci.is_zero() {
            total = total + S::from_bigint(ci) / (q_pow.clone() - S::one());
        }
    }
    Ok(total)
}

fn distance_or_unreachable(g: &MultiGraph, s: usize, t: usize) -> Result<usize> {
    g.distance(s, t).ok_or(Error::UnreachableTarget)
}

/// `d(s,t) - 1 + R̃_st(G, q) <= T_st`.
pub fn lower_bound_reliability<S: Scalar>(g: &MultiGraph, s: usize, t: usize, q: &S) -> Result<S> {
    let d = distance_or_unreachable(g, s, t)?;
    if d == 0 {
        return Ok(S::zero());
    }
    let c = reliability_polynomial(g, s, t)?;
    Ok(S::from_i64(d as i64 - 1) + insertion_probability(&c, q)?)
}

/// `T_st <= d(s,t) / (1 - q)`, from the monotonicity under edge deletion
/// applied to a shortest path.
pub fn upper_bound_distance<S: Scalar>(g: &MultiGraph, s: usize, t: usize, q: &S) -> Result<S> {
    let d = distance_or_unreachable(g, s, t)?;
    if *q < S::zero() || *q >= S::one() {
        return Err(Error::Domain("q must lie in [0, 1)".into()));
    }
    Ok(S::from_i64(d as i64) / (S::one() - q.clone()))
}

/// Determinant of an integer matrix by fraction-free (Bareiss) elimination.
fn bareiss_determinant(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    if n == 0 {
        return BigInt::one();
    }
    sign * &a[n - 1][n - 1]
}

/// Effective resistance between `s` and `t` with unit resistors on every
/// edge (parallel edges add conductance).
///
/// With `L` the Laplacian of the component, grounded at `t`, the potential
/// at `s` under unit injected current is the cofactor ratio
/// `det(L without s,t) / det(L without t)`; both are computed exactly.
pub fn effective_resistance(g: &MultiGraph, s: usize, t: usize) -> Result<BigRational> {
    if s == t {
        return Ok(BigRational::zero());
    }
    let component = g.component_of(&g.singleton(s));
    if !component.contains(t) {
        return Err(Error::UnreachableTarget);
    }
    let nodes: Vec<usize> = component.iter().filter(|&v| v != t).collect();
    let pos = |v: usize| nodes.iter().position(|&x| x == v);
    let k = nodes.len();
    let mut lap = vec![vec![BigInt::zero(); k]; k];
    for e in g.edges() {
        if !component.contains(e.u) {
            continue;
        }
        let (pu, pv) = (pos(e.u), pos(e.v));
        if let Some(i) = pu {
            lap[i][i] += 1;
        }
        if let Some(j) = pv {
            lap[j][j] += 1;
        }
        if let (Some(i), Some(j)) = (pu, pv) {
            lap[i][j] -= 1;
            lap[j][i] -= 1;
        }
    }
    let si = pos(s).expect("s is in its own component");
    let minor: Vec<Vec<BigInt>> = lap
        .iter()
        .enumerate()
        .filter(|(r, _)| *r != si)
        .map(|(_, row)| {
            row.iter()
                .enumerate()
                .filter(|(c, _)| *c != si)
                .map(|(_, x)| x.clone())
                .collect()
        })
        .collect();
    let num = bareiss_determinant(minor);
    let den = bareiss_determinant(lap);
    debug_assert!(den.is_positive());
    Ok(BigRational::new(num, den))
}

/// Lyons' bound `Res_st / (1 - q) <= τ_st`, a lower bound on the
/// exponential-model expectation with intensity `1 - q`.
pub fn lower_bound_lyons_tau<S: Scalar>(g: &MultiGraph, s: usize, t: usize, q: &S) -> Result<S> {
    if *q < S::zero() || *q >= S::one() {
        return Err(Error::Domain("q must lie in [0, 1)".into()));
    }
    let res = effective_resistance(g, s, t)?;
    Ok(S::from_ratio(&res) / (S::one() - q.clone()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport<S> {
    pub distance: usize,
    pub lower_reliability: S,
    pub upper_distance: S,
    pub lower_lyons_tau: S,
    pub exact_t: Option<S>,
    pub exact_tau: Option<S>,
}

fn uniform_at(g: &MultiGraph, q: &BigRational) -> Result<MultiGraph> {
    if q.is_negative() || *q >= BigRational::one() {
        return Err(Error::Domain("q must lie in [0, 1)".into()));
    }
    g.with_uniform_p(&(BigRational::one() - q))
}

/// All bounds at `q`, with the exact `T_st` and `τ_st` when the state space
/// fits within `max_states`.
pub fn bounds_report<S: Scalar>(
    g: &MultiGraph,
    s: usize,
    t: usize,
    q: &BigRational,
    max_states: usize,
) -> Result<BoundsReport<S>> {
    let g = uniform_at(g, q)?;
    let qs = S::from_ratio(q);
    let distance = distance_or_unreachable(&g, s, t)?;
    let lower_reliability = lower_bound_reliability(&g, s, t, &qs)?;
    let upper_distance = upper_bound_distance(&g, s, t, &qs)?;
    let lower_lyons_tau = lower_bound_lyons_tau(&g, s, t, &qs)?;
    let (exact_t, exact_tau) = match build_state_space::<S>(&g, &g.singleton(s), t, max_states) {
        Ok(space) => {
            let rho = spreading_resistance(&g, &g.singleton(s), t)?;
            let tau = S::from_ratio(&rho) / (S::one() - qs.clone());
            (Some(expected_arrival(&space).value), Some(tau))
        }
        Err(Error::StateSpaceExceeded { .. }) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(BoundsReport { distance, lower_reliability, upper_distance, lower_lyons_tau, exact_t, exact_tau })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjectureRow<S> {
    pub q: BigRational,
    pub tau: S,
    pub t: S,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjectureReport<S> {
    pub rho: BigRational,
    pub rows: Vec<ConjectureRow<S>>,
}

impl<S: Scalar> ConjectureReport<S> {
    /// Rows where `τ > T`.
    pub fn violations(&self) -> impl Iterator<Item = &ConjectureRow<S>> {
        self.rows.iter().filter(|r| !r.holds)
    }
}

/// Compares `τ_st = ρ_st / (1 - q)` with the exact `T_st` on a grid of `q`.
/// A row with `τ > T` is reported, never treated as an error.
pub fn conjecture_scan<S: Scalar>(
    g: &MultiGraph,
    s: usize,
    t: usize,
    q_grid: &[BigRational],
) -> Result<ConjectureReport<S>> {
    let rho = spreading_resistance(&g.with_uniform_p(&BigRational::one())?, &g.singleton(s), t)?;
    let mut rows = Vec::with_capacity(q_grid.len());
    for q in q_grid {
        let gq = uniform_at(g, q)?;
        let space = build_state_space::<S>(&gq, &gq.singleton(s), t, crate::engine::DEFAULT_MAX_STATES)?;
        let t_st = expected_arrival(&space).value;
        let tau = S::from_ratio(&rho) / (S::one() - S::from_ratio(q));
        let holds = tau <= t_st.clone() + S::slack();
        rows.push(ConjectureRow { q: q.clone(), tau, t: t_st, holds });
    }
    Ok(ConjectureReport { rho, rows })
}

/// The grid `0.1, 0.2, ..., 0.9`.
pub fn default_q_grid() -> Vec<BigRational> {
    (1..=9).map(|k| crate::scalar::ratio(k, 10)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::expected_time;
    use crate::graph::families;
    use crate::scalar::ratio;

    type Q = BigRational;

    fn coeffs(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn reliability_examples() {
        let half = ratio(1, 2);
        let edge = families::path(1, &half);
        assert_eq!(reliability_polynomial(&edge, 0, 1).unwrap().c, coeffs(&[1, -1]));
        let two = families::parallel_edges(2, &half);
        assert_eq!(reliability_polynomial(&two, 0, 1).unwrap().c, coeffs(&[1, 0, -1]));
        let p2 = families::path(2, &half);
        assert_eq!(reliability_polynomial(&p2, 0, 2).unwrap().c, coeffs(&[1, -2, 1]));
    }

    #[test]
    fn reliability_properties() {
        let g = families::complete(5, &ratio(1, 2));
        let c = reliability_polynomial(&g, 0, 4).unwrap();
        assert_eq!(c.c[0], BigInt::one());
        assert_eq!(c.c.iter().sum::<BigInt>(), BigInt::zero());
        let mut last = Q::from_integer(2.into());
        for k in 0..=10 {
            let r: Q = c.evaluate(&ratio(k, 10));
            assert!(r <= last && r >= Q::zero() && r <= Q::one());
            last = r;
        }
        let big = families::complete(8, &ratio(1, 2));
        assert_eq!(
            reliability_polynomial(&big, 0, 1),
            Err(Error::TooManyEdges { edges: 28, limit: 24 })
        );
    }

    #[test]
    fn insertion_examples() {
        let q = ratio(1, 3);
        let edge = reliability_polynomial(&families::path(1, &q), 0, 1).unwrap();
        assert_eq!(insertion_probability(&edge, &q).unwrap(), ratio(3, 2));
        let two = reliability_polynomial(&families::parallel_edges(2, &q), 0, 1).unwrap();
        assert_eq!(insertion_probability(&two, &q).unwrap(), Q::one() / (Q::one() - q.clone() * q.clone()));
        let k4 = reliability_polynomial(&families::complete(4, &q), 0, 3).unwrap();
        assert_eq!(insertion_probability(&k4, &Q::zero()).unwrap(), Q::one());
        assert!(insertion_probability(&k4, &Q::one()).is_err());
    }

    #[test]
    fn lower_bound_is_tight_on_edges() {
        for q in [ratio(1, 4), ratio(1, 2), ratio(3, 4)] {
            let p = Q::one() - q.clone();
            let edge = families::path(1, &p);
            assert_eq!(lower_bound_reliability(&edge, 0, 1, &q).unwrap(), expected_time::<Q>(&edge, 0, 1).unwrap());
            let two = families::parallel_edges(2, &p);
            assert_eq!(lower_bound_reliability(&two, 0, 1, &q).unwrap(), expected_time::<Q>(&two, 0, 1).unwrap());
        }
        let k4 = families::complete(4, &Q::one());
        assert_eq!(lower_bound_reliability(&k4, 0, 3, &Q::zero()).unwrap(), Q::one());
    }

    #[test]
    fn upper_bound_examples() {
        let q = ratio(1, 2);
        let p5 = families::path(5, &q);
        assert_eq!(upper_bound_distance(&p5, 0, 5, &q).unwrap(), expected_time::<Q>(&p5, 0, 5).unwrap());
        let k3 = families::complete(3, &q);
        assert_eq!(upper_bound_distance(&k3, 0, 2, &q).unwrap(), ratio(2, 1));
        assert_eq!(upper_bound_distance(&k3, 1, 1, &q).unwrap(), Q::zero());
    }

    #[test]
    fn effective_resistance_examples() {
        let half = ratio(1, 2);
        for n in 1..6 {
            assert_eq!(effective_resistance(&families::path(n, &half), 0, n).unwrap(), ratio(n as i64, 1));
        }
        assert_eq!(effective_resistance(&families::parallel_edges(2, &half), 0, 1).unwrap(), ratio(1, 2));
        assert_eq!(effective_resistance(&families::complete(3, &half), 0, 1).unwrap(), ratio(2, 3));
        assert_eq!(effective_resistance(&families::cycle(4, &half), 0, 2).unwrap(), ratio(1, 1));
        let split = MultiGraph::parse("p 1/2\nedge a b\nedge c d\n").unwrap();
        assert_eq!(effective_resistance(&split, 0, 2), Err(Error::UnreachableTarget));
        // an unrelated component does not matter
        let extra = MultiGraph::parse("p 1/2\nedge a b\nedge c d\nedge a b\n").unwrap();
        assert_eq!(effective_resistance(&extra, 0, 1).unwrap(), ratio(1, 2));
    }

    #[test]
    fn lyons_examples() {
        let half = ratio(1, 2);
        assert_eq!(lower_bound_lyons_tau(&families::path(3, &half), 0, 3, &half).unwrap(), ratio(6, 1));
        assert_eq!(lower_bound_lyons_tau(&families::complete(3, &half), 0, 2, &half).unwrap(), ratio(4, 3));
        assert_eq!(lower_bound_lyons_tau(&families::parallel_edges(2, &half), 0, 1, &half).unwrap(), ratio(1, 1));
    }

    #[test]
    fn report_on_triangle() {
        let k3 = families::complete(3, &ratio(1, 2));
        let r = bounds_report::<Q>(&k3, 0, 2, &ratio(1, 2), 1 << 10).unwrap();
        assert_eq!(r.upper_distance, ratio(2, 1));
        assert_eq!(r.exact_t, Some(ratio(16, 9)));
        assert_eq!(r.exact_tau, Some(ratio(3, 2)));
        assert_eq!(r.lower_lyons_tau, ratio(4, 3));
        assert!(r.lower_reliability <= ratio(16, 9));
        let capped = bounds_report::<Q>(&families::complete(6, &ratio(1, 2)), 0, 5, &ratio(1, 2), 4).unwrap();
        assert_eq!(capped.exact_t, None);
    }

    #[test]
    fn conjecture_scan_examples() {
        let p4 = families::path(4, &ratio(1, 2));
        let report = conjecture_scan::<Q>(&p4, 0, 4, &default_q_grid()).unwrap();
        assert!(report.rows.iter().all(|r| r.tau == r.t && r.holds));

        let k3 = families::complete(3, &ratio(1, 2));
        let report = conjecture_scan::<Q>(&k3, 0, 2, &[ratio(1, 2), Q::zero()]).unwrap();
        assert_eq!((report.rows[0].tau.clone(), report.rows[0].t.clone()), (ratio(3, 2), ratio(16, 9)));
        assert_eq!(report.rows[1].t, ratio(1, 1));
        assert_eq!(report.rows[1].tau, ratio(3, 4));
        assert_eq!(report.violations().count(), 0);
    }
}
