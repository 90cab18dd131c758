//! Closed forms for complete graphs, bundles of parallel paths and trees.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::MultiGraph;
use crate::scalar::{binomial, factorial, Scalar};

/// Expected arrival time in `K_n` from a labelled set of size `i` to a fixed
/// unlabelled target.
///
/// On `K_n` the transition probabilities depend only on set sizes, so the
/// chain collapses to `n - 1` states:
/// `T_i = [1 + Σ_{j>i} C(n-1-i, j-i) q^{i(n-j)} (1-q^i)^{j-i} T_j] / (1 - q^{i(n-i)})`.
/// `i = 1` gives `T_st(K_n)`.
pub fn kn_expected<S: Scalar>(n: usize, q: &S, i: usize) -> Result<S> {
    if n < 2 {
        return Err(Error::Domain("complete graph needs n >= 2".into()));
    }
    if !(*q > S::zero() && *q < S::one()) {
        return Err(Error::Domain("q must lie in (0, 1)".into()));
    }
    if i == 0 || i >= n {
        return Err(Error::Domain(format!("i = {i} outside [1, {}]", n - 1)));
    }
    let mut t = vec![S::zero(); n];
    for k in (i..n).rev() {
        let miss = S::one() - q.powi(k as u32);
        let mut acc = S::one();
        for (j, tj) in t.iter().enumerate().skip(k + 1) {
            let c = S::from_bigint(&binomial((n - 1 - k) as u64, (j - k) as u64));
            acc = acc + c * q.powi((k * (n - j)) as u32) * miss.powi((j - k) as u32) * tj.clone();
        }
        t[k] = acc / (S::one() - q.powi((k * (n - k)) as u32));
    }
    Ok(t[i].clone())
}

/// Spreading resistance of `K_n`: `H_{n-1} / (n - 1)`.
pub fn kn_resistance(n: usize) -> Result<BigRational> {
    if n < 2 {
        return Err(Error::Domain("complete graph needs n >= 2".into()));
    }
    let harmonic: BigRational = (1..n)
        .map(|k| BigRational::new(BigInt::one(), BigInt::from(k)))
        .sum();
    Ok(harmonic / BigRational::from_integer(BigInt::from(n - 1)))
}

/// Lengths of internally disjoint paths joining two terminals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelPathSpec {
    lengths: Vec<usize>,
}

impl ParallelPathSpec {
    pub fn new(lengths: Vec<usize>) -> Result<Self> {
        if lengths.is_empty() || lengths.contains(&0) {
            return Err(Error::Domain("need at least one path, each of positive length".into()));
        }
        Ok(ParallelPathSpec { lengths })
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }
}

/// Spreading resistance of `H(m_1, ..., m_n)`:
/// `Σ_j Σ_{i_1+..+i_n = j, i_k < m_k} multinomial(j; i_1..i_n) / n^{j+1}`.
///
/// The constraint `i_k < m_k` bounds every index, so the sum runs over the
/// finite box `[0, m_1) × ... × [0, m_n)`.
pub fn parallel_paths_resistance(spec: &ParallelPathSpec) -> BigRational {
    let m = spec.lengths();
    let n = BigInt::from(m.len());
    let max_j: usize = m.iter().map(|x| x - 1).sum();
    let facts: Vec<BigInt> = (0..=max_j as u64).map(factorial).collect();

    let mut total = BigRational::zero();
    let mut idx = vec![0usize; m.len()];
    loop {
        let j: usize = idx.iter().sum();
        let denom: BigInt = idx.iter().map(|&i| facts[i].clone()).product();
        let multinomial = &facts[j] / denom;
        total += BigRational::new(multinomial, num_traits::pow(n.clone(), j + 1));

        // odometer step over the box
        let mut k = 0;
        loop {
            if k == idx.len() {
                return total;
            }
            idx[k] += 1;
            if idx[k] < m[k] {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// `T_st` on a tree: the unique path has `d(s,t)` edges, each crossed after a
/// geometric wait with mean `1/p`.
pub fn tree_expected<S: Scalar>(g: &MultiGraph, s: usize, t: usize, p: &S) -> Result<S> {
    if !g.is_connected() || g.edge_count() + 1 != g.vertex_count() {
        return Err(Error::NotATree);
    }
    if !(*p > S::zero() && *p <= S::one()) {
        return Err(Error::Domain("p must lie in (0, 1]".into()));
    }
    let d = g.distance(s, t).ok_or(Error::UnreachableTarget)?;
    Ok(S::from_i64(d as i64) / p.clone())
}
