//! Seeded simulation oracles.
//!
//! Replica `i` draws from the ChaCha8 stream `i` keyed by the seed, so each
//! replica is reproducible on its own and replicas can run on any number of
//! workers. Results are folded in replica order.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::graph::MultiGraph;
use crate::scalar::Scalar;

pub const DEFAULT_HIST_CAP: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub seed: u64,
    pub replicas: usize,
    pub samples_per_replica: usize,
    /// Histogram bins `0..hist_cap`; larger values land in one overflow bin.
    pub hist_cap: usize,
}

impl SimConfig {
    pub fn new(seed: u64, replicas: usize, samples_per_replica: usize) -> Result<Self> {
        if replicas == 0 || samples_per_replica == 0 {
            return Err(Error::Domain("replicas and samples per replica must be positive".into()));
        }
        Ok(SimConfig { seed, replicas, samples_per_replica, hist_cap: DEFAULT_HIST_CAP })
    }

    /// Splits `samples` over `replicas`, rounding the per-replica count up.
    pub fn with_total(seed: u64, samples: usize, replicas: usize) -> Result<Self> {
        if replicas == 0 {
            return Err(Error::Domain("replicas must be positive".into()));
        }
        Self::new(seed, replicas, samples.div_ceil(replicas))
    }

    pub fn total_samples(&self) -> usize {
        self.replicas * self.samples_per_replica
    }

    fn rng(&self, replica: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(replica as u64);
        rng
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`.
    pub stderr: f64,
    pub n: u64,
    /// Counts of samples in `[k, k + 1)` for `k < hist_cap`, then the
    /// overflow bin.
    pub histogram: Vec<u64>,
}

impl SimEstimate {
    pub fn overflow(&self) -> u64 {
        *self.histogram.last().expect("histogram has an overflow bin")
    }
}

/// Running moments and histogram of one replica.
#[derive(Debug, Clone)]
struct Accumulator {
    n: u64,
    mean: f64,
    m2: f64,
    histogram: Vec<u64>,
}

impl Accumulator {
    fn new(cap: usize) -> Self {
        Accumulator { n: 0, mean: 0.0, m2: 0.0, histogram: vec![0; cap + 1] }
    }

    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
        let cap = self.histogram.len() - 1;
        let bin = if x >= cap as f64 { cap } else { x as usize };
        self.histogram[bin] += 1;
    }

    fn merge(mut self, other: Accumulator) -> Self {
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * self.n as f64 * other.n as f64 / n as f64;
        self.n = n;
        self.histogram.iter_mut().zip(other.histogram).for_each(|(a, b)| *a += b);
        self
    }

    fn finish(self) -> SimEstimate {
        let stderr = if self.n > 1 {
            (self.m2 / (self.n - 1) as f64).sqrt() / (self.n as f64).sqrt()
        } else {
            0.0
        };
        SimEstimate { mean: self.mean, stderr, n: self.n, histogram: self.histogram }
    }
}

/// Uniform on the open interval `(0, 1)` from the top 53 bits.
fn open_uniform(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn run<F>(cfg: &SimConfig, sample: F) -> SimEstimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let parts: Vec<Accumulator> = (0..cfg.replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = cfg.rng(r);
            let mut acc = Accumulator::new(cfg.hist_cap);
            for _ in 0..cfg.samples_per_replica {
                acc.push(sample(&mut rng));
            }
            acc
        })
        .collect();
    parts
        .into_iter()
        .fold(Accumulator::new(cfg.hist_cap), Accumulator::merge)
        .finish()
}

fn check_pair(g: &MultiGraph, s: usize, t: usize) -> Result<()> {
    if g.distance(s, t).is_none() {
        return Err(Error::UnreachableTarget);
    }
    Ok(())
}

/// Runs the spread process from `{s}` and records the first step at which
/// `t` is labelled.
pub fn simulate_spread(g: &MultiGraph, s: usize, t: usize, cfg: &SimConfig) -> Result<SimEstimate> {
    check_pair(g, s, t)?;
    let edges: Vec<(usize, usize, f64)> = g.edges().iter().map(|e| (e.u, e.v, e.p.to_f64())).collect();
    let (start, target) = (1u64 << s, 1u64 << t);
    Ok(run(cfg, |rng| {
        let mut labelled = start;
        let mut steps = 0u64;
        while labelled & target == 0 {
            let mut next = labelled;
            for &(u, v, p) in &edges {
                let (iu, iv) = (labelled >> u & 1 == 1, labelled >> v & 1 == 1);
                if iu != iv && open_uniform(rng) < p {
                    next |= 1 << u | 1 << v;
                }
            }
            labelled = next;
            steps += 1;
        }
        steps as f64
    }))
}

/// Length of a shortest `s`-`t` path under the given edge lengths.
fn shortest_path(n: usize, edges: &[(usize, usize)], lengths: &[f64], s: usize, t: usize) -> f64 {
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[s] = 0.0;
    loop {
        let u = (0..n)
            .filter(|&v| !done[v] && dist[v].is_finite())
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]))
            .expect("t is reachable from s");
        if u == t {
            return dist[t];
        }
        done[u] = true;
        for (&(a, b), &w) in edges.iter().zip(lengths) {
            let v = if a == u { b } else if b == u { a } else { continue };
            if dist[u] + w < dist[v] {
                dist[v] = dist[u] + w;
            }
        }
    }
}

fn shortest_path_sampler<L>(g: &MultiGraph, s: usize, t: usize, cfg: &SimConfig, length: L) -> Result<SimEstimate>
where
    L: Fn(&mut ChaCha8Rng, usize) -> f64 + Sync,
{
    check_pair(g, s, t)?;
    let n = g.vertex_count();
    let ends: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.u, e.v)).collect();
    Ok(run(cfg, |rng| {
        if s == t {
            return 0.0;
        }
        let lengths: Vec<f64> = (0..ends.len()).map(|i| length(rng, i)).collect();
        shortest_path(n, &ends, &lengths, s, t)
    }))
}

/// Shortest `s`-`t` path when every edge has an independent geometric
/// length on `{1, 2, ...}` with success probability `p_e`.
pub fn sample_geometric_sp(g: &MultiGraph, s: usize, t: usize, cfg: &SimConfig) -> Result<SimEstimate> {
    let log_q: Vec<Option<f64>> = g
        .edges()
        .iter()
        .map(|e| {
            let q = e.q().to_f64();
            (q > 0.0).then(|| q.ln())
        })
        .collect();
    shortest_path_sampler(g, s, t, cfg, |rng, i| match log_q[i] {
        Some(lq) => (open_uniform(rng).ln() / lq).ceil().max(1.0),
        None => 1.0,
    })
}

/// Shortest `s`-`t` path when every edge has an independent exponential
/// length with rate `p`.
pub fn sample_exponential_sp<S: Scalar>(
    g: &MultiGraph,
    s: usize,
    t: usize,
    p: &S,
    cfg: &SimConfig,
) -> Result<SimEstimate> {
    let rate = p.to_f64();
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::Domain("exponential rate must be positive".into()));
    }
    shortest_path_sampler(g, s, t, cfg, |rng, _| -open_uniform(rng).ln() / rate)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquareTest {
    pub fn rejects_at(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }

    fn from_statistic(statistic: f64, dof: usize) -> Self {
        let p_value = if dof == 0 {
            1.0
        } else {
            ChiSquared::new(dof as f64).expect("positive degrees of freedom").sf(statistic)
        };
        ChiSquareTest { statistic, dof, p_value }
    }
}

/// Contiguous groups of bins whose `weight` reaches `min`; an underfull
/// remainder joins the last group.
fn group_bins(weights: &[f64], min: f64) -> Vec<std::ops::Range<usize>> {
    let mut groups: Vec<std::ops::Range<usize>> = Vec::new();
    let mut start = 0;
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if acc >= min {
            groups.push(start..i + 1);
            start = i + 1;
            acc = 0.0;
        }
    }
    if start < weights.len() {
        match groups.last_mut() {
            Some(last) => last.end = weights.len(),
            None => groups.push(0..weights.len()),
        }
    }
    groups
}

/// Bin probabilities for a histogram with `bins` bins (the last being the
/// overflow bin) from a pmf `probs[k] = Pr(Z = k)`. Mass not covered by
/// `probs` goes to the overflow bin.
pub fn pmf_bins(probs: &[f64], bins: usize) -> Vec<f64> {
    let mut out: Vec<f64> = (0..bins - 1).map(|k| probs.get(k).copied().unwrap_or(0.0)).collect();
    let covered: f64 = out.iter().sum();
    out.push((1.0 - covered).max(0.0));
    out
}

/// Pearson goodness of fit of `observed` against bin probabilities
/// `expected`, merging neighbouring bins until each expected count is at
/// least 5.
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> ChiSquareTest {
    assert_eq!(observed.len(), expected.len(), "bin counts differ");
    let n: u64 = observed.iter().sum();
    let counts: Vec<f64> = expected.iter().map(|p| p * n as f64).collect();
    let groups = group_bins(&counts, 5.0);
    let mut statistic = 0.0;
    for g in &groups {
        let e: f64 = counts[g.clone()].iter().sum();
        let o: u64 = observed[g.clone()].iter().sum();
        if e > 0.0 {
            statistic += (o as f64 - e).powi(2) / e;
        } else if o > 0 {
            statistic = f64::INFINITY;
        }
    }
    ChiSquareTest::from_statistic(statistic, groups.len().saturating_sub(1))
}

/// Two-sample chi-square test of homogeneity between two histograms,
/// merging neighbouring bins until each pooled count is at least 10.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> ChiSquareTest {
    assert_eq!(a.len(), b.len(), "bin counts differ");
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let pooled: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x + y) as f64).collect();
    let groups = group_bins(&pooled, 10.0);
    let (ka, kb) = ((nb / na).sqrt(), (na / nb).sqrt());
    let mut statistic = 0.0;
    for g in &groups {
        let x: u64 = a[g.clone()].iter().sum();
        let y: u64 = b[g.clone()].iter().sum();
        if x + y > 0 {
            statistic += (ka * x as f64 - kb * y as f64).powi(2) / (x + y) as f64;
        }
    }
    ChiSquareTest::from_statistic(statistic, groups.len().saturating_sub(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::pmf_between;
    use crate::graph::families;
    use crate::scalar::ratio;

    fn cfg(seed: u64) -> SimConfig {
        SimConfig::new(seed, 8, 12_500).unwrap()
    }

    fn close(est: &SimEstimate, exact: f64) -> bool {
        (est.mean - exact).abs() <= 4.0 * est.stderr
    }

    #[test]
    fn spread_examples() {
        let edge = families::path(1, &ratio(1, 2));
        let est = simulate_spread(&edge, 0, 1, &cfg(1)).unwrap();
        assert_eq!(est.n, 100_000);
        assert_eq!(est.histogram.iter().sum::<u64>(), est.n);
        assert!(close(&est, 2.0), "{est:?}");

        let k3 = families::complete(3, &ratio(1, 2));
        assert!(close(&simulate_spread(&k3, 0, 2, &cfg(2)).unwrap(), 16.0 / 9.0));

        let same = simulate_spread(&k3, 1, 1, &cfg(3)).unwrap();
        assert_eq!((same.mean, same.stderr, same.histogram[0]), (0.0, 0.0, same.n));
    }

    #[test]
    fn unreachable_target() {
        let split = MultiGraph::parse("p 1/2\nedge a b\nedge c d\n").unwrap();
        assert_eq!(simulate_spread(&split, 0, 2, &cfg(0)), Err(Error::UnreachableTarget));
        assert_eq!(sample_geometric_sp(&split, 0, 2, &cfg(0)), Err(Error::UnreachableTarget));
        assert_eq!(
            sample_exponential_sp(&split, 0, 2, &0.5, &cfg(0)),
            Err(Error::UnreachableTarget)
        );
    }

    #[test]
    fn geometric_examples() {
        let edge = families::path(1, &ratio(1, 2));
        let est = sample_geometric_sp(&edge, 0, 1, &cfg(4)).unwrap();
        let exact = pmf_between::<f64>(&edge, 0, 1, 60).unwrap();
        let test = chi_square_gof(&est.histogram, &pmf_bins(&exact.probs, est.histogram.len()));
        assert!(!test.rejects_at(0.001), "{test:?}");

        let sure = families::cycle(6, &ratio(1, 1));
        let est = sample_geometric_sp(&sure, 0, 3, &cfg(5)).unwrap();
        assert_eq!((est.mean, est.histogram[3]), (3.0, est.n));
    }

    #[test]
    fn exponential_examples() {
        let half = ratio(1, 2);
        let edge = families::path(1, &half);
        assert!(close(&sample_exponential_sp(&edge, 0, 1, &half, &cfg(6)).unwrap(), 2.0));
        let k3 = families::complete(3, &half);
        assert!(close(&sample_exponential_sp(&k3, 0, 2, &half, &cfg(7)).unwrap(), 1.5));
        let h11 = families::parallel_paths(&[1, 1], &ratio(1, 1));
        assert!(close(&sample_exponential_sp(&h11, 0, 1, &1.0, &cfg(8)).unwrap(), 0.5));
        assert!(sample_exponential_sp(&h11, 0, 1, &0.0, &cfg(8)).is_err());
    }

    #[test]
    fn identical_configs_give_identical_results() {
        let g = families::cycle(5, &ratio(1, 3));
        let a = simulate_spread(&g, 0, 2, &SimConfig::new(42, 4, 1000).unwrap()).unwrap();
        let b = simulate_spread(&g, 0, 2, &SimConfig::new(42, 4, 1000).unwrap()).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| simulate_spread(&g, 0, 2, &SimConfig::new(42, 4, 1000).unwrap()).unwrap());
        assert_eq!(a, c);
        let d = simulate_spread(&g, 0, 2, &SimConfig::new(43, 4, 1000).unwrap()).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn overflow_bin_collects_long_arrivals() {
        let slow = families::path(3, &ratio(1, 50));
        let mut c = SimConfig::new(9, 2, 500).unwrap();
        c.hist_cap = 20;
        let est = simulate_spread(&slow, 0, 3, &c).unwrap();
        assert_eq!(est.histogram.len(), 21);
        assert!(est.overflow() > 900);
        assert_eq!(est.histogram.iter().sum::<u64>(), 1000);
    }

    #[test]
    fn chi_square_sanity() {
        let observed = [250u64, 250, 250, 250];
        let uniform = [0.25; 4];
        assert_eq!(chi_square_gof(&observed, &uniform).statistic, 0.0);
        assert!(chi_square_gof(&[400, 100, 250, 250], &uniform).rejects_at(0.01));
        assert!(!chi_square_two_sample(&observed, &[260, 240, 255, 245]).rejects_at(0.01));
        assert!(chi_square_two_sample(&observed, &[100, 400, 250, 250]).rejects_at(0.01));
        assert!(SimConfig::new(0, 0, 1).is_err());
        assert_eq!(SimConfig::with_total(0, 1001, 4).unwrap().total_samples(), 1004);
    }
}
