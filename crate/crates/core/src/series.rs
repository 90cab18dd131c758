//! Truncated formal power series and the series/parallel reductions.
//!
//! A [`PowerSeries`] keeps coefficients of `z^0 ..= z^N`; every operation
//! stays within that window. Generating functions of first arrival times
//! compose by the Cauchy product when two graphs share one articulation
//! vertex, and by a Hadamard (termwise) product of cumulative series when
//! two branches share only the terminals.

use crate::error::{Error, Result};
use crate::scalar::{binomial, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> PowerSeries<S> {
    /// Series with the given coefficients; the truncation degree is `len - 1`.
    pub fn new(coeffs: Vec<S>) -> Self {
        assert!(!coeffs.is_empty(), "a power series needs at least one coefficient");
        PowerSeries { coeffs }
    }

    pub fn zero(degree: usize) -> Self {
        PowerSeries { coeffs: vec![S::zero(); degree + 1] }
    }

    pub fn one(degree: usize) -> Self {
        let mut s = Self::zero(degree);
        s.coeffs[0] = S::one();
        s
    }

    /// The geometric series `J(z) = 1/(1 - z)`.
    pub fn geometric(degree: usize) -> Self {
        PowerSeries { coeffs: vec![S::one(); degree + 1] }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &S {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    fn check_degree(&self, other: &Self) -> Result<()> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch { left: self.degree(), right: other.degree() });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Result<Self> {
        self.check_degree(other)?;
        Ok(PowerSeries { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f(a, b)).collect() })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() - b.clone())
    }

    pub fn scale(&self, c: &S) -> Self {
        PowerSeries { coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect() }
    }

    /// Division by `1 - z`, as a running sum.
    pub fn prefix_sum(&self) -> Self {
        let mut acc = S::zero();
        let coeffs = self
            .coeffs
            .iter()
            .map(|a| {
                acc = acc.clone() + a.clone();
                acc.clone()
            })
            .collect();
        PowerSeries { coeffs }
    }

    /// Multiplication by `1 - z`.
    pub fn times_one_minus_z(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        coeffs.push(self.coeffs[0].clone());
        for w in self.coeffs.windows(2) {
            coeffs.push(w[1].clone() - w[0].clone());
        }
        PowerSeries { coeffs }
    }

    /// For a pmf generating function, the survival series `Pr(Z > n)`.
    pub fn survival(&self) -> Self {
        let cdf = self.prefix_sum();
        PowerSeries { coeffs: cdf.coeffs.into_iter().map(|c| S::one() - c).collect() }
    }

    /// Inverse of [`PowerSeries::survival`].
    pub fn from_survival(survival: &Self) -> Self {
        PowerSeries::geometric(survival.degree())
            .sub(survival)
            .expect("same degree")
            .times_one_minus_z()
    }

    /// Horner evaluation of the truncated polynomial.
    pub fn evaluate(&self, z: &S) -> S {
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(), |acc, c| acc * z.clone() + c.clone())
    }
}

/// Cauchy product, truncated at the common degree.
pub fn cauchy_mul<S: Scalar>(a: &PowerSeries<S>, b: &PowerSeries<S>) -> Result<PowerSeries<S>> {
    a.check_degree(b)?;
    let n = a.degree();
    let mut coeffs = vec![S::zero(); n + 1];
    for (i, ai) in a.coeffs.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.coeffs[..=n - i].iter().enumerate() {
            coeffs[i + j] = coeffs[i + j].clone() + ai.clone() * bj.clone();
        }
    }
    Ok(PowerSeries { coeffs })
}

/// Termwise product.
pub fn hadamard<S: Scalar>(a: &PowerSeries<S>, b: &PowerSeries<S>) -> Result<PowerSeries<S>> {
    a.zip_with(b, |x, y| x.clone() * y.clone())
}

/// `J^r(az) = (1 - az)^{-r}`, with coefficients `C(r+k-1, k) a^k`.
pub fn r_geometric<S: Scalar>(r: usize, a: &S, degree: usize) -> PowerSeries<S> {
    assert!(r >= 1, "r-geometric series needs r >= 1");
    let mut power = S::one();
    let coeffs = (0..=degree as u64)
        .map(|k| {
            let c = S::from_bigint(&binomial(r as u64 + k - 1, k)) * power.clone();
            power = power.clone() * a.clone();
            c
        })
        .collect();
    PowerSeries { coeffs }
}

/// Closed form of `J^m(az) ⊙ J^n(bz)` for `m >= n`:
/// `J^{m+n-1}(abz) · Σ_{i<n} C(m-1,i) C(n-1,i) (abz)^i`.
pub fn hadamard_geometric_closed<S: Scalar>(
    m: usize,
    n: usize,
    a: &S,
    b: &S,
    degree: usize,
) -> Result<PowerSeries<S>> {
    if m < n {
        return Err(Error::OrderViolation { m, n });
    }
    if n == 0 {
        return Err(Error::Domain("series orders must be positive".into()));
    }
    let w = a.clone() * b.clone();
    let mut poly = PowerSeries::zero(degree);
    let mut power = S::one();
    for i in 0..n.min(degree + 1) {
        let c = binomial(m as u64 - 1, i as u64) * binomial(n as u64 - 1, i as u64);
        poly.coeffs[i] = S::from_bigint(&c) * power.clone();
        power = power * w.clone();
    }
    cauchy_mul(&r_geometric(m + n - 1, &w, degree), &poly)
}

fn check_q<S: Scalar>(q: &S, allow_zero: bool) -> Result<()> {
    let low_ok = if allow_zero { *q >= S::zero() } else { *q > S::zero() };
    if low_ok && *q < S::one() {
        Ok(())
    } else {
        Err(Error::Domain("noninfection probability q out of range".into()))
    }
}

/// First arrival generating function of a path with `r` edges:
/// `p^r z^r / (1 - qz)^r`, coefficients `C(n-1, r-1) p^r q^{n-r}`.
pub fn path_ogf<S: Scalar>(r: usize, q: &S, degree: usize) -> Result<PowerSeries<S>> {
    if r == 0 {
        return Err(Error::Domain("path length must be positive".into()));
    }
    check_q(q, true)?;
    let p = S::one() - q.clone();
    let p_r = p.powi(r as u32);
    let mut coeffs = vec![S::zero(); degree + 1];
    let mut q_pow = S::one();
    for (n, c) in coeffs.iter_mut().enumerate().skip(r) {
        *c = S::from_bigint(&binomial(n as u64 - 1, r as u64 - 1)) * p_r.clone() * q_pow.clone();
        q_pow = q_pow * q.clone();
    }
    Ok(PowerSeries { coeffs })
}

/// Composition across an articulation vertex: the arrival time is the sum of
/// two independent arrival times.
pub fn series_reduce<S: Scalar>(phi1: &PowerSeries<S>, phi2: &PowerSeries<S>) -> Result<PowerSeries<S>> {
    cauchy_mul(phi1, phi2)
}

/// Composition of two branches sharing only the terminals: the arrival time
/// is the minimum of two independent arrival times, so survival functions
/// multiply.
///
/// Equal to `Φ_H + Φ_K - (1 - z)[Φ_H/(1-z) ⊙ Φ_K/(1-z)]`; see
/// [`parallel_reduce_hadamard`] for that form.
pub fn parallel_reduce<S: Scalar>(phi_h: &PowerSeries<S>, phi_k: &PowerSeries<S>) -> Result<PowerSeries<S>> {
    let survival = hadamard(&phi_h.survival(), &phi_k.survival())?;
    Ok(PowerSeries::from_survival(&survival))
}

/// [`parallel_reduce`] evaluated through cumulative series and one Hadamard
/// product, without forming survival functions.
pub fn parallel_reduce_hadamard<S: Scalar>(
    phi_h: &PowerSeries<S>,
    phi_k: &PowerSeries<S>,
) -> Result<PowerSeries<S>> {
    let cross = hadamard(&phi_h.prefix_sum(), &phi_k.prefix_sum())?.times_one_minus_z();
    phi_h.add(phi_k)?.sub(&cross)
}

/// Coefficients `d_1..=d_len` with `Pr(Z > n)` of a path of length `len`
/// equal to `Σ_k d_k J^k(qz)`.
fn path_survival_partial_fractions<S: Scalar>(len: usize, q: &S) -> Vec<S> {
    let ratio = (S::one() - q.clone()) / q.clone();
    let mut d = vec![S::zero(); len + 1];
    let mut ratio_pow = S::one();
    for j in 0..len {
        for r in 0..=j {
            let c = S::from_bigint(&binomial(j as u64, r as u64)) * ratio_pow.clone();
            let k = j + 1 - r;
            d[k] = if r % 2 == 0 { d[k].clone() + c } else { d[k].clone() - c };
        }
        ratio_pow = ratio_pow * ratio.clone();
    }
    d
}

fn check_two_paths<S: Scalar>(n: usize, m: usize, q: &S) -> Result<()> {
    if m < n {
        return Err(Error::OrderViolation { m, n });
    }
    if n == 0 {
        return Err(Error::Domain("path lengths must be positive".into()));
    }
    check_q(q, false)
}

/// Generating function of two parallel paths of lengths `n <= m` between
/// `s` and `t`, in closed form.
///
/// Each path's survival series is expanded into partial fractions
/// `Σ_k d_k J^k(qz)`; the Hadamard product of two such sums is evaluated term
/// by term with [`hadamard_geometric_closed`], and
/// `Φ = 1 - (1 - z) · (survival_n ⊙ survival_m)`.
pub fn two_paths_ogf<S: Scalar>(n: usize, m: usize, q: &S, degree: usize) -> Result<PowerSeries<S>> {
    check_two_paths(n, m, q)?;
    let dn = path_survival_partial_fractions(n, q);
    let dm = path_survival_partial_fractions(m, q);
    let mut survival = PowerSeries::zero(degree);
    for (a, ca) in dn.iter().enumerate().skip(1) {
        for (b, cb) in dm.iter().enumerate().skip(1) {
            let w = ca.clone() * cb.clone();
            if w.is_zero() {
                continue;
            }
            let term = hadamard_geometric_closed(a.max(b), a.min(b), q, q, degree)?;
            survival = survival.add(&term.scale(&w))?;
        }
    }
    Ok(PowerSeries::from_survival(&survival))
}

/// The two-path closed form that keeps only the leading partial fraction
/// `(p/q)^{len-1} J^len(qz)` of each survival series:
///
/// `1 - (p/q)^{n+m-2} (1-z) (1-q²z)^{-(m+n-1)} Σ_{ℓ<n} C(n-1,ℓ) C(m-1,ℓ) (q²z)^ℓ`.
///
/// The dropped terms vanish only for `n = m = 1`, or for `m <= 2` at `q = 1/2`;
/// elsewhere this differs from [`two_paths_ogf`].
pub fn two_paths_ogf_leading<S: Scalar>(n: usize, m: usize, q: &S, degree: usize) -> Result<PowerSeries<S>> {
    check_two_paths(n, m, q)?;
    let ratio = (S::one() - q.clone()) / q.clone();
    let survival = hadamard_geometric_closed(m, n, q, q, degree)?.scale(&ratio.powi((n + m - 2) as u32));
    Ok(PowerSeries::from_survival(&survival))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalExpectation<S> {
    /// Retained sum plus the extrapolated remainder, if any.
    pub value: S,
    /// `Σ_{n<=N} Pr(Z > n)`.
    pub retained: S,
    /// Geometric tail estimate beyond `N`.
    pub extrapolated: Option<S>,
}

/// `E[Z] = Σ_n Pr(Z > n)` from a truncated pmf generating function.
///
/// With `tail_mode`, the remainder past `N` is estimated by continuing the
/// last survival ratio `r = s_N / s_{N-1}` geometrically: `s_N r / (1 - r)`.
/// The estimate is exact for geometric tails.
pub fn expectation_from_survival<S: Scalar>(phi: &PowerSeries<S>, tail_mode: bool) -> Result<SurvivalExpectation<S>> {
    let survival = phi.survival();
    let s = survival.coeffs();
    for n in 1..s.len() {
        if s[n] > s[n - 1].clone() + S::slack() {
            return Err(Error::NonMonotoneCdf { index: n });
        }
    }
    let retained: S = s.iter().cloned().sum();
    let n = s.len() - 1;
    let extrapolated = if tail_mode && n >= 1 {
        let (last, prev) = (s[n].clone(), s[n - 1].clone());
        // in float mode a survival at rounding level carries no usable ratio
        if last <= S::slack() || prev <= S::slack() {
            Some(S::zero())
        } else {
            let r = last.clone() / prev;
            if r >= S::one() {
                return Err(Error::Domain("survival does not decay; tail diverges".into()));
            }
            Some(last * r.clone() / (S::one() - r))
        }
    } else {
        None
    };
    let value = match &extrapolated {
        Some(x) => retained.clone() + x.clone(),
        None => retained.clone(),
    };
    Ok(SurvivalExpectation { value, retained, extrapolated })
}
