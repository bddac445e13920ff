//! Exact distribution of the sign sum `S_n = ε₁ + … + ε_n`.
//!
//! All probabilities are dyadic: a count of sign vectors over `2ⁿ`. The
//! hot paths keep them as [`Dyadic`] and only canonicalise into
//! [`ProbabilityValue`] at the public boundary.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact::{binomial, ExactRational};

/// Largest number of summands the exhaustive enumerators accept.
pub const ENUMERATION_LIMIT: usize = 24;

/// An exact probability in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProbabilityValue(ExactRational);

impl ProbabilityValue {
    pub fn new(value: ExactRational) -> Result<Self> {
        if value.is_negative() || value > ExactRational::one() {
            return Err(Error::Domain(format!("{value} is not a probability")));
        }
        Ok(Self(value))
    }

    pub fn zero() -> Self {
        Self(ExactRational::zero())
    }

    pub fn one() -> Self {
        Self(ExactRational::one())
    }

    pub fn value(&self) -> &ExactRational {
        &self.0
    }

    pub fn into_inner(self) -> ExactRational {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn to_decimal(&self, sig: usize) -> String {
        self.0.to_decimal(sig)
    }
}

impl fmt::Display for ProbabilityValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for ProbabilityValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(&self.0)
    }
}

impl From<Dyadic> for ProbabilityValue {
    fn from(d: Dyadic) -> Self {
        Self(d.to_rational())
    }
}

/// `num / 2^exp`. Ordering is exact.
#[derive(Clone, Debug)]
pub(crate) struct Dyadic {
    pub num: BigUint,
    pub exp: u64,
}

impl Dyadic {
    pub fn new(num: BigUint, exp: u64) -> Self {
        Self { num, exp }
    }

    pub fn to_rational(&self) -> ExactRational {
        ExactRational::dyadic(self.num.clone(), self.exp)
    }
}

impl PartialEq for Dyadic {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Dyadic {}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        // a / 2^ea  vs  b / 2^eb  ⇔  a·2^(eb−ea) vs b  (for ea ≤ eb)
        let (a, b, shift, flipped) = if self.exp <= other.exp {
            (&self.num, &other.num, other.exp - self.exp, false)
        } else {
            (&other.num, &self.num, self.exp - other.exp, true)
        };
        let ord = if a.is_zero() || b.is_zero() {
            a.is_zero().cmp(&b.is_zero()).reverse()
        } else {
            match (a.bits() + shift).cmp(&b.bits()) {
                Ordering::Equal => (a << shift).cmp(b),
                ord => ord,
            }
        };
        if flipped {
            ord.reverse()
        } else {
            ord
        }
    }
}

/// Number of sign vectors of length `x` whose sum has absolute value at most
/// `j`, given the central coefficient `C(x, ⌊x/2⌋)`.
///
/// Admissible upper indices run over `[⌈(x−j)/2⌉, ⌊(x+j)/2⌋]`, a window
/// symmetric around `x/2`; the part below `⌊x/2⌋` is summed through its
/// mirror image.
pub(crate) fn window_count(x: u64, center: &BigUint, j: i64) -> BigUint {
    if j < 0 {
        return BigUint::zero();
    }
    if j as u64 >= x {
        return BigUint::one() << x;
    }
    let j = j as u64;
    let t_lo = (x - j + 1) / 2;
    let t_hi = (x + j) / 2;
    if t_lo > t_hi {
        return BigUint::zero();
    }
    let half = x / 2;
    let mirror_from = x - half + 1;
    let mut c = center.clone();
    let mut total = BigUint::zero();
    for u in half..=t_hi {
        if u >= mirror_from {
            total += &c * 2u32;
        } else {
            total += &c;
        }
        if u < t_hi {
            c *= x - u;
            c /= u + 1;
        }
    }
    total
}

/// Yields `C(x, ⌊x/2⌋)` for `x = 0, 1, 2, …`.
pub(crate) struct CentralCoefficients {
    x: u64,
    current: BigUint,
}

impl CentralCoefficients {
    pub fn new() -> Self {
        Self {
            x: 0,
            current: BigUint::one(),
        }
    }
}

impl Iterator for CentralCoefficients {
    type Item = (u64, BigUint);

    fn next(&mut self) -> Option<Self::Item> {
        let out = (self.x, self.current.clone());
        let x = self.x;
        if x.is_even() {
            // C(2h+1, h) = C(2h, h)·(2h+1)/(h+1)
            self.current *= x + 1;
            self.current /= x / 2 + 1;
        } else {
            // C(2h+2, h+1) = 2·C(2h+1, h)
            self.current <<= 1u32;
        }
        self.x += 1;
        Some(out)
    }
}

/// `P_x(j)` for every `x ≤ x_max`, as dyadics over `2^x`.
pub(crate) fn interval_column(j: i64, x_max: u64) -> Vec<Dyadic> {
    CentralCoefficients::new()
        .take_while(|(x, _)| *x <= x_max)
        .map(|(x, c)| Dyadic::new(window_count(x, &c, j), x))
        .collect()
}

pub(crate) fn pmf_dyadic(n: u64, k: i64) -> Dyadic {
    let count = if k.unsigned_abs() > n || (n as i128 + k as i128) % 2 != 0 {
        BigUint::zero()
    } else {
        binomial(n, (n as i64 + k) / 2)
    };
    Dyadic::new(count, n)
}

pub(crate) fn interval_dyadic(n: u64, k: i64) -> Dyadic {
    let count = if k < 0 {
        BigUint::zero()
    } else if k as u64 >= n {
        BigUint::one() << n
    } else {
        window_count(n, &binomial(n, (n / 2) as i64), k)
    };
    Dyadic::new(count, n)
}

/// Largest `s ≥ 0` with the parity of `n` and `s² ≤ q·n`, tested atom by
/// atom; `None` when even the smallest candidate fails.
pub(crate) fn largest_admissible_atom(n: u64, q: &ExactRational) -> Option<u64> {
    let rhs = q.numer() * BigInt::from(n);
    let fits = |s: u64| {
        let s = BigInt::from(s);
        &s * &s * q.denom() <= rhs
    };
    let mut s = n % 2;
    if !fits(s) {
        return None;
    }
    while s + 2 <= n && fits(s + 2) {
        s += 2;
    }
    Some(s)
}

pub(crate) fn xi_dyadic(n: u64, q: &ExactRational) -> Result<Dyadic> {
    if !q.is_positive() {
        return Err(Error::Domain(format!("q must be positive, got {q}")));
    }
    let count = match largest_admissible_atom(n, q) {
        None => BigUint::zero(),
        Some(s) if s >= n => BigUint::one() << n,
        Some(s) => window_count(n, &binomial(n, (n / 2) as i64), s as i64),
    };
    Ok(Dyadic::new(count, n))
}

/// `P{S_n = k}`.
pub fn pmf(n: u64, k: i64) -> ProbabilityValue {
    pmf_dyadic(n, k).into()
}

/// `P_n(k) = P{|S_n| ≤ k}`; zero for negative `k`, one for `k ≥ n`.
pub fn interval_prob(n: u64, k: i64) -> ProbabilityValue {
    interval_dyadic(n, k).into()
}

/// `P{|S_n| ≤ ξ√n}` with `q = ξ²`, deciding each atom by `s² ≤ q·n`.
pub fn xi_prob(n: u64, q: &ExactRational) -> Result<ProbabilityValue> {
    xi_dyadic(n, q).map(Into::into)
}

/// Exhaustive count over all `2ⁿ` sign vectors of those with
/// `(Σεᵢ)² ≤ q·n`.
pub fn brute_force_xi_prob(n: u64, q: &ExactRational) -> Result<ProbabilityValue> {
    if n as usize > ENUMERATION_LIMIT {
        return Err(Error::Budget {
            n: n as usize,
            max: ENUMERATION_LIMIT,
        });
    }
    if !q.is_positive() {
        return Err(Error::Domain(format!("q must be positive, got {q}")));
    }
    let rhs = q.numer() * BigInt::from(n);
    // admissible[p] answers the predicate for a vector with p plus-signs.
    let admissible: Vec<bool> = (0..=n)
        .map(|plus| {
            let s = BigInt::from(2 * plus as i64 - n as i64);
            &s * &s * q.denom() <= rhs
        })
        .collect();
    let hits = (0u64..1 << n)
        .filter(|mask| admissible[mask.count_ones() as usize])
        .count();
    Ok(Dyadic::new(BigUint::from(hits), n).into())
}

/// Outcome of enumerating `P{|Σ aᵢεᵢ| ≤ t}` for explicit weights.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TomaszewskiOutcome {
    pub probability: ProbabilityValue,
    /// `Σ aᵢ²`; the conjecture concerns unit vectors, where this is 1.
    pub sum_of_squares: ExactRational,
    pub hits: u64,
    pub total: u64,
}

/// Exact fraction of sign vectors with `|Σ aᵢεᵢ| ≤ t`, for rational weights.
pub fn tomaszewski_count(weights: &[ExactRational], t: &ExactRational) -> Result<TomaszewskiOutcome> {
    if weights.len() > ENUMERATION_LIMIT {
        return Err(Error::Budget {
            n: weights.len(),
            max: ENUMERATION_LIMIT,
        });
    }
    let n = weights.len() as u32;
    let sum_of_squares = weights
        .iter()
        .fold(ExactRational::zero(), |acc, w| acc + w * w);

    // Clear denominators so the enumeration runs over integers.
    let scale = weights
        .iter()
        .chain(std::iter::once(t))
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let to_int = |r: &ExactRational| r.numer() * (&scale / r.denom());
    let int_weights: Vec<BigInt> = weights.iter().map(to_int).collect();
    let threshold = to_int(t);

    let hits = if threshold.is_negative() {
        0
    } else {
        let small: Option<Vec<i128>> = int_weights.iter().map(|w| w.to_i128()).collect();
        let fits = small.as_ref().and_then(|ws| {
            ws.iter()
                .try_fold(0i128, |acc, w| acc.checked_add(w.checked_abs()?.checked_mul(2)?))
        });
        match (small, fits, threshold.to_i128()) {
            (Some(ws), Some(_), Some(t)) => gray_code_hits(&ws, t),
            _ => big_hits(&int_weights, &threshold),
        }
    };
    let total = 1u64 << n;
    Ok(TomaszewskiOutcome {
        probability: Dyadic::new(BigUint::from(hits), n as u64).into(),
        sum_of_squares,
        hits,
        total,
    })
}

fn gray_code_hits(weights: &[i128], threshold: i128) -> u64 {
    let mut sum: i128 = -weights.iter().sum::<i128>();
    let mut plus = 0u64;
    let mut hits = (sum.abs() <= threshold) as u64;
    for g in 1u64..1 << weights.len() {
        let bit = g.trailing_zeros() as usize;
        if plus & (1 << bit) == 0 {
            sum += 2 * weights[bit];
        } else {
            sum -= 2 * weights[bit];
        }
        plus ^= 1 << bit;
        hits += (sum.abs() <= threshold) as u64;
    }
    hits
}

fn big_hits(weights: &[BigInt], threshold: &BigInt) -> u64 {
    (0u64..1 << weights.len())
        .filter(|mask| {
            let sum: BigInt = weights
                .iter()
                .enumerate()
                .map(|(i, w)| if mask & (1 << i) != 0 { w.clone() } else { -w })
                .sum();
            sum.abs() <= *threshold
        })
        .count() as u64
}

/// The law of `S_n` for a fixed number of summands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignSumDistribution {
    n: u64,
}

impl SignSumDistribution {
    pub fn new(n: u64) -> Self {
        Self { n }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Support `{−n, −n+2, …, n}`.
    pub fn support(&self) -> impl Iterator<Item = i64> {
        let n = self.n as i64;
        (0..=n).map(move |i| 2 * i - n)
    }

    pub fn pmf(&self, k: i64) -> ProbabilityValue {
        pmf(self.n, k)
    }

    pub fn interval_prob(&self, k: i64) -> ProbabilityValue {
        interval_prob(self.n, k)
    }

    pub fn total_mass(&self) -> ExactRational {
        self.support()
            .fold(ExactRational::zero(), |acc, k| acc + self.pmf(k).into_inner())
    }
}
