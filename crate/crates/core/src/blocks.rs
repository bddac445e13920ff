//! Block structure of the index set.
//!
//! For `q = ξ²`, `κ(n)` is the largest integer with the parity of `n` and
//! `κ(n) ≤ ξ√n`. The indices `n_k` where `κ(· + 1)` first reaches `k` cut
//! `{0, 1, 2, …}` into blocks `C_k = [n_k, n_{k+1})` on which
//! `P{|S_n| ≤ ξ√n} = P{|S_n| ≤ k}`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::dist::{interval_prob, ProbabilityValue};
use crate::error::{Error, Result};
use crate::exact::{ceil_rational, floor_half_n_plus_xi_sqrt_n, isqrt, ExactRational};

/// A threshold `ξ`, held through its exact square `q = ξ²`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct XiClass {
    q: ExactRational,
}

impl XiClass {
    pub fn new(q: ExactRational) -> Result<Self> {
        if !q.is_positive() {
            return Err(Error::Domain(format!("q = ξ² must be positive, got {q}")));
        }
        Ok(Self { q })
    }

    pub fn q(&self) -> &ExactRational {
        &self.q
    }

    /// True iff `q ≤ 1`, the range where the block minima are guaranteed
    /// to increase.
    pub fn guaranteed_regime(&self) -> bool {
        self.q <= ExactRational::one()
    }
}

impl FromStr for XiClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::new(s.parse()?)
    }
}

impl fmt::Display for XiClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q={}", self.q)
    }
}

/// One block `C_k = [n_lo, n_hi_exclusive)` with its minimum `Q_k⁻`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Block {
    pub k: u64,
    pub n_lo: u64,
    pub n_hi_exclusive: u64,
    pub q_minus: ProbabilityValue,
    pub guaranteed_regime: bool,
}

impl Block {
    pub fn contains(&self, n: u64) -> bool {
        self.n_lo <= n && n < self.n_hi_exclusive
    }

    /// Last index of the block, where the minimum sits.
    pub fn n_last(&self) -> u64 {
        self.n_hi_exclusive - 1
    }
}

pub fn kappa(n: u64, xi: &XiClass) -> i64 {
    let half = floor_half_n_plus_xi_sqrt_n(n, xi.q()).expect("q is positive by construction");
    (half * BigInt::from(2) - BigInt::from(n))
        .to_i64()
        .expect("kappa fits in i64")
}

/// `n_k = 2⌈(k²/q + k)/2⌉ − k − 1` for `k ≥ 1`.
pub fn n_k(k: u64, xi: &XiClass) -> u64 {
    assert!(k >= 1, "n_k is defined for k >= 1");
    let p = xi.q().numer();
    let s = xi.q().denom();
    let k_big = BigInt::from(k);
    // (k²·s/p + k)/2 = (k²·s + k·p) / (2p)
    let arg = ExactRational::new(&k_big * &k_big * s + &k_big * p, p * 2)
        .expect("p is positive");
    let value: BigInt = ceil_rational(&arg) * BigInt::from(2) - &k_big - BigInt::from(1);
    value.to_u64().expect("n_k is a nonnegative machine integer")
}

/// Lower end of `C_k`, with `C_0 = [0, n_1)`.
fn block_start(k: u64, xi: &XiClass) -> u64 {
    if k == 0 {
        0
    } else {
        n_k(k, xi)
    }
}

/// `Q_k⁻ = P_{n_{k+1}−1} = P_{n_{k+1}−1}(k−1)`.
pub fn q_minus(k: u64, xi: &XiClass) -> Result<ProbabilityValue> {
    let next = n_k(k + 1, xi);
    if next < 1 {
        return Err(Error::Domain(format!(
            "Q_{k}⁻ is undefined for {xi}: n_{} = {next}",
            k + 1
        )));
    }
    Ok(interval_prob(next - 1, k as i64 - 1))
}

/// The block with index `k`; fails for an empty `C_0` (as when `q = 1`).
pub fn block(k: u64, xi: &XiClass) -> Result<Block> {
    let n_lo = block_start(k, xi);
    let n_hi_exclusive = n_k(k + 1, xi);
    if n_lo >= n_hi_exclusive {
        return Err(Error::Domain(format!("block C_{k} is empty for {xi}")));
    }
    Ok(Block {
        k,
        n_lo,
        n_hi_exclusive,
        q_minus: q_minus(k, xi)?,
        guaranteed_regime: xi.guaranteed_regime(),
    })
}

/// The block containing `n`, found from the seed `⌊ξ√(n+1)⌋` (an upper
/// bound on the index since `κ(m) ≤ ξ√m`).
pub fn block_of(n: u64, xi: &XiClass) -> Block {
    let p = xi.q().numer();
    let s = xi.q().denom();
    let root = isqrt(&(p * BigInt::from(n + 1) * s)).expect("nonnegative");
    let mut k = (BigInt::from(root) / s).to_u64().expect("block index fits in u64");
    while k > 0 && block_start(k, xi) > n {
        k -= 1;
    }
    while n_k(k + 1, xi) <= n {
        k += 1;
    }
    block(k, xi).expect("a block containing n is never empty")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xi(q: &str) -> XiClass {
        q.parse().unwrap()
    }

    fn p(s: &str) -> ProbabilityValue {
        ProbabilityValue::new(s.parse().unwrap()).unwrap()
    }

    /// κ by definition: the largest t with n's parity and t ≤ 0 or t² ≤ q·n.
    fn kappa_oracle(n: u64, q: &ExactRational) -> i64 {
        let fits = |t: i64| t <= 0 || BigInt::from(t * t) * q.denom() <= q.numer() * BigInt::from(n);
        let mut t = -(n as i64 % 2) - 2;
        while fits(t + 2) {
            t += 2;
        }
        t
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(kappa(0, &xi("1")), 0);
        assert_eq!(kappa(7, &xi("1")), 1);
        assert_eq!(kappa(8, &xi("1")), 2);
        assert_eq!(kappa(1, &xi("1/4")), -1);
    }

    #[test]
    fn kappa_matches_definition() {
        for q in ["1", "1/2", "2/3", "121/100", "2", "1/9"] {
            let x = xi(q);
            for n in 0..=2000 {
                assert_eq!(kappa(n, &x), kappa_oracle(n, x.q()), "n={n} q={q}");
            }
        }
    }

    #[test]
    fn kappa_basic_properties() {
        for q in ["1", "2/3", "1/2", "1/4", "9/16", "99/100"] {
            let x = xi(q);
            assert_eq!(kappa(0, &x), 0);
            for n in 0..=2000u64 {
                let (a, b, c) = (kappa(n, &x), kappa(n + 1, &x), kappa(n + 2, &x));
                assert!(b - a == 1 || b - a == -1, "q={q} n={n}");
                assert!(c >= a);
                assert!(a <= 0 || BigInt::from(a * a) * x.q().denom() <= x.q().numer() * BigInt::from(n));
            }
        }
    }

    #[test]
    fn kappa_steps_up_by_at_most_one_below_eight() {
        for q in ["2", "121/100", "7", "79/10"] {
            let x = xi(q);
            for n in 0..=2000u64 {
                assert!(kappa(n + 1, &x) - kappa(n, &x) <= 1, "q={q} n={n}");
            }
        }
        // at q = 8 the step can reach 3
        let x = xi("8");
        assert!((0..=2000u64).any(|n| kappa(n + 1, &x) - kappa(n, &x) > 1));
    }

    #[test]
    fn n_k_examples() {
        assert_eq!(n_k(3, &xi("1")), 8);
        let half = xi("1/2");
        assert_eq!((1..=4).map(|k| n_k(k, &half)).collect::<Vec<_>>(), [2, 7, 18, 31]);
        let two_thirds = xi("2/3");
        assert_eq!(
            (1..=6).map(|k| n_k(k, &two_thirds)).collect::<Vec<_>>(),
            [2, 5, 14, 23, 38, 53]
        );
        assert_eq!(n_k(4, &xi("2")), 7);
        assert_eq!(n_k(5, &xi("2")), 12);
        assert_eq!(n_k(22, &xi("121/100")), 399);
        assert_eq!(n_k(23, &xi("121/100")), 438);
    }

    #[test]
    fn n_k_is_first_index_where_kappa_reaches_k() {
        for q in ["1", "1/2", "2/3", "1/4", "121/100", "2"] {
            let x = xi(q);
            let mut prev = None;
            for k in 1..=30u64 {
                let nk = n_k(k, &x);
                let first = (0..).find(|&n| kappa(n + 1, &x) >= k as i64).unwrap();
                assert_eq!(nk, first, "q={q} k={k}");
                assert_eq!((nk + k) % 2, 1);
                if let Some(prev) = prev {
                    assert!(nk > prev);
                }
                prev = Some(nk);
            }
        }
    }

    #[test]
    fn kappa_around_n_k() {
        for q in ["1", "1/2", "2/3", "1/4", "9/16"] {
            let x = xi(q);
            for k in 1..=60u64 {
                let nk = n_k(k, &x);
                if k == 1 && nk == 0 {
                    continue;
                }
                assert_eq!(kappa(nk + 1, &x), k as i64);
                assert_eq!(kappa(nk, &x), k as i64 - 1);
                assert_eq!(kappa(nk - 1, &x), k as i64 - 2);
                assert!(nk + 1 >= k * k, "n_k ≥ k² − 1");
            }
        }
    }

    #[test]
    fn n_k_for_unit_threshold_is_k_squared_minus_one() {
        let x = xi("1");
        for k in 1..=100 {
            assert_eq!(n_k(k, &x), k * k - 1);
        }
    }

    #[test]
    fn kappa_pins_down_within_block() {
        for q in ["1", "1/2", "2/3"] {
            let x = xi(q);
            for k in 1..=40u64 {
                for m in n_k(k, &x)..=n_k(k + 1, &x) {
                    let km = kappa(m, &x);
                    assert!(km == k as i64 || km == k as i64 - 1, "q={q} k={k} m={m}");
                }
            }
        }
    }

    #[test]
    fn distance_inequality() {
        // a < ((κ(a)+2)² / κ(b)²)·b
        for q in ["1", "1/2", "2/3", "121/100"] {
            let x = xi(q);
            let kap: Vec<i64> = (0..=2000).map(|n| kappa(n, &x)).collect();
            for a in 0..=2000usize {
                for b in 0..=2000usize {
                    if kap[b] >= 1 {
                        let lhs = a as i128 * kap[b] as i128 * kap[b] as i128;
                        let rhs = (kap[a] as i128 + 2).pow(2) * b as i128;
                        assert!(lhs < rhs, "q={q} a={a} b={b}");
                    }
                }
            }
        }
    }

    #[test]
    fn gap_bound() {
        for q in ["1", "2/3", "1/2"] {
            let x = xi(q);
            for k in 1..=100u64 {
                let (a, b) = (n_k(k, &x) as u128, n_k(k + 1, &x) as u128);
                let k = k as u128;
                // n_{k+1} − 1 < ((k+1)²/k²)(n_k + 1)
                assert!(k * k * (b - 1) < (k + 1) * (k + 1) * (a + 1));
            }
        }
    }

    #[test]
    fn block_of_examples() {
        assert_eq!(block_of(7, &xi("1")).k, 2);
        assert_eq!(block_of(17, &xi("1/2")).k, 2);
        assert_eq!(block_of(2, &xi("2/3")).k, 1);
        let b = block_of(0, &xi("1/2"));
        assert_eq!((b.k, b.n_lo, b.n_hi_exclusive), (0, 0, 2));
        assert_eq!(block_of(0, &xi("1")).k, 1);
    }

    #[test]
    fn block_of_partitions_indices() {
        for q in ["1", "1/2", "2/3", "1/4", "2", "121/100"] {
            let x = xi(q);
            let mut expected_k = if n_k(1, &x) == 0 { 1 } else { 0 };
            for n in 0..=3000u64 {
                while n_k(expected_k + 1, &x) <= n {
                    expected_k += 1;
                }
                let b = block_of(n, &x);
                assert!(b.contains(n));
                assert_eq!(b.k, expected_k, "q={q} n={n}");
            }
        }
    }

    #[test]
    fn q_minus_examples() {
        assert_eq!(q_minus(1, &xi("1")).unwrap(), p("1/2"));
        assert_eq!(q_minus(2, &xi("1")).unwrap(), p("35/64"));
        assert_eq!(q_minus(2, &xi("1/2")).unwrap(), p("12155/32768"));
        assert!(matches!(q_minus(0, &xi("1")), Err(Error::Domain(_))));
        assert!(block(0, &xi("1")).is_err());
        assert_eq!(q_minus(0, &xi("1/2")).unwrap(), p("0"));
    }

    #[test]
    fn q_minus_equals_xi_prob_at_block_end() {
        for q in ["1", "1/2", "2/3", "1/4", "2"] {
            let x = xi(q);
            for k in 0..=30u64 {
                let next = n_k(k + 1, &x);
                if next == 0 {
                    continue;
                }
                let direct = crate::dist::xi_prob(next - 1, x.q()).unwrap();
                assert_eq!(q_minus(k, &x).unwrap(), direct, "q={q} k={k}");
            }
        }
    }

    #[test]
    fn non_positive_q_is_rejected() {
        assert!("0".parse::<XiClass>().is_err());
        assert!("-1/2".parse::<XiClass>().is_err());
        assert!(xi("1").guaranteed_regime());
        assert!(!xi("121/100").guaranteed_regime());
    }
}
