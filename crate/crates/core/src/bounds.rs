//! Sharp lower bounds for `P{|S_n| ≤ ξ√n}` and the reference values they
//! are compared with.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::blocks::{n_k, XiClass};
use crate::dist::{pmf, ProbabilityValue};
use crate::error::{Error, Result};
use crate::exact::{ceil_rational, ExactRational};

/// The limit of the block minima is `2Φ(ξ) − 1`, the mass of `[−ξ, ξ]`
/// under the standard normal law.
pub const LIMIT_NOTE: &str =
    "normal_limit is 2*Phi(xi) - 1 = 1 - 2*Phi(-xi), the standard normal mass of [-xi, xi]";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub q: ExactRational,
    pub n1: u64,
    pub n2: u64,
    /// `P_n ≥ sharp_bound` for every `n ≥ n1`.
    pub sharp_bound: ProbabilityValue,
    pub sharp_bound_decimal: String,
    pub chebyshev_bound: ExactRational,
    pub normal_limit: f64,
    pub normal_limit_digits: u32,
    pub limit_note: &'static str,
}

/// `n₂ = 2⌈2/q⌉ − 1`, characterised by `4/(n₂+1) ≤ q < 4/(n₂−1)`.
pub fn n2_from_xi(xi: &XiClass) -> u64 {
    let two_over_q = ExactRational::from_integer(2) / xi.q().clone();
    let n2 = (ceil_rational(&two_over_q) * BigInt::from(2) - BigInt::from(1))
        .to_u64()
        .expect("n2 fits in u64");
    debug_assert!(ExactRational::new(4, n2 + 1).unwrap() <= *xi.q());
    debug_assert!(n2 <= 1 || *xi.q() < ExactRational::new(4, n2 - 1).unwrap());
    n2
}

/// `n₁ = 2⌈(n₂ − 3)/8⌉` for odd `n₂ ≥ 3`.
pub fn n1_from_n2(n2: u64) -> Result<u64> {
    if n2 < 3 || n2.is_even() {
        return Err(Error::Domain(format!("n2 must be odd and at least 3, got {n2}")));
    }
    Ok(2 * (n2 - 3).div_ceil(8))
}

/// The guarantee `P_n ≥ C(n₂−1, (n₂−1)/2)·2^{−(n₂−1)}` for all `n ≥ n₁`.
///
/// For `q = 1` the guarantee starts at `n₁ = 0`; the values at `n ∈ {0, 1}`
/// are both 1.
pub fn sharp_lower_bound(xi: &XiClass) -> Result<BoundReport> {
    if !xi.guaranteed_regime() {
        return Err(Error::Regime(format!(
            "the sharp bound needs q = ξ² ≤ 1, got {}",
            xi.q()
        )));
    }
    let n2 = n2_from_xi(xi);
    let n1 = n1_from_n2(n2)?;
    debug_assert_eq!(n1, n_k(1, xi));
    debug_assert_eq!(n2, n_k(2, xi));
    let sharp_bound = pmf(n2 - 1, 0);
    let digits = 15;
    Ok(BoundReport {
        q: xi.q().clone(),
        n1,
        n2,
        sharp_bound_decimal: sharp_bound.to_decimal(12),
        sharp_bound,
        chebyshev_bound: chebyshev_bound(xi),
        normal_limit: normal_limit(xi, digits)?,
        normal_limit_digits: digits,
        limit_note: LIMIT_NOTE,
    })
}

/// `max(0, 1 − 1/q)`.
pub fn chebyshev_bound(xi: &XiClass) -> ExactRational {
    let raw = ExactRational::one() - xi.q().recip().expect("q is positive");
    if raw.is_negative() {
        ExactRational::zero()
    } else {
        raw
    }
}

/// `2Φ(ξ) − 1 = erf(ξ/√2)` to within `10^(−digits)`.
///
/// The Maclaurin series of erf is summed in binary fixed point with enough
/// guard bits to absorb the `e^{x²}` growth of the intermediate terms; for
/// `x ≥ 6` the result is within `erfc(6) < 3·10⁻¹⁷` of 1 and 1 is returned.
pub fn normal_limit(xi: &XiClass, digits: u32) -> Result<f64> {
    if !(1..=15).contains(&digits) {
        return Err(Error::Domain(format!("digits must lie in 1..=15, got {digits}")));
    }
    let half_q = xi.q() / &ExactRational::from_integer(2);
    if half_q >= ExactRational::from_integer(36) {
        return Ok(1.0);
    }
    let growth = (half_q.to_f64() * std::f64::consts::LOG2_E).ceil() as u64;
    let bits = 4 * digits as u64 + 96 + growth;
    let value = erf_of_sqrt_fixed(&half_q, bits);
    Ok(ExactRational::new(value, BigInt::one() << bits)
        .expect("nonzero denominator")
        .to_f64())
}

/// `erf(√r)·2^bits`, truncated, for rational `r ≥ 0`.
fn erf_of_sqrt_fixed(r: &ExactRational, bits: u64) -> BigInt {
    let one = BigInt::one() << bits;
    // x = √r in fixed point: isqrt(r·2^(2·bits))
    let scaled = (r.numer() << (2 * bits)) / r.denom();
    let x = BigInt::from(scaled.to_biguint().expect("r ≥ 0").sqrt());
    let x2 = (&x * &x) >> bits;

    // Σ (−1)^m x^(2m+1) / (m!·(2m+1))
    let mut term = x.clone();
    let mut sum = BigInt::zero();
    let mut m: u64 = 0;
    while !term.is_zero() {
        let piece = &term / (2 * m + 1);
        if m.is_even() {
            sum += piece;
        } else {
            sum -= piece;
        }
        m += 1;
        term = (term * &x2 >> bits) / m;
    }
    // √π·2^bits = isqrt(π·2^bits · 2^bits)
    let sqrt_pi = BigInt::from((fixed_pi(bits) << bits).to_biguint().expect("π > 0").sqrt());
    (sum * 2 * &one) / sqrt_pi
}

/// `π·2^bits` by Machin's formula `π = 16·atan(1/5) − 4·atan(1/239)`.
fn fixed_pi(bits: u64) -> BigInt {
    let guard = 32;
    let b = bits + guard;
    let pi = acot_fixed(5, b) * 16 - acot_fixed(239, b) * 4;
    pi >> guard
}

fn acot_fixed(m: u64, bits: u64) -> BigInt {
    let m2 = BigInt::from(m * m);
    let mut power = (BigInt::one() << bits) / m;
    let mut sum = BigInt::zero();
    let mut i: u64 = 0;
    while !power.is_zero() {
        let piece = &power / (2 * i + 1);
        if i.is_even() {
            sum += piece;
        } else {
            sum -= piece;
        }
        power /= &m2;
        i += 1;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn xi(q: &str) -> XiClass {
        q.parse().unwrap()
    }

    fn p(s: &str) -> ProbabilityValue {
        ProbabilityValue::new(s.parse().unwrap()).unwrap()
    }

    #[test]
    fn n2_examples() {
        assert_eq!(n2_from_xi(&xi("1")), 3);
        assert_eq!(n2_from_xi(&xi("2/3")), 5);
        assert_eq!(n2_from_xi(&xi("1/2")), 7);
        assert_eq!(n2_from_xi(&xi("9/16")), 7);
    }

    #[test]
    fn n1_examples() {
        assert_eq!(n1_from_n2(3).unwrap(), 0);
        assert_eq!(n1_from_n2(7).unwrap(), 2);
        assert_eq!(n1_from_n2(5).unwrap(), 2);
        assert!(n1_from_n2(4).is_err());
        assert!(n1_from_n2(1).is_err());
    }

    #[test]
    fn sharp_bound_examples() {
        assert_eq!(sharp_lower_bound(&xi("1")).unwrap().sharp_bound, p("1/2"));
        assert_eq!(sharp_lower_bound(&xi("2/3")).unwrap().sharp_bound, p("3/8"));
        assert_eq!(sharp_lower_bound(&xi("1/2")).unwrap().sharp_bound, p("5/16"));
        let r = sharp_lower_bound(&xi("9/16")).unwrap();
        assert_eq!((r.n2, r.sharp_bound.clone()), (7, p("5/16")));
        assert!(matches!(sharp_lower_bound(&xi("2")), Err(Error::Regime(_))));
    }

    #[test]
    fn chebyshev_examples() {
        assert_eq!(chebyshev_bound(&xi("1")), "0".parse().unwrap());
        assert_eq!(chebyshev_bound(&xi("1/2")), "0".parse().unwrap());
        assert_eq!(chebyshev_bound(&xi("4")), "3/4".parse().unwrap());
    }

    #[test]
    fn fixed_pi_digits() {
        let pi = fixed_pi(200);
        let approx = ExactRational::new(pi, BigInt::one() << 200).unwrap();
        assert!((approx.to_f64() - std::f64::consts::PI).abs() < 1e-15);
        let pi_odd = ExactRational::new(fixed_pi(201), BigInt::one() << 201).unwrap();
        assert!((pi_odd.to_f64() - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn normal_limit_examples() {
        let tiny = normal_limit(&xi("1/1000000000000000000000000000000000"), 15).unwrap();
        assert!(tiny.abs() < 1e-15);
        assert!((normal_limit(&xi("1"), 12).unwrap() - 0.682689492137).abs() < 1e-12);
        assert!((normal_limit(&xi("1/2"), 12).unwrap() - 0.520499877813).abs() < 1e-12);
        assert_eq!(normal_limit(&xi("100"), 15).unwrap(), 1.0);
        assert!(normal_limit(&xi("1"), 0).is_err());
        assert!(normal_limit(&xi("1"), 16).is_err());
    }

    #[test]
    fn normal_limit_against_libm() {
        for q in ["1", "1/2", "2/3", "1/4", "9/16", "2", "121/100", "7", "50", "71"] {
            let x = xi(q);
            let oracle = libm::erf((x.q().to_f64() / 2.0).sqrt());
            let mine = normal_limit(&x, 15).unwrap();
            assert!((mine - oracle).abs() < 1e-14, "q={q}: {mine} vs {oracle}");
        }
    }

    #[test]
    fn sharp_bound_beats_chebyshev() {
        for q in ["1", "2/3", "1/2", "1/4", "9/16", "1/100"] {
            let r = sharp_lower_bound(&xi(q)).unwrap();
            assert!(*r.sharp_bound.value() > r.chebyshev_bound);
        }
    }

    proptest! {
        #[test]
        fn n2_bracket_and_n1_agree_with_blocks(num in 1u64..=10_000, extra in 0u64..=10_000) {
            let q = ExactRational::new(num, num + extra).unwrap();
            let x = XiClass::new(q.clone()).unwrap();
            let n2 = n2_from_xi(&x);
            prop_assert!(n2 % 2 == 1 && n2 >= 3);
            prop_assert!(ExactRational::new(4, n2 + 1).unwrap() <= q);
            prop_assert!(q < ExactRational::new(4, n2 - 1).unwrap());
            prop_assert_eq!(n2, n_k(2, &x));
            prop_assert_eq!(n1_from_n2(n2).unwrap(), n_k(1, &x));
        }
    }
}
