//! Exact probabilities `P{|S_n| ≤ ξ√n}` for sums of independent Rademacher
//! signs, their block structure in `n`, sharp lower bounds for `ξ ≤ 1`, and
//! a harness that checks the underlying identities and inequalities.

pub mod blocks;
pub mod bounds;
pub mod cli;
pub mod dist;
pub mod error;
pub mod exact;
pub mod verify;

pub use blocks::{block, block_of, kappa, n_k, q_minus, Block, XiClass};
pub use bounds::{chebyshev_bound, n1_from_n2, n2_from_xi, normal_limit, sharp_lower_bound, BoundReport};
pub use dist::{
    brute_force_xi_prob, interval_prob, pmf, tomaszewski_count, xi_prob, ProbabilityValue,
    SignSumDistribution, TomaszewskiOutcome,
};
pub use error::{Error, Result};
pub use exact::{binomial, ceil_rational, floor_half_n_plus_xi_sqrt_n, isqrt, ExactRational};
