//! Finite, exact verification of the identities, inequalities and block
//! claims over swept ranges.
//!
//! Every verifier returns a [`VerificationReport`]. Hypotheses of each
//! claim can be switched off through [`Hypotheses`]; a sound harness must
//! then find violations, which is how the negative-control tests use it.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::blocks::{n_k, XiClass};
use crate::bounds::n2_from_xi;
use crate::dist::{interval_column, interval_dyadic, pmf_dyadic, xi_dyadic, Dyadic};
use crate::exact::ExactRational;

/// At most this many failure records are kept per report; `failure_count`
/// always holds the full number.
pub const MAX_RECORDED_FAILURES: usize = 1000;

pub const DEFAULT_K_MAX: u64 = 25;
pub const DEFAULT_N_CAP: u64 = 2000;
pub const DEFAULT_REMARK_N_MAX: u64 = 300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Exploratory,
}

/// An exact value together with a 12-digit decimal for reading.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ValueEntry {
    pub name: String,
    pub exact: String,
    pub decimal: String,
}

impl ValueEntry {
    pub fn new(name: impl Into<String>, value: &ExactRational) -> Self {
        Self {
            name: name.into(),
            exact: value.to_string(),
            decimal: value.to_decimal(12),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Failure {
    pub inputs: BTreeMap<String, i64>,
    pub relation: String,
    pub values: Vec<ValueEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub claim_id: String,
    pub swept_range: String,
    pub checks_run: u64,
    pub failure_count: u64,
    pub failures: Vec<Failure>,
    pub status: Status,
    /// Informational findings that do not affect `status`.
    pub notes: Vec<String>,
}

impl VerificationReport {
    fn assemble(
        claim_id: &str,
        swept_range: String,
        tally: Tally,
        exploratory: bool,
        notes: Vec<String>,
    ) -> Self {
        let Tally {
            checks,
            failure_count,
            mut failures,
        } = tally;
        failures.sort();
        failures.truncate(MAX_RECORDED_FAILURES);
        let status = if exploratory {
            Status::Exploratory
        } else if failure_count == 0 && checks > 0 {
            Status::Pass
        } else {
            Status::Fail
        };
        Self {
            claim_id: claim_id.to_string(),
            swept_range,
            checks_run: checks,
            failure_count,
            failures,
            status,
            notes,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// True unless the report is a hard failure.
    pub fn acceptable(&self) -> bool {
        self.status != Status::Fail
    }
}

/// Hypotheses of the swept claims. All default to `true`; turning one off
/// widens the sweep beyond what the claim covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Hypotheses {
    /// `n + k` even.
    pub parity: bool,
    /// `n + 2 ≥ k²`.
    pub square_floor: bool,
    /// `n + 1 + 2ℓ < ((k+1)²/k²)(n + 2)`; relaxed to `(k+2)²/k²`.
    pub gap_bound: bool,
    /// `q ≤ 1`; when off, `q > 1` is judged pass/fail instead of exploratory.
    pub xi_at_most_one: bool,
}

impl Default for Hypotheses {
    fn default() -> Self {
        Self {
            parity: true,
            square_floor: true,
            gap_bound: true,
            xi_at_most_one: true,
        }
    }
}

#[derive(Default)]
struct Tally {
    checks: u64,
    failure_count: u64,
    failures: Vec<Failure>,
}

impl Tally {
    fn check(&mut self, ok: bool, failure: impl FnOnce() -> Failure) {
        self.checks += 1;
        if !ok {
            self.failure_count += 1;
            if self.failures.len() < MAX_RECORDED_FAILURES {
                self.failures.push(failure());
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.checks += other.checks;
        self.failure_count += other.failure_count;
        self.failures.extend(other.failures);
        if self.failures.len() > 4 * MAX_RECORDED_FAILURES {
            self.failures.sort();
            self.failures.truncate(MAX_RECORDED_FAILURES);
        }
        self
    }
}

fn failure(inputs: &[(&str, i64)], relation: &str, values: Vec<ValueEntry>) -> Failure {
    Failure {
        inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        relation: relation.to_string(),
        values,
    }
}

fn dy(name: &str, d: &Dyadic) -> ValueEntry {
    ValueEntry::new(name, &d.to_rational())
}

fn rat(name: &str, r: &ExactRational) -> ValueEntry {
    ValueEntry::new(name, r)
}

/// Largest ℓ with `k²(n+1+2ℓ) < G·(n+2)`, where `G = (k+1)²` or, with the
/// gap hypothesis relaxed, `(k+2)²`.
fn max_ell(k: u64, n: u64, hyp: &Hypotheses) -> u64 {
    let g = if hyp.gap_bound { (k + 1) * (k + 1) } else { (k + 2) * (k + 2) } as u128;
    let k2 = (k * k) as u128;
    let n = n as u128;
    let room = g * (n + 2) - k2 * (n + 1) - 1;
    (room / (2 * k2)) as u64
}

// ---------------------------------------------------------------------------
// Step identities and the parity corollary
// ---------------------------------------------------------------------------

struct SmallTables {
    /// pmf[n][k] for 0 ≤ k ≤ n
    pmf: Vec<Vec<ExactRational>>,
    /// interval[n][k] for 0 ≤ k ≤ n
    interval: Vec<Vec<ExactRational>>,
    /// prefix_min[j][n] = (m, P_m(j)) minimising over m < n, first m on ties
    prefix_min: Vec<Vec<(u64, ExactRational)>>,
}

impl SmallTables {
    fn build(n_max: u64) -> Self {
        let rows: Vec<(Vec<ExactRational>, Vec<ExactRational>)> = (0..=n_max)
            .into_par_iter()
            .map(|n| {
                let pmf = (0..=n as i64).map(|k| pmf_dyadic(n, k).to_rational()).collect();
                let interval = (0..=n as i64)
                    .map(|k| interval_dyadic(n, k).to_rational())
                    .collect();
                (pmf, interval)
            })
            .collect();
        let (pmf, interval) = rows.into_iter().unzip();
        let mut tables = Self {
            pmf,
            interval,
            prefix_min: Vec::new(),
        };
        tables.prefix_min = (0..=n_max as i64 + 1)
            .into_par_iter()
            .map(|j| {
                let mut column = vec![(0, ExactRational::one())];
                for m in 0..n_max {
                    let value = tables.interval(m, j);
                    let best = column.last().expect("nonempty").clone();
                    column.push(if m == 0 || value < best.1 { (m, value) } else { best });
                }
                column
            })
            .collect();
        tables
    }

    fn pmf(&self, n: u64, k: i64) -> ExactRational {
        let k = k.unsigned_abs();
        if k > n {
            ExactRational::zero()
        } else {
            self.pmf[n as usize][k as usize].clone()
        }
    }

    fn interval(&self, n: u64, k: i64) -> ExactRational {
        if k < 0 {
            ExactRational::zero()
        } else if k as u64 >= n {
            ExactRational::one()
        } else {
            self.interval[n as usize][k as usize].clone()
        }
    }
}

/// Step-up, step-down, the two ratio identities, the difference identity,
/// the two-step ratio, and the parity corollary
/// `P_n(k) = P_n(k+1) < P_m(k+1)` for `m < n`, over `1 ≤ n ≤ n_max`.
pub fn verify_remark(n_max: u64) -> crate::error::Result<VerificationReport> {
    verify_remark_with(n_max, &Hypotheses::default())
}

pub fn verify_remark_with(n_max: u64, hyp: &Hypotheses) -> crate::error::Result<VerificationReport> {
    if n_max < 2 {
        return Err(crate::error::Error::Domain(format!(
            "n_max must be at least 2, got {n_max}"
        )));
    }
    let t = SmallTables::build(n_max + 2);
    let int = |v: i64| ExactRational::from_integer(v);

    let tally = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let mut tally = Tally::default();
            let ni = n as i64;
            for k in 0..=ni {
                if hyp.parity && (ni + k) % 2 != 0 {
                    continue;
                }
                let ins = [("n", ni), ("k", k)];
                let p_nk = t.interval(n, k);
                let up = t.pmf(n - 1, k + 1);

                let rhs = &t.interval(n - 1, k - 1) + &up;
                tally.check(p_nk == rhs, || {
                    failure(&ins, "P_n(k) = P_{n-1}(k-1) + P{S_{n-1}=k+1}", vec![
                        rat("lhs", &p_nk),
                        rat("rhs", &rhs),
                    ])
                });

                let rhs = &t.interval(n - 1, k + 1) - &up;
                tally.check(p_nk == rhs, || {
                    failure(&ins, "P_n(k) = P_{n-1}(k+1) - P{S_{n-1}=k+1}", vec![
                        rat("lhs", &p_nk),
                        rat("rhs", &rhs),
                    ])
                });

                let point = t.pmf(n, k);
                let down = t.pmf(n - 1, k - 1);
                let rhs = &(&int(ni + k) / &int(ni)) * &point;
                tally.check(down == rhs, || {
                    failure(&ins, "P{S_{n-1}=k-1} = ((n+k)/n) P{S_n=k}", vec![
                        rat("lhs", &down),
                        rat("rhs", &rhs),
                    ])
                });

                let rhs = &(&int(ni - k) / &int(ni)) * &point;
                tally.check(up == rhs, || {
                    failure(&ins, "P{S_{n-1}=k+1} = ((n-k)/n) P{S_n=k}", vec![
                        rat("lhs", &up),
                        rat("rhs", &rhs),
                    ])
                });

                if k >= 1 {
                    let lhs = &t.interval(n - 1, k - 1) - &t.interval(n + 1, k - 1);
                    let rhs = &(&int(k) / &int(ni)) * &point;
                    tally.check(lhs == rhs, || {
                        failure(&ins, "P_{n-1}(k-1) - P_{n+1}(k-1) = (k/n) P{S_n=k}", vec![
                            rat("lhs", &lhs),
                            rat("rhs", &rhs),
                        ])
                    });
                }

                // P{S_n=k}·((n+2)² − (n+2)) = P{S_{n+2}=k}·((n+2)² − k²)
                let m = ni + 2;
                let later = t.pmf(n + 2, k);
                let lhs = &point * &int(m * m - m);
                let rhs = &later * &int(m * m - k * k);
                tally.check(lhs == rhs, || {
                    failure(&ins, "P{S_n=k}/P{S_{n+2}=k} = ((n+2)^2-k^2)/((n+2)^2-(n+2))", vec![
                        rat("lhs", &lhs),
                        rat("rhs", &rhs),
                    ])
                });
                let equal = point == later;
                let expected_equal = k * k == m;
                tally.check(equal == expected_equal, || {
                    failure(&ins, "P{S_n=k} = P{S_{n+2}=k} iff k^2 = n+2", vec![
                        rat("p_n", &point),
                        rat("p_n_plus_2", &later),
                    ])
                });
                if k * k <= m {
                    tally.check(point >= later, || {
                        failure(&ins, "k^2 <= n+2 implies P{S_n=k} >= P{S_{n+2}=k}", vec![
                            rat("p_n", &point),
                            rat("p_n_plus_2", &later),
                        ])
                    });
                }

                if ni >= k + 2 {
                    let next = t.interval(n, k + 1);
                    tally.check(p_nk == next, || {
                        failure(&ins, "P_n(k) = P_n(k+1)", vec![rat("lhs", &p_nk), rat("rhs", &next)])
                    });
                    // P_n(k+1) < P_m(k+1) for every m < n
                    let (m_min, min) = t.prefix_min[k as usize + 1][n as usize].clone();
                    let fail_ins = [("n", ni), ("k", k), ("m", m_min as i64)];
                    tally.check(next < min, || {
                        failure(&fail_ins, "P_n(k+1) < P_m(k+1) for m < n", vec![
                            rat("p_n", &next),
                            rat("p_m", &min),
                        ])
                    });
                }
            }
            tally
        })
        .reduce(Tally::default, Tally::merge);

    let parity = if hyp.parity { "n+k even" } else { "all parities" };
    Ok(VerificationReport::assemble(
        "rem2.1",
        format!("1 <= n <= {n_max}, 0 <= k <= n, {parity}"),
        tally,
        false,
        Vec::new(),
    ))
}

// ---------------------------------------------------------------------------
// P_n(k−2) < P_{n+1+2ℓ}(k−1)
// ---------------------------------------------------------------------------

pub fn verify_mainthm(k_max: u64, n_cap: u64) -> VerificationReport {
    verify_mainthm_with(k_max, n_cap, &Hypotheses::default())
}

pub fn verify_mainthm_with(k_max: u64, n_cap: u64, hyp: &Hypotheses) -> VerificationReport {
    let tally = (1..=k_max)
        .into_par_iter()
        .map(|k| mainthm_for_k(k, n_cap, hyp))
        .reduce(Tally::default, Tally::merge);
    VerificationReport::assemble(
        "thm2.3",
        format!(
            "1 <= k <= {k_max}, k <= n <= {n_cap}, all admissible l; {}",
            describe(hyp)
        ),
        tally,
        false,
        Vec::new(),
    )
}

fn admissible_ns(k: u64, lower: u64, n_cap: u64, hyp: &Hypotheses) -> Vec<u64> {
    (lower..=n_cap)
        .filter(|n| !hyp.parity || (n + k) % 2 == 0)
        .filter(|n| !hyp.square_floor || n + 2 >= k * k)
        .collect()
}

fn mainthm_for_k(k: u64, n_cap: u64, hyp: &Hypotheses) -> Tally {
    let ns = admissible_ns(k, k, n_cap, hyp);
    let Some(m_max) = ns.iter().map(|&n| n + 1 + 2 * max_ell(k, n, hyp)).max() else {
        return Tally::default();
    };
    let ki = k as i64;
    let lhs_col = interval_column(ki - 2, n_cap);
    let rhs_col = interval_column(ki - 1, m_max);
    ns.par_iter()
        .map(|&n| {
            let mut tally = Tally::default();
            let lhs = &lhs_col[n as usize];
            for ell in 0..=max_ell(k, n, hyp) {
                let m = n + 1 + 2 * ell;
                let rhs = &rhs_col[m as usize];
                tally.check(lhs < rhs, || {
                    failure(
                        &[("k", ki), ("n", n as i64), ("l", ell as i64)],
                        "P_n(k-2) < P_{n+1+2l}(k-1)",
                        vec![dy("lhs", lhs), dy("rhs", rhs)],
                    )
                });
            }
            tally
        })
        .reduce(Tally::default, Tally::merge)
}

fn describe(hyp: &Hypotheses) -> String {
    let mut relaxed = Vec::new();
    if !hyp.parity {
        relaxed.push("parity");
    }
    if !hyp.square_floor {
        relaxed.push("n+2>=k^2");
    }
    if !hyp.gap_bound {
        relaxed.push("gap bound");
    }
    if !hyp.xi_at_most_one {
        relaxed.push("q<=1");
    }
    if relaxed.is_empty() {
        "all hypotheses enforced".to_string()
    } else {
        format!("relaxed: {}", relaxed.join(", "))
    }
}

// ---------------------------------------------------------------------------
// Σ_{i≤ℓ} k/(n+2i) ≤ 1 and its supporting inequalities
// ---------------------------------------------------------------------------

pub fn verify_lemma(k_max: u64, n_cap: u64) -> VerificationReport {
    verify_lemma_with(k_max, n_cap, &Hypotheses::default())
}

pub fn verify_lemma_with(k_max: u64, n_cap: u64, hyp: &Hypotheses) -> VerificationReport {
    let pairs: Vec<(u64, u64)> = (1..=k_max)
        .flat_map(|k| admissible_ns(k, 0, n_cap, hyp).into_iter().map(move |n| (k, n)))
        .collect();
    let tally = pairs
        .par_iter()
        .map(|&(k, n)| lemma_for(k, n, hyp))
        .reduce(Tally::default, Tally::merge);
    VerificationReport::assemble(
        "lem5.1",
        format!(
            "1 <= k <= {k_max}, 0 <= n <= {n_cap}, all admissible l (pairing monotonicity at maximal l); {}",
            describe(hyp)
        ),
        tally,
        false,
        Vec::new(),
    )
}

/// Checks, for every admissible ℓ, with `L = lcm(n+2, …, n+2ℓ_max)` and
/// `N_ℓ = Σ_{i≤ℓ} L/(n+2i)`:
/// the sum bound `k·N_ℓ ≤ L`, the two-endpoint bound
/// `ℓ/(n+2) + ℓ/(n+2ℓ) ≤ 2/k`, and the pairing bound
/// `Σ 1/(n+2i) ≤ (ℓ/2)(1/(n+2) + 1/(n+2ℓ))`.
fn lemma_for(k: u64, n: u64, hyp: &Hypotheses) -> Tally {
    let mut tally = Tally::default();
    let ell_max = max_ell(k, n, hyp);
    let (ki, ni) = (k as i64, n as i64);
    if ell_max == 0 {
        // empty sum
        tally.checks += 1;
        return tally;
    }
    let lcm = (1..=ell_max).fold(BigUint::one(), |acc, i| {
        let d = n + 2 * i;
        let r = (&acc % d).iter_u64_digits().next().unwrap_or(0);
        let g = d.gcd(&r);
        acc * (d / g)
    });
    let mut partial = BigUint::zero();
    let (k128, n128) = (k as u128, n as u128);
    for ell in 1..=ell_max {
        let e = ell as u128;
        partial += &lcm / (n + 2 * ell);
        let ins = [("k", ki), ("n", ni), ("l", ell as i64)];

        let scaled = &partial * k;
        tally.check(scaled <= lcm, || {
            let sum = ExactRational::new(scaled.clone(), lcm.clone()).expect("lcm > 0");
            failure(&ins, "sum_{i<=l} k/(n+2i) <= 1", vec![rat("sum", &sum)])
        });

        // ℓ/(n+2) + ℓ/(n+2ℓ) ≤ 2/k  ⇔  kℓ(2n+2ℓ+2) ≤ 2(n+2)(n+2ℓ)
        let lhs = k128 * e * (2 * n128 + 2 * e + 2);
        let rhs = 2 * (n128 + 2) * (n128 + 2 * e);
        tally.check(lhs <= rhs, || {
            let lhs = ExactRational::new(e * (2 * n128 + 2 * e + 2), (n128 + 2) * (n128 + 2 * e))
                .expect("positive");
            failure(&ins, "l/(n+2) + l/(n+2l) <= 2/k", vec![
                rat("lhs", &lhs),
                rat("rhs", &ExactRational::new(2, k).expect("k >= 1")),
            ])
        });

        // N/L ≤ ℓ(n+ℓ+1)/((n+2)(n+2ℓ))
        let lhs = &partial * ((n + 2) as u128 * (n128 + 2 * e));
        let rhs = &lcm * (e * (n128 + e + 1));
        tally.check(lhs <= rhs, || {
            let sum = ExactRational::new(partial.clone(), lcm.clone()).expect("lcm > 0");
            let bound = ExactRational::new(e * (n128 + e + 1), (n128 + 2) * (n128 + 2 * e))
                .expect("positive");
            failure(&ins, "sum 1/(n+2i) <= (l/2)(1/(n+2) + 1/(n+2l))", vec![
                rat("sum", &sum),
                rat("bound", &bound),
            ])
        });
    }

    // 1/(n+2i) + 1/(n+2ℓ+2−2i) is nonincreasing for 2i ≤ ℓ, ℓ = ℓ_max:
    // equivalently (n+2i)(n+2ℓ+2−2i) is nondecreasing.
    let e = ell_max as u128;
    let g = |i: u128| (n128 + 2 * i) * (n128 + 2 * e + 2 - 2 * i);
    for i in 1..=(e / 2) {
        tally.check(g(i) <= g(i + 1), || {
            failure(
                &[("k", ki), ("n", ni), ("l", ell_max as i64), ("i", i as i64)],
                "k/(n+2i) + k/(n+2l+2-2i) nonincreasing in i for i <= l/2",
                vec![
                    rat("g_i", &ExactRational::from_integer(g(i))),
                    rat("g_i_plus_1", &ExactRational::from_integer(g(i + 1))),
                ],
            )
        });
    }
    tally
}

// ---------------------------------------------------------------------------
// Block minima
// ---------------------------------------------------------------------------

pub fn verify_theorem1(xi: &XiClass, k_max: u64) -> VerificationReport {
    verify_theorem1_with(xi, k_max, &Hypotheses::default())
}

/// For every block `C_k`, `k ≤ k_max`:
/// (a) `P{|S_n| ≤ ξ√n} = P_n(k)` on `C_k`;
/// (b) the block minimum sits at `n_{k+1} − 1` and equals `Q_k⁻`;
/// (c) `Q_k⁻ < Q_{k+1}⁻`;
/// (e) `Q_1⁻ ≤ P_n` for `n ≥ n_1`, with equality only at `n_2 − 1`.
pub fn verify_theorem1_with(xi: &XiClass, k_max: u64, hyp: &Hypotheses) -> VerificationReport {
    let exploratory = hyp.xi_at_most_one && !xi.guaranteed_regime();
    let k_max = k_max.max(1);
    let starts: Vec<u64> = std::iter::once(0)
        .chain((1..=k_max + 1).map(|k| n_k(k, xi)))
        .collect();
    let end = starts[k_max as usize + 1];
    let probs: Vec<Dyadic> = (0..end)
        .into_par_iter()
        .map(|n| xi_dyadic(n, xi.q()).expect("q is positive"))
        .collect();
    let first_block = if starts[1] == 0 { 1 } else { 0 };

    let mut tally = Tally::default();
    let mut notes = Vec::new();
    let mut minima: Vec<(u64, Dyadic)> = Vec::new();

    for k in first_block..=k_max {
        let (lo, hi) = (starts[k as usize], starts[k as usize + 1]);
        let ki = k as i64;
        let last = hi - 1;
        for n in lo..hi {
            let by_block = interval_dyadic(n, ki);
            let direct = &probs[n as usize];
            tally.check(*direct == by_block, || {
                failure(&[("k", ki), ("n", n as i64)], "(a) P_n = P_n(k) on C_k", vec![
                    dy("p_n", direct),
                    dy("p_n_k", &by_block),
                ])
            });
        }

        let q_minus = interval_dyadic(last, ki - 1);
        let at_last = &probs[last as usize];
        tally.check(*at_last == q_minus, || {
            failure(&[("k", ki), ("n", last as i64)], "(b) Q_k = P_{n_{k+1}-1}(k-1)", vec![
                dy("p_n", at_last),
                dy("q_minus", &q_minus),
            ])
        });
        let mut ties = Vec::new();
        for n in lo..last {
            let p = &probs[n as usize];
            tally.check(at_last <= p, || {
                failure(&[("k", ki), ("n", n as i64)], "(b) min over C_k at n_{k+1}-1", vec![
                    dy("q_minus", at_last),
                    dy("p_n", p),
                ])
            });
            if p == at_last {
                ties.push(n);
            }
        }
        if !ties.is_empty() {
            notes.push(format!(
                "block {k}: minimum also attained at n = {ties:?} besides n = {last}"
            ));
        }
        minima.push((k, q_minus));
    }

    for pair in minima.windows(2) {
        let ((k, a), (_, b)) = (&pair[0], &pair[1]);
        tally.check(a < b, || {
            failure(&[("k", *k as i64)], "(c) Q_k < Q_{k+1}", vec![
                dy("q_k", a),
                dy("q_k_plus_1", b),
            ])
        });
    }

    let n1 = starts[1];
    let n2_last = starts[2] - 1;
    if xi.guaranteed_regime() {
        debug_assert_eq!(starts[2], n2_from_xi(xi));
    }
    let global = &probs[n2_last as usize];
    for n in n1..end {
        let p = &probs[n as usize];
        let ok = if n == n2_last { p == global } else { global < p };
        tally.check(ok, || {
            failure(
                &[("n", n as i64)],
                "(e) Q_1 <= P_n for n >= n_1, equality only at n_2-1",
                vec![dy("q_1", global), dy("p_n", p)],
            )
        });
    }

    VerificationReport::assemble(
        "thm1.1",
        format!(
            "{xi}, blocks {first_block} <= k <= {k_max}, 0 <= n < {end}; {}",
            describe(hyp)
        ),
        tally,
        exploratory,
        notes,
    )
}

/// `P_{n_2−1}(0) < … < P_{n_{k+1}−1}(k−1) < P_m(k)` for
/// `n_k ≤ m < n_{k+1} − 1`.
pub fn verify_chain(xi: &XiClass, k_max: u64) -> VerificationReport {
    verify_chain_with(xi, k_max, &Hypotheses::default())
}

pub fn verify_chain_with(xi: &XiClass, k_max: u64, hyp: &Hypotheses) -> VerificationReport {
    let exploratory = hyp.xi_at_most_one && !xi.guaranteed_regime();
    let mut tally = Tally::default();
    let mut previous: Option<Dyadic> = None;
    for k in 1..=k_max {
        let ki = k as i64;
        let (lo, hi) = (n_k(k, xi), n_k(k + 1, xi));
        let link = interval_dyadic(hi - 1, ki - 1);
        if let Some(prev) = &previous {
            tally.check(*prev < link, || {
                failure(&[("k", ki)], "P_{n_k-1}(k-2) < P_{n_{k+1}-1}(k-1)", vec![
                    dy("lower", prev),
                    dy("upper", &link),
                ])
            });
        }
        for m in lo..hi.saturating_sub(1) {
            let p = interval_dyadic(m, ki);
            tally.check(link < p, || {
                failure(&[("k", ki), ("m", m as i64)], "P_{n_{k+1}-1}(k-1) < P_m(k)", vec![
                    dy("link", &link),
                    dy("p_m_k", &p),
                ])
            });
        }
        previous = Some(link);
    }
    VerificationReport::assemble(
        "cor2.4",
        format!("{xi}, 1 <= k <= {k_max}; {}", describe(hyp)),
        tally,
        exploratory,
        Vec::new(),
    )
}

// ---------------------------------------------------------------------------
// ξ > 1 counterexamples
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CounterexampleRecord {
    pub q: ExactRational,
    pub k: u64,
    pub n_k: u64,
    pub n_k1: u64,
    /// `P_{n_{k+1}−1}(k−1)`
    pub lhs: ValueEntry,
    /// `P_{n_k−1}(k−2)`
    pub rhs: ValueEntry,
    /// A decimal strictly between the two values, when one is quoted.
    pub threshold: Option<ValueEntry>,
    pub threshold_separates: Option<bool>,
    /// `lhs < rhs`: the block minima decrease at `k`.
    pub confirmed: bool,
}

/// Compares `P_{n_{k+1}−1}(k−1)` with `P_{n_k−1}(k−2)` for `k ≥ 2`.
pub fn counterexample_record(
    xi: &XiClass,
    k: u64,
    threshold: Option<&ExactRational>,
) -> crate::error::Result<CounterexampleRecord> {
    if k < 2 {
        return Err(crate::error::Error::Domain(format!("k must be at least 2, got {k}")));
    }
    let (a, b) = (n_k(k, xi), n_k(k + 1, xi));
    if a < 1 {
        return Err(crate::error::Error::Domain(format!("n_{k} = 0 for {xi}")));
    }
    let ki = k as i64;
    let lhs = interval_dyadic(b - 1, ki - 1).to_rational();
    let rhs = interval_dyadic(a - 1, ki - 2).to_rational();
    let separates = threshold.map(|t| lhs < *t && *t < rhs);
    Ok(CounterexampleRecord {
        q: xi.q().clone(),
        k,
        n_k: a,
        n_k1: b,
        confirmed: lhs < rhs,
        lhs: rat("lhs", &lhs),
        rhs: rat("rhs", &rhs),
        threshold: threshold.map(|t| rat("threshold", t)),
        threshold_separates: separates,
    })
}

/// The quoted counterexamples for `ξ > 1`; `slow` adds the `ξ = 1.01` case
/// at `n ≈ 40 000`.
pub fn check_counterexamples(slow: bool) -> Vec<CounterexampleRecord> {
    let r = |s: &str| s.parse::<ExactRational>().expect("literal");
    let mut cases = vec![
        (r("2"), 4, None),
        (r("121/100"), 22, Some(r("70745/100000"))),
    ];
    if slow {
        cases.push((r("10201/10000"), 202, Some(r("6851152/10000000"))));
    }
    cases
        .into_par_iter()
        .map(|(q, k, t)| {
            let xi = XiClass::new(q).expect("positive");
            counterexample_record(&xi, k, t.as_ref()).expect("k >= 2 and n_k >= 1")
        })
        .collect()
}

pub fn counterexamples_report(records: &[CounterexampleRecord]) -> VerificationReport {
    let mut tally = Tally::default();
    for rec in records {
        let ins = [("k", rec.k as i64), ("n_k", rec.n_k as i64), ("n_k1", rec.n_k1 as i64)];
        tally.check(rec.confirmed, || {
            failure(&ins, "P_{n_{k+1}-1}(k-1) < P_{n_k-1}(k-2)", vec![rec.lhs.clone(), rec.rhs.clone()])
        });
        if let Some(sep) = rec.threshold_separates {
            tally.check(sep, || {
                let mut values = vec![rec.lhs.clone(), rec.rhs.clone()];
                values.extend(rec.threshold.clone());
                failure(&ins, "lhs < threshold < rhs", values)
            });
        }
    }
    let qs: Vec<String> = records.iter().map(|r| r.q.to_string()).collect();
    VerificationReport::assemble(
        "sec3.counterexamples",
        format!("q in {{{}}}", qs.join(", ")),
        tally,
        false,
        Vec::new(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xi(q: &str) -> XiClass {
        q.parse().unwrap()
    }

    #[test]
    fn remark_small_ranges() {
        let r = verify_remark(2).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(verify_remark(1).is_err());
        let r = verify_remark(60).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn remark_without_parity_fails() {
        let hyp = Hypotheses { parity: false, ..Default::default() };
        let r = verify_remark_with(20, &hyp).unwrap();
        assert_eq!(r.status, Status::Fail);
        assert!(r.failure_count > 0);
    }

    #[test]
    fn max_ell_matches_definition() {
        let hyp = Hypotheses::default();
        for k in 1..=12u64 {
            for n in 0..=300u64 {
                let e = max_ell(k, n, &hyp);
                let ok = |l: u64| k * k * (n + 1 + 2 * l) < (k + 1) * (k + 1) * (n + 2);
                assert!(ok(e) && !ok(e + 1), "k={k} n={n}");
            }
        }
        // the k = 1 extreme: ℓ = (3n+5)/2
        for n in (1..=99u64).step_by(2) {
            assert_eq!(max_ell(1, n, &hyp), (3 * n + 5) / 2);
        }
    }

    #[test]
    fn mainthm_small() {
        assert!(verify_mainthm(1, 10).passed());
        assert!(verify_mainthm(8, 200).passed());
    }

    #[test]
    fn mainthm_negative_control() {
        let hyp = Hypotheses { square_floor: false, ..Default::default() };
        let r = verify_mainthm_with(8, 200, &hyp);
        assert_eq!(r.status, Status::Fail);
        // P_4(2) = 7/8 > P_9(3) = 105/128
        assert!(r.failures.iter().any(|f| f.inputs["k"] == 4 && f.inputs["n"] == 4));
    }

    #[test]
    fn lemma_examples() {
        // k = 1, n = 1, ℓ = 4: 1/3 + 1/5 + 1/7 + 1/9 ≤ 1
        let hyp = Hypotheses::default();
        assert_eq!(max_ell(1, 1, &hyp), 4);
        let t = lemma_for(1, 1, &hyp);
        assert_eq!(t.failure_count, 0);
        let sum = ["1/3", "1/5", "1/7", "1/9"]
            .iter()
            .fold(ExactRational::zero(), |acc, s| acc + s.parse().unwrap());
        assert!(sum <= ExactRational::one());
        // k = 2, n = 2, ℓ = 2: 2/4 + 2/6 = 5/6
        assert!(max_ell(2, 2, &hyp) >= 2);
        assert_eq!(lemma_for(2, 2, &hyp).failure_count, 0);
        assert!(verify_lemma(10, 300).passed());
    }

    #[test]
    fn lemma_negative_controls() {
        for hyp in [
            Hypotheses { square_floor: false, ..Default::default() },
            Hypotheses { gap_bound: false, ..Default::default() },
        ] {
            let r = verify_lemma_with(8, 200, &hyp);
            assert_eq!(r.status, Status::Fail, "{hyp:?}");
        }
    }

    #[test]
    fn theorem1_small() {
        assert!(verify_theorem1(&xi("1"), 8).passed());
        assert!(verify_theorem1(&xi("1/2"), 6).passed());
        assert!(verify_theorem1(&xi("1/4"), 6).passed());
        assert!(verify_chain(&xi("2/3"), 8).passed());
    }

    #[test]
    fn theorem1_exploratory_above_one() {
        let r = verify_theorem1(&xi("2"), 6);
        assert_eq!(r.status, Status::Exploratory);
        assert!(r.failures.iter().any(|f| f.relation.starts_with("(c)") && f.inputs["k"] == 3));
        let hyp = Hypotheses { xi_at_most_one: false, ..Default::default() };
        assert_eq!(verify_theorem1_with(&xi("2"), 6, &hyp).status, Status::Fail);
        assert_eq!(verify_chain_with(&xi("2"), 6, &hyp).status, Status::Fail);
    }

    #[test]
    fn counterexample_fast_tier() {
        let recs = check_counterexamples(false);
        assert_eq!(recs.len(), 2);
        assert!(recs.iter().all(|r| r.confirmed));
        assert_eq!(recs[0].lhs.exact, "99/128");
        assert_eq!(recs[0].rhs.exact, "25/32");
        assert_eq!((recs[1].n_k, recs[1].n_k1), (399, 438));
        assert_eq!(recs[1].threshold_separates, Some(true));
        assert!(counterexamples_report(&recs).passed());
    }

    #[test]
    fn counterexample_inside_guaranteed_regime_is_not_confirmed() {
        let rec = counterexample_record(&xi("1"), 4, None).unwrap();
        assert!(!rec.confirmed);
        assert_eq!(counterexamples_report(&[rec]).status, Status::Fail);
        assert!(counterexample_record(&xi("1"), 1, None).is_err());
    }

    #[test]
    fn reports_are_deterministic() {
        let hyp = Hypotheses { square_floor: false, ..Default::default() };
        let a = serde_json::to_string(&verify_mainthm_with(6, 120, &hyp)).unwrap();
        let b = serde_json::to_string(&verify_mainthm_with(6, 120, &hyp)).unwrap();
        assert_eq!(a, b);
    }
}
