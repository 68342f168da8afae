//! Seat sequences over growing house sizes and paradox statistics.
//!
//! The stream keeps remainders as integer numerators over the common
//! denominator `P` and updates them incrementally, so a step costs O(m)
//! integer operations and the whole walk needs O(m) memory regardless of
//! the horizon. Allocations agree exactly with
//! [`hamilton_allocate`](crate::apportion::hamilton_allocate), which
//! recomputes each house size from scratch in rational arithmetic.

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::apportion::{Allocation, ApportionError, TiePolicy};
use crate::profile::{PopulationProfile, ProfileError};
use crate::seeding;

/// Default ceiling for [`periodic_exact`] enumeration.
pub const DEFAULT_PERIOD_CAP: u64 = 10_000_000;

/// Denominator used for discretized "generic" share vectors.
pub const GENERIC_SHARE_DENOMINATOR: u64 = 1 << 62;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimulateError {
    #[error(transparent)]
    Apportion(#[from] ApportionError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("period {period} exceeds cap {cap}")]
    PeriodTooLarge { period: u64, cap: u64 },
}

/// Incremental quota state: floors, remainder numerators, and the split
/// of leftover-seat recipients at the current house size.
struct QuotaStream {
    pops: Vec<u64>,
    total: u64,
    n: u64,
    /// `(n * P_i) mod P` — remainder numerators over denominator `P`.
    rem: Vec<u64>,
    floors: Vec<u64>,
    floor_sum: u64,
    /// Whether each floor increased in the last `advance`.
    carried: Vec<bool>,
    /// States strictly above the cutoff remainder (always rounded up).
    above: Vec<usize>,
    /// States exactly at the cutoff remainder, ascending.
    group: Vec<usize>,
    /// Seats the cutoff group still has to fill; a genuine tie exactly
    /// when `0 < contested < group.len()`.
    contested: usize,
    scratch: Vec<usize>,
}

impl QuotaStream {
    fn new(profile: &PopulationProfile) -> Self {
        let m = profile.len();
        QuotaStream {
            pops: profile.populations().to_vec(),
            total: profile.total(),
            n: 0,
            rem: vec![0; m],
            floors: vec![0; m],
            floor_sum: 0,
            carried: vec![false; m],
            above: Vec::with_capacity(m),
            group: Vec::with_capacity(m),
            contested: 0,
            scratch: (0..m).collect(),
        }
    }

    fn advance(&mut self) {
        self.n += 1;
        for i in 0..self.pops.len() {
            self.rem[i] += self.pops[i];
            if self.rem[i] >= self.total {
                self.rem[i] -= self.total;
                self.floors[i] += 1;
                self.floor_sum += 1;
                self.carried[i] = true;
            } else {
                self.carried[i] = false;
            }
        }
        self.above.clear();
        self.group.clear();
        self.contested = 0;
        let leftover = (self.n - self.floor_sum) as usize;
        if leftover == 0 {
            return;
        }
        let rem = &self.rem;
        self.scratch
            .select_nth_unstable_by(leftover - 1, |&a, &b| rem[b].cmp(&rem[a]));
        let cutoff = rem[self.scratch[leftover - 1]];
        for i in 0..rem.len() {
            if rem[i] > cutoff {
                self.above.push(i);
            } else if rem[i] == cutoff {
                self.group.push(i);
            }
        }
        self.contested = leftover - self.above.len();
    }

    fn is_proper_tie(&self) -> bool {
        self.contested < self.group.len()
    }
}

/// Streaming Hamilton allocations for `n = 1, 2, ...` under a tie policy.
struct SeatStream {
    quota: QuotaStream,
    policy: TiePolicy,
    seats: Vec<u64>,
    rounded: Vec<usize>,
}

impl SeatStream {
    fn new(profile: &PopulationProfile, policy: TiePolicy) -> Result<Self, ApportionError> {
        policy.validate(profile.len())?;
        Ok(SeatStream {
            quota: QuotaStream::new(profile),
            policy,
            seats: vec![0; profile.len()],
            rounded: Vec::with_capacity(profile.len()),
        })
    }

    fn advance(&mut self) -> Result<(), ApportionError> {
        self.quota.advance();
        self.rounded.clear();
        self.rounded.extend_from_slice(&self.quota.above);
        if !self.quota.group.is_empty() {
            if self.quota.is_proper_tie() {
                let chosen =
                    self.policy
                        .resolve(self.quota.n, &self.quota.group, self.quota.contested)?;
                self.rounded.extend(chosen);
            } else {
                self.rounded.extend_from_slice(&self.quota.group);
            }
        }
        self.rounded.sort_unstable();
        self.seats.copy_from_slice(&self.quota.floors);
        for &i in &self.rounded {
            self.seats[i] += 1;
        }
        Ok(())
    }

    fn allocation(&self) -> Allocation {
        Allocation {
            house_size: self.quota.n,
            seats: self.seats.clone(),
            rounded_up: self.rounded.iter().copied().collect(),
        }
    }
}

/// Iterator over allocations for `n = 1..=horizon`.
///
/// Yields `Err` once and then stops if the policy is
/// [`TiePolicy::ErrorOnTie`] and a tie occurs.
pub struct SeatSequence {
    stream: SeatStream,
    horizon: u64,
    failed: bool,
}

impl Iterator for SeatSequence {
    type Item = Result<Allocation, ApportionError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.stream.quota.n >= self.horizon {
            return None;
        }
        match self.stream.advance() {
            Ok(()) => Some(Ok(self.stream.allocation())),
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

/// Allocations for every house size `1..=horizon`, in exact arithmetic.
pub fn seat_sequence(
    profile: &PopulationProfile,
    horizon: u64,
    policy: &TiePolicy,
) -> Result<SeatSequence, ApportionError> {
    Ok(SeatSequence {
        stream: SeatStream::new(profile, policy.clone())?,
        horizon,
        failed: false,
    })
}

/// Per-state paradox counts over a horizon of house sizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParadoxReport {
    /// Number of house sizes walked (`N`); steps compared are `n -> n+1`
    /// for `n < N`.
    pub horizon: u64,
    /// Per state: number of steps where it lost at least one seat.
    pub counts: Vec<u64>,
    /// Per state: number of steps where it gained exactly one seat.
    pub gains: Vec<u64>,
    /// `counts / horizon`.
    pub frequencies: Vec<f64>,
    /// For each k >= 1, the number of steps at which exactly k states
    /// lost a seat simultaneously.
    pub multi_histogram: BTreeMap<usize, u64>,
    /// Observed seat deltas `s_i(n+1) - s_i(n)` over all states and steps.
    pub delta_histogram: BTreeMap<i64, u64>,
}

impl ParadoxReport {
    /// Fraction of steps at which at least one state lost a seat.
    pub fn any_paradox_frequency(&self) -> f64 {
        let steps: u64 = self.multi_histogram.values().sum();
        steps as f64 / self.horizon as f64
    }
}

/// Walks `n = 1..=horizon` and counts Alabama-paradox events per state,
/// i.e. steps with `s_i(n+1) < s_i(n)`.
pub fn paradox_events(
    profile: &PopulationProfile,
    horizon: u64,
    policy: &TiePolicy,
) -> Result<ParadoxReport, ApportionError> {
    assert!(horizon >= 2, "horizon must be at least 2");
    let m = profile.len();
    let mut stream = SeatStream::new(profile, policy.clone())?;
    stream.advance()?;
    let mut prev = stream.seats.clone();
    let mut counts = vec![0u64; m];
    let mut gains = vec![0u64; m];
    // Deltas lie in [-1, 2]: a floor moves up by at most one per step and
    // the rounding mark changes by at most one.
    let mut deltas = [0u64; 6];
    let mut multi = BTreeMap::new();
    for _ in 1..horizon {
        stream.advance()?;
        let mut dropped = 0usize;
        for i in 0..m {
            let delta = stream.seats[i] as i64 - prev[i] as i64;
            deltas[(delta + 2).clamp(0, 5) as usize] += 1;
            if delta < 0 {
                counts[i] += 1;
                dropped += 1;
            } else if delta == 1 {
                gains[i] += 1;
            }
        }
        if dropped > 0 {
            *multi.entry(dropped).or_insert(0) += 1;
        }
        prev.copy_from_slice(&stream.seats);
    }
    let frequencies = counts.iter().map(|&c| c as f64 / horizon as f64).collect();
    let delta_histogram = deltas
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c > 0)
        .map(|(idx, &c)| (idx as i64 - 2, c))
        .collect();
    Ok(ParadoxReport {
        horizon,
        counts,
        gains,
        frequencies,
        multi_histogram: multi,
        delta_histogram,
    })
}

/// Exact per-state paradox probabilities for one full period.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicExactResult {
    /// Length of the seat-sequence period: the reduced total population.
    pub period: u64,
    /// Exact probability that each state loses a seat at a uniformly
    /// random step.
    pub per_state_probability: Vec<BigRational>,
    /// Expected number of states losing a seat per step (the sum of the
    /// per-state probabilities).
    pub expected_simultaneous: BigRational,
}

/// Enumerates one full period of the seat sequence and computes exact
/// paradox probabilities under random tie resolution.
///
/// Tied states are rounded up with probability `contested / group size`.
/// When the same group is tied at two consecutive house sizes — which
/// forces its members to have equal populations — the draws are coupled
/// through a fixed per-group priority order, so a state loses a seat only
/// when the group's seat count actually drops; unrelated ties are
/// resolved independently.
pub fn periodic_exact(profile: &PopulationProfile) -> Result<PeriodicExactResult, SimulateError> {
    periodic_exact_with_cap(profile, DEFAULT_PERIOD_CAP)
}

pub fn periodic_exact_with_cap(
    profile: &PopulationProfile,
    cap: u64,
) -> Result<PeriodicExactResult, SimulateError> {
    let period = profile.period();
    if period > cap {
        return Err(SimulateError::PeriodTooLarge { period, cap });
    }
    Ok(periodic_scan(&profile.reduced(), 1))
}

/// Round-up chance of one state at one house size, over denominator
/// `group size`; deterministic states use denominator 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct RoundUpChance {
    num: u64,
    den: u64,
}

impl RoundUpChance {
    const ZERO: RoundUpChance = RoundUpChance { num: 0, den: 1 };
    const ONE: RoundUpChance = RoundUpChance { num: 1, den: 1 };
}

struct PeriodStep {
    chance: Vec<RoundUpChance>,
    tie_group: Vec<usize>,
    tie_contested: u64,
}

impl PeriodStep {
    fn capture(&mut self, quota: &QuotaStream) {
        self.chance.fill(RoundUpChance::ZERO);
        for &i in &quota.above {
            self.chance[i] = RoundUpChance::ONE;
        }
        self.tie_group.clear();
        self.tie_contested = 0;
        if quota.is_proper_tie() {
            self.tie_group.extend_from_slice(&quota.group);
            self.tie_contested = quota.contested as u64;
            let chance = RoundUpChance {
                num: quota.contested as u64,
                den: quota.group.len() as u64,
            };
            for &i in &quota.group {
                self.chance[i] = chance;
            }
        } else {
            for &i in &quota.group {
                self.chance[i] = RoundUpChance::ONE;
            }
        }
    }
}

/// Scans the period starting at house size `start` (exposed for the
/// shift-invariance tests; results are independent of `start`).
fn periodic_scan(profile: &PopulationProfile, start: u64) -> PeriodicExactResult {
    let m = profile.len();
    let period = profile.total();
    let mut quota = QuotaStream::new(profile);
    for _ in 0..start {
        quota.advance();
    }
    let mut cur = PeriodStep {
        chance: vec![RoundUpChance::ZERO; m],
        tie_group: Vec::with_capacity(m),
        tie_contested: 0,
    };
    let mut next = PeriodStep {
        chance: vec![RoundUpChance::ZERO; m],
        tie_group: Vec::with_capacity(m),
        tie_contested: 0,
    };
    cur.capture(&quota);
    let mut prob = vec![BigRational::zero(); m];
    for _ in 0..period {
        quota.advance();
        next.capture(&quota);
        let coupled = !cur.tie_group.is_empty() && cur.tie_group == next.tie_group;
        for i in 0..m {
            let up = cur.chance[i];
            // A paradox needs the floor unchanged, a round-up at n, and
            // none at n+1.
            if up.num == 0 || quota.carried[i] {
                continue;
            }
            let down = next.chance[i];
            let (num, den) = if coupled && cur.tie_group.binary_search(&i).is_ok() {
                // Same group tied at both sizes: nested draws, so only a
                // drop in the group's contested-seat count hurts.
                (
                    cur.tie_contested.saturating_sub(next.tie_contested),
                    up.den,
                )
            } else {
                (up.num * (down.den - down.num), up.den * down.den)
            };
            if num > 0 {
                prob[i] += BigRational::new(BigInt::from(num), BigInt::from(den));
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    let period_rational = BigRational::from_integer(BigInt::from(period));
    for p in &mut prob {
        *p /= &period_rational;
    }
    let expected_simultaneous = prob.iter().sum();
    PeriodicExactResult {
        period,
        per_state_probability: prob,
        expected_simultaneous,
    }
}

/// Paradox frequencies for exact rational shares, simulated over
/// `n = 1..=horizon` with ties (which never occur for generic shares)
/// broken by first-index priority.
pub fn empirical_frequency(
    shares: &[BigRational],
    horizon: u64,
) -> Result<ParadoxReport, SimulateError> {
    let profile = PopulationProfile::from_shares(shares)?;
    let policy = TiePolicy::first_index_priority(profile.len());
    Ok(paradox_events(&profile, horizon, &policy)?)
}

/// Samples a uniformly random share vector (Dirichlet(1,...,1)) and
/// discretizes it to exact rationals over [`GENERIC_SHARE_DENOMINATOR`],
/// summing to exactly 1. Deterministic in the seed.
pub fn generic_shares(m: usize, seed: u64) -> Vec<BigRational> {
    assert!(m >= 1, "need at least one state");
    let mut rng = seeding::sample_rng(seed, 0);
    let weights: Vec<f64> = (0..m)
        .map(|_| -(1.0 - rng.gen::<f64>()).ln())
        .collect();
    let numerators = discretize_weights(&weights, GENERIC_SHARE_DENOMINATOR);
    let denom = BigInt::from(GENERIC_SHARE_DENOMINATOR);
    numerators
        .into_iter()
        .map(|n| BigRational::new(BigInt::from(n), denom.clone()))
        .collect()
}

/// Scales positive weights to integer numerators summing to `denom`,
/// assigning the leftover units to the largest fractional parts and
/// keeping every numerator at least 1.
fn discretize_weights(weights: &[f64], denom: u64) -> Vec<u64> {
    let total: f64 = weights.iter().sum();
    let mut numerators = Vec::with_capacity(weights.len());
    let mut fractions = Vec::with_capacity(weights.len());
    let mut assigned: u64 = 0;
    for &w in weights {
        let target = w / total * denom as f64;
        let floor = (target.floor() as u64).min(denom - 1).max(1);
        numerators.push(floor);
        fractions.push(target - floor as f64);
        assigned += floor;
    }
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| fractions[b].partial_cmp(&fractions[a]).unwrap());
    let mut leftover = denom
        .checked_sub(assigned)
        .expect("floors cannot exceed the denominator");
    let mut i = 0;
    while leftover > 0 {
        numerators[order[i % order.len()]] += 1;
        leftover -= 1;
        i += 1;
    }
    numerators
}
