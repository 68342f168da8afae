//! Hamilton's method (largest remainder) in exact rational arithmetic.
//!
//! Every state first receives the floor of its quota `μ_i = n·P_i/P`;
//! the seats left over go to the states with strictly largest remainders.
//! Remainders are compared as exact rationals (integer numerators over
//! the common denominator `P`), so equal remainders are detected as
//! genuine ties, never as floating-point noise, and resolved by the
//! caller's [`TiePolicy`].

use std::collections::BTreeSet;

use num::bigint::BigInt;
use num::rational::BigRational;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profile::PopulationProfile;
use crate::seeding;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ApportionError {
    #[error("unresolved tie at house size {}: states {:?} contest {} seat(s)",
            .0.house_size, .0.tied_states, .0.contested_seats)]
    TieUnresolved(TieEvent),
    #[error("priority list is not a permutation of 0..{m}")]
    InvalidPriority { m: usize },
}

/// Exact quotas for one house size: values `μ_i = n·P_i/P`, their floors,
/// and the remainders that decide the leftover seats.
#[derive(Debug, Clone, PartialEq)]
pub struct Quota {
    house_size: u64,
    values: Vec<BigRational>,
    floors: Vec<u64>,
    remainders: Vec<BigRational>,
}

impl Quota {
    pub fn house_size(&self) -> u64 {
        self.house_size
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn floors(&self) -> &[u64] {
        &self.floors
    }

    /// Remainders `ρ_i = μ_i − ⌊μ_i⌋`, each in `[0, 1)`.
    pub fn remainders(&self) -> &[BigRational] {
        &self.remainders
    }

    /// Seats not covered by the floors; they go to the largest remainders.
    pub fn leftover_seats(&self) -> u64 {
        self.house_size - self.floors.iter().sum::<u64>()
    }
}

/// A seat vector for one house size. `seats[i]` is `⌊μ_i⌋`, plus one
/// exactly when `i` is in `rounded_up`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation {
    pub house_size: u64,
    pub seats: Vec<u64>,
    pub rounded_up: BTreeSet<usize>,
}

/// A group of states sharing the remainder value at the rounding cutoff,
/// with fewer contested seats than members.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TieEvent {
    pub house_size: u64,
    /// Indices with pairwise-equal remainders, ascending.
    pub tied_states: Vec<usize>,
    /// How many of the tied states must be rounded up (strictly between
    /// 0 and the group size).
    pub contested_seats: usize,
}

/// How boundary ties are resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TiePolicy {
    /// Refuse to allocate; `hamilton_allocate` returns
    /// [`ApportionError::TieUnresolved`].
    ErrorOnTie,
    /// A fixed permutation of state indices used at every house size:
    /// tied states earlier in the list are rounded up first.
    FixedPriority(Vec<usize>),
    /// One uniform permutation of the tied group per tie event, drawn
    /// from a stream keyed by `(seed, house_size)`. Lots at different
    /// house sizes are independent; reruns with the same seed are
    /// identical.
    SeededLot(u64),
}

impl TiePolicy {
    /// Identity priority list: lowest state index wins ties.
    pub fn first_index_priority(m: usize) -> TiePolicy {
        TiePolicy::FixedPriority((0..m).collect())
    }

    pub(crate) fn validate(&self, m: usize) -> Result<(), ApportionError> {
        if let TiePolicy::FixedPriority(perm) = self {
            let mut seen = vec![false; m];
            if perm.len() != m {
                return Err(ApportionError::InvalidPriority { m });
            }
            for &idx in perm {
                if idx >= m || seen[idx] {
                    return Err(ApportionError::InvalidPriority { m });
                }
                seen[idx] = true;
            }
        }
        Ok(())
    }

    /// Picks which `contested` members of `tied` (ascending indices) are
    /// rounded up at house size `n`.
    pub(crate) fn resolve(
        &self,
        n: u64,
        tied: &[usize],
        contested: usize,
    ) -> Result<Vec<usize>, ApportionError> {
        debug_assert!(0 < contested && contested < tied.len());
        match self {
            TiePolicy::ErrorOnTie => Err(ApportionError::TieUnresolved(TieEvent {
                house_size: n,
                tied_states: tied.to_vec(),
                contested_seats: contested,
            })),
            TiePolicy::FixedPriority(perm) => {
                let mut rank = vec![usize::MAX; perm.len()];
                for (pos, &idx) in perm.iter().enumerate() {
                    rank[idx] = pos;
                }
                let mut chosen: Vec<usize> = tied.to_vec();
                chosen.sort_by_key(|&i| rank[i]);
                chosen.truncate(contested);
                Ok(chosen)
            }
            TiePolicy::SeededLot(seed) => {
                let mut rng = seeding::lot_rng(*seed, n);
                let mut shuffled: Vec<usize> = tied.to_vec();
                shuffled.shuffle(&mut rng);
                shuffled.truncate(contested);
                Ok(shuffled)
            }
        }
    }
}

/// Exact quotas `μ_i = n·P_i/P` with floors and remainders.
pub fn compute_quota(profile: &PopulationProfile, n: u64) -> Quota {
    let total = profile.total() as u128;
    let mut values = Vec::with_capacity(profile.len());
    let mut floors = Vec::with_capacity(profile.len());
    let mut remainders = Vec::with_capacity(profile.len());
    for &pop in profile.populations() {
        let scaled = n as u128 * pop as u128;
        values.push(BigRational::new(BigInt::from(scaled), BigInt::from(total)));
        floors.push((scaled / total) as u64);
        remainders.push(BigRational::new(
            BigInt::from(scaled % total),
            BigInt::from(total),
        ));
    }
    Quota {
        house_size: n,
        values,
        floors,
        remainders,
    }
}

/// The tie groups straddling the rounding cutoff for this quota.
///
/// Empty when the cutoff is strict: either no leftover seats, or the
/// states at the boundary remainder all fit.
pub fn detect_ties(quota: &Quota) -> Vec<TieEvent> {
    match boundary(quota) {
        Some((_, group, contested)) if contested < group.len() => vec![TieEvent {
            house_size: quota.house_size,
            tied_states: group,
            contested_seats: contested,
        }],
        _ => Vec::new(),
    }
}

/// Hamilton allocation for one house size under the given tie policy.
pub fn hamilton_allocate(
    profile: &PopulationProfile,
    n: u64,
    policy: &TiePolicy,
) -> Result<Allocation, ApportionError> {
    policy.validate(profile.len())?;
    let quota = compute_quota(profile, n);
    let mut rounded_up = BTreeSet::new();
    if let Some((above, group, contested)) = boundary(&quota) {
        rounded_up.extend(above);
        if contested == group.len() {
            rounded_up.extend(group);
        } else {
            rounded_up.extend(policy.resolve(n, &group, contested)?);
        }
    }
    let seats = quota
        .floors
        .iter()
        .enumerate()
        .map(|(i, &f)| f + u64::from(rounded_up.contains(&i)))
        .collect();
    Ok(Allocation {
        house_size: n,
        seats,
        rounded_up,
    })
}

/// Splits the leftover-seat recipients into the states strictly above the
/// cutoff remainder and the group exactly at it, with the number of seats
/// the boundary group still has to fill. `None` when there are no
/// leftover seats.
fn boundary(quota: &Quota) -> Option<(Vec<usize>, Vec<usize>, usize)> {
    let leftover = quota.leftover_seats() as usize;
    if leftover == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..quota.remainders.len()).collect();
    order.sort_by(|&a, &b| quota.remainders[b].cmp(&quota.remainders[a]));
    let cutoff = &quota.remainders[order[leftover - 1]];
    let above: Vec<usize> = (0..quota.remainders.len())
        .filter(|&i| quota.remainders[i] > *cutoff)
        .collect();
    let group: Vec<usize> = (0..quota.remainders.len())
        .filter(|&i| quota.remainders[i] == *cutoff)
        .collect();
    let contested = leftover - above.len();
    Some((above, group, contested))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::{ToPrimitive, Zero};

    fn profile(pops: &[u64]) -> PopulationProfile {
        PopulationProfile::new(pops.to_vec()).unwrap()
    }

    fn rational(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn quota_alabama_example() {
        // (53, 33, 14) at n = 10 and n = 11.
        let p = profile(&[53, 33, 14]);
        let q10 = compute_quota(&p, 10);
        assert_eq!(
            q10.values(),
            &[rational(53, 10), rational(33, 10), rational(14, 10)]
        );
        assert_eq!(q10.floors(), &[5, 3, 1]);
        let q11 = compute_quota(&p, 11);
        assert_eq!(
            q11.values(),
            &[rational(583, 100), rational(363, 100), rational(154, 100)]
        );
        assert_eq!(q11.floors(), &[5, 3, 1]);
        // Quota values always sum to exactly n.
        let sum: BigRational = q11.values().iter().sum();
        assert_eq!(sum, rational(11, 1));
    }

    #[test]
    fn quota_zero_house() {
        let p = profile(&[53, 33, 14]);
        let q = compute_quota(&p, 0);
        assert!(q.values().iter().all(|v| v.is_zero()));
        assert_eq!(q.leftover_seats(), 0);
    }

    #[test]
    fn allocation_alabama_paradox() {
        let p = profile(&[53, 33, 14]);
        let a10 = hamilton_allocate(&p, 10, &TiePolicy::ErrorOnTie).unwrap();
        assert_eq!(a10.seats, vec![5, 3, 2]);
        assert_eq!(a10.rounded_up, BTreeSet::from([2]));
        let a11 = hamilton_allocate(&p, 11, &TiePolicy::ErrorOnTie).unwrap();
        assert_eq!(a11.seats, vec![6, 4, 1]);
        assert_eq!(a11.rounded_up, BTreeSet::from([0, 1]));
    }

    #[test]
    fn allocation_double_paradox() {
        let p = profile(&[28, 27, 27, 9, 9]);
        let a5 = hamilton_allocate(&p, 5, &TiePolicy::ErrorOnTie).unwrap();
        assert_eq!(a5.seats, vec![1, 1, 1, 1, 1]);
        let a6 = hamilton_allocate(&p, 6, &TiePolicy::ErrorOnTie).unwrap();
        assert_eq!(a6.seats, vec![2, 2, 2, 0, 0]);
    }

    #[test]
    fn tie_detection_matches_tie_figure() {
        // (6, 3, 1): remainders at n=4 are (0.4, 0.2, 0.4).
        let p = profile(&[6, 3, 1]);
        let ties = detect_ties(&compute_quota(&p, 4));
        assert_eq!(
            ties,
            vec![TieEvent {
                house_size: 4,
                tied_states: vec![0, 2],
                contested_seats: 1
            }]
        );
        // n=5: remainders (0, 0.5, 0.5).
        let ties = detect_ties(&compute_quota(&p, 5));
        assert_eq!(
            ties,
            vec![TieEvent {
                house_size: 5,
                tied_states: vec![1, 2],
                contested_seats: 1
            }]
        );
        // Distinct remainders: no events.
        assert!(detect_ties(&compute_quota(&profile(&[53, 33, 14]), 10)).is_empty());
        // A full group exactly filling the leftover seats is not a tie:
        // (28,27,27,9,9) at n=5 gives both 0.45-remainder states a seat.
        assert!(detect_ties(&compute_quota(&profile(&[28, 27, 27, 9, 9]), 5)).is_empty());
    }

    #[test]
    fn error_on_tie_reports_the_event() {
        let p = profile(&[6, 3, 1]);
        let err = hamilton_allocate(&p, 4, &TiePolicy::ErrorOnTie).unwrap_err();
        assert_eq!(
            err,
            ApportionError::TieUnresolved(TieEvent {
                house_size: 4,
                tied_states: vec![0, 2],
                contested_seats: 1
            })
        );
    }

    #[test]
    fn fixed_priority_resolves_ties() {
        let p = profile(&[6, 3, 1]);
        let a = hamilton_allocate(&p, 4, &TiePolicy::FixedPriority(vec![0, 1, 2])).unwrap();
        assert_eq!(a.seats, vec![3, 1, 0]);
        let a = hamilton_allocate(&p, 4, &TiePolicy::FixedPriority(vec![2, 1, 0])).unwrap();
        assert_eq!(a.seats, vec![2, 1, 1]);
    }

    #[test]
    fn invalid_priority_rejected() {
        let p = profile(&[6, 3, 1]);
        for bad in [vec![0, 1], vec![0, 1, 1], vec![0, 1, 3]] {
            let err = hamilton_allocate(&p, 4, &TiePolicy::FixedPriority(bad)).unwrap_err();
            assert_eq!(err, ApportionError::InvalidPriority { m: 3 });
        }
    }

    #[test]
    fn seeded_lot_is_deterministic_and_valid() {
        let p = profile(&[6, 3, 1]);
        let a = hamilton_allocate(&p, 4, &TiePolicy::SeededLot(42)).unwrap();
        let b = hamilton_allocate(&p, 4, &TiePolicy::SeededLot(42)).unwrap();
        assert_eq!(a, b);
        // The lot winner is one of the tied states and gets one seat.
        assert_eq!(a.seats.iter().sum::<u64>(), 4);
        assert!(a.seats == vec![3, 1, 0] || a.seats == vec![2, 1, 1]);
    }

    #[test]
    fn seeded_lot_visits_both_outcomes() {
        let p = profile(&[6, 3, 1]);
        let mut seen = BTreeSet::new();
        for seed in 0..32 {
            let a = hamilton_allocate(&p, 4, &TiePolicy::SeededLot(seed)).unwrap();
            seen.insert(a.seats);
        }
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn integer_quotas_need_no_rounding() {
        let p = profile(&[6, 3, 1]);
        let a = hamilton_allocate(&p, 10, &TiePolicy::ErrorOnTie).unwrap();
        assert_eq!(a.seats, vec![6, 3, 1]);
        assert!(a.rounded_up.is_empty());
    }

    #[test]
    fn single_state_takes_everything() {
        let p = profile(&[5]);
        let a = hamilton_allocate(&p, 7, &TiePolicy::ErrorOnTie).unwrap();
        assert_eq!(a.seats, vec![7]);
    }

    #[test]
    fn zero_house_allocates_nothing() {
        let p = profile(&[53, 33, 14]);
        let a = hamilton_allocate(&p, 0, &TiePolicy::ErrorOnTie).unwrap();
        assert_eq!(a.seats, vec![0, 0, 0]);
        assert!(a.rounded_up.is_empty());
    }

    #[test]
    fn allocation_json_shape() {
        let p = profile(&[53, 33, 14]);
        let a = hamilton_allocate(&p, 10, &TiePolicy::ErrorOnTie).unwrap();
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, r#"{"house_size":10,"seats":[5,3,2],"rounded_up":[2]}"#);
        let back: Allocation = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn quota_floor_and_ceiling_honored() {
        // Hamilton satisfies quota by construction; spot-check a profile.
        let p = profile(&[17, 11, 7, 3]);
        for n in 0..60 {
            let quota = compute_quota(&p, n);
            let a = hamilton_allocate(&p, n, &TiePolicy::SeededLot(1)).unwrap();
            assert_eq!(a.seats.iter().sum::<u64>(), n);
            for i in 0..p.len() {
                let mu = &quota.values()[i];
                let floor = mu.floor().to_integer().to_u64().unwrap();
                assert!(a.seats[i] == floor || a.seats[i] == floor + 1);
                assert_eq!(a.seats[i] == floor + 1, a.rounded_up.contains(&i));
            }
        }
    }
}
