//! Hamilton (largest-remainder) apportionment and the Alabama paradox.
//!
//! The crate has four layers:
//!
//! - [`apportion`]: exact-rational Hamilton allocation for a single house
//!   size, with explicit tie detection and pluggable tie policies.
//! - [`simulate`]: streaming seat sequences over house sizes `1..=N`,
//!   paradox-event counting, and exact periodic paradox probabilities for
//!   integer populations.
//! - [`formula`]: closed-form asymptotic paradox probabilities for share
//!   vectors with no rational dependencies, a Poisson approximation with a
//!   computable error bound, and the five-state double-paradox integral.
//! - [`average`]: expected paradox probabilities over uniformly random
//!   share vectors, as exact fractions and Monte Carlo estimates, plus the
//!   limit constant `b` of the expected per-step paradox count.
//!
//! All allocation decisions are made in exact integer/rational arithmetic;
//! floating point only enters in the asymptotic formulas, where the inputs
//! are real-valued shares by definition.

#![forbid(unsafe_code)]

pub mod apportion;
pub mod average;
pub mod formula;
mod integrate;
pub mod profile;
mod seeding;
pub mod simulate;

pub use apportion::{
    compute_quota, detect_ties, hamilton_allocate, Allocation, ApportionError, Quota, TieEvent,
    TiePolicy,
};
pub use profile::{PopulationProfile, ProfileError};
