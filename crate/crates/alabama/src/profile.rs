//! State populations and their exact relative shares.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest total population we accept. Remainder updates in the seat
/// stream add two values below the total, so the total must stay under
/// 2^63 for the sums to fit in a `u64`.
pub const MAX_TOTAL_POPULATION: u64 = 1 << 63;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProfileError {
    #[error("profile must contain at least one state")]
    Empty,
    #[error("state {0} has zero population")]
    ZeroPopulation(usize),
    #[error("total population exceeds {MAX_TOTAL_POPULATION}")]
    TotalTooLarge,
    #[error("{names} names given for {states} states")]
    NameCountMismatch { names: usize, states: usize },
    #[error("shares must be positive and sum to exactly 1")]
    InvalidShares,
    #[error("share denominators too large for an integer profile")]
    SharesTooFine,
    #[error("cannot parse profile: {0}")]
    Parse(String),
}

/// A list of states with positive integer populations.
///
/// Shares `p_i = P_i / P` are derived on demand as exact rationals, so
/// they always sum to one exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PopulationProfile {
    names: Vec<String>,
    populations: Vec<u64>,
    total: u64,
}

/// JSON wire form: `{"populations":[53,33,14],"names":["A","B","C"]}`,
/// names optional.
#[derive(Serialize, Deserialize)]
struct ProfileJson {
    populations: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    names: Option<Vec<String>>,
}

impl PopulationProfile {
    pub fn new(populations: Vec<u64>) -> Result<Self, ProfileError> {
        let names = (0..populations.len()).map(default_name).collect();
        Self::with_names(names, populations)
    }

    pub fn with_names(names: Vec<String>, populations: Vec<u64>) -> Result<Self, ProfileError> {
        if populations.is_empty() {
            return Err(ProfileError::Empty);
        }
        if names.len() != populations.len() {
            return Err(ProfileError::NameCountMismatch {
                names: names.len(),
                states: populations.len(),
            });
        }
        let mut total: u64 = 0;
        for (i, &p) in populations.iter().enumerate() {
            if p == 0 {
                return Err(ProfileError::ZeroPopulation(i));
            }
            total = total
                .checked_add(p)
                .filter(|&t| t < MAX_TOTAL_POPULATION)
                .ok_or(ProfileError::TotalTooLarge)?;
        }
        Ok(PopulationProfile {
            names,
            populations,
            total,
        })
    }

    /// Builds an integer profile from exact rational shares summing to 1.
    ///
    /// Populations are the share numerators over the common denominator,
    /// which must fit the `u64` population budget.
    pub fn from_shares(shares: &[BigRational]) -> Result<Self, ProfileError> {
        if shares.is_empty() {
            return Err(ProfileError::Empty);
        }
        let sum: BigRational = shares.iter().sum();
        if !sum.is_one() || shares.iter().any(|s| *s <= BigRational::zero()) {
            return Err(ProfileError::InvalidShares);
        }
        let mut denom = BigInt::one();
        for s in shares {
            denom = denom.lcm(s.denom());
        }
        let pops = shares
            .iter()
            .map(|s| (s.numer() * &denom / s.denom()).to_u64())
            .collect::<Option<Vec<u64>>>()
            .ok_or(ProfileError::SharesTooFine)?;
        Self::new(pops)
    }

    pub fn len(&self) -> usize {
        self.populations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.populations.is_empty()
    }

    pub fn populations(&self) -> &[u64] {
        &self.populations
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Total population `P`.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Exact shares `p_i = P_i / P`.
    pub fn shares(&self) -> Vec<BigRational> {
        let total = BigInt::from(self.total);
        self.populations
            .iter()
            .map(|&p| BigRational::new(BigInt::from(p), total.clone()))
            .collect()
    }

    /// Shares as floats, for the asymptotic formulas.
    pub fn share_floats(&self) -> Vec<f64> {
        let total = self.total as f64;
        self.populations.iter().map(|&p| p as f64 / total).collect()
    }

    /// The same profile with populations divided by their gcd.
    ///
    /// Allocations are scale-invariant, so this changes nothing except
    /// the length of the seat-sequence period.
    pub fn reduced(&self) -> PopulationProfile {
        let g = self
            .populations
            .iter()
            .fold(0u64, |acc, &p| acc.gcd(&p))
            .max(1);
        PopulationProfile {
            names: self.names.clone(),
            populations: self.populations.iter().map(|&p| p / g).collect(),
            total: self.total / g,
        }
    }

    /// Period of the seat sequence: the reduced total population.
    pub fn period(&self) -> u64 {
        self.reduced().total
    }

    pub fn from_json_str(json: &str) -> Result<Self, ProfileError> {
        let parsed: ProfileJson =
            serde_json::from_str(json).map_err(|e| ProfileError::Parse(e.to_string()))?;
        match parsed.names {
            Some(names) => Self::with_names(names, parsed.populations),
            None => Self::new(parsed.populations),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&ProfileJson {
            populations: self.populations.clone(),
            names: Some(self.names.clone()),
        })
        .expect("profile serialization cannot fail")
    }

    /// Parses `name,population` lines. Blank lines and `#` comments are
    /// skipped; a single bare number per line is also accepted.
    pub fn from_csv_str(csv: &str) -> Result<Self, ProfileError> {
        let mut names = Vec::new();
        let mut pops = Vec::new();
        for (lineno, line) in csv.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, pop) = match line.split_once(',') {
                Some((name, pop)) => (name.trim().to_string(), pop.trim()),
                None => (default_name(names.len()), line),
            };
            let pop: u64 = pop.parse().map_err(|_| {
                ProfileError::Parse(format!("line {}: bad population {pop:?}", lineno + 1))
            })?;
            names.push(name);
            pops.push(pop);
        }
        Self::with_names(names, pops)
    }
}

/// Spreadsheet-style default state names: A, B, ..., Z, AA, AB, ...
fn default_name(index: usize) -> String {
    let mut n = index + 1;
    let mut out = Vec::new();
    while n > 0 {
        n -= 1;
        out.push(b'A' + (n % 26) as u8);
        n /= 26;
    }
    out.reverse();
    String::from_utf8(out).expect("ASCII by construction")
}
