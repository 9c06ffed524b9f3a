//! The sequential rating process: preference, running state and recorded sequences.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::schedule::LambdaSchedule;

/// Fraction of users who would rate the item positively without social signal.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct TruePreference(f64);

impl TruePreference {
    pub fn new(p: f64) -> Result<Self> {
        if p > 0.0 && p < 1.0 {
            Ok(Self(p))
        } else {
            Err(invalid(format!("true preference must lie in (0, 1), got {p}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `p (1 - p)`, the variance of a single rating.
    pub fn bernoulli_variance(self) -> f64 {
        self.0 * (1.0 - self.0)
    }
}

impl TryFrom<f64> for TruePreference {
    type Error = crate::Error;

    fn try_from(p: f64) -> Result<Self> {
        Self::new(p)
    }
}

impl From<TruePreference> for f64 {
    fn from(p: TruePreference) -> f64 {
        p.0
    }
}

/// Count and integer sum of the ratings seen so far.
///
/// The running mean is derived from the exact sum, so it never drifts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ProcessState {
    n: u64,
    sum: u64,
}

impl ProcessState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts(n: u64, sum: u64) -> Result<Self> {
        if sum > n {
            return Err(invalid(format!("sum {sum} exceeds count {n}")));
        }
        Ok(Self { n, sum })
    }

    pub fn push(&mut self, rating: bool) {
        self.n += 1;
        self.sum += u64::from(rating);
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn sum(&self) -> u64 {
        self.sum
    }

    /// `p̄_n`; zero for the empty state.
    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum as f64 / self.n as f64
        }
    }
}

/// `P(r_n = 1) = λ_n p + (1 - λ_n) p̄_{n-1}`.
///
/// `state` holds the first `n - 1` ratings. For the first rating `lambda_n`
/// must be 1, which the schedule guarantees.
pub fn next_rating_probability(p: TruePreference, state: &ProcessState, lambda_n: f64) -> f64 {
    debug_assert!(state.n() > 0 || lambda_n == 1.0, "first rating must be unaffected");
    (lambda_n * p.value() + (1.0 - lambda_n) * state.mean()).clamp(0.0, 1.0)
}

/// One realised run of the process.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingSequence {
    pub ratings: Vec<bool>,
    pub schedule: LambdaSchedule,
    pub seed: u64,
}

impl RatingSequence {
    pub fn len(&self) -> usize {
        self.ratings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratings.is_empty()
    }

    /// States after each prefix: element `i` holds the first `i + 1` ratings.
    pub fn prefix_states(&self) -> impl Iterator<Item = ProcessState> + '_ {
        self.ratings.iter().scan(ProcessState::new(), |state, &r| {
            state.push(r);
            Some(*state)
        })
    }

    pub fn final_state(&self) -> ProcessState {
        let mut state = ProcessState::new();
        for &r in &self.ratings {
            state.push(r);
        }
        state
    }
}
