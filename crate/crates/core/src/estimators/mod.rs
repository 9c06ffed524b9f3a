//! Estimators of the true preference from a herded rating sequence.
//!
//! All estimators take a (possibly misestimated) schedule `λ̂`. The affine
//! estimators invert the mixing model one rating at a time:
//! `r̂_i = (r_i - (1 - λ̂_i) p̄_{i-1}) / λ̂_i`, then average the `r̂_i` with
//! positive weights. The inverted ratings are deliberately left unclipped.

mod mle;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use mle::{
    log_likelihood, maximize, mle_newton, FeasibleInterval, LikelihoodTerm, MleAccumulator,
    MleEstimate, MleStatus, NewtonConfig,
};

use crate::error::{invalid, Error, Result};
use crate::model::ProcessState;
use crate::schedule::LambdaSchedule;

/// The four estimators compared in the convergence experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum EstimatorKind {
    SampleMean,
    AffineUniform,
    AffineWeighted,
    Mle,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 4] = [
        EstimatorKind::SampleMean,
        EstimatorKind::AffineUniform,
        EstimatorKind::AffineWeighted,
        EstimatorKind::Mle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::SampleMean => "sample-mean",
            EstimatorKind::AffineUniform => "affine-uniform",
            EstimatorKind::AffineWeighted => "affine-weighted",
            EstimatorKind::Mle => "mle",
        }
    }

    /// Parses a comma-separated list such as `sample-mean,mle`.
    pub fn parse_list(s: &str) -> Result<Vec<EstimatorKind>> {
        let list: Vec<EstimatorKind> =
            s.split(',').filter(|t| !t.trim().is_empty()).map(str::parse).collect::<Result<_>>()?;
        if list.is_empty() {
            return Err(Error::Empty("estimator list"));
        }
        Ok(list)
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| invalid(format!("unknown estimator `{s}`")))
    }
}

impl TryFrom<String> for EstimatorKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<EstimatorKind> for String {
    fn from(k: EstimatorKind) -> String {
        k.name().to_string()
    }
}

/// Weights `ω_i` for the affine mean.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightScheme {
    /// `ω_i = 1`.
    Uniform,
    /// `ω_i = λ̂_i`.
    LambdaProportional,
    /// Caller-supplied positive weights.
    Explicit(Vec<f64>),
}

impl WeightScheme {
    pub fn explicit(weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(invalid(format!("weights must be positive, got {w}")));
        }
        Ok(WeightScheme::Explicit(weights))
    }

    /// `ω_i` for 1-based `i` given `λ̂_i`.
    pub fn weight(&self, i: usize, lambda_hat: f64) -> Result<f64> {
        match self {
            WeightScheme::Uniform => Ok(1.0),
            WeightScheme::LambdaProportional => {
                if lambda_hat > 0.0 {
                    Ok(lambda_hat)
                } else {
                    Err(Error::ZeroLambda(i))
                }
            }
            WeightScheme::Explicit(w) => w
                .get(i - 1)
                .copied()
                .ok_or(Error::IndexOutOfRange { index: i, len: w.len() }),
        }
    }
}

/// Clipping threshold `τ ∈ (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClipConfig {
    tau: f64,
}

impl ClipConfig {
    pub fn new(tau: f64) -> Result<Self> {
        if tau > 0.0 && tau <= 1.0 {
            Ok(Self { tau })
        } else {
            Err(invalid(format!("clip threshold must lie in (0, 1], got {tau}")))
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

/// `λ̂_i = max(λ_i, τ)`.
pub fn clip_schedule(schedule: &LambdaSchedule, clip: ClipConfig) -> LambdaSchedule {
    if let crate::schedule::ScheduleKind::Constant(c) = schedule.kind() {
        if *c == 1.0 {
            return schedule.clone();
        }
    }
    schedule.clipped(clip.tau()).expect("ClipConfig guarantees tau in (0, 1]")
}

/// Exact mean of a prefix via its integer sum.
pub fn sample_mean(ratings: &[bool]) -> Result<f64> {
    if ratings.is_empty() {
        return Err(Error::Empty("rating prefix"));
    }
    let sum = ratings.iter().filter(|&&r| r).count();
    Ok(sum as f64 / ratings.len() as f64)
}

/// Inverted single rating `r̂_i`; may fall outside `[0, 1]`.
pub fn affine_single(rating: bool, p_bar_prev: f64, lambda_hat: f64) -> Result<f64> {
    if !(lambda_hat > 0.0) {
        return Err(invalid(format!("affine inversion needs lambda > 0, got {lambda_hat}")));
    }
    let r = if rating { 1.0 } else { 0.0 };
    Ok((r - (1.0 - lambda_hat) * p_bar_prev) / lambda_hat)
}

/// `r̂_1..r̂_n` for a sequence.
pub fn affine_terms(ratings: &[bool], schedule_hat: &LambdaSchedule) -> Result<Vec<f64>> {
    let lambdas = schedule_hat.values(ratings.len())?;
    let mut state = ProcessState::new();
    ratings
        .iter()
        .zip(&lambdas)
        .enumerate()
        .map(|(idx, (&r, &l))| {
            if !(l > 0.0) {
                return Err(Error::ZeroLambda(idx + 1));
            }
            let v = affine_single(r, state.mean(), l)?;
            state.push(r);
            Ok(v)
        })
        .collect()
}

/// `Σ ω_i v_i / Σ ω_i`.
pub fn weighted_average(values: &[f64], weights: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("values"));
    }
    if values.len() != weights.len() {
        return Err(invalid("values and weights differ in length"));
    }
    let den: f64 = weights.iter().sum();
    Ok(values.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / den)
}

/// Weighted affine mean `p̂_n` at every prefix length `n = 1..len`.
pub fn affine_mean(
    ratings: &[bool],
    schedule_hat: &LambdaSchedule,
    weights: &WeightScheme,
) -> Result<Vec<f64>> {
    let terms = affine_terms(ratings, schedule_hat)?;
    let lambdas = schedule_hat.values(ratings.len())?;
    let (mut num, mut den) = (0.0, 0.0);
    terms
        .iter()
        .zip(&lambdas)
        .enumerate()
        .map(|(idx, (&t, &l))| {
            let w = weights.weight(idx + 1, l)?;
            num += w * t;
            den += w;
            Ok(num / den)
        })
        .collect()
}

/// Incremental state for several estimators over one run.
///
/// Sample mean and affine means cost O(1) per rating; the MLE stores its
/// likelihood terms and is only solved when [`estimate`](Self::estimate) is
/// called.
#[derive(Debug, Clone)]
pub struct StreamingEstimators<'a> {
    lambda_hat: &'a [f64],
    newton: NewtonConfig,
    state: ProcessState,
    affine_uniform: f64,
    affine_weighted: f64,
    weight_total: f64,
    mle: Option<MleAccumulator>,
}

impl<'a> StreamingEstimators<'a> {
    /// `lambda_hat` must cover every rating that will be pushed and be
    /// strictly positive when affine estimators are requested.
    pub fn new(lambda_hat: &'a [f64], with_mle: bool, newton: NewtonConfig) -> Self {
        Self {
            lambda_hat,
            newton,
            state: ProcessState::new(),
            affine_uniform: 0.0,
            affine_weighted: 0.0,
            weight_total: 0.0,
            mle: with_mle.then(|| MleAccumulator::with_capacity(&newton, lambda_hat.len())),
        }
    }

    #[inline]
    pub fn push(&mut self, rating: bool) {
        let l = self.lambda_hat[self.state.n() as usize];
        let r = if rating { 1.0 } else { 0.0 };
        let inverted = (r - (1.0 - l) * self.state.mean()) / l;
        self.affine_uniform += inverted;
        self.affine_weighted += l * inverted;
        self.weight_total += l;
        if let Some(mle) = self.mle.as_mut() {
            mle.push(rating, l);
        }
        self.state.push(rating);
    }

    pub fn state(&self) -> &ProcessState {
        &self.state
    }

    pub fn estimate(&self, kind: EstimatorKind) -> f64 {
        let n = self.state.n() as f64;
        match kind {
            EstimatorKind::SampleMean => self.state.mean(),
            EstimatorKind::AffineUniform => self.affine_uniform / n,
            EstimatorKind::AffineWeighted => self.affine_weighted / self.weight_total,
            EstimatorKind::Mle => self
                .mle
                .as_ref()
                .expect("streaming MLE not enabled")
                .solve(&self.newton)
                .value,
        }
    }
}
