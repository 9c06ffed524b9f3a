//! Maximum-likelihood estimate of `p` under a known λ schedule.
//!
//! Each rating contributes `r ln q_i + (1 - r) ln(1 - q_i)` with
//! `q_i = λ_i p + (1 - λ_i) p̄_{i-1}`, affine in `p`, so the log-likelihood is
//! concave and has a unique maximiser on the feasible interval. The interval
//! keeps every `q_i` inside `[δ, 1 - δ]`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::ProcessState;
use crate::schedule::LambdaSchedule;

/// Newton solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig {
    /// Margin `δ` keeping every rating probability in `[δ, 1 - δ]`.
    pub boundary_margin: f64,
    pub max_iterations: usize,
    /// Stop once an accepted step is shorter than this.
    pub tolerance: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self { boundary_margin: 1e-6, max_iterations: 100, tolerance: 1e-12 }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.boundary_margin > 0.0 && self.boundary_margin < 0.5) {
            return Err(invalid(format!(
                "boundary margin must lie in (0, 0.5), got {}",
                self.boundary_margin
            )));
        }
        if self.max_iterations == 0 || !(self.tolerance > 0.0) {
            return Err(invalid("newton needs max_iterations >= 1 and tolerance > 0"));
        }
        Ok(())
    }
}

/// Maximum number of step halvings per Newton iteration.
const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MleStatus {
    Converged,
    IterationLimit,
    /// The margin constraints admit no `p`; the value is the midpoint of `[δ, 1 - δ]`.
    InfeasibleDomain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleEstimate {
    pub value: f64,
    pub status: MleStatus,
    pub iterations: usize,
    pub log_likelihood: f64,
}

/// One (possibly aggregated) likelihood term: `q = slope * p + intercept`,
/// observed `ones` times as a 1 and `zeros` times as a 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodTerm {
    pub slope: f64,
    pub intercept: f64,
    pub ones: f64,
    pub zeros: f64,
}

impl LikelihoodTerm {
    pub fn single(lambda: f64, prev_mean: f64, rating: bool) -> Self {
        Self {
            slope: lambda,
            intercept: (1.0 - lambda) * prev_mean,
            ones: if rating { 1.0 } else { 0.0 },
            zeros: if rating { 0.0 } else { 1.0 },
        }
    }

    #[inline]
    fn log_likelihood(&self, p: f64) -> f64 {
        let q = self.slope * p + self.intercept;
        let mut l = 0.0;
        if self.ones > 0.0 {
            l += self.ones * q.ln();
        }
        if self.zeros > 0.0 {
            l += self.zeros * (1.0 - q).ln();
        }
        l
    }
}

/// Sum of term log-likelihoods at `p`.
pub fn log_likelihood(terms: &[LikelihoodTerm], p: f64) -> f64 {
    terms.iter().map(|t| t.log_likelihood(p)).sum()
}

/// Value, first and second derivative in one pass.
fn evaluate(terms: &[LikelihoodTerm], p: f64) -> (f64, f64, f64) {
    let (mut f, mut g, mut h) = (0.0, 0.0, 0.0);
    for t in terms {
        let q = t.slope * p + t.intercept;
        if t.ones > 0.0 {
            f += t.ones * q.ln();
            g += t.ones * t.slope / q;
            h -= t.ones * t.slope * t.slope / (q * q);
        }
        if t.zeros > 0.0 {
            let c = 1.0 - q;
            f += t.zeros * c.ln();
            g -= t.zeros * t.slope / c;
            h -= t.zeros * t.slope * t.slope / (c * c);
        }
    }
    (f, g, h)
}

/// Intersection of `[δ, 1 - δ]` with every term's margin constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibleInterval {
    pub lo: f64,
    pub hi: f64,
    margin: f64,
}

impl FeasibleInterval {
    pub fn new(margin: f64) -> Self {
        Self { lo: margin, hi: 1.0 - margin, margin }
    }

    /// Terms with zero slope do not depend on `p` and add no constraint.
    pub fn constrain(&mut self, slope: f64, intercept: f64) {
        if slope > 0.0 {
            self.lo = self.lo.max((self.margin - intercept) / slope);
            self.hi = self.hi.min((1.0 - self.margin - intercept) / slope);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }
}

/// Safeguarded Newton ascent on a concave sum of log-affine terms.
///
/// Starts at `init` clamped to the interval; iterates are clamped and each
/// step is halved until the objective does not decrease.
pub fn maximize(
    terms: &[LikelihoodTerm],
    interval: FeasibleInterval,
    init: f64,
    config: &NewtonConfig,
) -> MleEstimate {
    if interval.is_empty() {
        let mid = 0.5;
        return MleEstimate {
            value: mid,
            status: MleStatus::InfeasibleDomain,
            iterations: 0,
            log_likelihood: log_likelihood(terms, mid),
        };
    }
    let (lo, hi) = (interval.lo, interval.hi);
    let mut x = init.clamp(lo, hi);
    let (mut f, mut g, mut h) = evaluate(terms, x);
    let mut status = MleStatus::IterationLimit;
    let mut iterations = 0;
    while iterations < config.max_iterations {
        iterations += 1;
        if !(h < 0.0) {
            // flat objective: every term is constant in p
            status = MleStatus::Converged;
            break;
        }
        let mut step = ((x - g / h).clamp(lo, hi)) - x;
        if step.abs() < config.tolerance {
            status = MleStatus::Converged;
            break;
        }
        let mut candidate = evaluate(terms, x + step);
        let mut halvings = 0;
        while !(candidate.0 >= f) && halvings < MAX_HALVINGS {
            step *= 0.5;
            candidate = evaluate(terms, x + step);
            halvings += 1;
        }
        if !(candidate.0 >= f) {
            status = MleStatus::Converged;
            break;
        }
        x += step;
        (f, g, h) = candidate;
        if step.abs() < config.tolerance {
            status = MleStatus::Converged;
            break;
        }
    }
    MleEstimate { value: x, status, iterations, log_likelihood: f }
}

/// Streaming store of likelihood terms; the estimate is re-solved on demand.
#[derive(Debug, Clone)]
pub struct MleAccumulator {
    terms: Vec<LikelihoodTerm>,
    interval: FeasibleInterval,
    state: ProcessState,
}

impl MleAccumulator {
    pub fn new(config: &NewtonConfig) -> Self {
        Self {
            terms: Vec::new(),
            interval: FeasibleInterval::new(config.boundary_margin),
            state: ProcessState::new(),
        }
    }

    pub fn with_capacity(config: &NewtonConfig, capacity: usize) -> Self {
        let mut acc = Self::new(config);
        acc.terms.reserve(capacity);
        acc
    }

    /// Adds rating `i = state.n + 1` with its estimated `λ̂_i`.
    pub fn push(&mut self, rating: bool, lambda_hat: f64) {
        let term = LikelihoodTerm::single(lambda_hat, self.state.mean(), rating);
        self.interval.constrain(term.slope, term.intercept);
        if term.slope > 0.0 {
            self.terms.push(term);
        }
        self.state.push(rating);
    }

    pub fn solve(&self, config: &NewtonConfig) -> MleEstimate {
        let m = config.boundary_margin;
        maximize(&self.terms, self.interval, self.state.mean().clamp(m, 1.0 - m), config)
    }
}

/// `p*_n` for a complete rating prefix.
pub fn mle_newton(
    ratings: &[bool],
    schedule_hat: &LambdaSchedule,
    config: &NewtonConfig,
) -> Result<MleEstimate> {
    config.validate()?;
    if ratings.is_empty() {
        return Err(Error::Empty("rating prefix"));
    }
    let lambdas = schedule_hat.values(ratings.len())?;
    let mut acc = MleAccumulator::with_capacity(config, ratings.len());
    for (&r, &l) in ratings.iter().zip(&lambdas) {
        acc.push(r, l);
    }
    Ok(acc.solve(config))
}
