//! Finite-sample guarantee for the weighted affine mean.
//!
//! With `λ̂ = λ`, `Σ ω_i (r̂_i - p)` is a martingale whose increments span
//! `ω_i / λ_i`. Azuma's inequality then gives
//! `P(|p̂_n - p| > ε) ≤ α` as soon as
//! `(Σ ω_i)² ≥ ln(2/α) / (2ε²) · Σ (ω_i / λ_i)²`.

use crate::error::{invalid, Error, Result};
use crate::estimators::WeightScheme;
use crate::schedule::LambdaSchedule;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceQuery {
    epsilon: f64,
    alpha: f64,
    pub weights: WeightScheme,
    pub schedule: LambdaSchedule,
}

impl ConvergenceQuery {
    pub fn new(epsilon: f64, alpha: f64, weights: WeightScheme, schedule: LambdaSchedule) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        Ok(Self { epsilon, alpha, weights, schedule })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `ln(2/α) / (2ε²)`.
    pub fn required_ratio(&self) -> f64 {
        (2.0 / self.alpha).ln() / (2.0 * self.epsilon * self.epsilon)
    }
}

/// Azuma tail bound `2 exp(-2ε² (Σω)² / Σ(ω/λ)²)` after `n` ratings.
pub fn azuma_tail_bound(query: &ConvergenceQuery, n: usize) -> Result<f64> {
    let (weight_sum, spread) = sums(query, n)?;
    Ok((2.0 * (-2.0 * query.epsilon.powi(2) * weight_sum * weight_sum / spread).exp()).min(1.0))
}

fn sums(query: &ConvergenceQuery, n: usize) -> Result<(f64, f64)> {
    let (mut weight_sum, mut spread) = (0.0, 0.0);
    for i in 1..=n {
        let l = query.schedule.lambda_at(i)?;
        if !(l > 0.0) {
            return Err(Error::ZeroLambda(i));
        }
        let w = query.weights.weight(i, l)?;
        weight_sum += w;
        spread += (w / l).powi(2);
    }
    Ok((weight_sum, spread))
}

/// Smallest `n ≤ horizon` meeting the guarantee, or `None`.
pub fn azuma_min_samples(query: &ConvergenceQuery, horizon: usize) -> Result<Option<usize>> {
    let ratio = query.required_ratio();
    let (mut weight_sum, mut spread) = (0.0, 0.0);
    for i in 1..=horizon {
        let l = query.schedule.lambda_at(i)?;
        if !(l > 0.0) {
            // increments become unbounded; no guarantee past this point
            return Ok(None);
        }
        let w = query.weights.weight(i, l)?;
        weight_sum += w;
        spread += (w / l).powi(2);
        if weight_sum * weight_sum >= ratio * spread {
            return Ok(Some(i));
        }
    }
    Ok(None)
}
