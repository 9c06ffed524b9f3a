//! Closed-form tables and oracle comparisons behind the `theory` and
//! `oracle` commands.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::estimators::WeightScheme;
use crate::model::TruePreference;
use crate::schedule::{LambdaSchedule, ScheduleKind};
use crate::theory::{
    affine_variance_curve, azuma_min_samples, brute_force_oracle, consistency_classify,
    efficiency_asymptotic_partial, efficiency_curve, error_lower_bound, ConsistencyVerdict,
    ConvergenceQuery,
};

/// Closed forms at one checkpoint. Affine columns are empty when some
/// `λ_i = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryRow {
    pub n: usize,
    pub sample_mean_mse: f64,
    pub asymptotic_partial: Option<f64>,
    pub affine_uniform_var: Option<f64>,
    pub affine_weighted_var: Option<f64>,
}

pub fn theory_table(p: TruePreference, schedule: &LambdaSchedule, checkpoints: &[usize]) -> Result<Vec<TheoryRow>> {
    let horizon = checkpoints.iter().copied().max().unwrap_or(1);
    let mse = efficiency_curve(p, schedule, horizon)?;
    let invertible = schedule.values(horizon)?.iter().all(|&l| l > 0.0);
    let (uniform, weighted) = if invertible {
        (
            Some(affine_variance_curve(p, schedule, &WeightScheme::Uniform, horizon)?),
            Some(affine_variance_curve(p, schedule, &WeightScheme::LambdaProportional, horizon)?),
        )
    } else {
        (None, None)
    };
    checkpoints
        .iter()
        .map(|&n| {
            Ok(TheoryRow {
                n,
                sample_mean_mse: mse[n - 1],
                asymptotic_partial: if n >= 2 {
                    Some(efficiency_asymptotic_partial(p, schedule, n)?)
                } else {
                    None
                },
                affine_uniform_var: uniform.as_ref().map(|v| v[n - 1]),
                affine_weighted_var: weighted.as_ref().map(|v| v[n - 1]),
            })
        })
        .collect()
}

pub fn write_theory_table<W: Write>(out: W, rows: &[TheoryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryReport {
    pub p: f64,
    pub schedule: String,
    pub consistency: ConsistencyVerdict,
    pub epsilon: f64,
    pub alpha: f64,
    /// Smallest `n` (up to the horizon) with the Azuma guarantee, per weighting.
    pub azuma_uniform: Option<usize>,
    pub azuma_lambda_weighted: Option<usize>,
    pub azuma_horizon: usize,
    /// Limiting error floor, only for pure geometric schedules.
    pub error_lower_bound: Option<f64>,
}

pub fn theory_report(
    p: TruePreference,
    schedule: &LambdaSchedule,
    epsilon: f64,
    alpha: f64,
    horizon: usize,
) -> Result<TheoryReport> {
    let query = |w| ConvergenceQuery::new(epsilon, alpha, w, schedule.clone());
    let error_floor = match schedule.kind() {
        ScheduleKind::Geometric(c) if *c < 1.0 && *c > 0.0 => Some(error_lower_bound(p, *c)?),
        _ => None,
    };
    Ok(TheoryReport {
        p: p.value(),
        schedule: schedule.to_string(),
        consistency: consistency_classify(schedule, horizon),
        epsilon,
        alpha,
        azuma_uniform: azuma_min_samples(&query(WeightScheme::Uniform)?, horizon)?,
        azuma_lambda_weighted: azuma_min_samples(&query(WeightScheme::LambdaProportional)?, horizon)?,
        azuma_horizon: horizon,
        error_lower_bound: error_floor,
    })
}

/// Exact enumeration next to the closed forms for one `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub p: f64,
    pub schedule: String,
    pub n: usize,
    pub total_probability: f64,
    pub sample_mean: f64,
    pub enumerated_mse: f64,
    pub closed_form_mse: f64,
    pub enumerated_affine_var: Option<f64>,
    pub closed_form_affine_var: Option<f64>,
    pub rating_means: Vec<f64>,
}

pub fn oracle_report(p: TruePreference, schedule: &LambdaSchedule, n: usize) -> Result<OracleReport> {
    let exact = brute_force_oracle(p, schedule, &WeightScheme::Uniform, n)?;
    let closed_affine = if exact.affine.is_some() {
        Some(*affine_variance_curve(p, schedule, &WeightScheme::Uniform, n)?.last().unwrap())
    } else {
        None
    };
    Ok(OracleReport {
        p: p.value(),
        schedule: schedule.to_string(),
        n,
        total_probability: exact.total_probability,
        sample_mean: exact.sample_mean,
        enumerated_mse: exact.sample_mean_sq_error,
        closed_form_mse: *efficiency_curve(p, schedule, n)?.last().unwrap(),
        enumerated_affine_var: exact.affine.map(|a| a.variance),
        closed_form_affine_var: closed_affine,
        rating_means: exact.rating_means,
    })
}
