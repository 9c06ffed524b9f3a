//! Consistency of the sample mean, decided from a schedule's closed form.
//!
//! Two conditions are known. A positive infimum of `λ` is sufficient for
//! `p̄_n → p`; a divergent `Σ λ_i²` is necessary. Finite probes cannot
//! decide either limit, so the verdict comes from the schedule kind.

use serde::Serialize;

use crate::schedule::{LambdaSchedule, ScheduleKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Consistency {
    Consistent,
    Inconsistent,
    Indeterminate,
}

/// Which condition decided the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConsistencyReason {
    /// `inf λ > 0`.
    PositiveInfimum,
    /// `Σ λ_i²` converges, violating the necessary condition.
    SquareSumConverges,
    /// `Σ λ_i²` diverges while `inf λ = 0`.
    NeitherConditionApplies,
    /// A finite list says nothing about the limit.
    FiniteSchedule,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyVerdict {
    pub verdict: Consistency,
    pub reason: ConsistencyReason,
    /// Analytic `inf_i λ_i` where known.
    pub infimum: Option<f64>,
    /// `min λ_i` over the probed indices.
    pub probed_min: f64,
    /// `Σ λ_i²` over the probed indices.
    pub probed_square_sum: f64,
}

struct Analytic {
    infimum: Option<f64>,
    /// `Some(true)` when `Σ λ²` converges.
    square_sum_converges: Option<bool>,
}

fn analyse(schedule: &LambdaSchedule) -> Analytic {
    match schedule.kind() {
        ScheduleKind::Constant(c) => Analytic {
            infimum: Some(c.min(1.0)),
            square_sum_converges: Some(*c == 0.0),
        },
        ScheduleKind::GeometricAffine { floor, .. } => Analytic {
            infimum: Some(*floor),
            square_sum_converges: Some(*floor == 0.0),
        },
        ScheduleKind::Geometric(c) => Analytic {
            infimum: Some(if *c < 1.0 { 0.0 } else { 1.0 }),
            square_sum_converges: Some(*c < 1.0),
        },
        ScheduleKind::PowerLaw(q) => Analytic {
            infimum: Some(if *q > 0.0 { 0.0 } else { 1.0 }),
            square_sum_converges: Some(*q > 0.5),
        },
        ScheduleKind::Explicit(_) => Analytic { infimum: None, square_sum_converges: None },
        ScheduleKind::Clipped { inner, tau } => {
            let inner = analyse(inner);
            Analytic {
                infimum: Some(inner.infimum.map_or(*tau, |i| i.max(*tau))),
                square_sum_converges: Some(false),
            }
        }
    }
}

/// Classifies the sample mean under `schedule`, also reporting the first
/// `probe_horizon` values (capped at the length of a finite schedule).
pub fn consistency_classify(schedule: &LambdaSchedule, probe_horizon: usize) -> ConsistencyVerdict {
    let horizon = schedule.len().map_or(probe_horizon, |l| l.min(probe_horizon)).max(1);
    let probe = schedule.values(horizon).unwrap_or_default();
    let probed_min = probe.iter().copied().fold(f64::INFINITY, f64::min);
    let probed_square_sum = probe.iter().map(|l| l * l).sum();

    let analytic = analyse(schedule);
    let (verdict, reason) = match (analytic.infimum, analytic.square_sum_converges) {
        (None, _) | (_, None) => (Consistency::Indeterminate, ConsistencyReason::FiniteSchedule),
        (Some(inf), _) if inf > 0.0 => (Consistency::Consistent, ConsistencyReason::PositiveInfimum),
        (_, Some(true)) => (Consistency::Inconsistent, ConsistencyReason::SquareSumConverges),
        (_, Some(false)) => {
            (Consistency::Indeterminate, ConsistencyReason::NeitherConditionApplies)
        }
    };
    ConsistencyVerdict {
        verdict,
        reason,
        infimum: analytic.infimum,
        probed_min,
        probed_square_sum,
    }
}
