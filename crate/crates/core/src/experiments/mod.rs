//! Convergence experiments: ensembles summarised by mean and 90% bands,
//! threshold crossings and comparison against the closed forms.

mod config;
mod io;
mod reports;

use serde::{Deserialize, Serialize};

pub use config::RunConfig;
pub use reports::{
    oracle_report, theory_report, theory_table, write_theory_table, OracleReport, TheoryReport,
    TheoryRow,
};
pub use io::{
    read_bin_dataset, read_summaries, read_thresholds, read_traces, write_bin_dataset,
    write_lambda_table, write_overlay, write_summaries, write_thresholds, write_traces,
};

use crate::error::{invalid, Error, Result};
use crate::estimators::{ClipConfig, EstimatorKind};
use crate::model::TruePreference;
use crate::schedule::LambdaSchedule;
use crate::simulator::{simulate_ensemble, EnsembleConfig, EstimateTrace, EstimationSetup};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_RUNS: usize = 1_000;
pub const DEFAULT_SAMPLES: usize = 100_000;
pub const EXTENDED_SAMPLES: usize = 1_000_000;
pub const FIGURE4_SAMPLES: usize = 10_000;
pub const THRESHOLDS: [f64; 2] = [0.05, 0.01];

/// Distribution of one estimator across runs at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryPoint {
    pub n: usize,
    pub mean: f64,
    pub q05: f64,
    pub q95: f64,
}

impl SummaryPoint {
    pub fn band_width(&self) -> f64 {
        self.q95 - self.q05
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub estimator: EstimatorKind,
    pub runs: usize,
    pub points: Vec<SummaryPoint>,
}

impl EnsembleSummary {
    pub fn at(&self, n: usize) -> Option<&SummaryPoint> {
        self.points.iter().find(|pt| pt.n == n)
    }
}

/// Linear-interpolation quantile of sorted data (`h = (len - 1) q`).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Groups traces by estimator (first-appearance order) and summarises each
/// checkpoint. All traces must share the same checkpoints.
pub fn summarize(traces: &[EstimateTrace]) -> Result<Vec<EnsembleSummary>> {
    let first = traces.first().ok_or(Error::Empty("trace set"))?;
    let checkpoints: Vec<usize> = first.points.iter().map(|(n, _)| *n).collect();
    let mut order: Vec<EstimatorKind> = Vec::new();
    let mut columns: Vec<Vec<Vec<f64>>> = Vec::new();
    for t in traces {
        if t.points.len() != checkpoints.len()
            || t.points.iter().zip(&checkpoints).any(|((n, _), c)| n != c)
        {
            return Err(Error::CheckpointMismatch(format!(
                "run {} of {} has different checkpoints",
                t.run_id, t.estimator
            )));
        }
        let slot = match order.iter().position(|&k| k == t.estimator) {
            Some(s) => s,
            None => {
                order.push(t.estimator);
                columns.push(vec![Vec::new(); checkpoints.len()]);
                order.len() - 1
            }
        };
        for (col, (_, v)) in columns[slot].iter_mut().zip(&t.points) {
            col.push(*v);
        }
    }
    Ok(order
        .into_iter()
        .zip(columns)
        .map(|(estimator, cols)| {
            let runs = cols[0].len();
            let points = checkpoints
                .iter()
                .zip(cols)
                .map(|(&n, mut values)| {
                    let mean = values.iter().sum::<f64>() / values.len() as f64;
                    values.sort_by(f64::total_cmp);
                    SummaryPoint { n, mean, q05: quantile(&values, 0.05), q95: quantile(&values, 0.95) }
                })
                .collect();
            EnsembleSummary { estimator, runs, points }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub estimator: EstimatorKind,
    pub threshold: f64,
    /// First checkpoint from which the band stays inside `[p - t, p + t]`.
    pub n_cross: Option<usize>,
}

/// Sustained containment: the band must stay inside at every later checkpoint.
pub fn threshold_crossing(summary: &EnsembleSummary, p: TruePreference, threshold: f64) -> ThresholdReport {
    let (lo, hi) = (p.value() - threshold, p.value() + threshold);
    let mut n_cross = None;
    for pt in summary.points.iter().rev() {
        if pt.q05 >= lo && pt.q95 <= hi {
            n_cross = Some(pt.n);
        } else {
            break;
        }
    }
    ThresholdReport { estimator: summary.estimator, threshold, n_cross }
}

/// Sample-mean convergence under one λ schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure3Config {
    pub p: TruePreference,
    pub schedule: LambdaSchedule,
    pub runs: usize,
    pub samples: usize,
    pub seed: u64,
    pub thresholds: Vec<f64>,
}

impl Figure3Config {
    /// Defaults: 1000 runs, `10^5` samples (`10^6` when `extended`), seed 42.
    pub fn new(p: TruePreference, schedule: LambdaSchedule, extended: bool) -> Self {
        Self {
            p,
            schedule,
            runs: DEFAULT_RUNS,
            samples: if extended { EXTENDED_SAMPLES } else { DEFAULT_SAMPLES },
            seed: DEFAULT_SEED,
            thresholds: THRESHOLDS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure3Output {
    pub summary: EnsembleSummary,
    pub thresholds: Vec<ThresholdReport>,
}

pub fn run_figure3(config: &Figure3Config) -> Result<Figure3Output> {
    if config.thresholds.iter().any(|t| !(*t > 0.0)) {
        return Err(invalid("thresholds must be positive"));
    }
    let ensemble =
        EnsembleConfig::new(config.p, config.schedule.clone(), config.runs, config.samples, config.seed);
    let traces = simulate_ensemble(&ensemble, &EstimationSetup::new(vec![EstimatorKind::SampleMean]))?;
    let summary = summarize(&traces)?.remove(0);
    let thresholds =
        config.thresholds.iter().map(|&t| threshold_crossing(&summary, config.p, t)).collect();
    Ok(Figure3Output { summary, thresholds })
}

/// Estimator comparison on common random numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure4Config {
    pub p: TruePreference,
    pub schedule: LambdaSchedule,
    pub estimators: Vec<EstimatorKind>,
    /// `None` gives the estimators the true schedule.
    pub lambda_hat: Option<LambdaSchedule>,
    pub clip: Option<ClipConfig>,
    pub runs: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Figure4Config {
    /// All four estimators, true `λ̂`, 1000 runs of `10^4` ratings.
    pub fn new(p: TruePreference, schedule: LambdaSchedule) -> Self {
        Self {
            p,
            schedule,
            estimators: EstimatorKind::ALL.to_vec(),
            lambda_hat: None,
            clip: None,
            runs: DEFAULT_RUNS,
            samples: FIGURE4_SAMPLES,
            seed: DEFAULT_SEED,
        }
    }

    /// The misestimated curve `0.33 + 0.67 · 0.92^(i-1)`.
    pub fn misestimated_lambda() -> LambdaSchedule {
        LambdaSchedule::geometric_affine(0.33, 0.92).expect("constant parameters are valid")
    }

    fn setup(&self) -> EstimationSetup {
        let mut setup = EstimationSetup::new(self.estimators.clone());
        if let Some(l) = &self.lambda_hat {
            setup = setup.with_lambda_hat(l.clone());
        }
        if let Some(c) = self.clip {
            setup = setup.with_clip(c);
        }
        setup
    }

    pub fn ensemble(&self) -> EnsembleConfig {
        EnsembleConfig::new(self.p, self.schedule.clone(), self.runs, self.samples, self.seed)
    }
}

/// Traces plus per-estimator summaries.
pub fn run_figure4_traces(config: &Figure4Config) -> Result<(Vec<EstimateTrace>, Vec<EnsembleSummary>)> {
    let traces = simulate_ensemble(&config.ensemble(), &config.setup())?;
    let summaries = summarize(&traces)?;
    Ok((traces, summaries))
}

pub fn run_figure4(config: &Figure4Config) -> Result<Vec<EnsembleSummary>> {
    Ok(run_figure4_traces(config)?.1)
}

/// Empirical mean squared error against a closed form at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlayRow {
    pub n: usize,
    pub empirical: f64,
    pub theory: f64,
    /// `(empirical - theory) / SE`, with SE the standard error of the mean
    /// squared deviation over runs.
    pub z: f64,
}

/// Compares `E[(estimate - p)²]` over runs with `theory`, a list of
/// `(n, value)` pairs that must match the traces' checkpoints exactly.
pub fn overlay_theory(
    traces: &[EstimateTrace],
    estimator: EstimatorKind,
    p: TruePreference,
    theory: &[(usize, f64)],
) -> Result<Vec<OverlayRow>> {
    let selected: Vec<&EstimateTrace> = traces.iter().filter(|t| t.estimator == estimator).collect();
    if selected.len() < 2 {
        return Err(invalid(format!("need at least two runs of {estimator}")));
    }
    let mut rows = Vec::with_capacity(theory.len());
    for (j, &(n, value)) in theory.iter().enumerate() {
        let mut sq = Vec::with_capacity(selected.len());
        for t in &selected {
            match t.points.get(j) {
                Some(&(c, v)) if c == n && t.points.len() == theory.len() => {
                    sq.push((v - p.value()).powi(2))
                }
                _ => {
                    return Err(Error::CheckpointMismatch(format!(
                        "theory checkpoint {n} (position {j}) not matched by run {}",
                        t.run_id
                    )))
                }
            }
        }
        let r = sq.len() as f64;
        let mean = sq.iter().sum::<f64>() / r;
        let var = sq.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1.0);
        let se = (var / r).sqrt();
        let z = if se > 0.0 {
            (mean - value) / se
        } else if mean == value {
            0.0
        } else {
            f64::INFINITY.copysign(mean - value)
        };
        rows.push(OverlayRow { n, empirical: mean, theory: value, z });
    }
    Ok(rows)
}
