//! Seeded generation of rating runs, ensembles and multi-bin datasets.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimators::{clip_schedule, ClipConfig, EstimatorKind, NewtonConfig, StreamingEstimators};
use crate::model::{ProcessState, RatingSequence, TruePreference};
use crate::schedule::LambdaSchedule;
use crate::seed::{derive_seed, rng_from_seed, SimRng};

/// Checkpoints `round(10^(k/20))`, deduplicated, ending exactly at `max`.
pub fn geometric_checkpoints(max: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for k in 0.. {
        let n = 10f64.powf(k as f64 / 20.0).round() as usize;
        if n > max {
            break;
        }
        if out.last() != Some(&n) {
            out.push(n);
        }
    }
    if out.last() != Some(&max) {
        out.push(max);
    }
    out
}

/// Draws one rating given its probability.
#[inline]
fn draw(rng: &mut SimRng, probability: f64) -> bool {
    rng.random::<f64>() < probability
}

/// Runs the process for `lambdas.len()` steps, calling `visit` after each
/// rating with the 1-based index and the rating.
fn drive(p: f64, lambdas: &[f64], seed: u64, mut visit: impl FnMut(usize, bool)) {
    let mut rng = rng_from_seed(seed);
    let mut state = ProcessState::new();
    for (idx, &l) in lambdas.iter().enumerate() {
        let q = l * p + (1.0 - l) * state.mean();
        let r = draw(&mut rng, q);
        state.push(r);
        visit(idx + 1, r);
    }
}

/// A single run of `n_samples` ratings.
pub fn simulate_run(
    p: TruePreference,
    schedule: &LambdaSchedule,
    n_samples: usize,
    seed: u64,
) -> Result<RatingSequence> {
    if n_samples == 0 {
        return Err(invalid("n_samples must be >= 1"));
    }
    let lambdas = schedule.values(n_samples)?;
    let mut ratings = Vec::with_capacity(n_samples);
    drive(p.value(), &lambdas, seed, |_, r| ratings.push(r));
    Ok(RatingSequence { ratings, schedule: schedule.clone(), seed })
}

/// Ensemble definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub p: TruePreference,
    pub schedule: LambdaSchedule,
    pub runs: usize,
    pub samples_per_run: usize,
    pub base_seed: u64,
    /// Strictly increasing, last one at most `samples_per_run`.
    pub checkpoints: Vec<usize>,
}

impl EnsembleConfig {
    /// Uses the geometric checkpoint grid.
    pub fn new(
        p: TruePreference,
        schedule: LambdaSchedule,
        runs: usize,
        samples_per_run: usize,
        base_seed: u64,
    ) -> Self {
        Self {
            p,
            schedule,
            runs,
            samples_per_run,
            base_seed,
            checkpoints: geometric_checkpoints(samples_per_run),
        }
    }

    pub fn with_checkpoints(mut self, checkpoints: Vec<usize>) -> Self {
        self.checkpoints = checkpoints;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 || self.samples_per_run == 0 {
            return Err(invalid("runs and samples_per_run must be >= 1"));
        }
        if self.checkpoints.is_empty() {
            return Err(Error::Empty("checkpoints"));
        }
        if self.checkpoints[0] == 0 || self.checkpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("checkpoints must be >= 1 and strictly increasing"));
        }
        if *self.checkpoints.last().unwrap() > self.samples_per_run {
            return Err(invalid("last checkpoint exceeds samples_per_run"));
        }
        Ok(())
    }

    /// Seed for run `r`.
    pub fn run_seed(&self, run: usize) -> u64 {
        derive_seed(self.base_seed, &[run as u64])
    }
}

/// Which estimators to track and under which `λ̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationSetup {
    pub estimators: Vec<EstimatorKind>,
    /// `None` uses the true schedule.
    pub lambda_hat: Option<LambdaSchedule>,
    pub clip: Option<ClipConfig>,
    pub newton: NewtonConfig,
}

impl EstimationSetup {
    pub fn new(estimators: Vec<EstimatorKind>) -> Self {
        Self { estimators, lambda_hat: None, clip: None, newton: NewtonConfig::default() }
    }

    pub fn with_lambda_hat(mut self, lambda_hat: LambdaSchedule) -> Self {
        self.lambda_hat = Some(lambda_hat);
        self
    }

    pub fn with_clip(mut self, clip: ClipConfig) -> Self {
        self.clip = Some(clip);
        self
    }

    /// The `λ̂` schedule actually fed to the estimators, after clipping.
    pub fn effective_schedule(&self, truth: &LambdaSchedule) -> LambdaSchedule {
        let base = self.lambda_hat.as_ref().unwrap_or(truth);
        match self.clip {
            Some(clip) => clip_schedule(base, clip),
            None => base.clone(),
        }
    }
}

/// One estimator's values at the configured checkpoints for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateTrace {
    pub run_id: usize,
    pub estimator: EstimatorKind,
    pub points: Vec<(usize, f64)>,
}

impl EstimateTrace {
    pub fn value_at(&self, n: usize) -> Option<f64> {
        self.points.iter().find(|(c, _)| *c == n).map(|(_, v)| *v)
    }
}

/// Runs the whole ensemble. Output is ordered by run, then by the order of
/// `setup.estimators`; all estimators in a run see the same ratings.
pub fn simulate_ensemble(config: &EnsembleConfig, setup: &EstimationSetup) -> Result<Vec<EstimateTrace>> {
    config.validate()?;
    setup.newton.validate()?;
    if setup.estimators.is_empty() {
        return Err(Error::Empty("estimator set"));
    }
    let horizon = *config.checkpoints.last().unwrap();
    let lambdas = config.schedule.values(horizon)?;
    let lambda_hat = setup.effective_schedule(&config.schedule).values(horizon)?;
    let needs_inversion = setup.estimators.iter().any(|k| {
        matches!(k, EstimatorKind::AffineUniform | EstimatorKind::AffineWeighted)
    });
    if needs_inversion {
        if let Some(idx) = lambda_hat.iter().position(|&l| !(l > 0.0)) {
            return Err(Error::ZeroLambda(idx + 1));
        }
    }
    let with_mle = setup.estimators.contains(&EstimatorKind::Mle);
    let p = config.p.value();

    let per_run: Vec<Vec<EstimateTrace>> = (0..config.runs)
        .into_par_iter()
        .map(|run| {
            let mut stream = StreamingEstimators::new(&lambda_hat, with_mle, setup.newton);
            let mut traces: Vec<EstimateTrace> = setup
                .estimators
                .iter()
                .map(|&estimator| EstimateTrace {
                    run_id: run,
                    estimator,
                    points: Vec::with_capacity(config.checkpoints.len()),
                })
                .collect();
            let mut next = 0;
            drive(p, &lambdas, config.run_seed(run), |n, r| {
                stream.push(r);
                if config.checkpoints[next] == n {
                    for t in traces.iter_mut() {
                        t.points.push((n, stream.estimate(t.estimator)));
                    }
                    next = (next + 1).min(config.checkpoints.len() - 1);
                }
            });
            traces
        })
        .collect();
    Ok(per_run.into_iter().flatten().collect())
}

/// `items × bins` independent cells of `per_bin` ordered ratings.
#[derive(Debug, Clone, PartialEq)]
pub struct BinDataset {
    items: usize,
    bins: usize,
    per_bin: usize,
    ratings: Vec<bool>,
    true_preferences: Option<Vec<f64>>,
}

impl BinDataset {
    /// `ratings` is item-major, then bin, then arrival order.
    pub fn new(
        items: usize,
        bins: usize,
        per_bin: usize,
        ratings: Vec<bool>,
        true_preferences: Option<Vec<f64>>,
    ) -> Result<Self> {
        if items == 0 || bins == 0 || per_bin == 0 {
            return Err(invalid("items, bins and per_bin must be >= 1"));
        }
        if ratings.len() != items * bins * per_bin {
            return Err(invalid(format!(
                "expected {} ratings, got {}",
                items * bins * per_bin,
                ratings.len()
            )));
        }
        if let Some(p) = &true_preferences {
            if p.len() != items {
                return Err(invalid("one true preference per item required"));
            }
        }
        Ok(Self { items, bins, per_bin, ratings, true_preferences })
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn per_bin(&self) -> usize {
        self.per_bin
    }

    pub fn true_preferences(&self) -> Option<&[f64]> {
        self.true_preferences.as_deref()
    }

    pub fn cell(&self, item: usize, bin: usize) -> &[bool] {
        let start = (item * self.bins + bin) * self.per_bin;
        &self.ratings[start..start + self.per_bin]
    }

    /// `p̄^k = (1 / M n) Σ_m Σ_i r_kmi`.
    pub fn pooled_mean(&self, item: usize) -> f64 {
        let start = item * self.bins * self.per_bin;
        let slice = &self.ratings[start..start + self.bins * self.per_bin];
        slice.iter().filter(|&&r| r).count() as f64 / slice.len() as f64
    }

    /// Drops the simulation ground truth.
    pub fn without_truth(mut self) -> Self {
        self.true_preferences = None;
        self
    }
}

/// Seed of cell `(item, bin)`.
pub fn cell_seed(seed: u64, item: usize, bin: usize) -> u64 {
    derive_seed(seed, &[item as u64, bin as u64])
}

/// Simulates each cell independently with the item's preference.
pub fn simulate_bin_dataset(
    items: usize,
    bins: usize,
    per_bin: usize,
    preferences: &[TruePreference],
    schedule: &LambdaSchedule,
    seed: u64,
) -> Result<BinDataset> {
    if preferences.len() != items {
        return Err(invalid(format!("expected {items} preferences, got {}", preferences.len())));
    }
    if items == 0 || bins == 0 || per_bin == 0 {
        return Err(invalid("items, bins and per_bin must be >= 1"));
    }
    let lambdas = schedule.values(per_bin)?;
    let cells: Vec<Vec<bool>> = (0..items * bins)
        .into_par_iter()
        .map(|cell| {
            let (item, bin) = (cell / bins, cell % bins);
            let mut out = Vec::with_capacity(per_bin);
            drive(preferences[item].value(), &lambdas, cell_seed(seed, item, bin), |_, r| out.push(r));
            out
        })
        .collect();
    BinDataset::new(
        items,
        bins,
        per_bin,
        cells.concat(),
        Some(preferences.iter().map(|p| p.value()).collect()),
    )
}
