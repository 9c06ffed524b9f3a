//! Recovery of a λ schedule from multi-bin rating data.
//!
//! Every `(item, bin)` cell is an independent run of the herding process, so
//! the prefix means differ between bins of the same item and the mixing
//! weights become identifiable. The fit maximises the pooled log-likelihood
//! over the curve `λ_i = a + (1 - a) b^(i-1)` and the item preferences.
//!
//! Ratings are compressed into sufficient statistics: all terms sharing the
//! rating index and the number of earlier positives contribute the same
//! `ln q` or `ln(1 - q)`, so only their counts are kept.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimators::{maximize, FeasibleInterval, LikelihoodTerm, NewtonConfig};
use crate::schedule::LambdaSchedule;
use crate::simulator::BinDataset;

/// Fitted curve `λ_i = a + (1 - a) b^(i-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveFit {
    a: f64,
    b: f64,
}

impl CurveFit {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) {
            return Err(invalid(format!("curve floor must lie in [0, 1], got {a}")));
        }
        if !(b > 0.0 && b < 1.0) {
            return Err(invalid(format!("curve decay must lie in (0, 1), got {b}")));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `λ̂_1..λ̂_n`.
    pub fn values(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|i| self.raw(i)).collect()
    }

    fn raw(&self, i: usize) -> f64 {
        self.a + (1.0 - self.a) * self.b.powi((i - 1) as i32)
    }

    /// The curve as a schedule usable by the estimators.
    pub fn schedule(&self) -> LambdaSchedule {
        LambdaSchedule::geometric_affine(self.a, self.b)
            .expect("curve parameters are validated on construction")
    }
}

/// `λ̂_i` for any `i ≥ 1`, including indices past the fitted data.
pub fn extrapolate(curve: &CurveFit, i: usize) -> Result<f64> {
    if i == 0 {
        return Err(invalid("schedule indices start at 1"));
    }
    Ok(curve.raw(i))
}

/// How item preferences enter the likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMode {
    /// Alternate between the curve and per-item Newton steps on `p^k`.
    Joint,
    /// Fix `p^k` at the pooled mean of the item's ratings.
    Plugin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub a_range: (f64, f64),
    pub b_range: (f64, f64),
    pub grid_points: usize,
    pub max_rounds: usize,
    /// Outer loop stops once the likelihood gains less than this.
    pub tolerance: f64,
    pub newton: NewtonConfig,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            a_range: (0.0, 1.0),
            b_range: (0.5, 0.999),
            grid_points: 41,
            max_rounds: 50,
            tolerance: 1e-9,
            newton: NewtonConfig::default(),
        }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        let (a0, a1) = self.a_range;
        let (b0, b1) = self.b_range;
        if !(0.0 <= a0 && a0 < a1 && a1 <= 1.0) {
            return Err(invalid(format!("bad floor range ({a0}, {a1})")));
        }
        if !(0.0 < b0 && b0 < b1 && b1 < 1.0) {
            return Err(invalid(format!("bad decay range ({b0}, {b1})")));
        }
        if self.grid_points < 2 || self.max_rounds == 0 || !(self.tolerance > 0.0) {
            return Err(invalid("grid needs >= 2 points, >= 1 round and a positive tolerance"));
        }
        self.newton.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaFitReport {
    pub mode: FitMode,
    /// Unconstrained per-index estimates, filled by [`fit_lambda_two_stage`].
    pub per_step_estimates: Option<Vec<f64>>,
    pub curve: CurveFit,
    /// Fitted `p̂^k` (joint) or pooled means `p̄^k` (plugin).
    pub preference_estimates: Vec<f64>,
    pub log_likelihood: f64,
    /// Every cell is constant, so the data carry no herding signal; the
    /// curve is the no-herding boundary `a = 1`.
    pub degenerate: bool,
    pub rounds: usize,
}

/// Ratings at one index with a common number of earlier positives.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Group {
    index: usize,
    prev_mean: f64,
    ones: f64,
    zeros: f64,
}

/// Sufficient statistics of a [`BinDataset`].
#[derive(Debug, Clone)]
struct Compressed {
    per_bin: usize,
    items: Vec<Vec<Group>>,
    pooled: Vec<f64>,
    degenerate: bool,
}

impl Compressed {
    fn new(data: &BinDataset) -> Self {
        let mut items = Vec::with_capacity(data.items());
        let mut degenerate = true;
        for k in 0..data.items() {
            let mut counts: BTreeMap<(usize, usize), (u64, u64)> = BTreeMap::new();
            for m in 0..data.bins() {
                let cell = data.cell(k, m);
                if cell.iter().any(|&r| r != cell[0]) {
                    degenerate = false;
                }
                let mut prev = 0usize;
                for (idx, &r) in cell.iter().enumerate() {
                    let entry = counts.entry((idx + 1, prev)).or_default();
                    if r {
                        entry.0 += 1;
                        prev += 1;
                    } else {
                        entry.1 += 1;
                    }
                }
            }
            let groups = counts
                .into_iter()
                .map(|((index, prev), (ones, zeros))| Group {
                    index,
                    prev_mean: if index == 1 { 0.0 } else { prev as f64 / (index - 1) as f64 },
                    ones: ones as f64,
                    zeros: zeros as f64,
                })
                .collect();
            items.push(groups);
        }
        let pooled = (0..data.items()).map(|k| data.pooled_mean(k)).collect();
        Self { per_bin: data.per_bin(), items, pooled, degenerate }
    }

    fn item_log_likelihood(groups: &[Group], lambdas: &[f64], p: f64) -> f64 {
        let mut l = 0.0;
        for g in groups {
            let lam = lambdas[g.index - 1];
            let q = lam * p + (1.0 - lam) * g.prev_mean;
            if g.ones > 0.0 {
                l += g.ones * q.ln();
            }
            if g.zeros > 0.0 {
                l += g.zeros * (1.0 - q).ln();
            }
        }
        l
    }

    fn log_likelihood(&self, lambdas: &[f64], prefs: &[f64]) -> f64 {
        self.items
            .iter()
            .zip(prefs)
            .map(|(groups, &p)| Self::item_log_likelihood(groups, lambdas, p))
            .sum()
    }

    fn curve_log_likelihood(&self, a: f64, b: f64, prefs: &[f64]) -> f64 {
        let curve = CurveFit { a, b };
        let l = self.log_likelihood(&curve.values(self.per_bin), prefs);
        if l.is_nan() {
            f64::NEG_INFINITY
        } else {
            l
        }
    }

    /// Newton step on each item's concave slice in `p`.
    fn fit_preferences(&self, lambdas: &[f64], init: &[f64], newton: &NewtonConfig) -> Vec<f64> {
        self.items
            .iter()
            .zip(init)
            .map(|(groups, &start)| {
                let terms: Vec<LikelihoodTerm> = groups
                    .iter()
                    .map(|g| {
                        let lam = lambdas[g.index - 1];
                        LikelihoodTerm {
                            slope: lam,
                            intercept: (1.0 - lam) * g.prev_mean,
                            ones: g.ones,
                            zeros: g.zeros,
                        }
                    })
                    .collect();
                maximize(&terms, FeasibleInterval::new(newton.boundary_margin), start, newton).value
            })
            .collect()
    }
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
/// Returns the best point seen, never worse than `fallback`.
fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, fallback: (f64, f64)) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut lo, mut hi) = (lo, hi);
    let mut best = fallback;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v > best.1 {
            best = (x, v);
        }
    }
    while hi - lo > 1e-10 {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
            if f1 > best.1 {
                best = (x1, f1);
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
            if f2 > best.1 {
                best = (x2, f2);
            }
        }
    }
    for x in [lo, hi] {
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

fn linspace(range: (f64, f64), points: usize) -> Vec<f64> {
    let step = (range.1 - range.0) / (points - 1) as f64;
    (0..points).map(|j| if j + 1 == points { range.1 } else { range.0 + j as f64 * step }).collect()
}

/// Grid search over `(a, b)`, then coordinate-wise golden-section refinement
/// within one grid step of the best node. Ties go to the larger `a`.
fn fit_curve(data: &Compressed, prefs: &[f64], options: &FitOptions) -> (CurveFit, f64) {
    let a_grid = linspace(options.a_range, options.grid_points);
    let b_grid = linspace(options.b_range, options.grid_points);
    let nodes: Vec<(f64, f64)> =
        a_grid.iter().flat_map(|&a| b_grid.iter().map(move |&b| (a, b))).collect();
    let values: Vec<f64> =
        nodes.par_iter().map(|&(a, b)| data.curve_log_likelihood(a, b, prefs)).collect();
    let mut best = (nodes[0], values[0]);
    for (&node, &v) in nodes.iter().zip(&values).skip(1) {
        if v > best.1 || (v == best.1 && node.0 > best.0 .0) {
            best = (node, v);
        }
    }
    let ((mut a, mut b), mut value) = best;
    let ha = (options.a_range.1 - options.a_range.0) / (options.grid_points - 1) as f64;
    let hb = (options.b_range.1 - options.b_range.0) / (options.grid_points - 1) as f64;
    let (a_lo, a_hi) = ((a - ha).max(options.a_range.0), (a + ha).min(options.a_range.1));
    let (b_lo, b_hi) = ((b - hb).max(options.b_range.0), (b + hb).min(options.b_range.1));
    for _ in 0..50 {
        let before = (a, b, value);
        (a, value) = golden_max(|x| data.curve_log_likelihood(x, b, prefs), a_lo, a_hi, (a, value));
        (b, value) = golden_max(|y| data.curve_log_likelihood(a, y, prefs), b_lo, b_hi, (b, value));
        if value - before.2 < 1e-12 && (a - before.0).abs() < 1e-9 && (b - before.1).abs() < 1e-9 {
            break;
        }
    }
    (CurveFit { a, b }, value)
}

fn check_data(data: &BinDataset) -> Result<()> {
    if data.per_bin() < 2 {
        return Err(invalid("λ fitting needs at least two ratings per bin"));
    }
    Ok(())
}

fn clamp_prefs(prefs: &[f64], newton: &NewtonConfig) -> Vec<f64> {
    let m = newton.boundary_margin;
    prefs.iter().map(|p| p.clamp(m, 1.0 - m)).collect()
}

/// Maximum-likelihood fit of the λ curve with default options.
pub fn fit_lambda_mle(data: &BinDataset, mode: FitMode) -> Result<LambdaFitReport> {
    fit_lambda_mle_with(data, mode, &FitOptions::default())
}

pub fn fit_lambda_mle_with(
    data: &BinDataset,
    mode: FitMode,
    options: &FitOptions,
) -> Result<LambdaFitReport> {
    options.validate()?;
    check_data(data)?;
    let stats = Compressed::new(data);
    let mut prefs = clamp_prefs(&stats.pooled, &options.newton);

    if stats.degenerate {
        let curve = CurveFit { a: options.a_range.1, b: options.b_range.1 };
        if mode == FitMode::Joint {
            prefs = stats.fit_preferences(&curve.values(stats.per_bin), &prefs, &options.newton);
        }
        let log_likelihood = stats.log_likelihood(&curve.values(stats.per_bin), &prefs);
        return Ok(LambdaFitReport {
            mode,
            per_step_estimates: None,
            curve,
            preference_estimates: prefs,
            log_likelihood,
            degenerate: true,
            rounds: 0,
        });
    }

    let (mut curve, mut value) = fit_curve(&stats, &prefs, options);
    let mut rounds = 1;
    if mode == FitMode::Joint {
        while rounds < options.max_rounds {
            rounds += 1;
            prefs = stats.fit_preferences(&curve.values(stats.per_bin), &prefs, &options.newton);
            let (next_curve, next_value) = fit_curve(&stats, &prefs, options);
            let gain = next_value - value;
            if next_value >= value {
                curve = next_curve;
                value = next_value;
            }
            if gain < options.tolerance {
                break;
            }
        }
        prefs = stats.fit_preferences(&curve.values(stats.per_bin), &prefs, &options.newton);
        value = value.max(stats.log_likelihood(&curve.values(stats.per_bin), &prefs));
    }
    if !value.is_finite() {
        return Err(Error::MalformedData("log-likelihood is not finite at the fitted curve".into()));
    }
    Ok(LambdaFitReport {
        mode,
        per_step_estimates: None,
        curve,
        preference_estimates: prefs,
        log_likelihood: value,
        degenerate: false,
        rounds,
    })
}

/// Diagnostic two-stage fit: each `λ_i` (`i ≥ 2`) maximises its own slice of
/// the likelihood, then the curve is fitted to those values by least squares.
///
/// Preferences come from the pooled means (plugin) or from the joint fit.
pub fn fit_lambda_two_stage(
    data: &BinDataset,
    mode: FitMode,
    options: &FitOptions,
) -> Result<LambdaFitReport> {
    options.validate()?;
    check_data(data)?;
    let stats = Compressed::new(data);
    let prefs = match mode {
        FitMode::Plugin => clamp_prefs(&stats.pooled, &options.newton),
        FitMode::Joint => fit_lambda_mle_with(data, FitMode::Joint, options)?.preference_estimates,
    };
    let n = stats.per_bin;
    let mut per_step = vec![1.0; n];
    for (i, slot) in per_step.iter_mut().enumerate().skip(1) {
        let index = i + 1;
        let slice = |lam: f64| -> f64 {
            let mut l = 0.0;
            for (groups, &p) in stats.items.iter().zip(&prefs) {
                for g in groups.iter().filter(|g| g.index == index) {
                    let q = lam * p + (1.0 - lam) * g.prev_mean;
                    if g.ones > 0.0 {
                        l += g.ones * q.ln();
                    }
                    if g.zeros > 0.0 {
                        l += g.zeros * (1.0 - q).ln();
                    }
                }
            }
            if l.is_nan() {
                f64::NEG_INFINITY
            } else {
                l
            }
        };
        let start = (1.0, slice(1.0));
        *slot = golden_max(slice, 0.0, 1.0, start).0;
    }
    let curve = least_squares_curve(&per_step, options);
    let log_likelihood = stats.log_likelihood(&curve.values(n), &prefs);
    Ok(LambdaFitReport {
        mode,
        per_step_estimates: Some(per_step),
        curve,
        preference_estimates: prefs,
        log_likelihood,
        degenerate: stats.degenerate,
        rounds: 1,
    })
}

/// For fixed `b` the best floor is a clamped linear regression; `b` itself
/// is found by grid plus golden section.
fn least_squares_curve(per_step: &[f64], options: &FitOptions) -> CurveFit {
    let best_a = |b: f64| -> (f64, f64) {
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (i, &y) in per_step.iter().enumerate().skip(1) {
            let d = b.powi(i as i32);
            sxy += (1.0 - d) * (y - d);
            sxx += (1.0 - d) * (1.0 - d);
        }
        let a = if sxx > 0.0 { (sxy / sxx).clamp(options.a_range.0, options.a_range.1) } else { 1.0 };
        let sse: f64 = per_step
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &y)| {
                let fit = a + (1.0 - a) * b.powi(i as i32);
                (y - fit).powi(2)
            })
            .sum();
        (a, -sse)
    };
    let grid = linspace(options.b_range, options.grid_points);
    let mut best = (grid[0], best_a(grid[0]).1);
    for &b in &grid[1..] {
        let v = best_a(b).1;
        if v > best.1 {
            best = (b, v);
        }
    }
    let h = (options.b_range.1 - options.b_range.0) / (options.grid_points - 1) as f64;
    let lo = (best.0 - h).max(options.b_range.0);
    let hi = (best.0 + h).min(options.b_range.1);
    let (b, _) = golden_max(|b| best_a(b).1, lo, hi, best);
    CurveFit { a: best_a(b).0, b }
}
