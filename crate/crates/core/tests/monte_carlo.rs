//! Ensemble behaviour of the process and the estimators against theory.

use bandwagon::estimators::{affine_terms, clip_schedule, ClipConfig, WeightScheme};
use bandwagon::experiments::{overlay_theory, run_figure4_traces, summarize, Figure4Config};
use bandwagon::seed::derive_seed;
use bandwagon::theory::{affine_variance, efficiency_curve};
use bandwagon::{
    simulate_ensemble, simulate_run, EnsembleConfig, EstimateTrace, EstimationSetup, EstimatorKind,
    LambdaSchedule, TruePreference,
};

fn p4() -> TruePreference {
    TruePreference::new(0.4).unwrap()
}

fn presets() -> [LambdaSchedule; 3] {
    [LambdaSchedule::no_bandwagon(), LambdaSchedule::weak(), LambdaSchedule::strong()]
}

/// Mean and standard error.
fn mean_se(values: &[f64]) -> (f64, f64) {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
    (mean, (var / r).sqrt())
}

/// Sample variance with its jackknife standard error.
fn variance_se(values: &[f64]) -> (f64, f64) {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    let dev: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
    let var = dev.iter().sum::<f64>() / (r - 1.0);
    let spread = dev.iter().map(|d| (d - var).powi(2)).sum::<f64>() / (r - 1.0);
    (var, (spread / r).sqrt())
}

fn column(traces: &[EstimateTrace], kind: EstimatorKind, j: usize) -> Vec<f64> {
    traces.iter().filter(|t| t.estimator == kind).map(|t| t.points[j].1).collect()
}

#[test]
fn individual_ratings_are_unbiased() {
    let runs = 10_000;
    for schedule in presets() {
        let mut sums = vec![Vec::with_capacity(runs); 100];
        for run in 0..runs {
            let seq = simulate_run(p4(), &schedule, 100, derive_seed(5, &[run as u64])).unwrap();
            for (i, &r) in seq.ratings.iter().enumerate() {
                sums[i].push(if r { 1.0 } else { 0.0 });
            }
        }
        for (i, col) in sums.iter().enumerate() {
            let (m, se) = mean_se(col);
            assert!((m - 0.4).abs() <= 4.0 * se, "{schedule} r_{}: {m}", i + 1);
        }
    }
}

#[test]
fn sample_mean_error_matches_closed_form_under_strong_herding() {
    let schedule = LambdaSchedule::strong();
    let checkpoints: Vec<usize> = (1..=50).collect();
    let config = EnsembleConfig::new(p4(), schedule.clone(), 100_000, 50, 11).with_checkpoints(checkpoints.clone());
    let traces = simulate_ensemble(&config, &EstimationSetup::new(vec![EstimatorKind::SampleMean])).unwrap();
    let curve = efficiency_curve(p4(), &schedule, 50).unwrap();
    let theory: Vec<(usize, f64)> = checkpoints.iter().map(|&n| (n, curve[n - 1])).collect();
    for row in overlay_theory(&traces, EstimatorKind::SampleMean, p4(), &theory).unwrap() {
        assert!(row.z.abs() <= 4.0, "{row:?}");
    }
}

#[test]
fn affine_variance_matches_closed_form() {
    let schedule = LambdaSchedule::strong();
    let checkpoints = vec![1, 2, 5, 10, 20, 35, 50];
    let config =
        EnsembleConfig::new(p4(), schedule.clone(), 100_000, 50, 12).with_checkpoints(checkpoints.clone());
    let setup = EstimationSetup::new(vec![EstimatorKind::AffineUniform, EstimatorKind::AffineWeighted]);
    let traces = simulate_ensemble(&config, &setup).unwrap();
    for (kind, weights) in [
        (EstimatorKind::AffineUniform, WeightScheme::Uniform),
        (EstimatorKind::AffineWeighted, WeightScheme::LambdaProportional),
    ] {
        for (j, &n) in checkpoints.iter().enumerate() {
            let (var, se) = variance_se(&column(&traces, kind, j));
            let theory = affine_variance(p4(), &schedule, &weights, n).unwrap();
            assert!((var - theory).abs() <= 4.0 * se, "{kind} n={n}: {var} vs {theory} (se {se})");
        }
    }
}

#[test]
fn affine_terms_are_uncorrelated() {
    let runs = 1_000_000;
    let schedule = LambdaSchedule::strong();
    let pairs = [(1usize, 4usize), (2, 3), (3, 8), (5, 6)];
    let mut xs = vec![Vec::with_capacity(runs); pairs.len()];
    let mut ys = vec![Vec::with_capacity(runs); pairs.len()];
    for run in 0..runs {
        let seq = simulate_run(p4(), &schedule, 8, derive_seed(13, &[run as u64])).unwrap();
        let terms = affine_terms(&seq.ratings, &schedule).unwrap();
        for (k, &(i, j)) in pairs.iter().enumerate() {
            xs[k].push(terms[i - 1]);
            ys[k].push(terms[j - 1]);
        }
    }
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let (mx, _) = mean_se(&xs[k]);
        let (my, _) = mean_se(&ys[k]);
        let products: Vec<f64> = xs[k].iter().zip(&ys[k]).map(|(x, y)| (x - mx) * (y - my)).collect();
        let (cov, se) = mean_se(&products);
        assert!(cov.abs() <= 4.0 * se, "cov(r̂_{i}, r̂_{j}) = {cov} (se {se})");
    }
}

#[test]
fn clipping_keeps_mean_but_breaks_conditional_unbiasedness() {
    let truth = LambdaSchedule::strong();
    let clipped = clip_schedule(&truth, ClipConfig::new(0.5).unwrap());
    let n = 25;
    let runs = 100_000;
    let (mut plain_all, mut clipped_all) = (Vec::new(), Vec::new());
    let (mut plain_high, mut clipped_high) = (Vec::new(), Vec::new());
    for run in 0..runs {
        let seq = simulate_run(p4(), &truth, n, derive_seed(17, &[run as u64])).unwrap();
        let plain = affine_terms(&seq.ratings, &truth).unwrap();
        let clip = affine_terms(&seq.ratings, &clipped).unwrap();
        plain_all.push(plain[n - 1]);
        clipped_all.push(clip[n - 1]);
        let prev = seq.ratings[..n - 1].iter().filter(|&&r| r).count() as f64 / (n - 1) as f64;
        if prev > 0.6 {
            plain_high.push(plain[n - 1]);
            clipped_high.push(clip[n - 1]);
        }
    }
    for values in [&plain_all, &clipped_all, &plain_high] {
        let (m, se) = mean_se(values);
        assert!((m - 0.4).abs() <= 4.0 * se, "{m} (se {se})");
    }
    // λ_25 ≈ 0.37 is clipped to 0.5, so after a high prefix r̂ is pulled upwards
    let (m, se) = mean_se(&clipped_high);
    assert!(m - 0.4 > 4.0 * se, "{m} (se {se})");
}

#[test]
fn weak_herding_estimators_are_all_centred() {
    let config = Figure4Config { runs: 1_000, ..Figure4Config::new(p4(), LambdaSchedule::weak()) };
    let (traces, summaries) = run_figure4_traces(&config).unwrap();
    let checkpoints = config.ensemble().checkpoints;
    for kind in EstimatorKind::ALL {
        for (j, &n) in checkpoints.iter().enumerate() {
            let (m, se) = mean_se(&column(&traces, kind, j));
            assert!((m - 0.4).abs() <= 4.0 * se + 1e-12, "{kind} n={n}: {m} (se {se})");
        }
    }
    // no estimator gives a clear improvement: final widths within 25% of the sample mean's
    let width = |k: EstimatorKind| summaries.iter().find(|s| s.estimator == k).unwrap().points.last().unwrap().band_width();
    let base = width(EstimatorKind::SampleMean);
    for kind in EstimatorKind::ALL {
        let ratio = width(kind) / base;
        assert!((0.75..=1.25).contains(&ratio), "{kind}: {ratio}");
    }
}

#[test]
fn strong_herding_band_structure_with_true_lambda() {
    let config = Figure4Config { runs: 1_000, ..Figure4Config::new(p4(), LambdaSchedule::strong()) };
    let (_, summaries) = run_figure4_traces(&config).unwrap();
    let get = |k: EstimatorKind| summaries.iter().find(|s| s.estimator == k).unwrap();
    let sm = get(EstimatorKind::SampleMean);
    for kind in [EstimatorKind::AffineUniform, EstimatorKind::AffineWeighted] {
        let s = get(kind);
        let wider_early = s
            .points
            .iter()
            .zip(&sm.points)
            .any(|(a, b)| (10..=1_000).contains(&a.n) && a.band_width() > b.band_width());
        assert!(wider_early, "{kind} never wider than the sample mean in [10, 1000]");
        // from some point between 10^3 and 3·10^3 on, the band stays narrower
        let first_narrow = s
            .points
            .iter()
            .zip(&sm.points)
            .rposition(|(a, b)| a.band_width() >= b.band_width())
            .map(|j| s.points[j + 1].n)
            .unwrap();
        assert!((1_000..=3_000).contains(&first_narrow), "{kind}: {first_narrow}");
        for pt in s.points.iter().chain(&get(EstimatorKind::Mle).points) {
            assert!(pt.q05 <= 0.4 && 0.4 <= pt.q95);
        }
    }
}

#[test]
fn misestimated_lambda_gives_moderate_gains() {
    let config = Figure4Config {
        runs: 1_000,
        lambda_hat: Some(Figure4Config::misestimated_lambda()),
        ..Figure4Config::new(p4(), LambdaSchedule::strong())
    };
    let (traces, summaries) = run_figure4_traces(&config).unwrap();
    let checkpoints = config.ensemble().checkpoints;
    for kind in EstimatorKind::ALL {
        for j in 0..checkpoints.len() {
            let (m, se) = mean_se(&column(&traces, kind, j));
            assert!((m - 0.4).abs() <= 4.0 * se + 1e-12, "{kind} n={}: {m}", checkpoints[j]);
        }
    }
    let base = summaries[0].at(10_000).unwrap().band_width();
    for s in &summaries[1..] {
        let ratio = s.at(10_000).unwrap().band_width() / base;
        assert!(ratio > 0.5 && ratio <= 1.0, "{}: {ratio}", s.estimator);
    }
    assert_eq!(summarize(&traces).unwrap(), summaries);
}
