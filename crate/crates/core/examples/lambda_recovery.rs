//! Recover the herding curve from multi-bin data.
//!
//! `cargo run --release --example lambda_recovery -- [bins] [seed]`

use bandwagon::lambda_fit::{extrapolate, fit_lambda_mle, fit_lambda_two_stage, FitMode, FitOptions};
use bandwagon::{simulate_bin_dataset, LambdaSchedule, TruePreference};

fn main() -> bandwagon::Result<()> {
    let mut args = std::env::args().skip(1);
    let bins: usize = args.next().map_or(Ok(20), |s| s.parse()).expect("bins");
    let seed: u64 = args.next().map_or(Ok(42), |s| s.parse()).expect("seed");
    let p = [TruePreference::new(0.4)?];
    let data = simulate_bin_dataset(1, bins, 100, &p, &LambdaSchedule::strong(), seed)?;

    println!("truth: λ_i = 0.1 + 0.9 · 0.95^(i-1), {bins} bins of 100 ratings");
    for mode in [FitMode::Joint, FitMode::Plugin] {
        let fit = fit_lambda_mle(&data, mode)?;
        println!(
            "{mode:?}: a = {:.3}, b = {:.3}, p̂ = {:.3}, log L = {:.2}, rounds {}",
            fit.curve.a(),
            fit.curve.b(),
            fit.preference_estimates[0],
            fit.log_likelihood,
            fit.rounds
        );
        println!("  extrapolated λ̂_500 = {:.3}", extrapolate(&fit.curve, 500)?);
    }
    let two = fit_lambda_two_stage(&data, FitMode::Plugin, &FitOptions::default())?;
    let free = two.per_step_estimates.unwrap();
    println!("two-stage: a = {:.3}, b = {:.3}", two.curve.a(), two.curve.b());
    println!("  free λ̂_2..λ̂_6: {:.2?}", &free[1..6]);
    Ok(())
}
