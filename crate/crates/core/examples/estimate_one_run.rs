//! All four estimators on the same run, with and without clipping.

use bandwagon::estimators::{affine_mean, clip_schedule, mle_newton, sample_mean};
use bandwagon::{simulate_run, ClipConfig, LambdaSchedule, NewtonConfig, TruePreference, WeightScheme};

fn main() -> bandwagon::Result<()> {
    let p = TruePreference::new(0.4)?;
    let schedule = LambdaSchedule::strong();
    let run = simulate_run(p, &schedule, 5_000, 7)?;
    let clipped = clip_schedule(&schedule, ClipConfig::new(0.3)?);

    println!("true p = 0.4, n = {}", run.len());
    println!("sample mean      {:.4}", sample_mean(&run.ratings)?);
    for (label, lambda_hat) in [("true λ", &schedule), ("clipped τ=0.3", &clipped)] {
        let uniform = affine_mean(&run.ratings, lambda_hat, &WeightScheme::Uniform)?;
        let weighted = affine_mean(&run.ratings, lambda_hat, &WeightScheme::LambdaProportional)?;
        let mle = mle_newton(&run.ratings, lambda_hat, &NewtonConfig::default())?;
        println!("[{label}]");
        println!("  affine uniform  {:.4}", uniform.last().unwrap());
        println!("  affine weighted {:.4}", weighted.last().unwrap());
        println!("  mle             {:.4} ({:?}, {} iterations)", mle.value, mle.status, mle.iterations);
    }
    Ok(())
}
