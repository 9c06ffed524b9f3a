//! Ratings needed before the weighted affine mean is within ε of p with
//! probability 1 - α.

use bandwagon::theory::{azuma_min_samples, ConvergenceQuery};
use bandwagon::{LambdaSchedule, WeightScheme};

fn main() -> bandwagon::Result<()> {
    let horizon = 10_000_000;
    for schedule in ["none", "weak", "strong", "power:0.25", "geom:0.5"] {
        let s: LambdaSchedule = schedule.parse()?;
        for (label, weights) in [("ω=1", WeightScheme::Uniform), ("ω=λ", WeightScheme::LambdaProportional)] {
            for eps in [0.05, 0.01] {
                let q = ConvergenceQuery::new(eps, 0.1, weights.clone(), s.clone())?;
                let n = azuma_min_samples(&q, horizon)?;
                let shown = n.map_or(format!("> {horizon}"), |n| n.to_string());
                println!("{schedule:>10} {label} ε={eps}: {shown}");
            }
        }
    }
    Ok(())
}
