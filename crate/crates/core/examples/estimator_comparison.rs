//! 90% bands of the four estimators under strong herding, with the true and
//! with a misestimated λ schedule.

use bandwagon::experiments::{run_figure4, Figure4Config};
use bandwagon::{EstimatorKind, LambdaSchedule, TruePreference};

fn main() -> bandwagon::Result<()> {
    let runs: usize = std::env::args().nth(1).map_or(Ok(500), |s| s.parse()).expect("runs");
    let p = TruePreference::new(0.4)?;
    let base = Figure4Config { runs, ..Figure4Config::new(p, LambdaSchedule::strong()) };
    let misestimated = Figure4Config { lambda_hat: Some(Figure4Config::misestimated_lambda()), ..base.clone() };

    for (label, config) in [("true λ", base), ("misestimated λ", misestimated)] {
        let summaries = run_figure4(&config)?;
        println!("[{label}] band width q95 - q05");
        print!("{:>7}", "n");
        for s in &summaries {
            print!("{:>16}", s.estimator.name());
        }
        println!();
        for n in [10, 100, 1_000, 3_981, 10_000] {
            print!("{n:>7}");
            for s in &summaries {
                print!("{:>16.3}", s.at(n).unwrap().band_width());
            }
            println!();
        }
        let mle = summaries.iter().find(|s| s.estimator == EstimatorKind::Mle).unwrap();
        println!("mle mean at 10^4: {:.4}\n", mle.at(10_000).unwrap().mean);
    }
    Ok(())
}
