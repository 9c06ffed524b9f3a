//! How many ratings until 90% of runs sit within ±0.05 and ±0.01 of p?
//!
//! `cargo run --release --example herding_convergence -- [runs] [samples]`

use bandwagon::experiments::{run_figure3, Figure3Config};
use bandwagon::{LambdaSchedule, TruePreference};

fn main() -> bandwagon::Result<()> {
    let mut args = std::env::args().skip(1);
    let runs: usize = args.next().map_or(Ok(1_000), |s| s.parse()).expect("runs");
    let samples: usize = args.next().map_or(Ok(100_000), |s| s.parse()).expect("samples");
    let p = TruePreference::new(0.4)?;

    for (name, schedule) in [
        ("none", LambdaSchedule::no_bandwagon()),
        ("weak", LambdaSchedule::weak()),
        ("strong", LambdaSchedule::strong()),
    ] {
        let config = Figure3Config { runs, samples, ..Figure3Config::new(p, schedule, false) };
        let out = run_figure3(&config)?;
        let last = out.summary.points.last().unwrap();
        print!("{name:>7}: band at n={} is [{:.3}, {:.3}]", last.n, last.q05, last.q95);
        for t in &out.thresholds {
            match t.n_cross {
                Some(n) => print!("; ±{} from n={n}", t.threshold),
                None => print!("; ±{} never", t.threshold),
            }
        }
        println!();
    }
    Ok(())
}
