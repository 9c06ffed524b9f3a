//! One herded rating run: the running mean drifts with early ratings.
//!
//! `cargo run --example simulate_ratings -- [schedule] [n] [seed]`

use bandwagon::{simulate_run, LambdaSchedule, TruePreference};

fn main() -> bandwagon::Result<()> {
    let mut args = std::env::args().skip(1);
    let schedule: LambdaSchedule = args.next().as_deref().unwrap_or("strong").parse()?;
    let n: usize = args.next().map_or(Ok(10_000), |s| s.parse()).expect("n must be an integer");
    let seed: u64 = args.next().map_or(Ok(42), |s| s.parse()).expect("seed must be an integer");

    let p = TruePreference::new(0.4)?;
    let run = simulate_run(p, &schedule, n, seed)?;
    println!("schedule {schedule}, p = {}, seed {seed}", p.value());
    println!("{:>8} {:>8} {:>10}", "n", "lambda", "mean");
    let mut next = 1;
    for (state, i) in run.prefix_states().skip(1).zip(1..) {
        if i == next || i == n {
            println!("{:>8} {:>8.4} {:>10.4}", i, schedule.lambda_at(i)?, state.mean());
            next *= 10;
        }
    }
    Ok(())
}
