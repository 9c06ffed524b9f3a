//! Closed-form error curves, checked against exhaustive enumeration.

use bandwagon::theory::{
    affine_variance, brute_force_oracle, conditional_bias, efficiency_asymptotic_partial,
    efficiency_exact,
};
use bandwagon::{LambdaSchedule, TruePreference, WeightScheme};

fn main() -> bandwagon::Result<()> {
    let p = TruePreference::new(0.4)?;
    let strong = LambdaSchedule::strong();

    println!("{:>8} {:>14} {:>14} {:>14} {:>14}", "n", "E(p̄-p)²", "partial sum", "Var affine", "Var weighted");
    for n in [2, 10, 100, 1_000, 10_000] {
        println!(
            "{n:>8} {:>14.6e} {:>14.6e} {:>14.6e} {:>14.6e}",
            efficiency_exact(p, &strong, n)?,
            efficiency_asymptotic_partial(p, &strong, n)?,
            affine_variance(p, &strong, &WeightScheme::Uniform, n)?,
            affine_variance(p, &strong, &WeightScheme::LambdaProportional, n)?,
        );
    }

    // an unlucky start persists: E[p̄_n - p | p̄_5 = 1]
    for n in [10, 100, 1_000] {
        println!("bias after 5 positive ratings, n={n}: {:.4}", conditional_bias(p, &strong, 1.0, 5, n)?);
    }

    let exact = brute_force_oracle(p, &strong, &WeightScheme::Uniform, 14)?;
    println!(
        "n=14 enumeration: E(p̄-p)² = {:.15}, closed form {:.15}",
        exact.sample_mean_sq_error,
        efficiency_exact(p, &strong, 14)?
    );
    Ok(())
}
