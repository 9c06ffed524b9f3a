//! Closed-form moments of the sample mean and the affine estimator.

use crate::error::{invalid, Error, Result};
use crate::estimators::WeightScheme;
use crate::model::TruePreference;
use crate::schedule::LambdaSchedule;

/// `E[(p̄_k - p)^2]` for `k = 1..=n`.
///
/// Uses the one-step recurrence
/// `V_k = (k-1)(k+1-2λ_k)/k² · V_{k-1} + p(1-p)/k²`, `V_1 = p(1-p)`,
/// which stays accurate over millions of steps where the product form
/// would accumulate rounding.
pub fn efficiency_curve(p: TruePreference, schedule: &LambdaSchedule, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(invalid("n must be >= 1"));
    }
    let lambdas = schedule.values(n)?;
    let var = p.bernoulli_variance();
    let mut out = Vec::with_capacity(n);
    let mut v = var;
    out.push(v);
    for k in 2..=n {
        let kf = k as f64;
        let lambda = lambdas[k - 1];
        v = (kf - 1.0) * (kf + 1.0 - 2.0 * lambda) / (kf * kf) * v + var / (kf * kf);
        out.push(v);
    }
    Ok(out)
}

/// `E[(p̄_n - p)^2]`, which equals `V[p̄_n]` since `p̄_n` is unbiased.
pub fn efficiency_exact(p: TruePreference, schedule: &LambdaSchedule, n: usize) -> Result<f64> {
    Ok(*efficiency_curve(p, schedule, n)?.last().unwrap())
}

/// Finite-`n` form of the limiting error
/// `p(1-p) Σ_{i=1}^{n-1} 1/(i(i+1)) Π_{j=i+1}^{n-1} (1 - 2λ_j/(j+1))`.
///
/// Evaluated by Horner accumulation `T_k = T_{k-1}·f_k + c_k` in linear
/// space, so sign changes in the factors are carried exactly.
pub fn efficiency_asymptotic_partial(
    p: TruePreference,
    schedule: &LambdaSchedule,
    n: usize,
) -> Result<f64> {
    if n < 2 {
        return Err(invalid("asymptotic form needs n >= 2"));
    }
    let lambdas = schedule.values(n - 1)?;
    let mut acc = 0.0;
    for i in 1..n {
        let fi = i as f64;
        if i > 1 {
            acc *= 1.0 - 2.0 * lambdas[i - 1] / (fi + 1.0);
        }
        acc += 1.0 / (fi * (fi + 1.0));
    }
    Ok(p.bernoulli_variance() * acc)
}

fn conditional_factor(lambdas: &[f64], from: usize, to: usize) -> f64 {
    (from + 1..=to).map(|i| 1.0 - lambdas[i - 1] / i as f64).product()
}

/// `E[p̄_n - p | p̄_m] = (p̄_m - p) Π_{i=m+1}^{n} (1 - λ_i / i)`, `m < n`.
pub fn conditional_bias(
    p: TruePreference,
    schedule: &LambdaSchedule,
    p_bar_m: f64,
    m: usize,
    n: usize,
) -> Result<f64> {
    if !(1 <= m && m < n) {
        return Err(invalid(format!("conditional bias needs 1 <= m < n, got m={m}, n={n}")));
    }
    let lambdas = schedule.values(n)?;
    Ok((p_bar_m - p.value()) * conditional_factor(&lambdas, m, n))
}

/// `E[r_n - p | p̄_m] = (1 - λ_n) E[p̄_{n-1} - p | p̄_m]`, `m < n`.
pub fn conditional_rating_bias(
    p: TruePreference,
    schedule: &LambdaSchedule,
    p_bar_m: f64,
    m: usize,
    n: usize,
) -> Result<f64> {
    if !(1 <= m && m < n) {
        return Err(invalid(format!("conditional bias needs 1 <= m < n, got m={m}, n={n}")));
    }
    let lambdas = schedule.values(n)?;
    let mean_gap = (p_bar_m - p.value()) * conditional_factor(&lambdas, m, n - 1);
    Ok((1.0 - lambdas[n - 1]) * mean_gap)
}

/// `V[p̂_n]` of the weighted affine mean with `λ̂ = λ`:
/// `(Σω)^-2 Σ (ω_i/λ_i)^2 (p(1-p) - (1-λ_i)^2 V[p̄_{i-1}])`.
pub fn affine_variance(
    p: TruePreference,
    schedule: &LambdaSchedule,
    weights: &WeightScheme,
    n: usize,
) -> Result<f64> {
    Ok(*affine_variance_curve(p, schedule, weights, n)?.last().unwrap())
}

/// [`affine_variance`] at every `k = 1..=n`.
pub fn affine_variance_curve(
    p: TruePreference,
    schedule: &LambdaSchedule,
    weights: &WeightScheme,
    n: usize,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(invalid("n must be >= 1"));
    }
    let lambdas = schedule.values(n)?;
    if let Some(idx) = lambdas.iter().position(|&l| !(l > 0.0)) {
        return Err(Error::ZeroLambda(idx + 1));
    }
    let sample_mean_var = efficiency_curve(p, schedule, n)?;
    let var = p.bernoulli_variance();
    let (mut weight_sum, mut acc) = (0.0, 0.0);
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let l = lambdas[i - 1];
        let w = weights.weight(i, l)?;
        let prev_var = if i == 1 { 0.0 } else { sample_mean_var[i - 2] };
        weight_sum += w;
        acc += (w / l).powi(2) * (var - (1.0 - l).powi(2) * prev_var);
        out.push(acc / (weight_sum * weight_sum));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p4() -> TruePreference {
        TruePreference::new(0.4).unwrap()
    }

    #[test]
    fn efficiency_examples() {
        let none = LambdaSchedule::no_bandwagon();
        assert_eq!(efficiency_exact(p4(), &LambdaSchedule::strong(), 1).unwrap(), 0.4 * 0.6);
        assert!((efficiency_exact(p4(), &none, 2).unwrap() - 0.12).abs() < 1e-15);
        let half = LambdaSchedule::explicit(vec![1.0, 0.5]).unwrap();
        assert!((efficiency_exact(p4(), &half, 2).unwrap() - 0.18).abs() < 1e-15);
        let full_herd = LambdaSchedule::constant(0.0).unwrap();
        for n in [1, 2, 10, 1000] {
            assert!((efficiency_exact(p4(), &full_herd, n).unwrap() - 0.24).abs() < 1e-12);
        }
        for n in [1, 5, 100, 10_000] {
            let v = efficiency_exact(p4(), &none, n).unwrap();
            assert!((v - 0.24 / n as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn efficiency_matches_product_form() {
        // the literal sum-of-products statement, evaluated directly
        let s = LambdaSchedule::weak();
        let p = p4();
        let n = 40;
        let l = s.values(n).unwrap();
        let nf = n as f64;
        let mut total = 1.0 / (nf * nf);
        for i in 1..n {
            let mut prod = 1.0;
            for j in i + 1..=n {
                let jf = j as f64;
                prod *= (jf - 1.0) * (jf + 1.0 - 2.0 * l[j - 1]) / (jf * jf);
            }
            total += prod / (i * i) as f64;
        }
        let expect = 0.24 * total;
        assert!((efficiency_exact(p, &s, n).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn efficiency_is_monotone_in_lambda() {
        let base = vec![1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3];
        let v0 = efficiency_exact(p4(), &LambdaSchedule::explicit(base.clone()).unwrap(), 8).unwrap();
        for j in 1..base.len() {
            let mut bumped = base.clone();
            bumped[j] -= 0.05;
            let v = efficiency_exact(p4(), &LambdaSchedule::explicit(bumped).unwrap(), 8).unwrap();
            assert!(v >= v0, "lowering lambda_{} reduced the error", j + 1);
        }
    }

    #[test]
    fn asymptotic_examples() {
        let none = LambdaSchedule::no_bandwagon();
        assert!(efficiency_asymptotic_partial(p4(), &none, 100_000).unwrap() < 1e-4);
        let herd = LambdaSchedule::constant(0.0).unwrap();
        let v = efficiency_asymptotic_partial(p4(), &herd, 10).unwrap();
        assert!((v - 0.24 * (1.0 - 1.0 / 10.0)).abs() < 1e-15);
        let v = efficiency_asymptotic_partial(p4(), &herd, 1_000_000).unwrap();
        assert!((v - 0.24).abs() < 1e-6);
        assert!(efficiency_asymptotic_partial(p4(), &none, 1).is_err());
    }

    #[test]
    fn asymptotic_agrees_with_exact_at_large_n() {
        let s = LambdaSchedule::strong();
        let exact = efficiency_exact(p4(), &s, 10_000).unwrap();
        let partial = efficiency_asymptotic_partial(p4(), &s, 10_000).unwrap();
        assert!(((exact - partial) / exact).abs() < 1e-3);
    }

    #[test]
    fn conditional_bias_examples() {
        let s = LambdaSchedule::explicit(vec![1.0, 0.5]).unwrap();
        assert!((conditional_bias(p4(), &s, 1.0, 1, 2).unwrap() - 0.45).abs() < 1e-15);
        let strong = LambdaSchedule::strong();
        assert_eq!(conditional_bias(p4(), &strong, 0.4, 3, 50).unwrap(), 0.0);
        let none = LambdaSchedule::no_bandwagon();
        let got = conditional_bias(p4(), &none, 0.9, 4, 20).unwrap();
        assert!((got - 0.5 * 4.0 / 20.0).abs() < 1e-15);
        assert!(conditional_bias(p4(), &none, 0.9, 4, 4).is_err());
        // E[r_2 | p̄_1 = 1] - p = 0.5 * 0.6
        assert!((conditional_rating_bias(p4(), &s, 1.0, 1, 2).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn affine_variance_examples() {
        let none = LambdaSchedule::no_bandwagon();
        for n in [1, 3, 100] {
            let v = affine_variance(p4(), &none, &WeightScheme::Uniform, n).unwrap();
            assert!((v - 0.24 / n as f64).abs() < 1e-15);
        }
        let s = LambdaSchedule::explicit(vec![1.0, 0.5]).unwrap();
        assert!((affine_variance(p4(), &s, &WeightScheme::Uniform, 2).unwrap() - 0.24).abs() < 1e-15);
        for w in [WeightScheme::Uniform, WeightScheme::LambdaProportional] {
            assert_eq!(affine_variance(p4(), &LambdaSchedule::strong(), &w, 1).unwrap(), 0.24);
        }
        let zero = LambdaSchedule::constant(0.0).unwrap();
        assert!(matches!(
            affine_variance(p4(), &zero, &WeightScheme::Uniform, 3),
            Err(Error::ZeroLambda(2))
        ));
    }
}
