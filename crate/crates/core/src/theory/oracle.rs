//! Exact moments by enumerating all `2^n` rating sequences.
//!
//! Each sequence's probability is the product of its per-step conditionals,
//! so nothing here relies on the closed forms it is used to check.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::WeightScheme;
use crate::model::TruePreference;
use crate::schedule::LambdaSchedule;

/// Largest `n` the enumeration accepts.
pub const MAX_ENUMERATION: usize = 16;

/// Conditional moments given `S_m = count` (equivalently `p̄_m = count/m`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalMoment {
    pub m: usize,
    pub count: usize,
    pub probability: f64,
    /// `E[p̄_n | p̄_m]`.
    pub sample_mean: f64,
    /// `E[r_n | p̄_m]`.
    pub last_rating: f64,
}

impl ConditionalMoment {
    pub fn p_bar_m(&self) -> f64 {
        self.count as f64 / self.m as f64
    }
}

/// Moments of the affine mean (with `λ̂ = λ`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMoments {
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactMoments {
    pub n: usize,
    /// Should be 1 up to rounding.
    pub total_probability: f64,
    /// `E[p̄_n]`.
    pub sample_mean: f64,
    /// `E[(p̄_n - p)²]`.
    pub sample_mean_sq_error: f64,
    /// `E[r_i]` for `i = 1..=n`.
    pub rating_means: Vec<f64>,
    /// `None` when some `λ_i = 0` makes the inversion undefined.
    pub affine: Option<AffineMoments>,
    /// Every `(m, count)` with `m < n` and positive probability.
    pub conditional: Vec<ConditionalMoment>,
}

impl ExactMoments {
    pub fn conditional_at(&self, m: usize, count: usize) -> Option<&ConditionalMoment> {
        self.conditional.iter().find(|c| c.m == m && c.count == count)
    }
}

#[derive(Clone)]
struct Accumulator {
    total: f64,
    mean: f64,
    sq_error: f64,
    affine_mean: f64,
    affine_sq_error: f64,
    ratings: Vec<f64>,
    // indexed by m * (n + 1) + count
    cond_prob: Vec<f64>,
    cond_mean: Vec<f64>,
    cond_rating: Vec<f64>,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        let cells = n * (n + 1);
        Self {
            total: 0.0,
            mean: 0.0,
            sq_error: 0.0,
            affine_mean: 0.0,
            affine_sq_error: 0.0,
            ratings: vec![0.0; n],
            cond_prob: vec![0.0; cells],
            cond_mean: vec![0.0; cells],
            cond_rating: vec![0.0; cells],
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        self.total += other.total;
        self.mean += other.mean;
        self.sq_error += other.sq_error;
        self.affine_mean += other.affine_mean;
        self.affine_sq_error += other.affine_sq_error;
        let pairs = [
            (&mut self.ratings, &other.ratings),
            (&mut self.cond_prob, &other.cond_prob),
            (&mut self.cond_mean, &other.cond_mean),
            (&mut self.cond_rating, &other.cond_rating),
        ];
        for (a, b) in pairs {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }
}

/// Enumerates every sequence of length `n` and returns exact expectations.
///
/// The affine moments use `λ̂ = λ` with the given weights. Work is split
/// into fixed chunks and summed in chunk order, so the result does not
/// depend on thread scheduling.
pub fn brute_force_oracle(
    p: TruePreference,
    schedule: &LambdaSchedule,
    weights: &WeightScheme,
    n: usize,
) -> Result<ExactMoments> {
    if n > MAX_ENUMERATION {
        return Err(Error::EnumerationTooLarge { n, max: MAX_ENUMERATION });
    }
    if n == 0 {
        return Err(Error::Empty("sequence length"));
    }
    let lambdas = schedule.values(n)?;
    let invertible = lambdas.iter().all(|&l| l > 0.0);
    let omega: Vec<f64> = if invertible {
        lambdas
            .iter()
            .enumerate()
            .map(|(i, &l)| weights.weight(i + 1, l))
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let omega_total: f64 = omega.iter().sum();
    let pv = p.value();

    let total_sequences = 1usize << n;
    let chunk_bits = n.min(8);
    let chunk_len = total_sequences >> chunk_bits;
    let width = n + 1;

    let partials: Vec<Accumulator> = (0..1usize << chunk_bits)
        .into_par_iter()
        .map(|chunk| {
            let mut acc = Accumulator::new(n);
            let mut counts = vec![0usize; n];
            for bits in chunk * chunk_len..(chunk + 1) * chunk_len {
                let mut prob = 1.0;
                let mut sum = 0usize;
                let mut affine = 0.0;
                for i in 0..n {
                    let prev_mean = if i == 0 { 0.0 } else { sum as f64 / i as f64 };
                    let l = lambdas[i];
                    let q = l * pv + (1.0 - l) * prev_mean;
                    let r = (bits >> i) & 1 == 1;
                    prob *= if r { q } else { 1.0 - q };
                    if invertible {
                        let rv = if r { 1.0 } else { 0.0 };
                        affine += omega[i] * (rv - (1.0 - l) * prev_mean) / l;
                    }
                    sum += usize::from(r);
                    counts[i] = sum;
                }
                if prob == 0.0 {
                    continue;
                }
                let mean = sum as f64 / n as f64;
                let last = ((bits >> (n - 1)) & 1) as f64;
                acc.total += prob;
                acc.mean += prob * mean;
                acc.sq_error += prob * (mean - pv).powi(2);
                if invertible {
                    let est = affine / omega_total;
                    acc.affine_mean += prob * est;
                    acc.affine_sq_error += prob * (est - pv).powi(2);
                }
                for i in 0..n {
                    acc.ratings[i] += prob * ((bits >> i) & 1) as f64;
                }
                for m in 1..n {
                    let cell = m * width + counts[m - 1];
                    acc.cond_prob[cell] += prob;
                    acc.cond_mean[cell] += prob * mean;
                    acc.cond_rating[cell] += prob * last;
                }
            }
            acc
        })
        .collect();

    let mut acc = Accumulator::new(n);
    for part in &partials {
        acc.merge(part);
    }

    let mut conditional = Vec::new();
    for m in 1..n {
        for count in 0..=m {
            let cell = m * width + count;
            let prob = acc.cond_prob[cell];
            if prob > 0.0 {
                conditional.push(ConditionalMoment {
                    m,
                    count,
                    probability: prob,
                    sample_mean: acc.cond_mean[cell] / prob,
                    last_rating: acc.cond_rating[cell] / prob,
                });
            }
        }
    }
    let affine = invertible.then(|| {
        let bias = acc.affine_mean - pv;
        AffineMoments { mean: acc.affine_mean, variance: acc.affine_sq_error - bias * bias }
    });
    Ok(ExactMoments {
        n,
        total_probability: acc.total,
        sample_mean: acc.mean,
        sample_mean_sq_error: acc.sq_error,
        rating_means: acc.ratings,
        affine,
        conditional,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p4() -> TruePreference {
        TruePreference::new(0.4).unwrap()
    }

    #[test]
    fn hand_checked_two_step_value() {
        // 0.4 (0.7·0.36 + 0.3·0.01) + 0.6 (0.2·0.01 + 0.8·0.16)
        let s = LambdaSchedule::explicit(vec![1.0, 0.5]).unwrap();
        let m = brute_force_oracle(p4(), &s, &WeightScheme::Uniform, 2).unwrap();
        let hand = 0.4 * (0.7 * 0.36 + 0.3 * 0.01) + 0.6 * (0.2 * 0.01 + 0.8 * 0.16);
        assert!((m.sample_mean_sq_error - hand).abs() < 1e-15);
        assert!((m.sample_mean_sq_error - 0.18).abs() < 1e-15);
        // p̂_2 = r_2 exactly, so its variance is p(1-p)
        let affine = m.affine.unwrap();
        assert!((affine.variance - 0.24).abs() < 1e-15);
    }

    #[test]
    fn unbiased_and_iid_limits() {
        for s in ["strong", "power:1", "const:0", "geom:0.7"] {
            let schedule: LambdaSchedule = s.parse().unwrap();
            let m = brute_force_oracle(p4(), &schedule, &WeightScheme::Uniform, 10).unwrap();
            assert!((m.total_probability - 1.0).abs() < 1e-12);
            assert!((m.sample_mean - 0.4).abs() < 1e-12, "{s}");
            for r in &m.rating_means {
                assert!((r - 0.4).abs() < 1e-12, "{s}");
            }
        }
        let m = brute_force_oracle(p4(), &LambdaSchedule::no_bandwagon(), &WeightScheme::Uniform, 9)
            .unwrap();
        assert!((m.sample_mean_sq_error - 0.24 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn zero_lambda_disables_affine_moments() {
        let m = brute_force_oracle(p4(), &LambdaSchedule::constant(0.0).unwrap(), &WeightScheme::Uniform, 5)
            .unwrap();
        assert!(m.affine.is_none());
        assert!((m.sample_mean_sq_error - 0.24).abs() < 1e-12);
    }

    #[test]
    fn size_guard() {
        let s = LambdaSchedule::no_bandwagon();
        assert!(matches!(
            brute_force_oracle(p4(), &s, &WeightScheme::Uniform, 17),
            Err(Error::EnumerationTooLarge { n: 17, .. })
        ));
        assert!(brute_force_oracle(p4(), &s, &WeightScheme::Uniform, 16).is_ok());
    }

    #[test]
    fn conditional_table_is_consistent() {
        let s = LambdaSchedule::weak();
        let m = brute_force_oracle(p4(), &s, &WeightScheme::Uniform, 6).unwrap();
        for step in 1..6 {
            let total: f64 = m.conditional.iter().filter(|c| c.m == step).map(|c| c.probability).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        let first = m.conditional_at(1, 1).unwrap();
        assert!((first.probability - 0.4).abs() < 1e-15);
    }
}
