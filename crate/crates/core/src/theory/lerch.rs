//! Real Lerch transcendent and the limiting error floor for geometric herding.

use crate::error::{invalid, Result};
use crate::model::TruePreference;

/// Default relative truncation tolerance for [`lerch`].
pub const LERCH_TOLERANCE: f64 = 1e-14;

const TINY: f64 = 1e-300;

/// A truncated series value with a certified bound on the dropped tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LerchSum {
    pub value: f64,
    /// Upper bound on `Σ_{k > last} z^k / (a+k)^s`.
    pub tail_bound: f64,
    pub terms: usize,
}

/// `Φ(z, s, a) = Σ_{k≥0} z^k / (a+k)^s` for `0 ≤ z < 1`, `s ≥ 1`, `a > 0`.
///
/// Terms are added until the current one falls below `tol · (sum + tiny)`.
/// Consecutive term ratios are at most `z`, so the tail after term `t` is
/// bounded by `t · z / (1 - z)`.
pub fn lerch(z: f64, s: f64, a: f64, tol: f64) -> Result<LerchSum> {
    if !(0.0..1.0).contains(&z) {
        return Err(invalid(format!("lerch series needs 0 <= z < 1, got {z}")));
    }
    if !(s >= 1.0) || !(a > 0.0) || !(tol > 0.0) {
        return Err(invalid(format!("lerch series needs s >= 1, a > 0, tol > 0 (s={s}, a={a})")));
    }
    let mut sum = 0.0;
    let mut power = 1.0;
    let mut k = 0usize;
    loop {
        let term = power / (a + k as f64).powf(s);
        sum += term;
        k += 1;
        if term < tol * (sum + TINY) || power == 0.0 {
            let tail_bound = term * z / (1.0 - z);
            return Ok(LerchSum { value: sum, tail_bound, terms: k });
        }
        power *= z;
    }
}

/// Lower bound on `lim E|p̄_n - p|` for `λ_i = c^(i-1)`:
/// `2p(1-p) exp(-c Φ(c,1,2) - c² Φ(c²,2,2))`.
pub fn error_lower_bound(p: TruePreference, c: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return Err(invalid(format!("geometric ratio must lie in (0, 1), got {c}")));
    }
    let first = lerch(c, 1.0, 2.0, LERCH_TOLERANCE)?.value;
    let second = lerch(c * c, 2.0, 2.0, LERCH_TOLERANCE)?.value;
    Ok(2.0 * p.bernoulli_variance() * (-c * first - c * c * second).exp())
}
