//! Bandwagon-strength schedules.
//!
//! A schedule assigns each rating index `i >= 1` a weight `λ_i ∈ [0, 1]` on
//! the rater's own preference; the remaining `1 - λ_i` goes to the running
//! mean of earlier ratings. Every schedule satisfies `λ_1 = 1` and is
//! nonincreasing in `i`.
//!
//! Text syntax (shared by the CLI and JSON configs):
//!
//! ```text
//! const:<c>            λ_1 = 1, λ_i = c for i >= 2
//! geom-affine:<a>,<b>  λ_i = a + (1 - a) b^(i-1)
//! geom:<c>             λ_i = c^(i-1)
//! power:<q>            λ_i = i^(-q)
//! explicit:<v1>,...    λ_i = v_i, finite
//! none | weak | strong presets: const:1, geom-affine:0.6,0.9, geom-affine:0.1,0.95
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// The closed form behind a [`LambdaSchedule`].
#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleKind {
    /// `λ_1 = 1`, `λ_i = c` afterwards.
    Constant(f64),
    /// `λ_i = floor + (1 - floor) * decay^(i-1)`.
    GeometricAffine { floor: f64, decay: f64 },
    /// `λ_i = ratio^(i-1)`.
    Geometric(f64),
    /// `λ_i = i^(-exponent)`.
    PowerLaw(f64),
    /// A finite list of values, `λ_1 = 1`.
    Explicit(Vec<f64>),
    /// `max(inner_i, tau)`.
    Clipped { inner: Box<LambdaSchedule>, tau: f64 },
}

/// A validated, nonincreasing λ sequence starting at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LambdaSchedule {
    kind: ScheduleKind,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(invalid(format!("{name} must lie in [0, 1], got {v}")));
    }
    Ok(())
}

impl LambdaSchedule {
    pub fn constant(c: f64) -> Result<Self> {
        check_unit("constant", c)?;
        Ok(Self { kind: ScheduleKind::Constant(c) })
    }

    pub fn geometric_affine(floor: f64, decay: f64) -> Result<Self> {
        check_unit("floor", floor)?;
        if !(decay > 0.0 && decay < 1.0) {
            return Err(invalid(format!("decay must lie in (0, 1), got {decay}")));
        }
        Ok(Self { kind: ScheduleKind::GeometricAffine { floor, decay } })
    }

    pub fn geometric(ratio: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(invalid(format!("geometric ratio must lie in (0, 1], got {ratio}")));
        }
        Ok(Self { kind: ScheduleKind::Geometric(ratio) })
    }

    pub fn power_law(exponent: f64) -> Result<Self> {
        if !(exponent >= 0.0 && exponent.is_finite()) {
            return Err(invalid(format!("power-law exponent must be >= 0, got {exponent}")));
        }
        Ok(Self { kind: ScheduleKind::PowerLaw(exponent) })
    }

    /// Validates `λ_1 = 1`, range and exact monotonicity.
    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        let first = *values.first().ok_or(Error::Empty("explicit schedule"))?;
        if first != 1.0 {
            return Err(invalid(format!("explicit schedule must start at 1, got {first}")));
        }
        for (idx, w) in values.windows(2).enumerate() {
            check_unit("explicit value", w[1])?;
            if w[1] > w[0] {
                return Err(invalid(format!(
                    "explicit schedule increases at index {}: {} > {}",
                    idx + 2,
                    w[1],
                    w[0]
                )));
            }
        }
        Ok(Self { kind: ScheduleKind::Explicit(values) })
    }

    /// No herding at any index.
    pub fn no_bandwagon() -> Self {
        Self { kind: ScheduleKind::Constant(1.0) }
    }

    /// `0.6 + 0.4 * 0.9^(i-1)`.
    pub fn weak() -> Self {
        Self { kind: ScheduleKind::GeometricAffine { floor: 0.6, decay: 0.9 } }
    }

    /// `0.1 + 0.9 * 0.95^(i-1)`.
    pub fn strong() -> Self {
        Self { kind: ScheduleKind::GeometricAffine { floor: 0.1, decay: 0.95 } }
    }

    /// Pointwise `max(λ_i, tau)`; `tau` must lie in `(0, 1]`.
    pub fn clipped(&self, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(invalid(format!("clip threshold must lie in (0, 1], got {tau}")));
        }
        Ok(Self { kind: ScheduleKind::Clipped { inner: Box::new(self.clone()), tau } })
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    /// Number of defined indices, `None` for unbounded schedules.
    pub fn len(&self) -> Option<usize> {
        match &self.kind {
            ScheduleKind::Explicit(v) => Some(v.len()),
            ScheduleKind::Clipped { inner, .. } => inner.len(),
            _ => None,
        }
    }

    /// `λ_i` for a 1-based index.
    pub fn lambda_at(&self, i: usize) -> Result<f64> {
        if i == 0 {
            return Err(invalid("schedule indices start at 1"));
        }
        let exp = (i - 1) as f64;
        let value = match &self.kind {
            ScheduleKind::Constant(c) => {
                if i == 1 {
                    1.0
                } else {
                    *c
                }
            }
            ScheduleKind::GeometricAffine { floor, decay } => {
                if i == 1 {
                    1.0
                } else {
                    floor + (1.0 - floor) * decay.powf(exp)
                }
            }
            ScheduleKind::Geometric(c) => c.powf(exp),
            ScheduleKind::PowerLaw(q) => (i as f64).powf(-q),
            ScheduleKind::Explicit(v) => *v
                .get(i - 1)
                .ok_or(Error::IndexOutOfRange { index: i, len: v.len() })?,
            ScheduleKind::Clipped { inner, tau } => inner.lambda_at(i)?.max(*tau),
        };
        Ok(value)
    }

    /// `λ_1..λ_n` as a table.
    pub fn values(&self, n: usize) -> Result<Vec<f64>> {
        if let Some(len) = self.len() {
            if n > len {
                return Err(Error::IndexOutOfRange { index: n, len });
            }
        }
        (1..=n).map(|i| self.lambda_at(i)).collect()
    }
}

impl fmt::Display for LambdaSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ScheduleKind::Constant(c) => write!(f, "const:{c}"),
            ScheduleKind::GeometricAffine { floor, decay } => {
                write!(f, "geom-affine:{floor},{decay}")
            }
            ScheduleKind::Geometric(c) => write!(f, "geom:{c}"),
            ScheduleKind::PowerLaw(q) => write!(f, "power:{q}"),
            ScheduleKind::Explicit(v) => {
                let body: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "explicit:{}", body.join(","))
            }
            ScheduleKind::Clipped { inner, tau } => write!(f, "clip:{tau}:{inner}"),
        }
    }
}

fn parse_floats(input: &str, body: &str) -> Result<Vec<f64>> {
    body.split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|e| Error::ScheduleSyntax {
                input: input.to_string(),
                reason: format!("`{s}`: {e}"),
            })
        })
        .collect()
}

impl FromStr for LambdaSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let input = s.trim();
        match input {
            "none" => return Ok(Self::no_bandwagon()),
            "weak" => return Ok(Self::weak()),
            "strong" => return Ok(Self::strong()),
            _ => {}
        }
        let syntax = |reason: &str| Error::ScheduleSyntax {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        let (tag, body) = input.split_once(':').ok_or_else(|| syntax("missing `:`"))?;
        if tag == "clip" {
            let (tau, inner) = body.split_once(':').ok_or_else(|| syntax("expected clip:<tau>:<schedule>"))?;
            let tau = parse_floats(input, tau)?[0];
            return inner.parse::<LambdaSchedule>()?.clipped(tau);
        }
        let args = parse_floats(input, body)?;
        let arity = |k: usize| {
            if args.len() == k {
                Ok(())
            } else {
                Err(syntax(&format!("`{tag}` takes {k} argument(s), got {}", args.len())))
            }
        };
        match tag {
            "const" => {
                arity(1)?;
                Self::constant(args[0])
            }
            "geom-affine" => {
                arity(2)?;
                Self::geometric_affine(args[0], args[1])
            }
            "geom" => {
                arity(1)?;
                Self::geometric(args[0])
            }
            "power" => {
                arity(1)?;
                Self::power_law(args[0])
            }
            "explicit" => Self::explicit(args),
            other => Err(syntax(&format!("unknown schedule kind `{other}`"))),
        }
    }
}

impl TryFrom<String> for LambdaSchedule {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<LambdaSchedule> for String {
    fn from(s: LambdaSchedule) -> String {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lambda_at_examples() {
        let weak = LambdaSchedule::geometric_affine(0.6, 0.9).unwrap();
        assert_eq!(weak.lambda_at(1).unwrap(), 1.0);
        let strong = LambdaSchedule::geometric_affine(0.1, 0.95).unwrap();
        assert!((strong.lambda_at(2).unwrap() - 0.955).abs() < 1e-15);
        let power = LambdaSchedule::power_law(1.0).unwrap();
        assert_eq!(power.lambda_at(4).unwrap(), 0.25);
    }

    #[test]
    fn explicit_out_of_range() {
        let s = LambdaSchedule::explicit(vec![1.0, 0.5]).unwrap();
        assert_eq!(s.lambda_at(2).unwrap(), 0.5);
        assert!(matches!(s.lambda_at(3), Err(Error::IndexOutOfRange { index: 3, len: 2 })));
        assert!(s.values(3).is_err());
    }

    #[test]
    fn explicit_validation() {
        assert!(LambdaSchedule::explicit(vec![0.9, 0.5]).is_err());
        assert!(LambdaSchedule::explicit(vec![1.0, 0.5, 0.6]).is_err());
        assert!(LambdaSchedule::explicit(vec![1.0, -0.1]).is_err());
        assert!(LambdaSchedule::explicit(vec![]).is_err());
        assert!(LambdaSchedule::explicit(vec![1.0, 0.5, 0.5, 0.0]).is_ok());
    }

    #[test]
    fn constructor_ranges() {
        assert!(LambdaSchedule::geometric_affine(1.2, 0.5).is_err());
        assert!(LambdaSchedule::geometric_affine(0.5, 1.0).is_err());
        assert!(LambdaSchedule::geometric(0.0).is_err());
        assert!(LambdaSchedule::power_law(-1.0).is_err());
        assert!(LambdaSchedule::constant(1.5).is_err());
        assert!(LambdaSchedule::weak().clipped(0.0).is_err());
    }

    #[test]
    fn constant_starts_at_one() {
        let s = LambdaSchedule::constant(0.0).unwrap();
        assert_eq!(s.lambda_at(1).unwrap(), 1.0);
        assert_eq!(s.lambda_at(2).unwrap(), 0.0);
    }

    #[test]
    fn text_syntax_round_trip() {
        for text in [
            "const:0.5",
            "geom-affine:0.6,0.9",
            "geom:0.9",
            "power:1",
            "explicit:1,0.8,0.6",
            "clip:0.3:geom:0.9",
        ] {
            let s: LambdaSchedule = text.parse().unwrap();
            assert_eq!(s.to_string(), text);
        }
        assert_eq!("strong".parse::<LambdaSchedule>().unwrap(), LambdaSchedule::strong());
        assert!("geom-affine:0.5".parse::<LambdaSchedule>().is_err());
        assert!("wobble:1".parse::<LambdaSchedule>().is_err());
        assert!("geom".parse::<LambdaSchedule>().is_err());
    }

    #[test]
    fn serde_uses_text_syntax() {
        let json = serde_json::to_string(&LambdaSchedule::weak()).unwrap();
        assert_eq!(json, "\"geom-affine:0.6,0.9\"");
        let back: LambdaSchedule = serde_json::from_str(&json).unwrap();
        assert_eq!(back, LambdaSchedule::weak());
    }

    fn any_schedule() -> impl Strategy<Value = LambdaSchedule> {
        prop_oneof![
            (0.0..=1.0f64).prop_map(|c| LambdaSchedule::constant(c).unwrap()),
            (0.0..=1.0f64, 0.01..0.999f64)
                .prop_map(|(a, b)| LambdaSchedule::geometric_affine(a, b).unwrap()),
            (0.01..=1.0f64).prop_map(|c| LambdaSchedule::geometric(c).unwrap()),
            (0.0..4.0f64).prop_map(|q| LambdaSchedule::power_law(q).unwrap()),
            (0.01..=1.0f64, 0.01..=1.0f64).prop_map(|(c, t)| {
                LambdaSchedule::geometric(c).unwrap().clipped(t).unwrap()
            }),
        ]
    }

    proptest! {
        #[test]
        fn schedules_start_at_one_and_never_increase(s in any_schedule()) {
            let values = s.values(2_000).unwrap();
            prop_assert_eq!(values[0], 1.0);
            for w in values.windows(2) {
                prop_assert!(w[1] <= w[0]);
                prop_assert!((0.0..=1.0).contains(&w[1]));
            }
        }
    }
}
