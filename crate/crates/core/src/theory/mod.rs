//! Closed-form results for the herded sample mean and the affine estimator,
//! plus an enumeration oracle that checks them exactly for small `n`.

mod azuma;
mod consistency;
mod efficiency;
mod lerch;
mod oracle;

pub use azuma::{azuma_min_samples, azuma_tail_bound, ConvergenceQuery};
pub use consistency::{consistency_classify, Consistency, ConsistencyReason, ConsistencyVerdict};
pub use efficiency::{
    affine_variance, affine_variance_curve, conditional_bias, conditional_rating_bias,
    efficiency_asymptotic_partial, efficiency_curve, efficiency_exact,
};
pub use lerch::{error_lower_bound, lerch, LerchSum, LERCH_TOLERANCE};
pub use oracle::{
    brute_force_oracle, AffineMoments, ConditionalMoment, ExactMoments, MAX_ENUMERATION,
};
