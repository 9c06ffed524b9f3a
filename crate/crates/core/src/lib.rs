//! Simulation and estimation of herding ("bandwagon") effects in sequential
//! binary rating processes.
//!
//! Rating `n` is positive with probability `λ_n p + (1 - λ_n) p̄_{n-1}`: a
//! mixture of the rater's true preference `p` and the mean of earlier
//! ratings. The crate covers
//!
//! - the process itself ([`schedule`], [`model`], [`simulator`]),
//! - estimators of `p` that correct for herding ([`estimators`]),
//! - closed forms for bias, efficiency and consistency with an exact
//!   enumeration oracle ([`theory`]),
//! - recovery of the λ schedule from multi-bin data ([`lambda_fit`]),
//! - convergence experiments with CSV output ([`experiments`]).
//!
//! ```
//! use bandwagon::{LambdaSchedule, TruePreference, theory};
//!
//! let p = TruePreference::new(0.4).unwrap();
//! let strong = LambdaSchedule::strong();
//! let v = theory::efficiency_exact(p, &strong, 1000).unwrap();
//! assert!(v > 0.24 / 1000.0);
//! ```

#![forbid(unsafe_code)]

pub mod error;
pub mod estimators;
pub mod experiments;
pub mod lambda_fit;
pub mod model;
pub mod schedule;
pub mod seed;
pub mod simulator;
pub mod theory;

pub use error::{Error, Result};
pub use estimators::{ClipConfig, EstimatorKind, NewtonConfig, WeightScheme};
pub use model::{next_rating_probability, ProcessState, RatingSequence, TruePreference};
pub use schedule::{LambdaSchedule, ScheduleKind};
pub use simulator::{
    simulate_bin_dataset, simulate_ensemble, simulate_run, BinDataset, EnsembleConfig,
    EstimateTrace, EstimationSetup,
};
