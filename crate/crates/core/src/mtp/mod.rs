//! Resampling-based multiple testing: test statistics, bootstrap and
//! permutation null distributions, single-step maxT and error accounting.

pub mod dump;
pub mod maxt;
pub mod null;
pub mod rates;
pub mod statistics;

pub use maxt::{marginal_p, maxt_adjusted_p, maxt_cutoff, ordering, rejection_set, single_step_maxt, MtpResult};
pub use null::{
    resample_null, Evaluation, NullDistributionEstimate, NullTransform, ReplicateContext, ResampleOptions, Scheme,
    Sidedness, StatisticComputer,
};
pub use rates::{confusion, error_rates, ConfusionCounts, ErrorRates};
pub use statistics::{difference_statistics, t_statistics};
