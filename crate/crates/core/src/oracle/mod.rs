//! Independent checks of the closed forms: brute-force entropy search,
//! seeded random channels, the soundness stress test, and the example family.

mod family;
mod random;
mod search;
mod stress;

pub use family::{comparison_table, example_family, write_table_csv, ExperimentRow};
pub use random::{random_channel, random_confusion, rng, sample_pairs, sub_seed, RandomChannel};
pub use search::{
    min_entropy_at_max, min_entropy_oracle, EquivocationOracle, COARSE_STEP, MIXTURE_REFINE_STEPS, PROFILE_STEP,
    REFINE_STEPS,
};
pub use stress::{
    achieving_slack, bound_stress_test, channel_slack, trial_setup, StressReport, StressViolation, VIOLATION_TOL,
};
