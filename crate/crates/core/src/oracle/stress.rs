//! Falsification runs: no channel may have less equivocation than the bound
//! computed from its own MAP confusion matrix.

use rand::Rng;
use serde::Serialize;

use crate::bounds::equivocation_bound;
use crate::channel::build_achieving_channel;
use crate::confusion::ConfusionMatrix;
use crate::error::{Error, Result};
use crate::joint::JointChannel;

use super::random::{random_channel, rng, sub_seed};

/// Slack below which a channel counts as violating the bound.
pub const VIOLATION_TOL: f64 = 1e-9;

/// `H(X|Y) - bound(MAP confusion)`; negative means the bound failed.
pub fn channel_slack(ch: &JointChannel) -> Result<f64> {
    Ok(ch.equivocation() - equivocation_bound(&ch.map_confusion()?))
}

/// Slack of the achieving channel built for `cm`, measured under its own fiber decoder.
pub fn achieving_slack(cm: &ConfusionMatrix) -> Result<f64> {
    let (joint, decoder) = build_achieving_channel(cm)?.to_joint();
    let induced = joint.confusion_under(&decoder)?;
    Ok(joint.equivocation() - equivocation_bound(&induced))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StressViolation {
    pub trial: usize,
    pub seed: u64,
    pub nx: usize,
    pub ny: usize,
    pub slack: f64,
}

/// Outcome of [`bound_stress_test`]; serializes as `{trials, min_slack, violations, master_seed}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StressReport {
    pub trials: usize,
    pub min_slack: f64,
    pub violations: Vec<StressViolation>,
    pub master_seed: u64,
}

impl StressReport {
    /// Fails with the first offending seed, if any.
    pub fn check(&self) -> Result<()> {
        match self.violations.first() {
            Some(v) => Err(Error::ViolationFound { seed: v.seed, slack: v.slack }),
            None => Ok(()),
        }
    }
}

/// Sizes and seed of trial `index`, a pure function of `(master, index)`.
pub fn trial_setup(master: u64, index: usize, nx_max: usize, ny_max: usize) -> (usize, usize, u64) {
    let seed = sub_seed(master, index as u64);
    let mut r = rng(seed ^ 0x5EED_0F51_7E00);
    (r.gen_range(1..=nx_max), r.gen_range(1..=ny_max), seed)
}

fn run_trial(master: u64, index: usize, nx_max: usize, ny_max: usize) -> Result<(f64, Option<StressViolation>)> {
    let (nx, ny, seed) = trial_setup(master, index, nx_max, ny_max);
    let slack = channel_slack(&random_channel(nx, ny, seed).channel)?;
    let violation = (slack < -VIOLATION_TOL).then_some(StressViolation { trial: index, seed, nx, ny, slack });
    Ok((slack, violation))
}

/// Checks `H(X|Y) >= bound` on `trials` random channels with up to `nx_max`
/// signals and `ny_max` outputs. Trials are split across threads; every
/// trial derives its own seed, so the report does not depend on the split.
pub fn bound_stress_test(trials: usize, nx_max: usize, ny_max: usize, master_seed: u64) -> Result<StressReport> {
    if trials == 0 || nx_max == 0 || ny_max == 0 {
        return Err(Error::InvalidArgument("trials, nx and ny must all be at least 1".into()));
    }
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(trials);
    let chunk = trials.div_ceil(workers);
    let results: Vec<Result<(f64, Option<StressViolation>)>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                s.spawn(move || {
                    (w * chunk..((w + 1) * chunk).min(trials))
                        .map(|i| run_trial(master_seed, i, nx_max, ny_max))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("stress worker panicked")).collect()
    });

    let mut min_slack = f64::INFINITY;
    let mut violations = Vec::new();
    for r in results {
        let (slack, violation) = r?;
        min_slack = min_slack.min(slack);
        violations.extend(violation);
    }
    Ok(StressReport { trials, min_slack, violations, master_seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::confusion::validate_confusion;

    #[test]
    fn deterministic_channel_has_zero_slack() {
        let ch = JointChannel::new(&[vec![0.3, 0.0, 0.0], vec![0.0, 0.3, 0.4]]).unwrap();
        assert_eq!(channel_slack(&ch).unwrap(), 0.0);
    }

    #[test]
    fn small_run_has_no_violations() {
        let report = bound_stress_test(300, 5, 40, 11).unwrap();
        assert!(report.violations.is_empty(), "{report:?}");
        assert!(report.min_slack >= -VIOLATION_TOL);
        report.check().unwrap();
    }

    #[test]
    fn report_is_reproducible() {
        assert_eq!(bound_stress_test(50, 4, 10, 3).unwrap(), bound_stress_test(50, 4, 10, 3).unwrap());
    }

    #[test]
    fn check_reports_violations() {
        let report = StressReport {
            trials: 1,
            min_slack: -1.0,
            violations: vec![StressViolation { trial: 0, seed: 77, nx: 2, ny: 2, slack: -1.0 }],
            master_seed: 1,
        };
        assert!(matches!(report.check(), Err(Error::ViolationFound { seed: 77, .. })));
    }

    #[test]
    fn achieving_channels_have_no_slack() {
        let cm = validate_confusion(&[vec![0.3, 0.1], vec![0.1, 0.5]]).unwrap();
        assert!(achieving_slack(&cm).unwrap().abs() < 1e-12);
    }

    #[test]
    fn zero_sizes_are_rejected() {
        assert!(bound_stress_test(0, 5, 5, 1).is_err());
        assert!(bound_stress_test(5, 0, 5, 1).is_err());
    }
}
