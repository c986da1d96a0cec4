//! Seeded Monte Carlo campaigns of the two-stage receiver.

use mnac_core::channel::{generate_codebooks, sample_activity, transmit_scaled, Codebook, SimConfig};
use mnac_core::detect::{two_stage_detect, DetectorOptions, IdentifyMode};
use mnac_core::rng::{derive, Role};
use rayon::prelude::*;

use crate::config::{CodebookPolicy, DetectorChoice, SimulateParams};
use crate::error::{LabError, Result};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialOutcome {
    pub joint_error: bool,
    pub misses: usize,
    pub false_alarms: usize,
    pub message_errors: usize,
    /// Transmitted codewords whose average power exceeds `P`.
    pub power_violations: usize,
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialStats {
    pub trials: u64,
    pub joint_errors: u64,
    pub miss_total: u64,
    pub fa_total: u64,
    pub msg_err_total: u64,
    pub power_violations: u64,
    /// Trials in which some stage fell back to a non-exhaustive search.
    pub inexact_trials: u64,
    pub error_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl TrialStats {
    pub fn from_outcomes(outcomes: &[TrialOutcome]) -> Self {
        let count = |f: fn(&TrialOutcome) -> u64| outcomes.iter().map(f).sum::<u64>();
        let trials = outcomes.len() as u64;
        let joint_errors = count(|o| o.joint_error as u64);
        let (ci_low, ci_high) = wilson_interval(joint_errors, trials);
        Self {
            trials,
            joint_errors,
            miss_total: count(|o| o.misses as u64),
            fa_total: count(|o| o.false_alarms as u64),
            msg_err_total: count(|o| o.message_errors as u64),
            power_violations: count(|o| o.power_violations as u64),
            inexact_trials: count(|o| (!o.exact) as u64),
            error_rate: if trials == 0 { 0.0 } else { joint_errors as f64 / trials as f64 },
            ci_low,
            ci_high,
        }
    }
}

/// Wilson score interval for `successes` out of `trials` at 95% confidence.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let low = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if successes >= trials { 1.0 } else { (center + half).min(1.0) };
    (low, high)
}

fn detector_options(params: &SimulateParams) -> DetectorOptions {
    DetectorOptions {
        mode: match params.detector.unwrap_or(DetectorChoice::Auto) {
            DetectorChoice::Auto => None,
            DetectorChoice::Exhaustive => Some(IdentifyMode::Exhaustive),
            DetectorChoice::Greedy => Some(IdentifyMode::Greedy),
        },
        subset_limit: params.subset_limit.unwrap_or(mnac_core::detect::DEFAULT_SUBSET_LIMIT),
        tuple_cap: params.tuple_cap.unwrap_or(mnac_core::detect::DEFAULT_TUPLE_CAP),
    }
}

/// Runs one trial. Activity, messages and noise come from
/// `derive(seed, Trial, index, 0)`; a per-trial codebook comes from
/// `derive(seed, Codebook, index, 0)`.
pub fn run_trial(params: &SimulateParams, seed: u64, index: u64, shared: Option<&[Codebook]>) -> Result<TrialOutcome> {
    let trial_seed = derive(seed, Role::Trial, index, 0);
    let owned;
    let (cfg, books): (SimConfig, &[Codebook]) = match shared {
        Some(books) => (params.sim_config(derive(seed, Role::Codebook, u64::MAX, 0)), books),
        None => {
            let cfg = params.sim_config(derive(seed, Role::Codebook, index, 0));
            owned = generate_codebooks(&cfg)?;
            (cfg, &owned)
        }
    };
    let truth = sample_activity(&cfg, trial_seed);
    let y = transmit_scaled(books, &truth, trial_seed, params.noise_sd.unwrap_or(1.0))?;
    let result = two_stage_detect(&y, books, &cfg, &truth, &detector_options(params))?;
    let power_violations = truth
        .messages
        .iter()
        .enumerate()
        .filter(|&(k, &w)| w != 0 && books[k].power(w) > cfg.p)
        .count();
    Ok(TrialOutcome {
        joint_error: result.is_error(),
        misses: result.misses,
        false_alarms: result.false_alarms,
        message_errors: result.message_errors,
        power_violations,
        exact: result.exact,
    })
}

/// Runs `trials` independent trials on `workers` threads.
///
/// Outcomes are collected in trial order and reduced by integer sums, so the
/// statistics do not depend on the worker count.
pub fn run_trials(params: &SimulateParams, trials: u64, seed: u64, workers: usize) -> Result<TrialStats> {
    if trials == 0 {
        return Err(LabError::config("trials", "must be positive for kind `simulate`"));
    }
    let shared = match params.codebooks.unwrap_or(CodebookPolicy::PerTrial) {
        CodebookPolicy::PerTrial => None,
        CodebookPolicy::Fixed => Some(generate_codebooks(&params.sim_config(derive(seed, Role::Codebook, u64::MAX, 0)))?),
    };
    // Surface configuration problems once instead of from every worker.
    params.sim_config(seed).validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| LabError::Pool(e.to_string()))?;
    let outcomes: Vec<TrialOutcome> = pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|t| run_trial(params, seed, t, shared.as_deref()))
            .collect::<Result<_>>()
    })?;
    Ok(TrialStats::from_outcomes(&outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ExperimentConfig, Kind, N0Rule, Params};
    use proptest::prelude::*;

    fn params() -> SimulateParams {
        match ExperimentConfig::example(Kind::Simulate).params {
            Params::Simulate(s) => s,
            _ => unreachable!(),
        }
    }

    #[test]
    fn wilson_reference_values() {
        let (lo, hi) = wilson_interval(0, 10);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.2775327998628892).abs() < 1e-12);
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.4038315303659956).abs() < 1e-12 && (hi - 0.5961684696340044).abs() < 1e-12);
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
    }

    #[test]
    fn noiseless_generous_signatures_never_fail() {
        let mut p = params();
        p.noise_sd = Some(0.0);
        p.n0_rule = Some(N0Rule::Fixed);
        p.n0 = Some(48);
        p.ell = 10;
        p.alpha = 0.3;
        let stats = run_trials(&p, 50, 3, 1).unwrap();
        // Only a true set heavier than the weight cap can still cause an error.
        let cap = mnac_core::detect::IdentifyBudget::from_mean_active(3.0, IdentifyMode::Exhaustive).max_weight;
        let heavy = (0..50)
            .filter(|&t| {
                let cfg = p.sim_config(0);
                sample_activity(&cfg, derive(3, Role::Trial, t, 0)).active_set().len() > cap
            })
            .count() as u64;
        assert_eq!(stats.joint_errors, heavy);
    }

    #[test]
    fn workers_do_not_change_results() {
        let mut p = params();
        p.n = 40;
        p.ell = 12;
        let a = run_trials(&p, 60, 9, 1).unwrap();
        let b = run_trials(&p, 60, 9, 4).unwrap();
        assert_eq!(a, b);
        p.codebooks = Some(CodebookPolicy::Fixed);
        assert_eq!(run_trials(&p, 30, 9, 1).unwrap(), run_trials(&p, 30, 9, 3).unwrap());
    }

    #[test]
    fn infeasible_exhaustive_is_reported() {
        let mut p = params();
        p.ell = 60;
        p.m = 1;
        p.detector = Some(DetectorChoice::Exhaustive);
        let err = run_trials(&p, 1, 0, 1).unwrap_err();
        assert_eq!(err.exit_code(), 3, "{err}");
    }

    proptest! {
        #[test]
        fn counters_are_consistent(outcomes in proptest::collection::vec((any::<bool>(), 0usize..5, 0usize..5, 0usize..5), 0..50)) {
            let outcomes: Vec<TrialOutcome> = outcomes
                .into_iter()
                .map(|(exact, misses, false_alarms, extra)| TrialOutcome {
                    joint_error: misses + false_alarms + extra > 0,
                    misses,
                    false_alarms,
                    message_errors: misses.max(false_alarms) + extra,
                    power_violations: 0,
                    exact,
                })
                .collect();
            let stats = TrialStats::from_outcomes(&outcomes);
            prop_assert!(stats.joint_errors <= stats.trials);
            prop_assert!((0.0..=1.0).contains(&stats.error_rate));
            prop_assert!(stats.ci_low <= stats.error_rate && stats.error_rate <= stats.ci_high);
        }
    }
}
