//! Synthetic evaluation harness: a generative performance model for fake
//! providers, trial simulation, end-to-end experiment runs, and the file
//! formats the CLI reads and writes.
//!
//! The generative model is deliberately simple — per-level base
//! performance times a seasonal factor times lognormal-ish noise — so
//! that with noise switched off the discovery pipeline can be checked for
//! exact recovery of the ground truth.

mod experiment;
mod generate;
pub mod io;
mod rng;
mod scenario;

pub use experiment::{
    run_experiment, sweep_mean_nrmse, sweep_rank_correlation, CellReport, ExperimentReport,
    KendallEntry, SweepSummary,
};
pub use generate::{
    build_signature_from_history, ground_truth_performance, simulate_trial, tile_windows,
    NOISE_FLOOR,
};
pub use rng::{derive_seed, stream_rng};
pub use scenario::{
    exactness_scenario, headline_scenario, ranking_scenario, scenario_by_name, seasonal_values,
    zipf_workload, Scenario, CPU_ATTR, NET_ATTR, SCENARIO_NAMES,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::QoSMatrix;
use crate::trial::{LevelThresholds, TrialScheme, WorkloadLevel};

/// Generative description of one synthetic provider.
///
/// Actual performance for attribute `a` at timestamp `t` under demand `d`
/// is `base_perf[level(d)][a] * seasonal[a][t] * (1 + noise)`, with noise
/// drawn per timestamp from `N(0, noise_std)` on a stream derived from
/// `rng_seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderProfile {
    pub provider_id: String,
    /// Base QoS per workload level per attribute; all values positive.
    pub base_perf: BTreeMap<WorkloadLevel, BTreeMap<String, f64>>,
    /// Multiplicative seasonal factors per attribute over the horizon;
    /// strictly positive.
    pub seasonal: QoSMatrix,
    /// Relative noise standard deviation (0 disables noise).
    pub noise_std: f64,
    pub rng_seed: u64,
}

impl ProviderProfile {
    pub fn validate(&self) -> Result<()> {
        if self.seasonal.is_empty() {
            return Err(Error::InvalidProfile(format!(
                "{}: seasonal matrix has no attributes",
                self.provider_id
            )));
        }
        for (name, series) in self.seasonal.iter() {
            if series.values().iter().any(|&v| v <= 0.0) {
                return Err(Error::InvalidProfile(format!(
                    "{}: seasonal factor for {name:?} must stay positive",
                    self.provider_id
                )));
            }
        }
        if !self.noise_std.is_finite() || self.noise_std < 0.0 {
            return Err(Error::InvalidProfile(format!(
                "{}: noise_std must be finite and non-negative",
                self.provider_id
            )));
        }
        for level in [
            WorkloadLevel::Low,
            WorkloadLevel::Medium,
            WorkloadLevel::High,
        ] {
            let map = self.base_perf.get(&level).ok_or_else(|| {
                Error::InvalidProfile(format!(
                    "{}: base_perf is missing level {level:?}",
                    self.provider_id
                ))
            })?;
            for name in self.seasonal.attribute_names() {
                match map.get(name) {
                    Some(v) if v.is_finite() && *v > 0.0 => {}
                    _ => {
                        return Err(Error::InvalidProfile(format!(
                            "{}: base_perf[{level:?}] needs a positive value for {name:?}",
                            self.provider_id
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    /// Base performance for a level/attribute pair (validated profiles
    /// always have it).
    pub fn base_value(&self, level: WorkloadLevel, attribute: &str) -> Option<f64> {
        self.base_perf.get(&level)?.get(attribute).copied()
    }
}

/// Knobs for one experiment run. The defaults describe the standard
/// setup: a 360-day horizon, 7 providers, a 30-day trial starting on day
/// 151 (the sixth month), all four trial schemes, and a 0.7 confidence
/// threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub horizon_days: usize,
    pub provider_count: usize,
    pub trial_length_days: usize,
    pub trial_start_day: usize,
    pub schemes: Vec<TrialScheme>,
    pub confidence_threshold: f64,
    pub seed: u64,
    /// Parallel VM count for the EQ scheme.
    pub eq_vm_count: usize,
    /// Number of past trial users whose windows tile the horizon when
    /// synthesizing provider signatures.
    pub signature_users: usize,
    /// Scheme whose trial feeds the ranking comparison.
    pub ranking_scheme: TrialScheme,
    /// Physical length of one timestamp, in days; informational.
    pub granularity_days: f64,
    pub level_thresholds: LevelThresholds,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            horizon_days: 360,
            provider_count: 7,
            trial_length_days: 30,
            trial_start_day: 151,
            schemes: vec![
                TrialScheme::Fg,
                TrialScheme::Rg,
                TrialScheme::Mg,
                TrialScheme::Eq,
            ],
            confidence_threshold: 0.7,
            seed: 0,
            eq_vm_count: 3,
            signature_users: 12,
            ranking_scheme: TrialScheme::Fg,
            granularity_days: 1.0,
            level_thresholds: LevelThresholds::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon_days == 0
            || self.provider_count == 0
            || self.trial_length_days == 0
            || self.trial_start_day == 0
            || self.eq_vm_count == 0
            || self.signature_users == 0
        {
            return Err(Error::InvalidConfig(
                "all counts must be positive".to_string(),
            ));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidConfig("no trial schemes listed".to_string()));
        }
        let mut seen = std::collections::HashSet::new();
        if !self.schemes.iter().all(|s| seen.insert(*s)) {
            return Err(Error::InvalidConfig(
                "trial schemes must be unique".to_string(),
            ));
        }
        if self.trial_start_day + self.trial_length_days - 1 > self.horizon_days {
            return Err(Error::InvalidConfig(format!(
                "trial window [{}, {}] leaves the {}-day horizon",
                self.trial_start_day,
                self.trial_start_day + self.trial_length_days - 1,
                self.horizon_days
            )));
        }
        if self.signature_users > self.horizon_days {
            return Err(Error::InvalidConfig(
                "more signature users than horizon days".to_string(),
            ));
        }
        if !self.confidence_threshold.is_finite()
            || !(-1.0..=1.0).contains(&self.confidence_threshold)
        {
            return Err(Error::InvalidConfig(
                "confidence threshold must lie in [-1, 1]".to_string(),
            ));
        }
        if !self.granularity_days.is_finite() || self.granularity_days <= 0.0 {
            return Err(Error::InvalidConfig(
                "granularity must be positive".to_string(),
            ));
        }
        Ok(())
    }

    /// First and last timestamp of the trial window.
    pub fn trial_window(&self) -> (usize, usize) {
        (
            self.trial_start_day,
            self.trial_start_day + self.trial_length_days - 1,
        )
    }
}
