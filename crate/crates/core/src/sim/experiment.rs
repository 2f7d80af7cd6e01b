//! End-to-end experiment runs over synthetic providers: signature
//! synthesis, trial simulation, confidence screening, discovery, and
//! ranking, plus multi-seed sweep helpers for aggregate claims.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::confidence::{experience_confidence, ConfidenceReport};
use crate::discovery::{lpd_discover, spd_discover, PerformancePrediction};
use crate::error::{Error, Result};
use crate::ranking::{
    expected_ranking, kendall_tau, rank_matrices, rank_providers, ConsumerRequest, RankingMethod,
    RankingReport,
};
use crate::series::{QoSMatrix, TimeSeries, TimeWindow, WorkloadSeries};
use crate::stats::nrmse;
use crate::trial::{select_trial_workloads, select_trial_workloads_eq, TrialPlan, TrialScheme};

use super::generate::{
    build_signature_from_history, ground_truth_performance, simulate_trial, tile_windows,
};
use super::scenario::Scenario;
use super::{ExperimentConfig, ProviderProfile};

/// Outcome of one (provider, scheme) pair within an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub provider_id: String,
    pub scheme: TrialScheme,
    pub confidence: ConfidenceReport,
    /// Mean over attributes of the NRMSE between ground-truth and
    /// signature-corrected (SPD) predicted performance.
    pub spd_nrmse: f64,
    /// Same for the naive nearest-demand (LPD) prediction.
    pub lpd_nrmse: f64,
    pub spd_attribute_nrmse: BTreeMap<String, f64>,
    pub lpd_attribute_nrmse: BTreeMap<String, f64>,
}

/// Rank correlation of one method's provider order against the
/// ground-truth (EXPECTED) order, over the providers both orders cover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KendallEntry {
    pub method: RankingMethod,
    pub tau: f64,
    pub providers_compared: usize,
}

/// Full record of one experiment run; serializing it reproduces every
/// number the run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub providers: Vec<String>,
    /// One entry per (provider, scheme), provider-major in input order.
    pub cells: Vec<CellReport>,
    /// EXPECTED first, then SPD, LPD and SHORT_TERM over the providers
    /// that passed the confidence screen.
    pub rankings: Vec<RankingReport>,
    pub kendall_vs_expected: Vec<KendallEntry>,
}

impl ExperimentReport {
    pub fn ranking(&self, method: RankingMethod) -> Option<&RankingReport> {
        self.rankings.iter().find(|r| r.method == method)
    }

    pub fn cell(&self, provider_id: &str, scheme: TrialScheme) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.provider_id == provider_id && c.scheme == scheme)
    }
}

struct ProviderOutcome {
    ground_truth: QoSMatrix,
    cells: Vec<CellReport>,
    /// First observation stream of the ranking-scheme trial.
    ranking_observation: QoSMatrix,
    ranking_spd: PerformancePrediction,
    ranking_lpd: PerformancePrediction,
    ranking_passed: bool,
}

/// Mean NRMSE between two matrices (per attribute, normalized by the
/// actual series' range), plus the per-attribute breakdown.
fn matrix_nrmse(actual: &QoSMatrix, predicted: &QoSMatrix) -> Result<(f64, BTreeMap<String, f64>)> {
    if !actual.same_attribute_set(predicted) {
        return Err(Error::AttributeMismatch {
            expected: actual.attribute_names().map(String::from).collect(),
            found: predicted.attribute_names().map(String::from).collect(),
        });
    }
    let mut per_attribute = BTreeMap::new();
    for (name, actual_series) in actual.iter() {
        let predicted_series = predicted.get(name).expect("attribute set was checked");
        per_attribute.insert(name.to_string(), nrmse(actual_series, predicted_series)?);
    }
    let mean = per_attribute.values().sum::<f64>() / per_attribute.len() as f64;
    Ok((mean, per_attribute))
}

fn build_plans(
    config: &ExperimentConfig,
    workload: &WorkloadSeries,
) -> Result<BTreeMap<TrialScheme, TrialPlan>> {
    config
        .schemes
        .iter()
        .map(|&scheme| {
            let plan = match scheme {
                TrialScheme::Eq => select_trial_workloads_eq(
                    workload,
                    config.trial_length_days,
                    config.eq_vm_count,
                ),
                single => select_trial_workloads(workload, config.trial_length_days, single),
            }?;
            Ok((scheme, plan))
        })
        .collect()
}

/// Runs the whole pipeline for every provider and trial scheme.
///
/// Per provider: synthesize a signature from simulated past users, run one
/// trial per scheme, score trial confidence, predict long-term performance
/// with and without the signature, and measure both predictions against
/// the provider's ground truth. Providers whose ranking-scheme trial fails
/// the confidence screen are excluded from the prediction-based rankings
/// (but still reported).
///
/// Providers are processed in parallel; the report is identical for every
/// thread count because all randomness is derived from per-stream seeds.
pub fn run_experiment(
    config: &ExperimentConfig,
    request: &ConsumerRequest,
    profiles: &[ProviderProfile],
) -> Result<ExperimentReport> {
    config.validate()?;
    if profiles.len() != config.provider_count {
        return Err(Error::InvalidConfig(format!(
            "config expects {} providers, got {}",
            config.provider_count,
            profiles.len()
        )));
    }
    if !config.schemes.contains(&config.ranking_scheme) {
        return Err(Error::InvalidConfig(format!(
            "ranking scheme {} is not among the trial schemes",
            config.ranking_scheme
        )));
    }
    if request.horizon() != config.horizon_days {
        return Err(Error::HorizonMismatch {
            expected: config.horizon_days,
            found: request.horizon(),
        });
    }
    if request.workload.demands().start_index() != 1 {
        return Err(Error::InvalidConfig(
            "experiment workloads must start at timestamp 1".to_string(),
        ));
    }
    let mut ids = HashSet::new();
    for profile in profiles {
        if !ids.insert(profile.provider_id.as_str()) {
            return Err(Error::DuplicateProvider(profile.provider_id.clone()));
        }
    }

    let (start, end) = config.trial_window();
    let window = TimeWindow::new(start, end)?;
    let capacity = request.workload.capacity();
    // Past users all ran the same mid-range constant workload, so the
    // signature reflects pure seasonal shape rather than demand mix.
    let reference = WorkloadSeries::new(
        TimeSeries::constant(1, config.horizon_days, 0.5 * capacity)?,
        capacity,
    )?;
    let user_windows = tile_windows(config.horizon_days, config.signature_users)?;
    let plans = build_plans(config, &request.workload)?;

    let outcomes: Vec<ProviderOutcome> = profiles
        .par_iter()
        .map(|profile| -> Result<ProviderOutcome> {
            let ground_truth =
                ground_truth_performance(profile, &request.workload, &config.level_thresholds)?;
            let signature = build_signature_from_history(
                profile,
                &reference,
                &user_windows,
                &config.level_thresholds,
            )?;

            let mut cells = Vec::with_capacity(config.schemes.len());
            let mut ranking_parts = None;
            for &scheme in &config.schemes {
                let experience =
                    simulate_trial(profile, &plans[&scheme], window, &config.level_thresholds)?;
                let confidence =
                    experience_confidence(&experience, &signature, config.confidence_threshold)?;
                let spd = spd_discover(&request.workload, &experience, &signature)?;
                let lpd = lpd_discover(&request.workload, &experience)?;
                let (spd_nrmse, spd_attribute_nrmse) = matrix_nrmse(&ground_truth, &spd.predicted)?;
                let (lpd_nrmse, lpd_attribute_nrmse) = matrix_nrmse(&ground_truth, &lpd.predicted)?;
                if scheme == config.ranking_scheme {
                    ranking_parts = Some((
                        experience.observed[0].clone(),
                        spd.clone(),
                        lpd.clone(),
                        confidence.passed,
                    ));
                }
                cells.push(CellReport {
                    provider_id: profile.provider_id.clone(),
                    scheme,
                    confidence,
                    spd_nrmse,
                    lpd_nrmse,
                    spd_attribute_nrmse,
                    lpd_attribute_nrmse,
                });
            }
            let (ranking_observation, ranking_spd, ranking_lpd, ranking_passed) =
                ranking_parts.expect("ranking scheme is in the scheme list");
            Ok(ProviderOutcome {
                ground_truth,
                cells,
                ranking_observation,
                ranking_spd,
                ranking_lpd,
                ranking_passed,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let actuals: Vec<(String, QoSMatrix)> = profiles
        .iter()
        .zip(&outcomes)
        .map(|(profile, outcome)| (profile.provider_id.clone(), outcome.ground_truth.clone()))
        .collect();
    let expected = expected_ranking(request, &actuals)?;

    let kept: Vec<usize> = (0..outcomes.len())
        .filter(|&i| outcomes[i].ranking_passed)
        .collect();
    let mut rankings = vec![expected.clone()];
    let mut kendall_vs_expected = Vec::new();
    if !kept.is_empty() {
        let spd_predictions: Vec<PerformancePrediction> = kept
            .iter()
            .map(|&i| outcomes[i].ranking_spd.clone())
            .collect();
        let lpd_predictions: Vec<PerformancePrediction> = kept
            .iter()
            .map(|&i| outcomes[i].ranking_lpd.clone())
            .collect();
        let observations: Vec<(String, &QoSMatrix)> = kept
            .iter()
            .map(|&i| {
                (
                    profiles[i].provider_id.clone(),
                    &outcomes[i].ranking_observation,
                )
            })
            .collect();
        let requested_slice = request.required_qos.window(start, window.len())?;

        let comparisons = vec![
            rank_providers(request, &spd_predictions)?,
            rank_providers(request, &lpd_predictions)?,
            rank_matrices(&requested_slice, &observations, RankingMethod::ShortTerm)?,
        ];
        if kept.len() >= 2 {
            let reference_order: Vec<String> = expected
                .order
                .iter()
                .filter(|id| comparisons[0].scores.contains_key(*id))
                .cloned()
                .collect();
            for report in &comparisons {
                kendall_vs_expected.push(KendallEntry {
                    method: report.method,
                    tau: kendall_tau(&report.order, &reference_order)?,
                    providers_compared: reference_order.len(),
                });
            }
        }
        rankings.extend(comparisons);
    }

    Ok(ExperimentReport {
        config: config.clone(),
        providers: profiles.iter().map(|p| p.provider_id.clone()).collect(),
        cells: outcomes.into_iter().flat_map(|o| o.cells).collect(),
        rankings,
        kendall_vs_expected,
    })
}

/// Prediction-error aggregates over a set of seeds. Only cells whose trial
/// passed the confidence screen contribute.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub seeds: Vec<u64>,
    /// scheme -> provider -> mean SPD NRMSE.
    pub spd: BTreeMap<TrialScheme, BTreeMap<String, f64>>,
    /// scheme -> provider -> mean LPD NRMSE.
    pub lpd: BTreeMap<TrialScheme, BTreeMap<String, f64>>,
    /// scheme -> provider -> number of contributing (passing) cells.
    pub kept: BTreeMap<TrialScheme, BTreeMap<String, usize>>,
    /// scheme -> SPD NRMSE pooled over all providers and seeds.
    pub scheme_spd: BTreeMap<TrialScheme, f64>,
    /// scheme -> LPD NRMSE pooled over all providers and seeds.
    pub scheme_lpd: BTreeMap<TrialScheme, f64>,
}

/// Builds the scenario for each seed, runs it, and averages prediction
/// errors per (scheme, provider) and per scheme.
pub fn sweep_mean_nrmse<F>(seeds: &[u64], build: F) -> Result<SweepSummary>
where
    F: Fn(u64) -> Result<Scenario>,
{
    if seeds.is_empty() {
        return Err(Error::InvalidConfig(
            "sweep needs at least one seed".to_string(),
        ));
    }
    type Slot = (f64, f64, usize);
    let mut sums: BTreeMap<TrialScheme, BTreeMap<String, Slot>> = BTreeMap::new();
    for &seed in seeds {
        let scenario = build(seed)?;
        let report = run_experiment(&scenario.config, &scenario.request, &scenario.profiles)?;
        for cell in &report.cells {
            if !cell.confidence.passed {
                continue;
            }
            let slot = sums
                .entry(cell.scheme)
                .or_default()
                .entry(cell.provider_id.clone())
                .or_insert((0.0, 0.0, 0));
            slot.0 += cell.spd_nrmse;
            slot.1 += cell.lpd_nrmse;
            slot.2 += 1;
        }
    }

    let mut summary = SweepSummary {
        seeds: seeds.to_vec(),
        spd: BTreeMap::new(),
        lpd: BTreeMap::new(),
        kept: BTreeMap::new(),
        scheme_spd: BTreeMap::new(),
        scheme_lpd: BTreeMap::new(),
    };
    for (scheme, providers) in sums {
        let mut pooled = (0.0, 0.0, 0usize);
        for (provider_id, (spd_sum, lpd_sum, count)) in providers {
            summary
                .spd
                .entry(scheme)
                .or_default()
                .insert(provider_id.clone(), spd_sum / count as f64);
            summary
                .lpd
                .entry(scheme)
                .or_default()
                .insert(provider_id.clone(), lpd_sum / count as f64);
            summary
                .kept
                .entry(scheme)
                .or_default()
                .insert(provider_id, count);
            pooled.0 += spd_sum;
            pooled.1 += lpd_sum;
            pooled.2 += count;
        }
        summary
            .scheme_spd
            .insert(scheme, pooled.0 / pooled.2 as f64);
        summary
            .scheme_lpd
            .insert(scheme, pooled.1 / pooled.2 as f64);
    }
    Ok(summary)
}

/// Per-seed Kendall tau of every ranking method against a known reference
/// order (restricted to the providers the method actually ranked).
pub fn sweep_rank_correlation<F>(
    seeds: &[u64],
    reference_order: &[String],
    build: F,
) -> Result<BTreeMap<RankingMethod, Vec<f64>>>
where
    F: Fn(u64) -> Result<Scenario>,
{
    if seeds.is_empty() {
        return Err(Error::InvalidConfig(
            "sweep needs at least one seed".to_string(),
        ));
    }
    let mut taus: BTreeMap<RankingMethod, Vec<f64>> = BTreeMap::new();
    for &seed in seeds {
        let scenario = build(seed)?;
        let report = run_experiment(&scenario.config, &scenario.request, &scenario.profiles)?;
        for ranking in &report.rankings {
            let restricted: Vec<String> = reference_order
                .iter()
                .filter(|id| ranking.scores.contains_key(*id))
                .cloned()
                .collect();
            if restricted.len() != ranking.order.len() {
                return Err(Error::NotPermutation);
            }
            taus.entry(ranking.method)
                .or_default()
                .push(kendall_tau(&ranking.order, &restricted)?);
        }
    }
    Ok(taus)
}
