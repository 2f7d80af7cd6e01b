//! Ready-made experiment setups: a provider population, a consumer
//! request, and a config, all derived deterministically from one seed.
//!
//! Three setups are built in:
//!
//! * `headline` — seven heterogeneous providers with realistic noise and a
//!   Zipf-distributed workload; the general-purpose benchmark.
//! * `ranking` — seven providers with identical base performance whose
//!   seasonal shapes deviate from a reference in a controlled, strictly
//!   increasing way, so the true quality order is `p1 > p2 > ... > p7` by
//!   construction. A localized June-only deviation that *decreases* across
//!   providers makes trial-window-only comparisons misleading on purpose.
//! * `exactness` — noise-free providers over a small demand alphabet, so a
//!   trial can cover every distinct demand and signature-based discovery
//!   should reproduce the ground truth to rounding error.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::ranking::ConsumerRequest;
use crate::series::{QoSMatrix, TimeSeries, WorkloadSeries};
use crate::trial::WorkloadLevel;

use super::generate::ground_truth_performance;
use super::rng::{derive_seed, stream_rng};
use super::{ExperimentConfig, ProviderProfile};

pub const CPU_ATTR: &str = "cpu";
pub const NET_ATTR: &str = "net";

/// Names accepted by [`scenario_by_name`].
pub const SCENARIO_NAMES: [&str; 3] = ["headline", "ranking", "exactness"];

/// Everything needed to run one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: &'static str,
    pub config: ExperimentConfig,
    pub request: ConsumerRequest,
    pub profiles: Vec<ProviderProfile>,
}

/// Looks up a built-in scenario by name.
pub fn scenario_by_name(name: &str, seed: u64) -> Result<Scenario> {
    match name {
        "headline" => headline_scenario(seed),
        "ranking" => ranking_scenario(seed),
        "exactness" => exactness_scenario(seed),
        other => Err(Error::InvalidConfig(format!(
            "unknown scenario {other:?}; expected one of {SCENARIO_NAMES:?}"
        ))),
    }
}

/// Two-sine multiplicative seasonal profile over `[1, horizon]`: a slow
/// wave spanning the whole horizon plus a 7-step wave.
pub fn seasonal_values(
    horizon: usize,
    annual_amplitude: f64,
    annual_phase: f64,
    weekly_amplitude: f64,
    weekly_phase: f64,
) -> Vec<f64> {
    (1..=horizon)
        .map(|t| {
            let t = t as f64;
            1.0 + annual_amplitude * (TAU * t / horizon as f64 + annual_phase).sin()
                + weekly_amplitude * (TAU * t / 7.0 + weekly_phase).sin()
        })
        .collect()
}

/// A workload trace whose distinct demand values follow a Zipf law: the
/// `distinct` values are spread evenly over `[0.05, 0.95] * capacity`
/// (ascending), day counts fall off as `rank^-exponent` with the smallest
/// value the most frequent, every value occurs at least once, and the days
/// are shuffled into a deterministic order derived from `seed`.
pub fn zipf_workload(
    seed: u64,
    horizon: usize,
    capacity: f64,
    distinct: usize,
    exponent: f64,
) -> Result<WorkloadSeries> {
    if distinct == 0 || horizon < distinct {
        return Err(Error::InvalidConfig(format!(
            "cannot fit {distinct} distinct demands into {horizon} timestamps"
        )));
    }
    if !exponent.is_finite() || exponent <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "zipf exponent must be positive, got {exponent}"
        )));
    }
    let values: Vec<f64> = (0..distinct)
        .map(|r| {
            if distinct == 1 {
                0.5 * capacity
            } else {
                capacity * (0.05 + 0.90 * r as f64 / (distinct - 1) as f64)
            }
        })
        .collect();

    // One guaranteed day per value; the rest goes out by largest remainder
    // on Zipf weights (rank 1 = smallest value = most frequent).
    let mut counts = vec![1usize; distinct];
    let spare = horizon - distinct;
    let weights: Vec<f64> = (1..=distinct).map(|r| (r as f64).powf(-exponent)).collect();
    let total: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| spare as f64 * w / total).collect();
    let mut assigned = 0;
    for (count, quota) in counts.iter_mut().zip(&quotas) {
        let floor = quota.floor() as usize;
        *count += floor;
        assigned += floor;
    }
    let mut by_remainder: Vec<usize> = (0..distinct).collect();
    by_remainder.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &rank in by_remainder.iter().cycle().take(spare - assigned) {
        counts[rank] += 1;
    }

    let mut days: Vec<f64> = values
        .iter()
        .zip(&counts)
        .flat_map(|(&value, &count)| std::iter::repeat_n(value, count))
        .collect();
    debug_assert_eq!(days.len(), horizon);
    days.shuffle(&mut stream_rng(seed, &["workload"]));
    WorkloadSeries::new(TimeSeries::from_values(days)?, capacity)
}

/// The `{1, 0.97, 0.93}` base-performance ladder: nominal QoS at LOW
/// demand, degrading slightly as the VM fills up.
fn level_ladder(attrs: &[(&str, f64)]) -> BTreeMap<WorkloadLevel, BTreeMap<String, f64>> {
    let scaled = |factor: f64| {
        attrs
            .iter()
            .map(|&(name, base)| (name.to_string(), base * factor))
            .collect::<BTreeMap<_, _>>()
    };
    BTreeMap::from([
        (WorkloadLevel::Low, scaled(1.0)),
        (WorkloadLevel::Medium, scaled(0.97)),
        (WorkloadLevel::High, scaled(0.93)),
    ])
}

fn profile_of(
    scenario: &str,
    seed: u64,
    id: &str,
    cpu: (f64, Vec<f64>),
    net: (f64, Vec<f64>),
    noise_std: f64,
) -> Result<ProviderProfile> {
    let (cpu_base, seasonal_cpu) = cpu;
    let (net_base, seasonal_net) = net;
    let seasonal = QoSMatrix::from_series(vec![
        (CPU_ATTR.to_string(), TimeSeries::from_values(seasonal_cpu)?),
        (NET_ATTR.to_string(), TimeSeries::from_values(seasonal_net)?),
    ])?;
    let profile = ProviderProfile {
        provider_id: id.to_string(),
        base_perf: level_ladder(&[(CPU_ATTR, cpu_base), (NET_ATTR, net_base)]),
        seasonal,
        noise_std,
        rng_seed: derive_seed(seed, &["scenario", scenario, "provider", id]),
    };
    profile.validate()?;
    Ok(profile)
}

/// Noise-free reference profile used to derive the consumer's required QoS:
/// what a "typical" provider with the given seasonal shape would deliver.
fn reference_request(
    config: &ExperimentConfig,
    workload: WorkloadSeries,
    cpu_base: f64,
    net_base: f64,
    annual_amplitude: f64,
    weekly_amplitude: f64,
) -> Result<ConsumerRequest> {
    let horizon = config.horizon_days;
    let reference = ProviderProfile {
        provider_id: "reference".to_string(),
        base_perf: level_ladder(&[(CPU_ATTR, cpu_base), (NET_ATTR, net_base)]),
        seasonal: QoSMatrix::from_series(vec![
            (
                CPU_ATTR.to_string(),
                TimeSeries::from_values(seasonal_values(
                    horizon,
                    annual_amplitude,
                    0.0,
                    weekly_amplitude,
                    CPU_WEEKLY_PHASE,
                ))?,
            ),
            (
                NET_ATTR.to_string(),
                TimeSeries::from_values(seasonal_values(
                    horizon,
                    annual_amplitude,
                    0.0,
                    weekly_amplitude,
                    NET_WEEKLY_PHASE,
                ))?,
            ),
        ])?,
        noise_std: 0.0,
        rng_seed: 0,
    };
    let required = ground_truth_performance(&reference, &workload, &config.level_thresholds)?;
    ConsumerRequest::new(workload, required)
}

const CPU_WEEKLY_PHASE: f64 = 1.3;
const NET_WEEKLY_PHASE: f64 = 0.7;
const CAPACITY: f64 = 100.0;

/// Seven heterogeneous providers with distinct base performance, seasonal
/// amplitude/phase, and noise floors, evaluated against a 60-value Zipf
/// workload. The workhorse setup for scheme comparisons.
pub fn headline_scenario(seed: u64) -> Result<Scenario> {
    let config = ExperimentConfig {
        seed,
        ..ExperimentConfig::default()
    };
    let horizon = config.horizon_days;

    let cpu_bases = [100.0, 95.0, 120.0, 105.0, 90.0, 110.0, 85.0];
    let net_bases = [50.0, 55.0, 45.0, 60.0, 40.0, 52.0, 58.0];
    let annual_amps = [0.22, 0.25, 0.28, 0.31, 0.34, 0.38, 0.42];
    let noise_stds = [0.010, 0.012, 0.015, 0.018, 0.020, 0.040, 0.045];
    let weekly_amp = 0.12;

    let mut profiles = Vec::with_capacity(7);
    for i in 0..7 {
        let id = format!("p{}", i + 1);
        let annual_phase = 0.4 * i as f64;
        profiles.push(profile_of(
            "headline",
            seed,
            &id,
            (
                cpu_bases[i],
                seasonal_values(
                    horizon,
                    annual_amps[i],
                    annual_phase,
                    weekly_amp,
                    CPU_WEEKLY_PHASE,
                ),
            ),
            (
                net_bases[i],
                seasonal_values(
                    horizon,
                    annual_amps[i],
                    annual_phase,
                    weekly_amp,
                    NET_WEEKLY_PHASE,
                ),
            ),
            noise_stds[i],
        )?);
    }

    let workload = zipf_workload(seed, horizon, CAPACITY, 60, 1.2)?;
    let request = reference_request(&config, workload, 100.0, 50.0, 0.30, weekly_amp)?;
    Ok(Scenario {
        name: "headline",
        config,
        request,
        profiles,
    })
}

/// Seven equal-capability providers whose seasonal shape drifts away from
/// the consumer's reference shape by a phase shift that grows with the
/// provider index, so the true preference order is exactly `p1, ..., p7`.
///
/// On top of that, each provider deviates during the trial month (June,
/// days 151-180) by an extra wave whose amplitude *shrinks* with the
/// provider index: judged only by the trial window, the order looks
/// roughly reversed. Full-horizon methods should see through this; naive
/// short-term comparison should not.
pub fn ranking_scenario(seed: u64) -> Result<Scenario> {
    let config = ExperimentConfig {
        seed,
        ..ExperimentConfig::default()
    };
    let horizon = config.horizon_days;
    let (june_start, june_end) = config.trial_window();

    let june_wave = |t: usize| -> f64 {
        if (june_start..=june_end).contains(&t) {
            (TAU * (t - june_start) as f64 / (june_end - june_start + 1) as f64).sin()
        } else {
            0.0
        }
    };

    let mut profiles = Vec::with_capacity(7);
    for i in 0..7usize {
        let id = format!("p{}", i + 1);
        let phase_shift = 0.15 * i as f64;
        let june_amp = 0.12 * (6 - i) as f64 / 6.0;
        let with_june = |weekly_phase: f64| -> Vec<f64> {
            let mut values = seasonal_values(horizon, 0.25, phase_shift, 0.08, weekly_phase);
            for (index, value) in values.iter_mut().enumerate() {
                *value += june_amp * june_wave(index + 1);
            }
            values
        };
        profiles.push(profile_of(
            "ranking",
            seed,
            &id,
            (100.0, with_june(CPU_WEEKLY_PHASE)),
            (50.0, with_june(NET_WEEKLY_PHASE)),
            0.008,
        )?);
    }

    let workload = zipf_workload(seed, horizon, CAPACITY, 60, 1.2)?;
    let request = reference_request(&config, workload, 100.0, 50.0, 0.25, 0.08)?;
    Ok(Scenario {
        name: "ranking",
        config,
        request,
        profiles,
    })
}

/// Three noise-free providers over a workload with only 12 distinct
/// demands — fewer than the 30 trial slots, so every demand the horizon
/// will ever see can be observed during the trial.
pub fn exactness_scenario(seed: u64) -> Result<Scenario> {
    let config = ExperimentConfig {
        provider_count: 3,
        seed,
        ..ExperimentConfig::default()
    };
    let horizon = config.horizon_days;

    let cpu_bases = [100.0, 110.0, 90.0];
    let net_bases = [50.0, 45.0, 55.0];
    let mut profiles = Vec::with_capacity(3);
    for i in 0..3 {
        let id = format!("p{}", i + 1);
        let annual_phase = 0.5 * i as f64;
        profiles.push(profile_of(
            "exactness",
            seed,
            &id,
            (
                cpu_bases[i],
                seasonal_values(horizon, 0.30, annual_phase, 0.10, CPU_WEEKLY_PHASE),
            ),
            (
                net_bases[i],
                seasonal_values(horizon, 0.30, annual_phase, 0.10, NET_WEEKLY_PHASE),
            ),
            0.0,
        )?);
    }

    let workload = zipf_workload(seed, horizon, CAPACITY, 12, 1.2)?;
    let request = reference_request(&config, workload, 100.0, 50.0, 0.30, 0.10)?;
    Ok(Scenario {
        name: "exactness",
        config,
        request,
        profiles,
    })
}
