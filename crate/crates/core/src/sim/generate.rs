//! Draws synthetic observations from a provider profile: long-term ground
//! truth, trial measurements, and the past-user histories that provider
//! signatures are built from.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::confidence::TrialExperience;
use crate::error::{Error, Result};
use crate::series::{QoSMatrix, TimeSeries, TimeWindow, WorkloadSeries};
use crate::signature::{generate_signature, IaaSSignature, TrialObservation};
use crate::trial::{level_of, LevelThresholds, TrialPlan};

use super::rng::stream_rng;
use super::ProviderProfile;

/// Lower bound on the multiplicative noise factor `1 + eps`, keeping
/// generated QoS values strictly positive even under extreme draws.
pub const NOISE_FLOOR: f64 = 1e-3;

/// One noisy multiplicative sample: `base * seasonal * (1 + eps)`.
fn sample(base: f64, seasonal: f64, noise: Option<&Normal<f64>>, rng: &mut impl Rng) -> f64 {
    let factor = match noise {
        Some(normal) => (1.0 + normal.sample(rng)).max(NOISE_FLOOR),
        None => 1.0,
    };
    base * seasonal * factor
}

fn noise_distribution(profile: &ProviderProfile) -> Result<Option<Normal<f64>>> {
    if profile.noise_std == 0.0 {
        return Ok(None);
    }
    Normal::new(0.0, profile.noise_std)
        .map(Some)
        .map_err(|e| Error::InvalidProfile(format!("{}: {e}", profile.provider_id)))
}

fn seasonal_at(profile: &ProviderProfile, attribute: &str, t: usize) -> Result<f64> {
    profile
        .seasonal
        .get(attribute)
        .and_then(|series| series.value_at(t))
        .ok_or(Error::HorizonMismatch {
            expected: t,
            found: profile.seasonal.series_len(),
        })
}

fn base_at(
    profile: &ProviderProfile,
    demand: f64,
    capacity: f64,
    thresholds: &LevelThresholds,
    attribute: &str,
) -> Result<f64> {
    let level = level_of(demand, capacity, thresholds);
    profile.base_value(level, attribute).ok_or_else(|| {
        Error::InvalidProfile(format!(
            "{}: base_perf[{level:?}] has no value for {attribute:?}",
            profile.provider_id
        ))
    })
}

/// The provider's actual QoS over the workload's horizon, one series per
/// seasonal attribute. Deterministic per profile seed; a noise-free
/// profile yields exactly `base * seasonal`.
pub fn ground_truth_performance(
    profile: &ProviderProfile,
    workload: &WorkloadSeries,
    thresholds: &LevelThresholds,
) -> Result<QoSMatrix> {
    profile.validate()?;
    if workload.is_empty() {
        return Err(Error::EmptyWorkload);
    }
    let noise = noise_distribution(profile)?;
    let start = workload.demands().start_index();
    let mut matrix = QoSMatrix::new();
    for name in profile.seasonal.attribute_names() {
        let mut rng = stream_rng(profile.rng_seed, &["ground-truth", name]);
        let mut values = Vec::with_capacity(workload.len());
        for (t, demand) in workload.demands().iter() {
            let base = base_at(profile, demand, workload.capacity(), thresholds, name)?;
            let seasonal = seasonal_at(profile, name, t)?;
            values.push(sample(base, seasonal, noise.as_ref(), &mut rng));
        }
        matrix.insert(name.to_string(), TimeSeries::new(start, values)?)?;
    }
    Ok(matrix)
}

/// Executes a trial plan against the synthetic provider: slot `i` of every
/// stream runs on the window's `i`-th day and measures the profile's
/// performance for that entry's demand at that day.
///
/// Noise-free profiles make the observation equal the ground-truth value
/// for the same (timestamp, demand) pair, which is what lets exactness
/// checks close the loop.
pub fn simulate_trial(
    profile: &ProviderProfile,
    plan: &TrialPlan,
    trial_window: TimeWindow,
    thresholds: &LevelThresholds,
) -> Result<TrialExperience> {
    profile.validate()?;
    if plan.is_empty() {
        return Err(Error::EmptyPlan);
    }
    for stream in &plan.streams {
        if stream.len() != trial_window.len() {
            return Err(Error::WindowMismatch {
                start: trial_window.start(),
                end: trial_window.end(),
            });
        }
    }
    let noise = noise_distribution(profile)?;

    let mut observed = Vec::with_capacity(plan.streams.len());
    for (stream_index, stream) in plan.streams.iter().enumerate() {
        let mut matrix = QoSMatrix::new();
        for name in profile.seasonal.attribute_names() {
            let mut rng = stream_rng(
                profile.rng_seed,
                &[
                    "trial",
                    plan.scheme.as_str(),
                    &stream_index.to_string(),
                    name,
                ],
            );
            let mut values = Vec::with_capacity(stream.len());
            for (offset, entry) in stream.iter().enumerate() {
                let day = trial_window.start() + offset;
                let base = base_at(profile, entry.demand, plan.capacity, thresholds, name)?;
                let seasonal = seasonal_at(profile, name, day)?;
                values.push(sample(base, seasonal, noise.as_ref(), &mut rng));
            }
            matrix.insert(
                name.to_string(),
                TimeSeries::new(trial_window.start(), values)?,
            )?;
        }
        observed.push(matrix);
    }
    TrialExperience::new(
        profile.provider_id.clone(),
        plan.clone(),
        observed,
        trial_window,
    )
}

/// Synthesizes a provider signature from past trial users.
///
/// Each window in `windows` represents one user who ran the shared
/// `reference` workload during their window and recorded the provider's
/// QoS; the resulting observations are aggregated and normalized into a
/// signature over `[1, reference.len()]`. Windows must collectively cover
/// the whole period or the coverage gap is reported.
pub fn build_signature_from_history(
    profile: &ProviderProfile,
    reference: &WorkloadSeries,
    windows: &[TimeWindow],
    thresholds: &LevelThresholds,
) -> Result<IaaSSignature> {
    profile.validate()?;
    if reference.is_empty() {
        return Err(Error::EmptyWorkload);
    }
    if reference.demands().start_index() != 1 {
        return Err(Error::InvalidConfig(
            "signature reference workload must start at timestamp 1".to_string(),
        ));
    }
    if windows.is_empty() {
        return Err(Error::NoObservations);
    }
    let noise = noise_distribution(profile)?;
    let period = reference.len();

    let mut observations = Vec::with_capacity(windows.len());
    for (user, window) in windows.iter().enumerate() {
        let mut matrix = QoSMatrix::new();
        for name in profile.seasonal.attribute_names() {
            let mut rng = stream_rng(profile.rng_seed, &["history", &user.to_string(), name]);
            let mut values = Vec::with_capacity(window.len());
            for t in window.timestamps() {
                let demand = reference.demand_at(t).ok_or(Error::OutOfRange {
                    start: window.start(),
                    len: window.len(),
                    available_start: 1,
                    available_len: period,
                })?;
                let base = base_at(profile, demand, reference.capacity(), thresholds, name)?;
                let seasonal = seasonal_at(profile, name, t)?;
                values.push(sample(base, seasonal, noise.as_ref(), &mut rng));
            }
            matrix.insert(name.to_string(), TimeSeries::new(window.start(), values)?)?;
        }
        observations.push(TrialObservation::new(
            format!("user-{user}"),
            matrix,
            *window,
        )?);
    }
    generate_signature(&profile.provider_id, &observations, period)
}

/// Contiguous windows tiling `[1, period]` for `users` synthetic history
/// users; the last window absorbs the remainder.
pub fn tile_windows(period: usize, users: usize) -> Result<Vec<TimeWindow>> {
    if users == 0 || period < users {
        return Err(Error::InvalidConfig(format!(
            "cannot tile {period} timestamps across {users} users"
        )));
    }
    let base = period / users;
    (0..users)
        .map(|u| {
            let start = u * base + 1;
            let end = if u == users - 1 {
                period
            } else {
                (u + 1) * base
            };
            TimeWindow::new(start, end)
        })
        .collect()
}
