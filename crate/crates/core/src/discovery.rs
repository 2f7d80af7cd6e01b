//! Long-term performance discovery: extrapolate a short trial to a full
//! horizon of the consumer's workload.
//!
//! For each future timestamp the trial entry with the nearest demand is
//! looked up. The naive approach (LPD) replays that entry's observed
//! value as-is; the signature-based approach (SPD) additionally rescales
//! it by the ratio of the provider signature at the target timestamp to
//! the signature at the time the entry actually ran, which transplants the
//! provider's seasonal behaviour onto the prediction.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::confidence::TrialExperience;
use crate::error::{Error, Result};
use crate::series::{QoSMatrix, TimeSeries, WorkloadSeries};
use crate::signature::IaaSSignature;
use crate::trial::{EntryRef, TrialPlan};

/// Which prediction rule produced a [`PerformancePrediction`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiscoveryMethod {
    /// Signature-based prediction with seasonal correction.
    Spd,
    /// Plain nearest-demand replay of trial observations.
    Lpd,
}

/// Predicted QoS over the full horizon, one series per attribute, plus a
/// per-timestamp record of which trial entry backed each prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformancePrediction {
    pub provider_id: String,
    pub method: DiscoveryMethod,
    pub predicted: QoSMatrix,
    /// `matched[t - 1]` is the plan entry whose observation produced the
    /// prediction for timestamp `t`.
    pub matched: Vec<EntryRef>,
}

/// Finds the plan entry whose demand is closest to `demand` (absolute
/// difference). Ties resolve toward the earlier entry in stream-major
/// order, so results are deterministic.
pub fn nearest_neighbor(demand: f64, plan: &TrialPlan) -> Result<EntryRef> {
    let mut best: Option<(f64, EntryRef)> = None;
    for (at, entry) in plan.flat_entries() {
        let distance = (demand - entry.demand).abs();
        match best {
            Some((best_distance, _)) if best_distance <= distance => {}
            _ => best = Some((distance, at)),
        }
    }
    best.map(|(_, at)| at).ok_or(Error::EmptyPlan)
}

/// Memoized nearest-neighbor lookup keyed by demand bit pattern; real
/// traces repeat few distinct demands, so this turns the per-timestamp
/// scan into a handful of scans overall.
struct NeighborCache<'a> {
    plan: &'a TrialPlan,
    cache: HashMap<u64, EntryRef>,
}

impl<'a> NeighborCache<'a> {
    fn new(plan: &'a TrialPlan) -> Self {
        Self {
            plan,
            cache: HashMap::new(),
        }
    }

    fn get(&mut self, demand: f64) -> Result<EntryRef> {
        if let Some(&at) = self.cache.get(&demand.to_bits()) {
            return Ok(at);
        }
        let at = nearest_neighbor(demand, self.plan)?;
        self.cache.insert(demand.to_bits(), at);
        Ok(at)
    }
}

fn check_experience_window(workload: &WorkloadSeries, experience: &TrialExperience) -> Result<()> {
    if workload.is_empty() {
        return Err(Error::EmptyWorkload);
    }
    if experience.plan.is_empty() {
        return Err(Error::EmptyPlan);
    }
    let window = experience.trial_window;
    let horizon_end = workload.demands().start_index() + workload.len() - 1;
    if window.end() > horizon_end {
        return Err(Error::WindowMismatch {
            start: window.start(),
            end: window.end(),
        });
    }
    Ok(())
}

/// Signature-based performance discovery over the workload's horizon.
///
/// For timestamp `t` with matched entry `e` (executed at trial time `t'`),
/// each attribute is predicted as
/// `signature(t) / signature(t') * observed(e)`. The signature must cover
/// the trial window; horizons longer than the signature period wrap around
/// modulo the period.
pub fn spd_discover(
    workload: &WorkloadSeries,
    experience: &TrialExperience,
    signature: &IaaSSignature,
) -> Result<PerformancePrediction> {
    check_experience_window(workload, experience)?;
    if signature.period() < experience.trial_window.end() {
        return Err(Error::SignatureTooShort {
            period: signature.period(),
            required: experience.trial_window.end(),
        });
    }
    let attributes = attribute_list(experience)?;
    for name in &attributes {
        if signature.matrix().get(name).is_none() {
            return Err(Error::AttributeMismatch {
                expected: attributes.clone(),
                found: signature
                    .matrix()
                    .attribute_names()
                    .map(String::from)
                    .collect(),
            });
        }
    }

    let mut neighbors = NeighborCache::new(&experience.plan);
    let start = workload.demands().start_index();
    let mut matched = Vec::with_capacity(workload.len());
    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(workload.len()); attributes.len()];

    for (t, demand) in workload.demands().iter() {
        let at = neighbors.get(demand)?;
        let entry = experience.plan.entry(at).expect("cache returns valid refs");
        let trial_time = experience.execution_time(entry.trial_slot);
        for (column, name) in columns.iter_mut().zip(&attributes) {
            let s_target = signature
                .value_at_wrapped(name, t)
                .expect("attribute presence was checked");
            let s_trial = signature
                .value_at_wrapped(name, trial_time)
                .expect("trial window lies within the period");
            if s_trial == 0.0 {
                return Err(Error::ZeroSignatureValue {
                    attribute: name.clone(),
                    timestamp: trial_time,
                });
            }
            let observed = experience
                .observed_value(at.stream, entry.trial_slot, name)
                .expect("attribute list comes from the observation");
            column.push(s_target / s_trial * observed);
        }
        matched.push(at);
    }

    Ok(PerformancePrediction {
        provider_id: experience.provider_id.clone(),
        method: DiscoveryMethod::Spd,
        predicted: build_matrix(&attributes, columns, start)?,
        matched,
    })
}

/// Naive discovery: the prediction for each timestamp is the matched trial
/// entry's observed value, with no seasonal correction.
pub fn lpd_discover(
    workload: &WorkloadSeries,
    experience: &TrialExperience,
) -> Result<PerformancePrediction> {
    check_experience_window(workload, experience)?;
    let attributes = attribute_list(experience)?;

    let mut neighbors = NeighborCache::new(&experience.plan);
    let start = workload.demands().start_index();
    let mut matched = Vec::with_capacity(workload.len());
    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(workload.len()); attributes.len()];

    for (_, demand) in workload.demands().iter() {
        let at = neighbors.get(demand)?;
        let entry = experience.plan.entry(at).expect("cache returns valid refs");
        for (column, name) in columns.iter_mut().zip(&attributes) {
            let observed = experience
                .observed_value(at.stream, entry.trial_slot, name)
                .expect("attribute list comes from the observation");
            column.push(observed);
        }
        matched.push(at);
    }

    Ok(PerformancePrediction {
        provider_id: experience.provider_id.clone(),
        method: DiscoveryMethod::Lpd,
        predicted: build_matrix(&attributes, columns, start)?,
        matched,
    })
}

/// Attribute names common to every observation stream, in first-stream
/// order.
fn attribute_list(experience: &TrialExperience) -> Result<Vec<String>> {
    let first = experience.observed.first().ok_or(Error::NoAttributes)?;
    let names: Vec<String> = first
        .attribute_names()
        .filter(|name| experience.observed.iter().all(|m| m.get(name).is_some()))
        .map(String::from)
        .collect();
    if names.is_empty() {
        return Err(Error::NoAttributes);
    }
    Ok(names)
}

fn build_matrix(attributes: &[String], columns: Vec<Vec<f64>>, start: usize) -> Result<QoSMatrix> {
    let mut matrix = QoSMatrix::new();
    for (name, values) in attributes.iter().zip(columns) {
        matrix.insert(name.clone(), TimeSeries::new(start, values)?)?;
    }
    Ok(matrix)
}
