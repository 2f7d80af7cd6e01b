//! Trial confidence: how well a short trial's observations track the
//! provider's signature over the same calendar window.
//!
//! A high score means the trial saw the provider behaving "as usual", so
//! extrapolating from the trial is defensible; a low score means the
//! provider should be treated with suspicion or dropped.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{QoSMatrix, TimeSeries, TimeWindow};
use crate::signature::{signature_window, IaaSSignature};
use crate::stats::{pearson, std_normalize};
use crate::trial::TrialPlan;

/// Everything a consumer learns from running one trial against one
/// provider: the plan that was executed, when it ran, and what was
/// measured (one observation matrix per VM stream).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialExperience {
    pub provider_id: String,
    pub plan: TrialPlan,
    /// One QoS matrix per plan stream; series are anchored at
    /// `trial_window.start()` and indexed by trial slot.
    pub observed: Vec<QoSMatrix>,
    pub trial_window: TimeWindow,
}

impl TrialExperience {
    pub fn new(
        provider_id: String,
        plan: TrialPlan,
        observed: Vec<QoSMatrix>,
        trial_window: TimeWindow,
    ) -> Result<Self> {
        if plan.is_empty() {
            return Err(Error::EmptyPlan);
        }
        if observed.len() != plan.streams.len() {
            return Err(Error::LengthMismatch {
                left: observed.len(),
                right: plan.streams.len(),
            });
        }
        for (stream, matrix) in plan.streams.iter().zip(&observed) {
            if matrix.is_empty() {
                return Err(Error::NoAttributes);
            }
            if matrix.series_len() != stream.len() || stream.len() != trial_window.len() {
                return Err(Error::WindowMismatch {
                    start: trial_window.start(),
                    end: trial_window.end(),
                });
            }
            if matrix.start_index() != trial_window.start() {
                return Err(Error::StartMismatch {
                    left: matrix.start_index(),
                    right: trial_window.start(),
                });
            }
            for (index, entry) in stream.iter().enumerate() {
                if entry.trial_slot != index + 1 {
                    return Err(Error::InvalidConfig(format!(
                        "trial slots must run 1..{} in order; found slot {} at position {}",
                        stream.len(),
                        entry.trial_slot,
                        index + 1
                    )));
                }
            }
        }
        Ok(Self {
            provider_id,
            plan,
            observed,
            trial_window,
        })
    }

    /// Observed value for an entry of stream `stream` at slot `slot`
    /// (1-based), for one attribute.
    pub fn observed_value(&self, stream: usize, slot: usize, attribute: &str) -> Option<f64> {
        self.observed
            .get(stream)?
            .get(attribute)?
            .values()
            .get(slot - 1)
            .copied()
    }

    /// Calendar timestamp at which a slot of this trial executed.
    pub fn execution_time(&self, slot: usize) -> usize {
        self.trial_window.start() + slot - 1
    }
}

/// Per-attribute and total similarity between a trial and a signature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceReport {
    pub provider_id: String,
    pub per_attribute: BTreeMap<String, f64>,
    /// Arithmetic mean of the per-attribute values.
    pub total: f64,
    pub threshold: f64,
    pub passed: bool,
    /// Attributes whose observed series or signature slice was flat, for
    /// which the correlation is defined as 0.
    pub degenerate_attributes: Vec<String>,
    /// Signature attributes with no counterpart in the observation (and
    /// vice versa); skipped, not penalized.
    pub skipped_attributes: Vec<String>,
}

/// Correlation between one observed attribute series and the signature
/// slice covering the same window.
///
/// The observation is first divided by its standard deviation so the score
/// ignores absolute magnitude. A flat observation or flat slice carries no
/// shape information: the confidence is defined as 0 and flagged via the
/// second tuple element.
pub fn attribute_confidence(
    observed: &TimeSeries,
    signature_slice: &TimeSeries,
) -> Result<(f64, bool)> {
    if observed.len() != signature_slice.len() {
        return Err(Error::LengthMismatch {
            left: observed.len(),
            right: signature_slice.len(),
        });
    }
    let normalized = match std_normalize(observed) {
        Ok(series) => series,
        Err(Error::ZeroVariance) => return Ok((0.0, true)),
        Err(other) => return Err(other),
    };
    match pearson(&normalized, signature_slice) {
        Ok(r) => Ok((r, false)),
        Err(Error::ZeroVariance) => Ok((0.0, true)),
        Err(other) => Err(other),
    }
}

/// Mean of the per-attribute confidences.
pub fn total_confidence(per_attribute: &BTreeMap<String, f64>) -> Result<f64> {
    if per_attribute.is_empty() {
        return Err(Error::NoAttributes);
    }
    Ok(per_attribute.values().sum::<f64>() / per_attribute.len() as f64)
}

/// Scores a whole trial experience against a provider signature.
///
/// For every attribute present in both the observation and the signature,
/// the observed series (per stream, averaged across streams) is correlated
/// with the signature slice at the trial window's timestamps. Attributes
/// present on only one side are recorded as skipped.
pub fn experience_confidence(
    experience: &TrialExperience,
    signature: &IaaSSignature,
    threshold: f64,
) -> Result<ConfidenceReport> {
    let window = experience.trial_window;
    if signature.period() < window.end() {
        return Err(Error::SignatureTooShort {
            period: signature.period(),
            required: window.end(),
        });
    }
    let slice = signature_window(signature, window.start(), window.len())?;

    let mut per_attribute = BTreeMap::new();
    let mut degenerate = Vec::new();
    let mut skipped = Vec::new();
    for (name, slice_series) in slice.iter() {
        let mut values = Vec::new();
        let mut saw_degenerate = false;
        for matrix in &experience.observed {
            if let Some(observed) = matrix.get(name) {
                let (value, flat) = attribute_confidence(observed, slice_series)?;
                values.push(value);
                saw_degenerate |= flat;
            }
        }
        if values.is_empty() {
            skipped.push(name.to_string());
            continue;
        }
        per_attribute.insert(
            name.to_string(),
            values.iter().sum::<f64>() / values.len() as f64,
        );
        if saw_degenerate {
            degenerate.push(name.to_string());
        }
    }
    for matrix in &experience.observed {
        for name in matrix.attribute_names() {
            if slice.get(name).is_none() && !skipped.iter().any(|s| s == name) {
                skipped.push(name.to_string());
            }
        }
    }

    let total = total_confidence(&per_attribute)?;
    Ok(ConfidenceReport {
        provider_id: experience.provider_id.clone(),
        per_attribute,
        total,
        threshold,
        passed: total >= threshold,
        degenerate_attributes: degenerate,
        skipped_attributes: skipped,
    })
}

/// Splits reports into those meeting the threshold and those below it,
/// preserving input order.
pub fn filter_providers(
    reports: Vec<ConfidenceReport>,
    threshold: f64,
) -> (Vec<ConfidenceReport>, Vec<ConfidenceReport>) {
    reports
        .into_iter()
        .partition(|report| report.total >= threshold)
}
