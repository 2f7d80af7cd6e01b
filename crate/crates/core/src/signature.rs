//! Provider signatures: per-timestamp averages of past trial users'
//! observations, normalized into a scale-free description of how a
//! provider's QoS moves over one reference period.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{QoSMatrix, TimeSeries, TimeWindow};
use crate::stats::std_normalize;

/// One past trial user's QoS record: what they measured and when.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialObservation {
    pub user_id: String,
    /// Measured QoS values; one series per attribute, anchored at
    /// `window.start()` and exactly `window.len()` samples long.
    pub observed: QoSMatrix,
    /// Portion of the reference period this user was active in.
    pub window: TimeWindow,
}

impl TrialObservation {
    pub fn new(user_id: String, observed: QoSMatrix, window: TimeWindow) -> Result<Self> {
        if observed.is_empty() {
            return Err(Error::NoAttributes);
        }
        if observed.series_len() != window.len() {
            return Err(Error::LengthMismatch {
                left: observed.series_len(),
                right: window.len(),
            });
        }
        if observed.start_index() != window.start() {
            return Err(Error::StartMismatch {
                left: observed.start_index(),
                right: window.start(),
            });
        }
        Ok(Self {
            user_id,
            observed,
            window,
        })
    }
}

/// A provider's relative-performance profile over one reference period.
///
/// Each attribute series is the per-timestamp mean of past observations
/// divided by that mean series' population standard deviation, so values
/// are in "standard deviations" and carry no absolute unit. An attribute
/// whose aggregate had zero variance is stored as all-ones and listed in
/// `flat_attributes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IaaSSignature {
    provider_id: String,
    matrix: QoSMatrix,
    /// How many observations covered each timestamp of the period.
    coverage: Vec<u32>,
    flat_attributes: Vec<String>,
}

impl IaaSSignature {
    /// Assembles a signature from already-normalized parts, enforcing that
    /// every timestamp was covered by at least one observation.
    pub fn new(
        provider_id: String,
        matrix: QoSMatrix,
        coverage: Vec<u32>,
        flat_attributes: Vec<String>,
    ) -> Result<Self> {
        if matrix.is_empty() {
            return Err(Error::NoAttributes);
        }
        if coverage.len() != matrix.series_len() {
            return Err(Error::LengthMismatch {
                left: coverage.len(),
                right: matrix.series_len(),
            });
        }
        let missing: Vec<usize> = coverage
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 0)
            .map(|(i, _)| i + 1)
            .collect();
        if !missing.is_empty() {
            return Err(Error::CoverageGap { missing });
        }
        Ok(Self {
            provider_id,
            matrix,
            coverage,
            flat_attributes,
        })
    }

    pub fn provider_id(&self) -> &str {
        &self.provider_id
    }

    pub fn matrix(&self) -> &QoSMatrix {
        &self.matrix
    }

    /// Length of the reference period the signature describes.
    pub fn period(&self) -> usize {
        self.matrix.series_len()
    }

    pub fn coverage(&self) -> &[u32] {
        &self.coverage
    }

    pub fn flat_attributes(&self) -> &[String] {
        &self.flat_attributes
    }

    /// Signature value for `attribute` at timestamp `t`, wrapping modulo
    /// the period so horizons longer than one period repeat the profile.
    pub fn value_at_wrapped(&self, attribute: &str, t: usize) -> Option<f64> {
        let series = self.matrix.get(attribute)?;
        let period = series.len();
        if period == 0 || t < 1 {
            return None;
        }
        Some(series.values()[(t - 1) % period])
    }
}

/// Averages trial observations into one series per attribute over a period
/// of `period_length` timestamps, plus a per-timestamp coverage count.
///
/// Every observation must report the same attribute set and lie within
/// `[1, period_length]`; every timestamp must be covered by at least one
/// observation, otherwise the gap timestamps are reported.
pub fn aggregate_observations(
    observations: &[TrialObservation],
    period_length: usize,
) -> Result<(QoSMatrix, Vec<u32>)> {
    if observations.is_empty() {
        return Err(Error::NoObservations);
    }
    if period_length == 0 {
        return Err(Error::EmptySeries);
    }
    let first = &observations[0].observed;
    for obs in &observations[1..] {
        if !first.same_attribute_set(&obs.observed) {
            return Err(Error::AttributeMismatch {
                expected: first.attribute_names().map(String::from).collect(),
                found: obs.observed.attribute_names().map(String::from).collect(),
            });
        }
    }
    for obs in observations {
        if obs.window.end() > period_length {
            return Err(Error::OutOfRange {
                start: obs.window.start(),
                len: obs.window.len(),
                available_start: 1,
                available_len: period_length,
            });
        }
    }

    let mut coverage = vec![0u32; period_length];
    for obs in observations {
        for t in obs.window.timestamps() {
            coverage[t - 1] += 1;
        }
    }
    let missing: Vec<usize> = coverage
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == 0)
        .map(|(i, _)| i + 1)
        .collect();
    if !missing.is_empty() {
        return Err(Error::CoverageGap { missing });
    }

    let mut matrix = QoSMatrix::new();
    for name in first.attribute_names() {
        let mut sums = vec![0.0f64; period_length];
        for obs in observations {
            let series = obs.observed.get(name).expect("attribute set was checked");
            for (t, value) in series.iter() {
                sums[t - 1] += value;
            }
        }
        let means: Vec<f64> = sums
            .iter()
            .zip(&coverage)
            .map(|(sum, &count)| sum / count as f64)
            .collect();
        matrix.insert(name.to_string(), TimeSeries::new(1, means)?)?;
    }
    Ok((matrix, coverage))
}

/// Builds a provider signature: aggregate the observations, then divide
/// each attribute series by its population standard deviation.
///
/// A zero-variance aggregate cannot be normalized; such attributes become
/// all-ones and are flagged in the result's `flat_attributes`.
pub fn generate_signature(
    provider_id: &str,
    observations: &[TrialObservation],
    period_length: usize,
) -> Result<IaaSSignature> {
    let (aggregate, coverage) = aggregate_observations(observations, period_length)?;
    let mut matrix = QoSMatrix::new();
    let mut flat = Vec::new();
    for (name, series) in aggregate.iter() {
        match std_normalize(series) {
            Ok(normalized) => matrix.insert(name.to_string(), normalized)?,
            Err(Error::ZeroVariance) => {
                flat.push(name.to_string());
                matrix.insert(
                    name.to_string(),
                    TimeSeries::constant(series.start_index(), series.len(), 1.0)?,
                )?;
            }
            Err(other) => return Err(other),
        }
    }
    IaaSSignature::new(provider_id.to_string(), matrix, coverage, flat)
}

/// Slices `length` timestamps of the signature starting at `start`,
/// e.g. to line a signature up against a trial window.
pub fn signature_window(
    signature: &IaaSSignature,
    start: usize,
    length: usize,
) -> Result<QoSMatrix> {
    signature.matrix().window(start, length)
}
