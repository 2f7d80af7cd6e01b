//! Provider ranking: distance between what a consumer asked for and what
//! each provider is predicted (or known) to deliver, plus rank-order
//! agreement between two rankings.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::discovery::{DiscoveryMethod, PerformancePrediction};
use crate::error::{Error, Result};
use crate::series::{QoSMatrix, WorkloadSeries};
use crate::stats::{min_max_normalize, nrmse, rmse};

/// What a consumer brings to the ranking step: their workload and the QoS
/// levels they want over the same horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsumerRequest {
    pub workload: WorkloadSeries,
    pub required_qos: QoSMatrix,
}

impl ConsumerRequest {
    pub fn new(workload: WorkloadSeries, required_qos: QoSMatrix) -> Result<Self> {
        if required_qos.is_empty() {
            return Err(Error::NoAttributes);
        }
        if required_qos.series_len() != workload.len() {
            return Err(Error::HorizonMismatch {
                expected: workload.len(),
                found: required_qos.series_len(),
            });
        }
        if required_qos.start_index() != workload.demands().start_index() {
            return Err(Error::StartMismatch {
                left: workload.demands().start_index(),
                right: required_qos.start_index(),
            });
        }
        Ok(Self {
            workload,
            required_qos,
        })
    }

    pub fn horizon(&self) -> usize {
        self.workload.len()
    }
}

/// Which comparison produced a ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RankingMethod {
    /// Signature-corrected predictions over the full horizon.
    Spd,
    /// Naive nearest-demand predictions over the full horizon.
    Lpd,
    /// Raw trial observations compared over the trial window only.
    ShortTerm,
    /// Ground-truth performance; the reference ranking.
    Expected,
}

impl RankingMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            RankingMethod::Spd => "SPD",
            RankingMethod::Lpd => "LPD",
            RankingMethod::ShortTerm => "SHORT_TERM",
            RankingMethod::Expected => "EXPECTED",
        }
    }
}

impl std::fmt::Display for RankingMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<DiscoveryMethod> for RankingMethod {
    fn from(method: DiscoveryMethod) -> Self {
        match method {
            DiscoveryMethod::Spd => RankingMethod::Spd,
            DiscoveryMethod::Lpd => RankingMethod::Lpd,
        }
    }
}

/// A scored, ordered comparison of providers. Lower scores are better;
/// `order` lists provider ids best-first with ties broken by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub method: RankingMethod,
    pub scores: BTreeMap<String, f64>,
    pub order: Vec<String>,
    /// Attributes that were constant on either side of the comparison for
    /// a provider (scored via the 0.5 midpoint convention).
    pub constant_flags: BTreeMap<String, Vec<String>>,
}

/// Distance score for one provider plus the attributes that hit the
/// constant-series convention.
#[derive(Debug, Clone, PartialEq)]
pub struct ProviderScore {
    pub value: f64,
    pub constant_attributes: Vec<String>,
}

/// Sum over attributes of the RMSE between the min-max-normalized
/// requested and predicted series. Scale-free: only shapes matter.
pub fn provider_score(requested: &QoSMatrix, predicted: &QoSMatrix) -> Result<ProviderScore> {
    provider_score_weighted(requested, predicted, None)
}

/// [`provider_score`] with optional per-attribute weights (missing
/// attributes default to weight 1).
pub fn provider_score_weighted(
    requested: &QoSMatrix,
    predicted: &QoSMatrix,
    weights: Option<&BTreeMap<String, f64>>,
) -> Result<ProviderScore> {
    if requested.is_empty() {
        return Err(Error::NoAttributes);
    }
    if !requested.same_attribute_set(predicted) {
        return Err(Error::AttributeMismatch {
            expected: requested.attribute_names().map(String::from).collect(),
            found: predicted.attribute_names().map(String::from).collect(),
        });
    }
    if requested.series_len() != predicted.series_len() {
        return Err(Error::LengthMismatch {
            left: requested.series_len(),
            right: predicted.series_len(),
        });
    }

    let mut value = 0.0;
    let mut constant = Vec::new();
    for (name, requested_series) in requested.iter() {
        let predicted_series = predicted.get(name).expect("attribute set was checked");
        let scaled_requested = min_max_normalize(requested_series)?;
        let scaled_predicted = min_max_normalize(predicted_series)?;
        if scaled_requested.constant_input || scaled_predicted.constant_input {
            constant.push(name.to_string());
        }
        let weight = weights
            .and_then(|map| map.get(name).copied())
            .unwrap_or(1.0);
        value += weight * rmse(&scaled_requested.series, &scaled_predicted.series)?;
    }
    Ok(ProviderScore {
        value,
        constant_attributes: constant,
    })
}

fn order_of(scores: &BTreeMap<String, f64>) -> Vec<String> {
    let mut order: Vec<&String> = scores.keys().collect();
    order.sort_by(|a, b| scores[*a].total_cmp(&scores[*b]).then_with(|| a.cmp(b)));
    order.into_iter().cloned().collect()
}

/// Ranks providers by shape distance between the requested QoS and a set
/// of matrices (one per provider). This is the scoring core shared by the
/// prediction-based and trial-window rankings.
pub fn rank_matrices(
    requested: &QoSMatrix,
    entries: &[(String, &QoSMatrix)],
    method: RankingMethod,
) -> Result<RankingReport> {
    if entries.is_empty() {
        return Err(Error::NoPredictions);
    }
    let mut scores = BTreeMap::new();
    let mut flags = BTreeMap::new();
    for (provider_id, matrix) in entries {
        if scores.contains_key(provider_id) {
            return Err(Error::DuplicateProvider(provider_id.clone()));
        }
        let score = provider_score(requested, matrix)?;
        if !score.constant_attributes.is_empty() {
            flags.insert(provider_id.clone(), score.constant_attributes);
        }
        scores.insert(provider_id.clone(), score.value);
    }
    let order = order_of(&scores);
    Ok(RankingReport {
        method,
        scores,
        order,
        constant_flags: flags,
    })
}

/// Ranks providers by the distance between the consumer's required QoS and
/// each provider's predicted QoS. All predictions must share one discovery
/// method and cover the request's horizon.
pub fn rank_providers(
    request: &ConsumerRequest,
    predictions: &[PerformancePrediction],
) -> Result<RankingReport> {
    if predictions.is_empty() {
        return Err(Error::NoPredictions);
    }
    let method = predictions[0].method;
    if predictions.iter().any(|p| p.method != method) {
        return Err(Error::MethodMismatch);
    }
    for prediction in predictions {
        if prediction.predicted.series_len() != request.horizon() {
            return Err(Error::HorizonMismatch {
                expected: request.horizon(),
                found: prediction.predicted.series_len(),
            });
        }
    }
    let entries: Vec<(String, &QoSMatrix)> = predictions
        .iter()
        .map(|p| (p.provider_id.clone(), &p.predicted))
        .collect();
    rank_matrices(&request.required_qos, &entries, method.into())
}

/// Reference ranking from ground-truth performance: per attribute the
/// RMSE between required and actual QoS, normalized by the value range of
/// the requirement so attributes and providers are comparable, summed.
pub fn expected_ranking(
    request: &ConsumerRequest,
    actual: &[(String, QoSMatrix)],
) -> Result<RankingReport> {
    if actual.is_empty() {
        return Err(Error::NoPredictions);
    }
    let requested = &request.required_qos;
    let mut scores = BTreeMap::new();
    for (provider_id, matrix) in actual {
        if scores.contains_key(provider_id) {
            return Err(Error::DuplicateProvider(provider_id.clone()));
        }
        if !requested.same_attribute_set(matrix) {
            return Err(Error::AttributeMismatch {
                expected: requested.attribute_names().map(String::from).collect(),
                found: matrix.attribute_names().map(String::from).collect(),
            });
        }
        let mut value = 0.0;
        for (name, requested_series) in requested.iter() {
            let actual_series = matrix.get(name).expect("attribute set was checked");
            value += nrmse(requested_series, actual_series)?;
        }
        scores.insert(provider_id.clone(), value);
    }
    let order = order_of(&scores);
    Ok(RankingReport {
        method: RankingMethod::Expected,
        scores,
        order,
        constant_flags: BTreeMap::new(),
    })
}

/// Kendall rank correlation between two orderings of the same provider
/// set: (concordant - discordant pairs) / (n choose 2). 1 means identical
/// order, -1 fully reversed.
pub fn kendall_tau(a: &[String], b: &[String]) -> Result<f64> {
    if a.len() < 2 {
        return Err(Error::TooShort {
            len: a.len(),
            min: 2,
        });
    }
    if a.len() != b.len() {
        return Err(Error::NotPermutation);
    }
    let set_a: HashSet<&String> = a.iter().collect();
    let set_b: HashSet<&String> = b.iter().collect();
    if set_a.len() != a.len() || set_b.len() != b.len() || set_a != set_b {
        return Err(Error::NotPermutation);
    }

    let position_b: BTreeMap<&String, usize> =
        b.iter().enumerate().map(|(i, id)| (id, i)).collect();
    let n = a.len();
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            if position_b[&a[i]] < position_b[&a[j]] {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    Ok((concordant - discordant) as f64 / pairs)
}
