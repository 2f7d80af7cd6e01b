//! On-disk formats: workload CSV traces, versioned JSON documents for
//! signatures, profiles, observations and reports, and the CSV summaries
//! the experiment command emits.
//!
//! Every JSON document carries a top-level `"schema"` field so future
//! format changes can be detected instead of misread.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::confidence::TrialExperience;
use crate::error::{Error, Result};
use crate::ranking::{ConsumerRequest, RankingReport};
use crate::series::{QoSMatrix, TimeSeries, TimeWindow, WorkloadSeries};
use crate::signature::{IaaSSignature, TrialObservation};
use crate::trial::TrialPlan;

use super::experiment::CellReport;
use super::generate::ground_truth_performance;
use super::scenario::{scenario_by_name, Scenario};
use super::{ExperimentConfig, ProviderProfile};

/// Version written into (and required from) every JSON document.
pub const SCHEMA_VERSION: u32 = 1;

/// Wrapper adding a `schema` field next to the body's own fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versioned<T> {
    pub schema: u32,
    #[serde(flatten)]
    pub body: T,
}

/// Serializes a document with the current schema version.
pub fn to_versioned_json<T: Serialize>(body: &T) -> Result<String> {
    let wrapped = Versioned {
        schema: SCHEMA_VERSION,
        body,
    };
    let mut text = serde_json::to_string_pretty(&wrapped)?;
    text.push('\n');
    Ok(text)
}

/// Parses a document, rejecting unknown schema versions.
///
/// The schema key is checked and peeled off first, then the body is
/// deserialized on its own. Going through the body type directly (instead
/// of a `#[serde(flatten)]` wrapper) keeps `deny_unknown_fields` on the
/// body effective, so typos in hand-written documents fail loudly.
pub fn from_versioned_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    use serde::de::Error as _;

    let mut value: serde_json::Value = serde_json::from_str(text)?;
    let schema = value
        .as_object_mut()
        .and_then(|map| map.remove("schema"))
        .ok_or_else(|| serde_json::Error::custom("missing field `schema`"))?;
    let schema: u32 = serde_json::from_value(schema)?;
    if schema != SCHEMA_VERSION {
        return Err(Error::UnsupportedSchema {
            found: schema,
            supported: SCHEMA_VERSION,
        });
    }
    Ok(T::deserialize(value)?)
}

/// Writes a versioned JSON document to disk.
pub fn write_json<T: Serialize>(path: &Path, body: &T) -> Result<()> {
    fs::write(path, to_versioned_json(body)?)?;
    Ok(())
}

/// Reads a versioned JSON document from disk.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    from_versioned_json(&fs::read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// Workload CSV
// ---------------------------------------------------------------------------

/// Parses a workload trace in CSV form:
///
/// ```text
/// # capacity = 100
/// t,demand
/// 1,5
/// 2,9.5
/// ```
///
/// `#` lines are comments; a `# capacity = <value>` comment declares the
/// VM capacity (an explicit `capacity` argument overrides it). Timestamps
/// must be consecutive; the first one anchors the series.
pub fn parse_workload_csv(text: &str, capacity: Option<f64>) -> Result<WorkloadSeries> {
    let mut file_capacity = None;
    let mut header_seen = false;
    let mut start = None;
    let mut next_t = 0;
    let mut demands = Vec::new();

    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(value) = comment.trim().strip_prefix("capacity") {
                let value = value.trim().strip_prefix('=').ok_or(Error::ParseError {
                    line,
                    message: "capacity comment must look like `# capacity = <value>`".to_string(),
                })?;
                let parsed: f64 = value.trim().parse().map_err(|_| Error::ParseError {
                    line,
                    message: format!("cannot parse capacity {:?}", value.trim()),
                })?;
                file_capacity = Some(parsed);
            }
            continue;
        }
        if !header_seen {
            if trimmed.replace(' ', "") != "t,demand" {
                return Err(Error::ParseError {
                    line,
                    message: format!("expected header `t,demand`, found {trimmed:?}"),
                });
            }
            header_seen = true;
            continue;
        }

        let mut fields = trimmed.split(',');
        let (t_field, demand_field) = match (fields.next(), fields.next(), fields.next()) {
            (Some(t), Some(d), None) => (t.trim(), d.trim()),
            _ => {
                return Err(Error::ParseError {
                    line,
                    message: "expected exactly two fields `t,demand`".to_string(),
                })
            }
        };
        let t: usize = t_field.parse().map_err(|_| Error::ParseError {
            line,
            message: format!("cannot parse timestamp {t_field:?}"),
        })?;
        let demand: f64 = demand_field.parse().map_err(|_| Error::ParseError {
            line,
            message: format!("cannot parse demand {demand_field:?}"),
        })?;
        if !demand.is_finite() {
            return Err(Error::NonFiniteValue { line });
        }
        match start {
            None => {
                if t < 1 {
                    return Err(Error::ParseError {
                        line,
                        message: "timestamps start at 1".to_string(),
                    });
                }
                start = Some(t);
                next_t = t + 1;
            }
            Some(_) => {
                if t != next_t {
                    return Err(Error::ParseError {
                        line,
                        message: format!("expected timestamp {next_t}, found {t}"),
                    });
                }
                next_t += 1;
            }
        }
        demands.push(demand);
    }

    let start = start.ok_or(Error::EmptyWorkload)?;
    let capacity = capacity.or(file_capacity).ok_or(Error::MissingCapacity)?;
    WorkloadSeries::new(TimeSeries::new(start, demands)?, capacity)
}

/// Renders a workload trace back into the CSV format read by
/// [`parse_workload_csv`].
pub fn format_workload_csv(workload: &WorkloadSeries) -> String {
    let mut out = format!("# capacity = {}\nt,demand\n", workload.capacity());
    for (t, demand) in workload.demands().iter() {
        out.push_str(&format!("{t},{demand}\n"));
    }
    out
}

/// Reads and parses a workload CSV file.
pub fn read_workload_csv(path: &Path, capacity: Option<f64>) -> Result<WorkloadSeries> {
    parse_workload_csv(&fs::read_to_string(path)?, capacity)
}

/// Repeats a trace cyclically until it covers `horizon` timestamps
/// (truncating if the trace is already longer).
pub fn expand_workload(workload: &WorkloadSeries, horizon: usize) -> Result<WorkloadSeries> {
    if workload.is_empty() {
        return Err(Error::EmptyWorkload);
    }
    if horizon == 0 {
        return Err(Error::EmptySeries);
    }
    let values: Vec<f64> = workload
        .demands()
        .values()
        .iter()
        .copied()
        .cycle()
        .take(horizon)
        .collect();
    WorkloadSeries::new(
        TimeSeries::new(workload.demands().start_index(), values)?,
        workload.capacity(),
    )
}

/// Downsamples a series by averaging consecutive blocks of `block`
/// samples (the final block may be shorter). The result is re-anchored at
/// timestamp 1 since the unit of one step changes.
pub fn resample_mean(series: &TimeSeries, block: usize) -> Result<TimeSeries> {
    if block == 0 {
        return Err(Error::InvalidConfig(
            "resampling block must be at least 1".to_string(),
        ));
    }
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let values: Vec<f64> = series
        .values()
        .chunks(block)
        .map(|chunk| chunk.iter().sum::<f64>() / chunk.len() as f64)
        .collect();
    TimeSeries::new(1, values)
}

// ---------------------------------------------------------------------------
// JSON document bodies
// ---------------------------------------------------------------------------

/// Serializable form of an [`IaaSSignature`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignatureFile {
    pub provider_id: String,
    pub period: usize,
    /// Attribute name -> normalized values over `[1, period]`, in
    /// signature attribute order.
    pub attributes: IndexMap<String, Vec<f64>>,
    pub coverage: Vec<u32>,
    pub flat_attributes: Vec<String>,
}

impl SignatureFile {
    pub fn from_signature(signature: &IaaSSignature) -> Self {
        Self {
            provider_id: signature.provider_id().to_string(),
            period: signature.period(),
            attributes: signature
                .matrix()
                .iter()
                .map(|(name, series)| (name.to_string(), series.values().to_vec()))
                .collect(),
            coverage: signature.coverage().to_vec(),
            flat_attributes: signature.flat_attributes().to_vec(),
        }
    }

    /// Revalidates the on-disk data into a signature.
    pub fn into_signature(self) -> Result<IaaSSignature> {
        let mut matrix = QoSMatrix::new();
        for (name, values) in self.attributes {
            if values.len() != self.period {
                return Err(Error::LengthMismatch {
                    left: values.len(),
                    right: self.period,
                });
            }
            matrix.insert(name, TimeSeries::new(1, values)?)?;
        }
        IaaSSignature::new(
            self.provider_id,
            matrix,
            self.coverage,
            self.flat_attributes,
        )
    }
}

/// Serializable form of one past user's trial observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationFile {
    pub user_id: String,
    pub window_start: usize,
    pub window_end: usize,
    /// Attribute name -> one value per window timestamp.
    pub attributes: IndexMap<String, Vec<f64>>,
}

impl ObservationFile {
    pub fn from_observation(observation: &TrialObservation) -> Self {
        Self {
            user_id: observation.user_id.clone(),
            window_start: observation.window.start(),
            window_end: observation.window.end(),
            attributes: observation
                .observed
                .iter()
                .map(|(name, series)| (name.to_string(), series.values().to_vec()))
                .collect(),
        }
    }

    pub fn into_observation(self) -> Result<TrialObservation> {
        let window = TimeWindow::new(self.window_start, self.window_end)?;
        let mut matrix = QoSMatrix::new();
        for (name, values) in self.attributes {
            matrix.insert(name, TimeSeries::new(window.start(), values)?)?;
        }
        TrialObservation::new(self.user_id, matrix, window)
    }
}

/// A batch of observations for one provider, as fed to signature
/// generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSetFile {
    pub provider_id: String,
    pub period: usize,
    pub observations: Vec<ObservationFile>,
}

/// What a consumer measured during their own trial. The plan that was
/// executed travels in a separate document, so a trial's measurements can
/// be re-paired with it when loading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperienceFile {
    pub provider_id: String,
    pub window_start: usize,
    pub window_end: usize,
    /// One map per VM stream; attribute name -> one value per trial slot.
    pub streams: Vec<IndexMap<String, Vec<f64>>>,
}

impl ExperienceFile {
    pub fn from_experience(experience: &TrialExperience) -> Self {
        Self {
            provider_id: experience.provider_id.clone(),
            window_start: experience.trial_window.start(),
            window_end: experience.trial_window.end(),
            streams: experience
                .observed
                .iter()
                .map(|matrix| {
                    matrix
                        .iter()
                        .map(|(name, series)| (name.to_string(), series.values().to_vec()))
                        .collect()
                })
                .collect(),
        }
    }

    /// Re-pairs the measurements with the plan they came from, validating
    /// that the two still fit together.
    pub fn into_experience(self, plan: TrialPlan) -> Result<TrialExperience> {
        let window = TimeWindow::new(self.window_start, self.window_end)?;
        let mut observed = Vec::with_capacity(self.streams.len());
        for stream in self.streams {
            let mut matrix = QoSMatrix::new();
            for (name, values) in stream {
                matrix.insert(name, TimeSeries::new(window.start(), values)?)?;
            }
            observed.push(matrix);
        }
        TrialExperience::new(self.provider_id, plan, observed, window)
    }
}

/// A consumer's side of the ranking step: expected demand plus the QoS
/// they require, both starting at timestamp 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestFile {
    pub capacity: f64,
    pub demands: Vec<f64>,
    /// Attribute name -> required value per timestamp.
    pub attributes: IndexMap<String, Vec<f64>>,
}

impl RequestFile {
    pub fn from_request(request: &ConsumerRequest) -> Self {
        Self {
            capacity: request.workload.capacity(),
            demands: request.workload.demands().values().to_vec(),
            attributes: request
                .required_qos
                .iter()
                .map(|(name, series)| (name.to_string(), series.values().to_vec()))
                .collect(),
        }
    }

    pub fn into_request(self) -> Result<ConsumerRequest> {
        let workload = WorkloadSeries::new(TimeSeries::from_values(self.demands)?, self.capacity)?;
        let mut required = QoSMatrix::new();
        for (name, values) in self.attributes {
            required.insert(name, TimeSeries::new(1, values)?)?;
        }
        ConsumerRequest::new(workload, required)
    }
}

/// Reads a provider profile document and validates it.
pub fn read_profile(path: &Path) -> Result<ProviderProfile> {
    let profile: ProviderProfile = read_json(path)?;
    profile.validate()?;
    Ok(profile)
}

// ---------------------------------------------------------------------------
// CSV summaries
// ---------------------------------------------------------------------------

/// One row per ranking method: `method,rank_1,...,rank_n`, best first.
/// Methods that ranked fewer providers leave trailing columns empty.
pub fn rankings_csv(rankings: &[RankingReport]) -> String {
    let width = rankings.iter().map(|r| r.order.len()).max().unwrap_or(0);
    let mut out = String::from("method");
    for i in 1..=width {
        out.push_str(&format!(",rank_{i}"));
    }
    out.push('\n');
    for ranking in rankings {
        out.push_str(ranking.method.as_str());
        for i in 0..width {
            out.push(',');
            if let Some(id) = ranking.order.get(i) {
                out.push_str(id);
            }
        }
        out.push('\n');
    }
    out
}

/// One row per (provider, scheme) cell with its confidence screen outcome
/// and both prediction errors.
pub fn nrmse_csv(cells: &[CellReport]) -> String {
    let mut out = String::from("provider,scheme,confidence,passed,spd_nrmse,lpd_nrmse\n");
    for cell in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            cell.provider_id,
            cell.scheme,
            cell.confidence.total,
            cell.confidence.passed,
            cell.spd_nrmse,
            cell.lpd_nrmse
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Experiment configs
// ---------------------------------------------------------------------------

/// Declarative description of an experiment, as accepted by the CLI.
///
/// Two modes:
///
/// * **Scenario mode** — `scenario` names a built-in setup; only
///   non-structural knobs (schemes, thresholds, trial window, ...) may be
///   overridden, since the built-in provider population is generated for a
///   fixed horizon and workload.
/// * **Explicit mode** — `profiles` plus a workload (`workload_csv` path
///   or inline `demands`/`capacity`) describe everything; all fields are
///   honored. The consumer's required QoS is the noise-free performance
///   of the first listed profile, which therefore acts as the reference
///   provider.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub scenario: Option<String>,
    pub seed: Option<u64>,
    pub horizon_days: Option<usize>,
    pub trial_length_days: Option<usize>,
    pub trial_start_day: Option<usize>,
    pub schemes: Option<Vec<crate::trial::TrialScheme>>,
    pub confidence_threshold: Option<f64>,
    pub eq_vm_count: Option<usize>,
    pub signature_users: Option<usize>,
    pub ranking_scheme: Option<crate::trial::TrialScheme>,
    pub profiles: Option<Vec<ProviderProfile>>,
    pub workload_csv: Option<String>,
    pub demands: Option<Vec<f64>>,
    pub capacity: Option<f64>,
}

impl ExperimentSpec {
    fn apply_common(&self, config: &mut ExperimentConfig) {
        if let Some(v) = self.trial_length_days {
            config.trial_length_days = v;
        }
        if let Some(v) = self.trial_start_day {
            config.trial_start_day = v;
        }
        if let Some(v) = &self.schemes {
            config.schemes = v.clone();
        }
        if let Some(v) = self.confidence_threshold {
            config.confidence_threshold = v;
        }
        if let Some(v) = self.eq_vm_count {
            config.eq_vm_count = v;
        }
        if let Some(v) = self.signature_users {
            config.signature_users = v;
        }
        if let Some(v) = self.ranking_scheme {
            config.ranking_scheme = v;
        }
    }

    fn workload(&self) -> Result<WorkloadSeries> {
        match (&self.workload_csv, &self.demands) {
            (Some(_), Some(_)) => Err(Error::InvalidConfig(
                "give either workload_csv or inline demands, not both".to_string(),
            )),
            (Some(path), None) => read_workload_csv(Path::new(path), self.capacity),
            (None, Some(demands)) => {
                let capacity = self.capacity.ok_or(Error::MissingCapacity)?;
                WorkloadSeries::new(TimeSeries::from_values(demands.clone())?, capacity)
            }
            (None, None) => Err(Error::InvalidConfig(
                "explicit experiments need workload_csv or inline demands".to_string(),
            )),
        }
    }
}

/// Turns a declarative config into a runnable scenario, reading any
/// referenced files.
pub fn resolve_experiment(spec: &ExperimentSpec) -> Result<Scenario> {
    let seed = spec.seed.unwrap_or(0);
    match (&spec.scenario, &spec.profiles) {
        (Some(_), Some(_)) => Err(Error::InvalidConfig(
            "give either a scenario name or explicit profiles, not both".to_string(),
        )),
        (None, None) => Err(Error::InvalidConfig(
            "config needs a scenario name or explicit profiles".to_string(),
        )),
        (Some(name), None) => {
            if spec.horizon_days.is_some()
                || spec.workload_csv.is_some()
                || spec.demands.is_some()
                || spec.capacity.is_some()
            {
                return Err(Error::InvalidConfig(
                    "horizon and workload are fixed by the scenario; use explicit profiles to control them".to_string(),
                ));
            }
            let mut scenario = scenario_by_name(name, seed)?;
            spec.apply_common(&mut scenario.config);
            scenario.config.validate()?;
            Ok(scenario)
        }
        (None, Some(profiles)) => {
            if profiles.is_empty() {
                return Err(Error::InvalidConfig("no profiles listed".to_string()));
            }
            let workload = spec.workload()?;
            let horizon = spec.horizon_days.unwrap_or(workload.len());
            let workload = expand_workload(&workload, horizon)?;

            let mut config = ExperimentConfig {
                horizon_days: horizon,
                provider_count: profiles.len(),
                seed,
                ..ExperimentConfig::default()
            };
            spec.apply_common(&mut config);
            config.validate()?;

            for profile in profiles {
                profile.validate()?;
                if profile.seasonal.series_len() != horizon {
                    return Err(Error::HorizonMismatch {
                        expected: horizon,
                        found: profile.seasonal.series_len(),
                    });
                }
            }

            let mut reference = profiles[0].clone();
            reference.noise_std = 0.0;
            let required =
                ground_truth_performance(&reference, &workload, &config.level_thresholds)?;
            let request = ConsumerRequest::new(workload, required)?;
            Ok(Scenario {
                name: "custom",
                config,
                request,
                profiles: profiles.clone(),
            })
        }
    }
}

/// Per-attribute weights document for weighted ranking.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightsFile {
    pub weights: BTreeMap<String, f64>,
}
