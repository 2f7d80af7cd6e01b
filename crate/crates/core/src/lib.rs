//! Trial-based selection of IaaS cloud providers.
//!
//! Free trials are short and providers' performance drifts over the year,
//! so a naive "try it for a month and extrapolate" comparison is easily
//! misled. This crate implements a pipeline that corrects for that:
//!
//! 1. **Characterize** the consumer's long-term workload and compress it
//!    into a short trial schedule ([`trial`]).
//! 2. **Aggregate** past trial users' measurements into a provider
//!    *signature*: a scale-free profile of how the provider's QoS moves
//!    over a reference period ([`signature`]).
//! 3. **Screen** each trial against the signature — a trial that saw the
//!    provider behaving unusually gets a low confidence score and can be
//!    discarded ([`confidence`]).
//! 4. **Extrapolate** the trial to the full horizon, using the signature
//!    to transplant seasonal behaviour onto the prediction
//!    ([`discovery`]).
//! 5. **Rank** providers by how closely their predicted QoS tracks what
//!    the consumer asked for ([`ranking`]).
//!
//! The [`sim`] module adds a synthetic provider model plus ready-made
//! scenarios and an experiment harness, so every step can be exercised —
//! and measured against known ground truth — without a real cloud.
//!
//! ```
//! use iaas_select::series::{TimeSeries, WorkloadSeries};
//! use iaas_select::trial::{select_trial_workloads, TrialScheme};
//!
//! # fn main() -> iaas_select::Result<()> {
//! // Six days of demand against a capacity-10 VM...
//! let demands = TimeSeries::from_values(vec![5.0, 9.0, 5.0, 3.0, 9.0, 5.0])?;
//! let workload = WorkloadSeries::new(demands, 10.0)?;
//! // ...compressed into a two-day trial of the most frequent demands.
//! let plan = select_trial_workloads(&workload, 2, TrialScheme::Fg)?;
//! let demands: Vec<f64> = plan.entries().iter().map(|e| e.demand).collect();
//! assert_eq!(demands, vec![5.0, 9.0]);
//! # Ok(())
//! # }
//! ```

pub mod confidence;
pub mod discovery;
pub mod error;
pub mod ranking;
pub mod series;
pub mod signature;
pub mod sim;
pub mod stats;
pub mod trial;

pub use error::{Error, Result};
