//! Core data types: uniformly sampled time series, multi-attribute QoS
//! matrices, and capacity-bounded workload traces.
//!
//! Timestamps are abstract integers starting at 1; one step is one day in
//! the default configuration, but nothing in this crate depends on the
//! physical duration of a step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use indexmap::IndexMap;

/// A uniformly sampled sequence of finite `f64` values anchored at a start
/// timestamp.
///
/// An empty series is constructible (useful as a building block) but every
/// numeric operation on it fails with [`Error::EmptySeries`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    start_index: usize,
    values: Vec<f64>,
}

impl TimeSeries {
    /// Builds a series anchored at `start_index`, rejecting NaN and
    /// infinite values.
    pub fn new(start_index: usize, values: Vec<f64>) -> Result<Self> {
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index, value });
            }
        }
        Ok(Self {
            start_index,
            values,
        })
    }

    /// Builds a series anchored at timestamp 1.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::new(1, values)
    }

    /// Constant series of `len` copies of `value`.
    pub fn constant(start_index: usize, len: usize, value: f64) -> Result<Self> {
        Self::new(start_index, vec![value; len])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Timestamp of the first sample.
    pub fn start_index(&self) -> usize {
        self.start_index
    }

    /// Timestamp of the last sample; `None` for an empty series.
    pub fn end_index(&self) -> Option<usize> {
        if self.values.is_empty() {
            None
        } else {
            Some(self.start_index + self.values.len() - 1)
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at an absolute timestamp, if the series covers it.
    pub fn value_at(&self, timestamp: usize) -> Option<f64> {
        if timestamp < self.start_index {
            return None;
        }
        self.values.get(timestamp - self.start_index).copied()
    }

    /// Iterates over `(timestamp, value)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.start_index + i, v))
    }

    /// Copies out the sub-series of `len` samples starting at absolute
    /// timestamp `start`.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        let out_of_range = Error::OutOfRange {
            start,
            len,
            available_start: self.start_index,
            available_len: self.values.len(),
        };
        if start < self.start_index {
            return Err(out_of_range);
        }
        let offset = start - self.start_index;
        if offset + len > self.values.len() {
            return Err(out_of_range);
        }
        Ok(Self {
            start_index: start,
            values: self.values[offset..offset + len].to_vec(),
        })
    }

    pub fn min(&self) -> Result<f64> {
        self.fold_checked(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> Result<f64> {
        self.fold_checked(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> Result<f64> {
        if self.values.is_empty() {
            return Err(Error::EmptySeries);
        }
        Ok(self.values.iter().sum::<f64>() / self.values.len() as f64)
    }

    /// Population standard deviation (denominator `n`).
    pub fn population_std(&self) -> Result<f64> {
        let mean = self.mean()?;
        let var = self
            .values
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / self.values.len() as f64;
        Ok(var.sqrt())
    }

    fn fold_checked(&self, init: f64, f: fn(f64, f64) -> f64) -> Result<f64> {
        if self.values.is_empty() {
            return Err(Error::EmptySeries);
        }
        Ok(self.values.iter().copied().fold(init, f))
    }
}

/// Inclusive timestamp range `[start, end]` with `start >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    start: usize,
    end: usize,
}

impl TimeWindow {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start < 1 || start > end {
            return Err(Error::InvalidWindow { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, timestamp: usize) -> bool {
        (self.start..=self.end).contains(&timestamp)
    }

    /// Timestamps covered by the window, in order.
    pub fn timestamps(&self) -> impl Iterator<Item = usize> {
        self.start..=self.end
    }
}

/// A set of named QoS attribute series sharing one time axis.
///
/// Attribute order is preserved (insertion order), names are unique, and
/// every series has the same length and start timestamp.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct QoSMatrix {
    attributes: IndexMap<String, TimeSeries>,
}

impl QoSMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a matrix from `(name, series)` pairs, validating alignment
    /// and name uniqueness.
    pub fn from_series<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, TimeSeries)>,
    {
        let mut matrix = Self::new();
        for (name, series) in pairs {
            matrix.insert(name, series)?;
        }
        Ok(matrix)
    }

    /// Adds an attribute, enforcing the shared-axis invariants.
    pub fn insert(&mut self, name: String, series: TimeSeries) -> Result<()> {
        if self.attributes.contains_key(&name) {
            return Err(Error::DuplicateAttribute(name));
        }
        if let Some(first) = self.attributes.values().next() {
            if first.len() != series.len() {
                return Err(Error::LengthMismatch {
                    left: first.len(),
                    right: series.len(),
                });
            }
            if first.start_index() != series.start_index() {
                return Err(Error::StartMismatch {
                    left: first.start_index(),
                    right: series.start_index(),
                });
            }
        }
        self.attributes.insert(name, series);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&TimeSeries> {
        self.attributes.get(name)
    }

    pub fn attribute_names(&self) -> impl Iterator<Item = &str> {
        self.attributes.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &TimeSeries)> {
        self.attributes.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Number of attributes.
    pub fn attribute_count(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    /// Length of the shared time axis (0 when no attributes are present).
    pub fn series_len(&self) -> usize {
        self.attributes.values().next().map_or(0, TimeSeries::len)
    }

    /// Start timestamp of the shared time axis (1 when empty).
    pub fn start_index(&self) -> usize {
        self.attributes
            .values()
            .next()
            .map_or(1, TimeSeries::start_index)
    }

    /// Slices every attribute to `len` samples starting at `start`.
    pub fn window(&self, start: usize, len: usize) -> Result<Self> {
        let mut out = Self::new();
        for (name, series) in &self.attributes {
            out.insert(name.clone(), series.slice(start, len)?)?;
        }
        Ok(out)
    }

    /// True when both matrices list exactly the same attribute names,
    /// regardless of order.
    pub fn same_attribute_set(&self, other: &Self) -> bool {
        self.attributes.len() == other.attributes.len()
            && self
                .attributes
                .keys()
                .all(|k| other.attributes.contains_key(k))
    }
}

/// A resource demand trace together with the capacity of the VM type it
/// targets. Demands are finite and non-negative; capacity is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSeries {
    demands: TimeSeries,
    capacity: f64,
}

impl WorkloadSeries {
    pub fn new(demands: TimeSeries, capacity: f64) -> Result<Self> {
        if !capacity.is_finite() || capacity <= 0.0 {
            return Err(Error::InvalidCapacity(capacity));
        }
        for (index, &value) in demands.values().iter().enumerate() {
            if value < 0.0 {
                return Err(Error::NegativeDemand { index, value });
            }
        }
        Ok(Self { demands, capacity })
    }

    pub fn demands(&self) -> &TimeSeries {
        &self.demands
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.demands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demands.is_empty()
    }

    pub fn demand_at(&self, timestamp: usize) -> Option<f64> {
        self.demands.value_at(timestamp)
    }
}
