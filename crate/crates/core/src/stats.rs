//! Scale-free comparison primitives used by signature generation,
//! confidence scoring, and ranking: min-max scaling, RMSE/NRMSE distance,
//! standard-deviation normalization, and Pearson correlation.

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Result of [`min_max_normalize`]: the scaled series plus a flag telling
/// whether the input was constant (in which case every output value is the
/// midpoint 0.5).
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaled {
    pub series: TimeSeries,
    pub constant_input: bool,
}

/// Rescales a series linearly onto `[0, 1]`.
///
/// A constant input has no range to stretch; it maps to all-0.5 and is
/// flagged instead of failing, so that distance computations over many
/// attributes degrade gracefully.
pub fn min_max_normalize(series: &TimeSeries) -> Result<MinMaxScaled> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let min = series.min()?;
    let max = series.max()?;
    let range = max - min;
    if range == 0.0 {
        return Ok(MinMaxScaled {
            series: TimeSeries::constant(series.start_index(), series.len(), 0.5)?,
            constant_input: true,
        });
    }
    let values = series.values().iter().map(|v| (v - min) / range).collect();
    Ok(MinMaxScaled {
        series: TimeSeries::new(series.start_index(), values)?,
        constant_input: false,
    })
}

/// Root mean squared error between two equally long, non-empty series.
pub fn rmse(a: &TimeSeries, b: &TimeSeries) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySeries);
    }
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let sum_sq: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((sum_sq / a.len() as f64).sqrt())
}

/// RMSE normalized by the value range of `a`, the reference (actual)
/// series. Fails with [`Error::ZeroRange`] when the reference is constant.
pub fn nrmse(a: &TimeSeries, b: &TimeSeries) -> Result<f64> {
    let raw = rmse(a, b)?;
    let range = a.max()? - a.min()?;
    if range == 0.0 {
        return Err(Error::ZeroRange);
    }
    Ok(raw / range)
}

/// Divides every value by the population standard deviation of the series.
///
/// Note that the mean is *not* subtracted: the output keeps the ratios
/// between values intact, it is merely expressed in units of one standard
/// deviation. Requires at least two samples and non-zero variance.
pub fn std_normalize(series: &TimeSeries) -> Result<TimeSeries> {
    if series.len() < 2 {
        return Err(Error::TooShort {
            len: series.len(),
            min: 2,
        });
    }
    let std = series.population_std()?;
    if std == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let values = series.values().iter().map(|v| v / std).collect();
    TimeSeries::new(series.start_index(), values)
}

/// Pearson correlation coefficient of two equally long series, clamped to
/// `[-1, 1]` against floating-point drift.
pub fn pearson(a: &TimeSeries, b: &TimeSeries) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySeries);
    }
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let mean_a = a.mean()?;
    let mean_b = b.mean()?;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (x, y) in a.values().iter().zip(b.values()) {
        let dx = x - mean_a;
        let dy = y - mean_b;
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((cov / (var_a.sqrt() * var_b.sqrt())).clamp(-1.0, 1.0))
}
