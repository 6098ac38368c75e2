//! Time-series segments: ordered GDP observations plus display metadata.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Calendar meaning of one period step. Metadata only — all math runs on
/// period indices, the same equations serving yearly and quarterly data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriodUnit {
    Year,
    Quarter,
}

impl std::fmt::Display for PeriodUnit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PeriodUnit::Year => "year",
            PeriodUnit::Quarter => "quarter",
        })
    }
}

/// A contiguous run of observations at consecutive period indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSegment<T> {
    /// Ordered observations in scaled units.
    pub values: Vec<T>,
    /// Period index of `values[0]` (e.g. a year such as 1990, or 0).
    pub start_index: usize,
    pub period_unit: PeriodUnit,
    /// Free-text tag carried into reports.
    pub label: String,
}

impl<T: Scalar> SeriesSegment<T> {
    pub fn new(
        values: Vec<T>,
        start_index: usize,
        period_unit: PeriodUnit,
        label: impl Into<String>,
    ) -> Self {
        Self { values, start_index, period_unit, label: label.into() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Global period index of the observation at local position `i`.
    pub fn period(&self, i: usize) -> usize {
        self.start_index + i
    }

    /// Fitting needs at least 4 points (3 parameters + 1 degree of freedom)
    /// and strictly positive, finite values.
    pub fn validate_for_fit(&self) -> Result<()> {
        if self.len() < 4 {
            return Err(Error::DegenerateSegment(format!(
                "{} observations, need at least 4",
                self.len()
            )));
        }
        for (i, v) in self.values.iter().enumerate() {
            if !v.is_finite() || *v <= T::zero() {
                return Err(Error::DegenerateSegment(format!(
                    "non-positive or non-finite value {v} at period {}",
                    self.period(i)
                )));
            }
        }
        Ok(())
    }

    /// The sub-segment at local positions `[start, end)`, with
    /// `start_index` shifted so global period labels are preserved.
    pub fn sub_segment(&self, start: usize, end: usize) -> SeriesSegment<T> {
        SeriesSegment {
            values: self.values[start..end].to_vec(),
            start_index: self.start_index + start,
            period_unit: self.period_unit,
            label: self.label.clone(),
        }
    }
}
