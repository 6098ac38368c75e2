//! CSV ingestion: schema checks, gap detection, and normalization so the
//! first observation is exactly 100.

use std::path::PathBuf;

use jcurve::{PeriodUnit, SeriesSegment};

use crate::error::CliError;

/// A delimited series file and how to read it.
#[derive(Debug, Clone)]
pub struct SeriesFile {
    pub path: PathBuf,
    pub period_column: String,
    pub value_column: String,
    /// Display tag only; all math runs on period indices.
    pub period_unit: PeriodUnit,
}

impl SeriesFile {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            period_column: "period".into(),
            value_column: "value".into(),
            period_unit: PeriodUnit::Year,
        }
    }
}

/// What ingestion saw before normalization, carried into report metadata so
/// the original scale is not lost.
#[derive(Debug, Clone, Copy)]
pub struct RawScale {
    /// Un-normalized value of the first observation.
    pub first_value: f64,
}

/// Read, validate, and normalize a series.
///
/// The header row is required; periods must be consecutive non-negative
/// integers (a hole is an error, not something to interpolate over) and
/// values strictly positive. The series is scaled so the first value is
/// exactly 100 — when it already is 100 the data passes through untouched,
/// bit for bit.
pub fn ingest(file: &SeriesFile) -> Result<(SeriesSegment, RawScale), CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(&file.path)
        .map_err(|e| CliError::Data(format!("{}: {e}", file.path.display())))?;

    let headers = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", file.path.display())))?
        .clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            CliError::Data(format!(
                "{}: missing column `{name}` (header has: {})",
                file.path.display(),
                headers.iter().collect::<Vec<_>>().join(", ")
            ))
        })
    };
    let period_idx = col(&file.period_column)?;
    let value_idx = col(&file.value_column)?;

    let mut periods: Vec<i64> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2; // 1-based, header is row 1
        let record = record.map_err(|e| CliError::Data(format!("row {row}: {e}")))?;
        let raw_period = record.get(period_idx).unwrap_or("");
        let period: i64 = raw_period.parse().map_err(|_| {
            CliError::Data(format!(
                "row {row}, column `{}`: cannot parse `{raw_period}` as a period index",
                file.period_column
            ))
        })?;
        let raw_value = record.get(value_idx).unwrap_or("");
        let value: f64 = raw_value.parse().map_err(|_| {
            CliError::Data(format!(
                "row {row}, column `{}`: cannot parse `{raw_value}` as a number",
                file.value_column
            ))
        })?;
        if !value.is_finite() || value <= 0.0 {
            return Err(CliError::Data(format!(
                "row {row}: non-positive value {value} at period {period}"
            )));
        }
        periods.push(period);
        values.push(value);
    }

    if values.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no observations",
            file.path.display()
        )));
    }
    if periods[0] < 0 {
        return Err(CliError::Data(format!(
            "period indices must be non-negative, got {}",
            periods[0]
        )));
    }
    for w in periods.windows(2) {
        if w[1] != w[0] + 1 {
            return Err(CliError::Data(if w[1] <= w[0] {
                format!("periods must strictly increase: {} followed by {}", w[0], w[1])
            } else {
                format!("missing period {} (gap between {} and {})", w[0] + 1, w[0], w[1])
            }));
        }
    }

    let first = values[0];
    let scale = 100.0 / first;
    let mut scaled: Vec<f64> = values.iter().map(|v| v * scale).collect();
    scaled[0] = 100.0; // exact by definition, immune to rounding in `scale`
    let label = file
        .path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| file.path.display().to_string());
    let segment =
        SeriesSegment::new(scaled, periods[0] as usize, file.period_unit, label);
    Ok((segment, RawScale { first_value: first }))
}
