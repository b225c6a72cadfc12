//! Multivariate daily count series.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::DthpError;
use crate::Result;

/// K parallel sequences of per-day event counts, all of length T.
///
/// Counts are stored as `f64` so that smoothed series can optionally carry
/// real values; the standard constructor enforces non-negative integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountSeries {
    k: usize,
    len: usize,
    /// Row-major: `counts[k * len + t]`.
    counts: Vec<f64>,
    labels: Option<Vec<String>>,
    start_date: Option<NaiveDate>,
    /// True when every entry is an integer.
    integral: bool,
}

impl CountSeries {
    /// Builds a series from per-dimension rows of integer counts.
    ///
    /// Rejects negative, non-finite, or non-integral entries and ragged rows.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::build(rows, false)
    }

    /// Builds a series that may carry non-integral counts (used after
    /// smoothing when real-valued counts are explicitly allowed).
    pub fn new_real(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::build(rows, true)
    }

    fn build(rows: Vec<Vec<f64>>, allow_real: bool) -> Result<Self> {
        if rows.is_empty() {
            return Err(DthpError::InvalidSeries("no dimensions".into()));
        }
        let len = rows[0].len();
        if len == 0 {
            return Err(DthpError::InvalidSeries("zero-length series".into()));
        }
        let mut integral = true;
        for (k, row) in rows.iter().enumerate() {
            if row.len() != len {
                return Err(DthpError::InvalidSeries(format!(
                    "ragged rows: dimension {} has length {}, expected {}",
                    k,
                    row.len(),
                    len
                )));
            }
            for (t, &y) in row.iter().enumerate() {
                if !y.is_finite() || y < 0.0 {
                    return Err(DthpError::InvalidSeries(format!(
                        "negative or non-finite count {} at dimension {}, time {}",
                        y, k, t
                    )));
                }
                if y.fract() != 0.0 {
                    if !allow_real {
                        return Err(DthpError::InvalidSeries(format!(
                            "non-integer count {} at dimension {}, time {}",
                            y, k, t
                        )));
                    }
                    integral = false;
                }
            }
        }
        let k = rows.len();
        let counts = rows.into_iter().flatten().collect();
        Ok(Self {
            k,
            len,
            counts,
            labels: None,
            start_date: None,
            integral,
        })
    }

    /// Attaches per-dimension labels.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.k {
            return Err(DthpError::InvalidSeries(format!(
                "{} labels for {} dimensions",
                labels.len(),
                self.k
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Attaches the calendar date of the first time step.
    pub fn with_start_date(mut self, date: NaiveDate) -> Self {
        self.start_date = Some(date);
        self
    }

    /// Number of dimensions K.
    pub fn dimensions(&self) -> usize {
        self.k
    }

    /// Number of time steps T.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Count in dimension `k` at 0-based time index `t`.
    #[inline]
    pub fn count(&self, k: usize, t: usize) -> f64 {
        self.counts[k * self.len + t]
    }

    /// The full row for dimension `k`.
    pub fn row(&self, k: usize) -> &[f64] {
        &self.counts[k * self.len..(k + 1) * self.len]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn start_date(&self) -> Option<NaiveDate> {
        self.start_date
    }

    /// True when every entry is an integer.
    pub fn is_integral(&self) -> bool {
        self.integral
    }

    /// Total number of events across all dimensions and days.
    pub fn total_events(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Contiguous sub-series over 0-based time indices `[start, end)`,
    /// keeping labels and shifting the start date.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.len {
            return Err(DthpError::InvalidSeries(format!(
                "invalid slice [{start}, {end}) of series with T={}",
                self.len
            )));
        }
        let mut counts = Vec::with_capacity(self.k * (end - start));
        for k in 0..self.k {
            counts.extend_from_slice(&self.row(k)[start..end]);
        }
        Ok(Self {
            k: self.k,
            len: end - start,
            counts,
            labels: self.labels.clone(),
            start_date: self
                .start_date
                .map(|d| d + chrono::Duration::days(start as i64)),
            integral: self.integral,
        })
    }
}
