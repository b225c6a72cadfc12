//! Phase partitioning of volatile series.

use crate::error::DthpError;
use crate::series::CountSeries;
use crate::Result;

/// Splits a series at the given 1-based boundary indices; each boundary
/// starts a new phase, so boundaries must be strictly increasing inside the
/// open interval (1, T). Concatenating the phases reproduces the input, and
/// each phase is later fitted as an independent process (history resets at
/// each boundary).
pub fn split_phases(series: &CountSeries, boundaries: &[usize]) -> Result<Vec<CountSeries>> {
    let t_len = series.len();
    for w in boundaries.windows(2) {
        if w[0] >= w[1] {
            return Err(DthpError::InvalidConfig(format!(
                "phase boundaries must be strictly increasing: {boundaries:?}"
            )));
        }
    }
    for &b in boundaries {
        if b <= 1 || b >= t_len {
            return Err(DthpError::InvalidConfig(format!(
                "phase boundary {b} outside the open interval (1, {t_len})"
            )));
        }
    }
    let mut phases = Vec::with_capacity(boundaries.len() + 1);
    let mut start = 0usize; // 0-based
    for &b in boundaries {
        phases.push(series.slice(start, b - 1)?);
        start = b - 1;
    }
    phases.push(series.slice(start, t_len)?);
    Ok(phases)
}
