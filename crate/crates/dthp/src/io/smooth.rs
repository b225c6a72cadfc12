//! Rolling-window smoothing of count series.

use crate::error::DthpError;
use crate::series::CountSeries;
use crate::Result;

/// Centered moving average with truncated edges, rounded half-up so counts
/// stay integers and the Poisson mass stays well-defined.
///
/// For even windows the extra sample comes from the past.
pub fn rolling_smooth(series: &CountSeries, window: usize) -> Result<CountSeries> {
    let rows = smoothed_rows(series, window)?;
    let rounded = rows
        .into_iter()
        .map(|row| row.into_iter().map(|x| (x + 0.5).floor()).collect())
        .collect();
    rebuild(series, CountSeries::new(rounded)?)
}

/// Centered moving average keeping real-valued means (used when the run
/// explicitly allows non-integer counts).
pub fn rolling_smooth_real(series: &CountSeries, window: usize) -> Result<CountSeries> {
    let rows = smoothed_rows(series, window)?;
    rebuild(series, CountSeries::new_real(rows)?)
}

fn smoothed_rows(series: &CountSeries, window: usize) -> Result<Vec<Vec<f64>>> {
    if window == 0 {
        return Err(DthpError::InvalidConfig("window must be ≥ 1".into()));
    }
    if window > series.len() {
        return Err(DthpError::InvalidConfig(format!(
            "window {window} exceeds series length {}",
            series.len()
        )));
    }
    let len = series.len();
    let back = window / 2;
    let forward = (window - 1) / 2;
    let rows = (0..series.dimensions())
        .map(|k| {
            let row = series.row(k);
            (0..len)
                .map(|t| {
                    let lo = t.saturating_sub(back);
                    let hi = (t + forward).min(len - 1);
                    let slice = &row[lo..=hi];
                    slice.iter().sum::<f64>() / slice.len() as f64
                })
                .collect()
        })
        .collect();
    Ok(rows)
}

fn rebuild(original: &CountSeries, mut out: CountSeries) -> Result<CountSeries> {
    if let Some(labels) = original.labels() {
        out = out.with_labels(labels.to_vec())?;
    }
    if let Some(date) = original.start_date() {
        out = out.with_start_date(date);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_unchanged() {
        let s = CountSeries::new(vec![vec![3.0; 20]]).unwrap();
        let out = rolling_smooth(&s, 7).unwrap();
        assert_eq!(out.row(0), s.row(0));
    }

    #[test]
    fn window_one_is_identity() {
        let s = CountSeries::new(vec![vec![0.0, 5.0, 2.0, 9.0]]).unwrap();
        let out = rolling_smooth(&s, 1).unwrap();
        assert_eq!(out.row(0), s.row(0));
    }

    #[test]
    fn isolated_spike_spreads_to_window_mean() {
        // y = (0,...,0,7,0,...,0): interior full windows average to 1
        let mut y = vec![0.0; 15];
        y[7] = 7.0;
        let s = CountSeries::new(vec![y]).unwrap();
        let out = rolling_smooth(&s, 7).unwrap();
        for t in 4..=10 {
            assert_eq!(out.count(0, t), 1.0, "t={t}");
        }
        assert_eq!(out.count(0, 0), 0.0);
    }

    #[test]
    fn truncated_edges_use_shorter_windows() {
        let s = CountSeries::new(vec![vec![6.0, 0.0, 0.0, 0.0, 0.0, 0.0]]).unwrap();
        let out = rolling_smooth_real(&s, 5).unwrap();
        // t=0: window [0, 2] → 2.0; t=2: window [0, 4] → 1.2
        assert!((out.count(0, 0) - 2.0).abs() < 1e-12);
        assert!((out.count(0, 2) - 1.2).abs() < 1e-12);
    }

    #[test]
    fn rounding_half_up() {
        let s = CountSeries::new(vec![vec![1.0, 2.0]]).unwrap();
        // window 2 at t=0 truncates to just y₀; at t=1 averages to 1.5 → 2
        let out = rolling_smooth(&s, 2).unwrap();
        assert_eq!(out.count(0, 0), 1.0);
        assert_eq!(out.count(0, 1), 2.0);
    }

    #[test]
    fn window_larger_than_series_errors() {
        let s = CountSeries::new(vec![vec![1.0, 2.0]]).unwrap();
        assert!(rolling_smooth(&s, 3).is_err());
        assert!(rolling_smooth(&s, 0).is_err());
    }
}
