//! Count-series CSV ingestion and canonical output.
//!
//! Two accepted shapes: a dated file with header `date,<label>,...` and ISO
//! dates in strict daily order, or a headerless K-column integer grid. Row
//! order is time order; gaps and duplicate dates are errors.

use std::path::Path;

use chrono::NaiveDate;

use crate::error::DthpError;
use crate::series::CountSeries;
use crate::Result;

/// Loads a counts CSV, rejecting non-integer entries.
pub fn load_counts(path: &Path) -> Result<CountSeries> {
    load_counts_with(path, false)
}

/// Loads a counts CSV; `allow_real` admits real-valued entries for
/// smoothing pipelines that keep unrounded counts.
pub fn load_counts_with(path: &Path, allow_real: bool) -> Result<CountSeries> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate().peekable();

    let (_, first) = lines.peek().copied().ok_or_else(|| DthpError::DataRow {
        row: 1,
        message: "empty file".into(),
    })?;
    let dated = first
        .split(',')
        .next()
        .map(|f| f.trim().eq_ignore_ascii_case("date"))
        .unwrap_or(false);

    let mut labels: Option<Vec<String>> = None;
    let mut start_date: Option<NaiveDate> = None;
    let mut prev_date: Option<NaiveDate> = None;
    let mut columns: Option<usize> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();

    if dated {
        let (_, header) = lines.next().unwrap();
        let fields: Vec<&str> = header.split(',').map(str::trim).collect();
        if fields.len() < 2 {
            return Err(DthpError::DataRow {
                row: 1,
                message: "dated header needs at least one count column".into(),
            });
        }
        labels = Some(fields[1..].iter().map(|s| s.to_string()).collect());
        columns = Some(fields.len() - 1);
    }

    for (line_idx, line) in lines {
        let row_no = line_idx + 1; // 1-based, including the header line
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let values = if dated {
            let date = NaiveDate::parse_from_str(fields[0], "%Y-%m-%d").map_err(|e| {
                DthpError::DataRow {
                    row: row_no,
                    message: format!("bad date {:?}: {e}", fields[0]),
                }
            })?;
            match prev_date {
                None => start_date = Some(date),
                Some(prev) => {
                    let expected = prev + chrono::Duration::days(1);
                    if date == prev {
                        return Err(DthpError::DataRow {
                            row: row_no,
                            message: format!("duplicate date {date}"),
                        });
                    }
                    if date != expected {
                        return Err(DthpError::DataRow {
                            row: row_no,
                            message: format!("missing dates: expected {expected}, found {date}"),
                        });
                    }
                }
            }
            prev_date = Some(date);
            &fields[1..]
        } else {
            &fields[..]
        };

        let expected = *columns.get_or_insert(values.len());
        if values.len() != expected {
            return Err(DthpError::DataRow {
                row: row_no,
                message: format!("ragged row: {} columns, expected {expected}", values.len()),
            });
        }
        let mut parsed = Vec::with_capacity(values.len());
        for v in values {
            let x: f64 = v.parse().map_err(|_| DthpError::DataRow {
                row: row_no,
                message: format!("not a number: {v:?}"),
            })?;
            if !x.is_finite() || x < 0.0 {
                return Err(DthpError::DataRow {
                    row: row_no,
                    message: format!("negative or non-finite count {x}"),
                });
            }
            if x.fract() != 0.0 && !allow_real {
                return Err(DthpError::DataRow {
                    row: row_no,
                    message: format!("non-integer count {x}"),
                });
            }
            parsed.push(x);
        }
        rows.push(parsed);
    }

    if rows.is_empty() {
        return Err(DthpError::DataRow {
            row: 1,
            message: "no data rows".into(),
        });
    }

    // transpose from rows (time) to per-dimension series
    let dims = rows[0].len();
    let mut per_dim = vec![Vec::with_capacity(rows.len()); dims];
    for row in &rows {
        for (k, &v) in row.iter().enumerate() {
            per_dim[k].push(v);
        }
    }
    let mut series = if allow_real {
        CountSeries::new_real(per_dim)?
    } else {
        CountSeries::new(per_dim)?
    };
    if let Some(labels) = labels {
        series = series.with_labels(labels)?;
    }
    if let Some(date) = start_date {
        series = series.with_start_date(date);
    }
    Ok(series)
}

/// Writes a series in canonical form: dated with a header when a start date
/// is attached, headerless grid otherwise. `save(load(f))` is byte-identical
/// for canonical files.
pub fn save_counts(series: &CountSeries, path: &Path) -> Result<()> {
    let mut out = String::new();
    let dims = series.dimensions();
    if let Some(start) = series.start_date() {
        out.push_str("date");
        for k in 0..dims {
            out.push(',');
            match series.labels() {
                Some(labels) => out.push_str(&labels[k]),
                None => out.push_str(&format!("dim_{}", k + 1)),
            }
        }
        out.push('\n');
        for t in 0..series.len() {
            let date = start + chrono::Duration::days(t as i64);
            out.push_str(&date.format("%Y-%m-%d").to_string());
            for k in 0..dims {
                out.push(',');
                out.push_str(&format_count(series.count(k, t)));
            }
            out.push('\n');
        }
    } else {
        for t in 0..series.len() {
            for k in 0..dims {
                if k > 0 {
                    out.push(',');
                }
                out.push_str(&format_count(series.count(k, t)));
            }
            out.push('\n');
        }
    }
    super::atomic_write(path, out.as_bytes())
}

fn format_count(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}
