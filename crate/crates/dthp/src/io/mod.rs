//! Data ingestion, preprocessing, run configuration, and trace files.

mod config;
mod counts;
mod manifest;
mod phases;
mod smooth;
mod trace_file;

pub use config::{DataConfig, PriorOverrides, PriorSection, RunConfig, SimulateSection};
pub use counts::{load_counts, load_counts_with, save_counts};
pub use manifest::{Manifest, PhaseEntry};
pub use phases::split_phases;
pub use smooth::{rolling_smooth, rolling_smooth_real};
pub use trace_file::{read_trace, write_trace};

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::Result;

/// Writes a file atomically: content goes to a sibling temp file which is
/// renamed over the target.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
