//! Trace files: gzipped line-delimited JSON, one posterior draw per line,
//! bracketed by a header and an integrity footer.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::{Compression, GzBuilder};
use serde::{Deserialize, Serialize};

use crate::error::DthpError;
use crate::mcmc::{ChainInfo, Draw, SampleTrace};
use crate::Result;

#[derive(Serialize, Deserialize)]
struct Header {
    record: String, // "header"
    format_version: u32,
    dims: usize,
    s_max: u32,
    iterations: u64,
    burn_in: u64,
    thin: u64,
    seed: u64,
    config_fingerprint: String,
    chains: Vec<ChainInfo>,
}

#[derive(Serialize, Deserialize)]
struct Footer {
    record: String, // "footer"
    draw_count: usize,
}

const FORMAT_VERSION: u32 = 1;

/// Writes a trace; the gzip stream carries no timestamp, so identical traces
/// produce byte-identical files.
pub fn write_trace(trace: &SampleTrace, path: &Path) -> Result<()> {
    let tmp = path.with_extension("gz.tmp");
    {
        let file = File::create(&tmp)?;
        let gz: GzEncoder<_> = GzBuilder::new().write(file, Compression::default());
        let mut out = BufWriter::new(gz);
        let header = Header {
            record: "header".into(),
            format_version: FORMAT_VERSION,
            dims: trace.dims,
            s_max: trace.s_max,
            iterations: trace.iterations,
            burn_in: trace.burn_in,
            thin: trace.thin,
            seed: trace.seed,
            config_fingerprint: trace.config_fingerprint.clone(),
            chains: trace.chains.clone(),
        };
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n")?;
        for draw in &trace.draws {
            serde_json::to_writer(&mut out, draw)?;
            out.write_all(b"\n")?;
        }
        let footer = Footer {
            record: "footer".into(),
            draw_count: trace.draws.len(),
        };
        serde_json::to_writer(&mut out, &footer)?;
        out.write_all(b"\n")?;
        out.into_inner()
            .map_err(|e| DthpError::Io(e.into_error()))?
            .finish()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Reads a trace file, verifying the footer's draw count.
pub fn read_trace(path: &Path) -> Result<SampleTrace> {
    let file = File::open(path)?;
    let mut lines = BufReader::new(GzDecoder::new(file)).lines();

    let header_line = lines.next().ok_or_else(|| {
        DthpError::InvalidConfig(format!("{}: empty trace file", path.display()))
    })??;
    let header: Header = serde_json::from_str(&header_line)?;
    if header.record != "header" || header.format_version != FORMAT_VERSION {
        return Err(DthpError::InvalidConfig(format!(
            "{}: unrecognised trace header",
            path.display()
        )));
    }

    let mut draws: Vec<Draw> = Vec::new();
    let mut footer: Option<Footer> = None;
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if line.contains("\"record\":\"footer\"") {
            footer = Some(serde_json::from_str(&line)?);
            break;
        }
        draws.push(serde_json::from_str(&line)?);
    }
    let footer = footer.ok_or_else(|| {
        DthpError::InvalidConfig(format!("{}: truncated trace (no footer)", path.display()))
    })?;
    if footer.draw_count != draws.len() {
        return Err(DthpError::InvalidConfig(format!(
            "{}: footer claims {} draws, file has {}",
            path.display(),
            footer.draw_count,
            draws.len()
        )));
    }

    Ok(SampleTrace {
        dims: header.dims,
        s_max: header.s_max,
        iterations: header.iterations,
        burn_in: header.burn_in,
        thin: header.thin,
        seed: header.seed,
        config_fingerprint: header.config_fingerprint,
        draws,
        chains: header.chains,
    })
}
