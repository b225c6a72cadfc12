//! Posterior sample traces and move bookkeeping.

use serde::{Deserialize, Serialize};

use crate::error::DthpError;
use crate::kernel::{GeometricKernel, HistogramKernel};
use crate::Result;

/// Attempt/accept counts for one move type.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptCount {
    pub attempted: u64,
    pub accepted: u64,
}

impl AcceptCount {
    pub(crate) fn record(&mut self, accepted: bool) {
        self.attempted += 1;
        self.accepted += u64::from(accepted);
    }

    pub fn rate(&self) -> f64 {
        if self.attempted == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.attempted as f64
        }
    }
}

/// Per-move acceptance counters for one chain.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveCounters {
    pub baseline: AcceptCount,
    pub magnitude: AcceptCount,
    pub height: AcceptCount,
    pub knot_shift: AcceptCount,
    pub birth: AcceptCount,
    pub death: AcceptCount,
    /// Geometric-model decay moves.
    pub beta: AcceptCount,
    pub height_skipped: u64,
    pub knot_skipped: u64,
    pub birth_death_skipped: u64,
}

/// One stored kernel draw for a dimension pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelDraw {
    Histogram { s: Vec<u32>, theta: Vec<f64> },
    Geometric { beta: f64 },
}

impl KernelDraw {
    /// Number of histogram components (1 for geometric draws).
    pub fn components(&self) -> usize {
        match self {
            KernelDraw::Histogram { theta, .. } => theta.len(),
            KernelDraw::Geometric { .. } => 1,
        }
    }

    /// Normalised masses at lags `1..=s_max`.
    pub fn masses(&self, s_max: u32) -> Result<Vec<f64>> {
        match self {
            KernelDraw::Histogram { s, theta } => {
                let kernel = HistogramKernel::new(s.clone(), theta.clone())?;
                if kernel.s_max() != s_max {
                    return Err(DthpError::SmaxMismatch {
                        left: kernel.s_max(),
                        right: s_max,
                    });
                }
                Ok(kernel.masses())
            }
            KernelDraw::Geometric { beta } => Ok(GeometricKernel::new(*beta, s_max)?.masses()),
        }
    }
}

/// One post-thinning posterior draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    /// 1-based sweep index this draw was recorded at.
    pub iteration: u64,
    pub mu: Vec<f64>,
    /// Row `l`, column `k`.
    pub alpha: Vec<Vec<f64>>,
    /// `kernels[l][k]`.
    pub kernels: Vec<Vec<KernelDraw>>,
}

/// Provenance of one chain inside a (possibly pooled) trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainInfo {
    pub chain_index: usize,
    /// The derived stream seed this chain ran on.
    pub stream_seed: u64,
    /// Range of this chain's draws inside the pooled draw vector.
    pub draw_offset: usize,
    pub draw_count: usize,
    pub counters: MoveCounters,
}

/// Ordered posterior draws with chain provenance and run metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleTrace {
    pub dims: usize,
    pub s_max: u32,
    pub iterations: u64,
    pub burn_in: u64,
    pub thin: u64,
    /// Master seed the chain seeds were derived from.
    pub seed: u64,
    pub config_fingerprint: String,
    pub draws: Vec<Draw>,
    pub chains: Vec<ChainInfo>,
}

impl SampleTrace {
    pub fn draw_count(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// Draws belonging to one constituent chain.
    pub fn chain_draws(&self, chain: usize) -> &[Draw] {
        let info = &self.chains[chain];
        &self.draws[info.draw_offset..info.draw_offset + info.draw_count]
    }

    /// Pools several single-chain traces by concatenation in the given order.
    pub fn pool(traces: Vec<SampleTrace>) -> Result<SampleTrace> {
        let first = traces.first().ok_or(DthpError::EmptyTrace)?;
        let mut pooled = SampleTrace {
            dims: first.dims,
            s_max: first.s_max,
            iterations: first.iterations,
            burn_in: first.burn_in,
            thin: first.thin,
            seed: first.seed,
            config_fingerprint: first.config_fingerprint.clone(),
            draws: Vec::new(),
            chains: Vec::new(),
        };
        for trace in traces {
            if trace.dims != pooled.dims || trace.s_max != pooled.s_max {
                return Err(DthpError::InvalidConfig(
                    "cannot pool traces with different shapes".into(),
                ));
            }
            let offset = pooled.draws.len();
            for mut info in trace.chains {
                info.draw_offset += offset;
                pooled.chains.push(info);
            }
            pooled.draws.extend(trace.draws);
        }
        Ok(pooled)
    }
}
