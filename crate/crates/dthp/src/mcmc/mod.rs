//! Trans-dimensional MCMC for histogram-kernel models and the fixed-dimension
//! sampler for the geometric baseline.
//!
//! Within-model moves are log-scale random-walk Metropolis-Hastings updates;
//! the number of histogram components changes through a birth-death
//! reversible jump whose height proposal is a normal draw centred at the mean
//! of the current heights. Chains are independent units of work with their
//! own RNG streams, so parallel runs reproduce bit-for-bit at any worker
//! count.

mod core;
mod geometric;
mod hist;
mod trace;

pub use geometric::fit_geometric;
pub use hist::{
    resume_chain, run_chain, run_chain_observing, run_chain_with_checkpoint, run_parallel,
    Checkpoint,
};
pub use trace::{AcceptCount, ChainInfo, Draw, KernelDraw, MoveCounters, SampleTrace};

use serde::{Deserialize, Serialize};

use crate::error::DthpError;
use crate::Result;

/// Variance of the birth move's height proposal.
pub const BIRTH_HEIGHT_VARIANCE: f64 = 0.1;

/// Iteration counts, proposal scales, and seeding for one sampler run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainConfig {
    pub iterations: u64,
    pub burn_in: u64,
    pub chains: usize,
    /// Thinning stride over post-burn-in sweeps; 1 stores everything.
    pub thin: u64,
    pub seed: u64,
    pub step_variance_baseline: f64,
    pub step_variance_magnitude: f64,
    pub step_variance_height: f64,
    /// Step variance for the geometric model's logit-decay updates.
    pub step_variance_beta: f64,
    /// Birth probability at interior component counts; forced to 1 at J=1
    /// and 0 at J=s_max.
    pub birth_probability: f64,
    /// Replaces the likelihood with a constant, so chains sample the prior.
    pub constant_likelihood: bool,
    /// Initialisation redraws allowed before giving up.
    pub init_retries: u32,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            iterations: 60_000,
            burn_in: 30_000,
            chains: 3,
            thin: 1,
            seed: 1,
            step_variance_baseline: 0.1,
            step_variance_magnitude: 0.1,
            step_variance_height: 0.1,
            step_variance_beta: 0.1,
            birth_probability: 0.5,
            constant_likelihood: false,
            init_retries: 100,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.iterations {
            return Err(DthpError::InvalidConfig(format!(
                "burn-in {} must be below iterations {}",
                self.burn_in, self.iterations
            )));
        }
        if self.chains == 0 {
            return Err(DthpError::InvalidConfig("chains must be ≥ 1".into()));
        }
        if self.thin == 0 {
            return Err(DthpError::InvalidConfig("thin must be ≥ 1".into()));
        }
        if !(self.birth_probability > 0.0 && self.birth_probability < 1.0) {
            return Err(DthpError::InvalidConfig(
                "birth probability must lie strictly in (0,1)".into(),
            ));
        }
        for (name, v) in [
            ("baseline", self.step_variance_baseline),
            ("magnitude", self.step_variance_magnitude),
            ("height", self.step_variance_height),
            ("beta", self.step_variance_beta),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(DthpError::InvalidConfig(format!(
                    "step variance for {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Post-thinning draws each chain stores.
    pub fn draws_per_chain(&self) -> u64 {
        (self.iterations - self.burn_in) / self.thin
    }
}

/// Short hex fingerprint of any serialisable configuration, recorded in
/// traces and manifests so outputs can be traced back to their inputs.
pub fn fingerprint<T: Serialize>(value: &T) -> String {
    use sha2::{Digest, Sha256};
    let json = serde_json::to_string(value).expect("serializable config");
    let digest = Sha256::digest(json.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}
