//! The reversible-jump sampler for histogram-kernel models.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::DthpError;
use crate::kernel::{HistogramKernel, Kernel};
use crate::model::DthpModel;
use crate::prior::{log_prior_structure_normalized, Param, PriorConfig};
use crate::rng::{stream_rng, stream_seed, STREAM_CHAIN};
use crate::series::CountSeries;
use crate::Result;

use super::core::{accept, normal_log_pdf, CoreState, Workspace};
use super::trace::{ChainInfo, Draw, KernelDraw, MoveCounters, SampleTrace};
use super::{fingerprint, ChainConfig, BIRTH_HEIGHT_VARIANCE};

/// Histogram kernel as mutated by the sampler: full knot vector plus one
/// height per interval, first height pinned to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct KernelState {
    pub knots: Vec<u32>,
    pub heights: Vec<f64>,
}

impl KernelState {
    fn flat(s_max: u32) -> Self {
        Self {
            knots: vec![0, s_max],
            heights: vec![1.0],
        }
    }

    fn components(&self) -> usize {
        self.heights.len()
    }

    /// Normalised interval weights `θ_j / Z`.
    fn weights(&self) -> Vec<f64> {
        let z: f64 = self
            .knots
            .windows(2)
            .zip(&self.heights)
            .map(|(w, &h)| f64::from(w[1] - w[0]) * h)
            .sum();
        self.heights.iter().map(|&h| h / z).collect()
    }

    fn mean_height(&self) -> f64 {
        self.heights.iter().sum::<f64>() / self.heights.len() as f64
    }

    fn to_draw(&self) -> KernelDraw {
        KernelDraw::Histogram {
            s: self.knots.clone(),
            theta: self.heights.clone(),
        }
    }

    #[cfg(test)]
    fn to_kernel(&self) -> Result<HistogramKernel> {
        HistogramKernel::new(self.knots.clone(), self.heights.clone())
    }
}

/// One running chain: immutable workspace plus the mutable sampler state.
struct Chain<'a> {
    ws: Workspace<'a>,
    config: &'a ChainConfig,
    chain_index: usize,
    s_max: u32,
    core: CoreState,
    kernels: Vec<KernelState>,
    counters: MoveCounters,
    rng: ChaCha8Rng,
    sweeps_done: u64,
    /// Test instrumentation: called with pair (0,0)'s kernel after every
    /// individual kernel-affecting move.
    observer: Option<Box<dyn FnMut(&KernelDraw) + 'a>>,
}

impl<'a> Chain<'a> {
    /// Initialises every kernel to the flat single-step histogram and draws
    /// the static parameters from their priors, redrawing (up to the retry
    /// budget) while the likelihood is non-finite.
    fn init(
        data: &'a CountSeries,
        priors: &'a PriorConfig,
        config: &'a ChainConfig,
        chain_index: usize,
    ) -> Result<Self> {
        config.validate()?;
        if priors.dimensions() != data.dimensions() {
            return Err(DthpError::DimensionMismatch {
                model_k: priors.dimensions(),
                series_k: data.dimensions(),
            });
        }
        let ws = Workspace::new(data, priors, config.constant_likelihood);
        let dims = ws.dims;
        let s_max = priors.s_max();
        let rng = stream_rng(config.seed, STREAM_CHAIN, chain_index as u64);

        let kernels: Vec<KernelState> = vec![KernelState::flat(s_max); dims * dims];
        let mut chain = Self {
            ws,
            config,
            chain_index,
            s_max,
            core: CoreState {
                mu: vec![0.0; dims],
                alpha: vec![0.0; dims * dims],
                excitation: Vec::new(),
                loglik_dim: vec![0.0; dims],
            },
            kernels,
            counters: MoveCounters::default(),
            rng,
            sweeps_done: 0,
            observer: None,
        };
        chain.core.excitation = chain.excitations_for_all();

        for attempt in 0..=config.init_retries {
            for k in 0..dims {
                chain.core.mu[k] = chain.ws.priors.prior(Param::Baseline(k)).sample(&mut chain.rng).exp();
            }
            for l in 0..dims {
                for k in 0..dims {
                    chain.core.alpha[l * dims + k] = chain
                        .ws
                        .priors
                        .prior(Param::Magnitude(l, k))
                        .sample(&mut chain.rng)
                        .exp();
                }
            }
            chain.core.refresh_loglik(&chain.ws);
            if chain.core.loglik().is_finite() {
                return Ok(chain);
            }
            if attempt == config.init_retries {
                break;
            }
        }
        Err(DthpError::InitializationFailed {
            retries: config.init_retries,
        })
    }

    /// Rebuilds a chain from a checkpoint; caches are deterministic functions
    /// of the parameters, so the resumed chain continues bit-identically.
    fn from_checkpoint(
        data: &'a CountSeries,
        priors: &'a PriorConfig,
        config: &'a ChainConfig,
        checkpoint: &Checkpoint,
    ) -> Result<Self> {
        config.validate()?;
        checkpoint.validate(data, priors, config)?;
        let ws = Workspace::new(data, priors, config.constant_likelihood);
        let dims = ws.dims;
        let mut kernels = Vec::with_capacity(dims * dims);
        for row in &checkpoint.kernels {
            for draw in row {
                match draw {
                    KernelDraw::Histogram { s, theta } => {
                        // route through the public constructor to re-validate
                        let k = HistogramKernel::new(s.clone(), theta.clone())?;
                        kernels.push(KernelState {
                            knots: k.knots().to_vec(),
                            heights: k.heights().to_vec(),
                        });
                    }
                    KernelDraw::Geometric { .. } => {
                        return Err(DthpError::Checkpoint(
                            "geometric kernel in a histogram-model checkpoint".into(),
                        ))
                    }
                }
            }
        }
        let mut chain = Self {
            ws,
            config,
            chain_index: checkpoint.chain_index,
            s_max: priors.s_max(),
            core: CoreState {
                mu: checkpoint.mu.clone(),
                alpha: checkpoint.alpha.iter().flatten().copied().collect(),
                excitation: Vec::new(),
                loglik_dim: vec![0.0; dims],
            },
            kernels,
            counters: checkpoint.counters,
            rng: checkpoint.rng.clone(),
            sweeps_done: checkpoint.sweeps_done,
            observer: None,
        };
        chain.core.excitation = chain.excitations_for_all();
        chain.core.refresh_loglik(&chain.ws);
        if !chain.core.loglik().is_finite() {
            return Err(DthpError::Checkpoint(
                "checkpointed state has non-finite likelihood".into(),
            ));
        }
        Ok(chain)
    }

    fn notify_observer(&mut self) {
        if self.observer.is_some() {
            let draw = self.kernels[0].to_draw();
            if let Some(observe) = &mut self.observer {
                observe(&draw);
            }
        }
    }

    fn excitation_for(&self, kernel: &KernelState, l: usize) -> Vec<f64> {
        let weights = kernel.weights();
        let knots = &kernel.knots;
        (0..self.ws.t_len)
            .map(|t| {
                let mut e = 0.0;
                for (j, &w) in weights.iter().enumerate() {
                    e += w * self
                        .ws
                        .cache
                        .window_sum(t, l, knots[j] as usize, knots[j + 1] as usize);
                }
                e
            })
            .collect()
    }

    fn excitations_for_all(&self) -> Vec<Vec<f64>> {
        let dims = self.ws.dims;
        (0..dims * dims)
            .map(|idx| self.excitation_for(&self.kernels[idx], idx / dims))
            .collect()
    }

    /// One-at-a-time log-scale random walk over the free heights; a no-op
    /// counted as skipped when J = 1.
    fn update_heights(&mut self, l: usize, k: usize) {
        let dims = self.ws.dims;
        let idx = l * dims + k;
        let j_count = self.kernels[idx].components();
        if j_count < 2 {
            self.counters.height_skipped += 1;
            return;
        }
        let prior = self.ws.priors.prior(Param::Height);
        let sd = self.config.step_variance_height.sqrt();
        for j in 1..j_count {
            let cur = self.kernels[idx].heights[j];
            let cur_log = cur.ln();
            let z: f64 = StandardNormal.sample(&mut self.rng);
            let prop_log = cur_log + sd * z;
            let d_prior = prior.log_density(prop_log) - prior.log_density(cur_log);
            if d_prior == f64::NEG_INFINITY {
                self.counters.height.record(false);
                continue;
            }
            let prop = prop_log.exp();
            if !(prop > 0.0 && prop.is_finite()) {
                self.counters.height.record(false);
                continue;
            }
            let mut cand = self.kernels[idx].clone();
            cand.heights[j] = prop;
            let exc = self.excitation_for(&cand, l);
            let new_ll = self
                .core
                .loglik_dim_with(&self.ws, k, self.core.mu[k], None, Some((l, &exc)));
            let log_a = d_prior + new_ll - self.core.loglik_dim[k];
            if accept(&mut self.rng, log_a) {
                self.kernels[idx] = cand;
                self.core.excitation[idx] = exc;
                self.core.loglik_dim[k] = new_ll;
                self.counters.height.record(true);
            } else {
                self.counters.height.record(false);
            }
            self.notify_observer();
        }
    }

    /// Relocates one interior knot uniformly over the vacant integers in the
    /// two adjacent intervals. The structure prior is constant in the knot
    /// configuration, and the vacancy count is symmetric within a bracket, so
    /// only the likelihood discriminates.
    fn shift_knot(&mut self, l: usize, k: usize) {
        let dims = self.ws.dims;
        let idx = l * dims + k;
        let j_count = self.kernels[idx].components();
        if j_count < 2 {
            self.counters.knot_skipped += 1;
            return;
        }
        let j = self.rng.random_range(1..j_count); // interior knot index
        let (lo, cur, hi) = {
            let knots = &self.kernels[idx].knots;
            (knots[j - 1], knots[j], knots[j + 1])
        };
        let n_vacant = (hi - lo - 2) as usize; // integers in (lo,hi) minus the knot itself
        if n_vacant == 0 {
            self.counters.knot_skipped += 1;
            return;
        }
        let pick = self.rng.random_range(0..n_vacant);
        let mut seen = 0;
        let mut proposal = 0;
        for p in lo + 1..hi {
            if p == cur {
                continue;
            }
            if seen == pick {
                proposal = p;
                break;
            }
            seen += 1;
        }
        // the reverse move sees the same bracket (lo, hi)
        let n_vacant_rev = (hi - lo - 2) as usize;

        let mut cand = self.kernels[idx].clone();
        cand.knots[j] = proposal;
        let exc = self.excitation_for(&cand, l);
        let new_ll = self
            .core
            .loglik_dim_with(&self.ws, k, self.core.mu[k], None, Some((l, &exc)));
        let log_a = new_ll - self.core.loglik_dim[k] + (n_vacant as f64).ln()
            - (n_vacant_rev as f64).ln();
        if accept(&mut self.rng, log_a) {
            self.kernels[idx] = cand;
            self.core.excitation[idx] = exc;
            self.core.loglik_dim[k] = new_ll;
            self.counters.knot_shift.record(true);
        } else {
            self.counters.knot_shift.record(false);
        }
        self.notify_observer();
    }

    fn birth_probability(&self, j: usize) -> f64 {
        if j == 1 {
            1.0
        } else if j as u32 == self.s_max {
            0.0
        } else {
            self.config.birth_probability
        }
    }

    fn death_probability(&self, j: usize) -> f64 {
        1.0 - self.birth_probability(j)
    }

    /// The `pos`-th (0-based) vacant interior knot position, in increasing
    /// order.
    fn nth_vacant(&self, knots: &[u32], pos: usize) -> u32 {
        let mut seen = 0;
        for p in 1..self.s_max {
            if knots.binary_search(&p).is_ok() {
                continue;
            }
            if seen == pos {
                return p;
            }
            seen += 1;
        }
        unreachable!("vacant position index out of range")
    }

    /// Birth-death reversible jump on pair `(l, k)`.
    ///
    /// A birth draws a vacant knot position uniformly and a new height from
    /// `N(mean of current heights, 0.1)`, assigning the height to the right
    /// sub-interval of the split; non-positive height proposals are rejected
    /// outright. A death removes a uniformly chosen interior knot together
    /// with the height of its right interval, which makes death the exact
    /// inverse of birth. The acceptance ratio pairs the move probabilities
    /// actually used with the normalised structure prior, so in
    /// constant-likelihood mode the component count is uniform.
    fn birth_death(&mut self, l: usize, k: usize) {
        if self.s_max == 1 {
            self.counters.birth_death_skipped += 1;
            return;
        }
        let dims = self.ws.dims;
        let idx = l * dims + k;
        let j_cur = self.kernels[idx].components();
        let s_f = f64::from(self.s_max);
        let p_b = self.birth_probability(j_cur);
        let u: f64 = self.rng.random();

        if u < p_b {
            // birth: J = x -> x+1
            let x = j_cur;
            let x_f = x as f64;
            let vacant = self.s_max as usize - x;
            let pick = self.rng.random_range(0..vacant);
            let pos = self.nth_vacant(&self.kernels[idx].knots, pick);
            let mean = self.kernels[idx].mean_height();
            let z: f64 = StandardNormal.sample(&mut self.rng);
            let gamma_star = mean + BIRTH_HEIGHT_VARIANCE.sqrt() * z;
            if gamma_star <= 0.0 {
                self.counters.birth.record(false);
                return;
            }
            let interval = self.kernels[idx].knots.partition_point(|&s| s < pos) - 1;
            let mut cand = self.kernels[idx].clone();
            cand.knots.insert(interval + 1, pos);
            cand.heights.insert(interval + 1, gamma_star);

            let exc = self.excitation_for(&cand, l);
            let new_ll = self
                .core
                .loglik_dim_with(&self.ws, k, self.core.mu[k], None, Some((l, &exc)));
            let height_prior = self.ws.priors.prior(Param::Height);
            let log_a = new_ll - self.core.loglik_dim[k]
                + log_prior_structure_normalized(x + 1, self.s_max)
                - log_prior_structure_normalized(x, self.s_max)
                + height_prior.log_density(gamma_star.ln())
                - gamma_star.ln()
                + self.death_probability(x + 1).ln()
                - x_f.ln()
                - p_b.ln()
                + (s_f - x_f).ln()
                - normal_log_pdf(gamma_star, mean, BIRTH_HEIGHT_VARIANCE);
            if accept(&mut self.rng, log_a) {
                self.kernels[idx] = cand;
                self.core.excitation[idx] = exc;
                self.core.loglik_dim[k] = new_ll;
                self.counters.birth.record(true);
            } else {
                self.counters.birth.record(false);
            }
            self.notify_observer();
        } else {
            // death: J = x+1 -> x
            let x = j_cur - 1;
            let x_f = x as f64;
            let knot_idx = self.rng.random_range(1..j_cur); // one of x interior knots
            let gamma_removed = self.kernels[idx].heights[knot_idx];
            let mut cand = self.kernels[idx].clone();
            cand.knots.remove(knot_idx);
            cand.heights.remove(knot_idx);
            let mean_after = cand.mean_height();

            let exc = self.excitation_for(&cand, l);
            let new_ll = self
                .core
                .loglik_dim_with(&self.ws, k, self.core.mu[k], None, Some((l, &exc)));
            let height_prior = self.ws.priors.prior(Param::Height);
            let log_a = new_ll - self.core.loglik_dim[k]
                + log_prior_structure_normalized(x, self.s_max)
                - log_prior_structure_normalized(x + 1, self.s_max)
                - height_prior.log_density(gamma_removed.ln())
                + gamma_removed.ln()
                + self.birth_probability(x).ln()
                - (s_f - x_f).ln()
                - self.death_probability(x + 1).ln()
                + x_f.ln()
                + normal_log_pdf(gamma_removed, mean_after, BIRTH_HEIGHT_VARIANCE);
            if accept(&mut self.rng, log_a) {
                self.kernels[idx] = cand;
                self.core.excitation[idx] = exc;
                self.core.loglik_dim[k] = new_ll;
                self.counters.death.record(true);
            } else {
                self.counters.death.record(false);
            }
            self.notify_observer();
        }
    }

    /// One full iteration: static updates, then height and knot-shift moves,
    /// then one birth-death attempt per pair. Only the touched dimension's
    /// likelihood term is recomputed by each move.
    fn sweep(&mut self) {
        let dims = self.ws.dims;
        for k in 0..dims {
            self.core.update_baseline(
                &self.ws,
                &mut self.rng,
                &mut self.counters,
                k,
                self.config.step_variance_baseline,
            );
        }
        for l in 0..dims {
            for k in 0..dims {
                self.core.update_magnitude(
                    &self.ws,
                    &mut self.rng,
                    &mut self.counters,
                    l,
                    k,
                    self.config.step_variance_magnitude,
                );
            }
        }
        for l in 0..dims {
            for k in 0..dims {
                self.update_heights(l, k);
                self.shift_knot(l, k);
            }
        }
        for l in 0..dims {
            for k in 0..dims {
                self.birth_death(l, k);
            }
        }
        self.sweeps_done += 1;

        #[cfg(debug_assertions)]
        if self.sweeps_done % 1024 == 0 {
            let cached = self.core.loglik();
            let mut fresh = self.clone_core_fresh();
            fresh.refresh_loglik(&self.ws);
            debug_assert!(
                (cached - fresh.loglik()).abs() < 1e-8,
                "cached log-likelihood drifted: {cached} vs {}",
                fresh.loglik()
            );
        }
    }

    #[cfg(debug_assertions)]
    fn clone_core_fresh(&self) -> CoreState {
        let mut core = self.core.clone();
        core.excitation = self.excitations_for_all();
        core
    }

    fn record_draw(&self, iteration: u64) -> Draw {
        let dims = self.ws.dims;
        Draw {
            iteration,
            mu: self.core.mu.clone(),
            alpha: (0..dims)
                .map(|l| (0..dims).map(|k| self.core.alpha[l * dims + k]).collect())
                .collect(),
            kernels: (0..dims)
                .map(|l| {
                    (0..dims)
                        .map(|k| self.kernels[l * dims + k].to_draw())
                        .collect()
                })
                .collect(),
        }
    }

    /// Runs sweeps `sweeps_done+1 ..= iterations`, recording thinned
    /// post-burn-in draws.
    fn run_sweeps(&mut self) -> Vec<Draw> {
        let config = self.config;
        let mut draws = Vec::with_capacity(config.draws_per_chain() as usize);
        for it in self.sweeps_done + 1..=config.iterations {
            self.sweep();
            if it > config.burn_in && (it - config.burn_in) % config.thin == 0 {
                draws.push(self.record_draw(it));
            }
        }
        draws
    }

    fn into_trace(self, draws: Vec<Draw>) -> SampleTrace {
        let config = self.config;
        let draw_count = draws.len();
        SampleTrace {
            dims: self.ws.dims,
            s_max: self.s_max,
            iterations: config.iterations,
            burn_in: config.burn_in,
            thin: config.thin,
            seed: config.seed,
            config_fingerprint: fingerprint(&(config, self.ws.priors)),
            draws,
            chains: vec![ChainInfo {
                chain_index: self.chain_index,
                stream_seed: stream_seed(config.seed, STREAM_CHAIN, self.chain_index as u64),
                draw_offset: 0,
                draw_count,
                counters: self.counters,
            }],
        }
    }

    /// Snapshot sufficient to resume bit-identically.
    fn checkpoint(&self) -> Checkpoint {
        let dims = self.ws.dims;
        Checkpoint {
            version: CHECKPOINT_VERSION,
            chain_index: self.chain_index,
            master_seed: self.config.seed,
            config_fingerprint: fingerprint(&(self.config, self.ws.priors)),
            sweeps_done: self.sweeps_done,
            mu: self.core.mu.clone(),
            alpha: (0..dims)
                .map(|l| (0..dims).map(|k| self.core.alpha[l * dims + k]).collect())
                .collect(),
            kernels: (0..dims)
                .map(|l| {
                    (0..dims)
                        .map(|k| self.kernels[l * dims + k].to_draw())
                        .collect()
                })
                .collect(),
            counters: self.counters,
            rng: self.rng.clone(),
        }
    }

    #[cfg(test)]
    fn current_model(&self) -> Result<DthpModel> {
        let dims = self.ws.dims;
        let kernels: Vec<Vec<Kernel>> = (0..dims)
            .map(|l| {
                (0..dims)
                    .map(|k| self.kernels[l * dims + k].to_kernel().map(Kernel::from))
                    .collect::<Result<_>>()
            })
            .collect::<Result<_>>()?;
        let alpha = (0..dims)
            .map(|l| (0..dims).map(|k| self.core.alpha[l * dims + k]).collect())
            .collect();
        DthpModel::new(self.core.mu.clone(), alpha, kernels)
    }
}

pub(crate) const CHECKPOINT_VERSION: u32 = 1;

/// Serializable snapshot of a chain: parameters, counters, RNG stream
/// position, and iteration counter. Resuming reproduces the uninterrupted
/// run bit-for-bit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub chain_index: usize,
    pub master_seed: u64,
    pub config_fingerprint: String,
    pub sweeps_done: u64,
    pub mu: Vec<f64>,
    pub alpha: Vec<Vec<f64>>,
    pub kernels: Vec<Vec<KernelDraw>>,
    pub counters: MoveCounters,
    pub rng: ChaCha8Rng,
}

impl Checkpoint {
    fn validate(&self, data: &CountSeries, priors: &PriorConfig, config: &ChainConfig) -> Result<()> {
        if self.version != CHECKPOINT_VERSION {
            return Err(DthpError::Checkpoint(format!(
                "unsupported checkpoint version {}",
                self.version
            )));
        }
        let dims = data.dimensions();
        if self.mu.len() != dims
            || self.alpha.len() != dims
            || self.alpha.iter().any(|r| r.len() != dims)
            || self.kernels.len() != dims
            || self.kernels.iter().any(|r| r.len() != dims)
        {
            return Err(DthpError::Checkpoint(format!(
                "checkpoint shape does not match K={dims}"
            )));
        }
        if priors.dimensions() != dims {
            return Err(DthpError::DimensionMismatch {
                model_k: priors.dimensions(),
                series_k: dims,
            });
        }
        if self.sweeps_done > config.iterations {
            return Err(DthpError::Checkpoint(format!(
                "checkpoint is at sweep {} but the run has only {} iterations",
                self.sweeps_done, config.iterations
            )));
        }
        Ok(())
    }
}

/// Runs one chain to completion; deterministic given `(config.seed,
/// chain_index)`.
pub fn run_chain(
    data: &CountSeries,
    priors: &PriorConfig,
    config: &ChainConfig,
    chain_index: usize,
) -> Result<SampleTrace> {
    let mut chain = Chain::init(data, priors, config, chain_index)?;
    let draws = chain.run_sweeps();
    Ok(chain.into_trace(draws))
}

/// Runs one chain and additionally returns its final-state checkpoint.
pub fn run_chain_with_checkpoint(
    data: &CountSeries,
    priors: &PriorConfig,
    config: &ChainConfig,
    chain_index: usize,
) -> Result<(SampleTrace, Checkpoint)> {
    let mut chain = Chain::init(data, priors, config, chain_index)?;
    let draws = chain.run_sweeps();
    let checkpoint = chain.checkpoint();
    Ok((chain.into_trace(draws), checkpoint))
}

/// Runs one chain, reporting pair (0,0)'s kernel after every individual
/// kernel-affecting move. This exposes the fine-grained move chain, whose
/// single steps are each reversible, to empirical detailed-balance checks;
/// full sweeps are fixed-order compositions and need not balance per sweep.
#[doc(hidden)]
pub fn run_chain_observing<'a, F: FnMut(&KernelDraw) + 'a>(
    data: &'a CountSeries,
    priors: &'a PriorConfig,
    config: &'a ChainConfig,
    chain_index: usize,
    observe: F,
) -> Result<()> {
    let mut chain = Chain::init(data, priors, config, chain_index)?;
    chain.observer = Some(Box::new(observe));
    chain.run_sweeps();
    Ok(())
}

/// Resumes a checkpointed chain, returning the draws recorded after the
/// checkpoint. Concatenated with the pre-checkpoint draws this equals the
/// uninterrupted run exactly.
pub fn resume_chain(
    data: &CountSeries,
    priors: &PriorConfig,
    config: &ChainConfig,
    checkpoint: &Checkpoint,
) -> Result<SampleTrace> {
    let mut chain = Chain::from_checkpoint(data, priors, config, checkpoint)?;
    let draws = chain.run_sweeps();
    Ok(chain.into_trace(draws))
}

/// Runs `config.chains` chains concurrently on seeds split from the master
/// seed and pools post-burn-in draws in chain-index order.
pub fn run_parallel(
    data: &CountSeries,
    priors: &PriorConfig,
    config: &ChainConfig,
) -> Result<SampleTrace> {
    config.validate()?;
    let traces = (0..config.chains)
        .into_par_iter()
        .map(|i| {
            run_chain(data, priors, config, i).map_err(|e| DthpError::ChainFailed {
                chain: i,
                source: Box::new(e),
            })
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    SampleTrace::pool(traces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prior::PriorSetting;

    fn tiny_series() -> CountSeries {
        CountSeries::new(vec![vec![2.0, 0.0, 1.0, 3.0, 1.0, 0.0, 2.0, 1.0]]).unwrap()
    }

    fn priors(s_max: u32) -> PriorConfig {
        PriorConfig::new(PriorSetting::RelativelyInformative, 1, s_max, None).unwrap()
    }

    fn quick_config(iterations: u64, burn_in: u64, seed: u64) -> ChainConfig {
        ChainConfig {
            iterations,
            burn_in,
            chains: 1,
            seed,
            ..ChainConfig::default()
        }
    }

    #[test]
    fn draw_count_matches_contract() {
        let data = tiny_series();
        let pri = priors(7);
        // iterations = burn_in + 1, thin = 1: exactly one stored draw
        let cfg = quick_config(101, 100, 3);
        let trace = run_chain(&data, &pri, &cfg, 0).unwrap();
        assert_eq!(trace.draw_count(), 1);

        let mut cfg = quick_config(1000, 400, 3);
        cfg.thin = 7;
        let trace = run_chain(&data, &pri, &cfg, 0).unwrap();
        assert_eq!(trace.draw_count() as u64, (1000 - 400) / 7);
    }

    #[test]
    fn same_seed_same_trace() {
        let data = tiny_series();
        let pri = priors(7);
        let cfg = quick_config(500, 100, 11);
        let a = run_chain(&data, &pri, &cfg, 0).unwrap();
        let b = run_chain(&data, &pri, &cfg, 0).unwrap();
        assert_eq!(a, b);
        let c = run_chain(&data, &pri, &cfg, 1).unwrap();
        assert_ne!(a.draws, c.draws);
    }

    #[test]
    fn pooled_trace_shape_and_order() {
        let data = tiny_series();
        let pri = priors(7);
        let mut cfg = quick_config(300, 100, 5);
        cfg.chains = 3;
        let pooled = run_parallel(&data, &pri, &cfg).unwrap();
        assert_eq!(pooled.draw_count(), 600);
        assert_eq!(pooled.chains.len(), 3);
        for (i, info) in pooled.chains.iter().enumerate() {
            assert_eq!(info.chain_index, i);
            assert_eq!(info.draw_count, 200);
            assert_eq!(info.draw_offset, 200 * i);
        }
        // pooled draws equal per-chain runs concatenated in order
        for i in 0..3 {
            let single = run_chain(&data, &pri, &cfg, i).unwrap();
            assert_eq!(pooled.chain_draws(i), &single.draws[..]);
        }
    }

    #[test]
    fn kernel_invariants_hold_along_chain() {
        let data = tiny_series();
        let pri = priors(5);
        let cfg = quick_config(2_000, 10, 17);
        let trace = run_chain(&data, &pri, &cfg, 0).unwrap();
        for draw in &trace.draws {
            match &draw.kernels[0][0] {
                KernelDraw::Histogram { s, theta } => {
                    assert_eq!(s[0], 0);
                    assert_eq!(*s.last().unwrap(), 5);
                    assert!(s.windows(2).all(|w| w[0] < w[1]));
                    assert_eq!(theta.len(), s.len() - 1);
                    assert_eq!(theta[0], 1.0);
                    assert!(theta.iter().all(|&h| h > 0.0));
                }
                _ => panic!("expected histogram draw"),
            }
        }
    }

    #[test]
    fn counters_sum_to_attempts() {
        let data = tiny_series();
        let pri = priors(7);
        let cfg = quick_config(2_000, 10, 23);
        let trace = run_chain(&data, &pri, &cfg, 0).unwrap();
        let c = trace.chains[0].counters;
        assert_eq!(c.baseline.attempted, 2_000);
        assert_eq!(c.magnitude.attempted, 2_000);
        // every sweep makes exactly one birth-death attempt (or skip) per pair
        assert_eq!(c.birth.attempted + c.death.attempted + c.birth_death_skipped, 2_000);
        // knot shifts: attempted or skipped once per sweep
        assert_eq!(c.knot_shift.attempted + c.knot_skipped, 2_000);
        assert!(c.baseline.accepted <= c.baseline.attempted);
        assert!(c.height.accepted <= c.height.attempted);
    }

    #[test]
    fn checkpoint_resume_is_bit_identical() {
        let data = tiny_series();
        let pri = priors(7);
        let full_cfg = quick_config(800, 200, 29);
        let full = run_chain(&data, &pri, &full_cfg, 0).unwrap();

        // stop half-way, checkpoint, resume
        let half_cfg = quick_config(400, 200, 29);
        let (first, checkpoint) = run_chain_with_checkpoint(&data, &pri, &half_cfg, 0).unwrap();
        let rest = resume_chain(&data, &pri, &full_cfg, &checkpoint).unwrap();

        let mut combined = first.draws.clone();
        combined.extend(rest.draws.clone());
        assert_eq!(combined, full.draws);

        // checkpoint JSON round-trip preserves the stream exactly
        let json = serde_json::to_string(&checkpoint).unwrap();
        let back: Checkpoint = serde_json::from_str(&json).unwrap();
        let rest2 = resume_chain(&data, &pri, &full_cfg, &back).unwrap();
        assert_eq!(rest.draws, rest2.draws);
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let data = tiny_series();
        let pri = PriorConfig::new(PriorSetting::RelativelyInformative, 2, 7, None).unwrap();
        let cfg = quick_config(10, 5, 1);
        assert!(run_chain(&data, &pri, &cfg, 0).is_err());
    }

    #[test]
    fn current_model_reconstructs_valid_model() {
        let data = tiny_series();
        let pri = priors(7);
        let cfg = quick_config(100, 10, 31);
        let chain = Chain::init(&data, &pri, &cfg, 0).unwrap();
        let model = chain.current_model().unwrap();
        assert_eq!(model.dimensions(), 1);
        assert_eq!(model.kernel(0, 0).s_max(), 7);
    }
}
