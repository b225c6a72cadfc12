//! Fixed-dimension MH sampler for the truncated geometric kernel baseline.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::DthpError;
use crate::kernel::GeometricKernel;
use crate::prior::{Param, PriorConfig};
use crate::rng::{stream_rng, stream_seed, STREAM_CHAIN};
use crate::series::CountSeries;
use crate::Result;

use super::core::{accept, CoreState, Workspace};
use super::trace::{ChainInfo, Draw, KernelDraw, MoveCounters, SampleTrace};
use super::{fingerprint, ChainConfig};

/// Log-density of `logit(β)` under a Uniform(0,1) prior on `β`: the standard
/// logistic distribution.
fn logit_uniform_log_pdf(x: f64) -> f64 {
    // ln σ(x) + ln(1−σ(x)) = −x − 2 ln(1 + e^{−x})
    -x - 2.0 * (-x).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

struct GeoChain<'a> {
    ws: Workspace<'a>,
    config: &'a ChainConfig,
    chain_index: usize,
    s_max: u32,
    core: CoreState,
    /// `logit(β^{lk})`, kernel-grid layout.
    logit_beta: Vec<f64>,
    counters: MoveCounters,
    rng: ChaCha8Rng,
    sweeps_done: u64,
}

impl<'a> GeoChain<'a> {
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
        let rng = stream_rng(config.seed, STREAM_CHAIN, chain_index as u64);
        let mut chain = Self {
            ws,
            config,
            chain_index,
            s_max: priors.s_max(),
            core: CoreState {
                mu: vec![0.0; dims],
                alpha: vec![0.0; dims * dims],
                excitation: vec![Vec::new(); dims * dims],
                loglik_dim: vec![0.0; dims],
            },
            logit_beta: vec![0.0; dims * dims],
            counters: MoveCounters::default(),
            rng,
            sweeps_done: 0,
        };

        for attempt in 0..=config.init_retries {
            for k in 0..dims {
                chain.core.mu[k] = chain
                    .ws
                    .priors
                    .prior(Param::Baseline(k))
                    .sample(&mut chain.rng)
                    .exp();
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
            for idx in 0..dims * dims {
                // β drawn from its Uniform(0,1) prior
                let beta: f64 = chain.rng.random();
                chain.logit_beta[idx] = (beta / (1.0 - beta)).ln();
                chain.core.excitation[idx] = chain.excitation_for(chain.logit_beta[idx], idx / dims);
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

    fn excitation_for(&self, logit_beta: f64, l: usize) -> Vec<f64> {
        let beta = sigmoid(logit_beta);
        let kernel = GeometricKernel::new(beta, self.s_max).expect("sigmoid keeps beta in (0,1)");
        let masses = kernel.masses();
        (0..self.ws.t_len)
            .map(|t| {
                let lags = self.ws.cache.lag_slice(t, l);
                let mut e = 0.0;
                for d in 1..=self.s_max as usize {
                    e += lags[d - 1] * masses[d - 1];
                }
                e
            })
            .collect()
    }

    /// Random-walk update of `logit(β^{lk})` with the implied logistic prior.
    fn update_beta(&mut self, l: usize, k: usize) {
        let dims = self.ws.dims;
        let idx = l * dims + k;
        let cur = self.logit_beta[idx];
        let z: f64 = StandardNormal.sample(&mut self.rng);
        let prop = cur + self.config.step_variance_beta.sqrt() * z;
        let d_prior = logit_uniform_log_pdf(prop) - logit_uniform_log_pdf(cur);
        let exc = self.excitation_for(prop, l);
        let new_ll = self
            .core
            .loglik_dim_with(&self.ws, k, self.core.mu[k], None, Some((l, &exc)));
        let log_a = d_prior + new_ll - self.core.loglik_dim[k];
        if accept(&mut self.rng, log_a) {
            self.logit_beta[idx] = prop;
            self.core.excitation[idx] = exc;
            self.core.loglik_dim[k] = new_ll;
            self.counters.beta.record(true);
        } else {
            self.counters.beta.record(false);
        }
    }

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
                self.update_beta(l, k);
            }
        }
        self.sweeps_done += 1;
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
                        .map(|k| KernelDraw::Geometric {
                            beta: sigmoid(self.logit_beta[l * dims + k]),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    fn run(mut self) -> SampleTrace {
        let config = self.config;
        let mut draws = Vec::with_capacity(config.draws_per_chain() as usize);
        for it in self.sweeps_done + 1..=config.iterations {
            self.sweep();
            if it > config.burn_in && (it - config.burn_in) % config.thin == 0 {
                draws.push(self.record_draw(it));
            }
        }
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
}

/// Fits the geometric-kernel model: MH over `(μ̄, ᾱ, logit β)` with the same
/// priors on the statics and a Uniform(0,1) prior on each `β`. Runs
/// `config.chains` chains concurrently and pools them like the histogram
/// sampler.
pub fn fit_geometric(
    data: &CountSeries,
    priors: &PriorConfig,
    config: &ChainConfig,
) -> Result<SampleTrace> {
    config.validate()?;
    let traces = (0..config.chains)
        .into_par_iter()
        .map(|i| {
            GeoChain::init(data, priors, config, i)
                .map(GeoChain::run)
                .map_err(|e| DthpError::ChainFailed {
                    chain: i,
                    source: Box::new(e),
                })
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    SampleTrace::pool(traces)
}
