//! Shared sampler plumbing: the likelihood workspace, static-parameter
//! moves, and Metropolis-Hastings acceptance.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::likelihood::LagCache;
use crate::prior::{Param, PriorConfig};
use crate::series::CountSeries;

use super::trace::MoveCounters;

/// Immutable per-run context shared by every move.
pub(crate) struct Workspace<'a> {
    pub data: &'a CountSeries,
    pub cache: LagCache,
    pub priors: &'a PriorConfig,
    pub dims: usize,
    pub t_len: usize,
    /// `Σ_t ln Γ(y_t^k + 1)` per dimension, the likelihood's constant part.
    pub log_fact: Vec<f64>,
    pub constant_likelihood: bool,
}

impl<'a> Workspace<'a> {
    pub fn new(data: &'a CountSeries, priors: &'a PriorConfig, constant_likelihood: bool) -> Self {
        let dims = data.dimensions();
        let t_len = data.len();
        let cache = LagCache::new(data, priors.s_max());
        let log_fact = (0..dims)
            .map(|k| data.row(k).iter().map(|&y| ln_gamma(y + 1.0)).sum())
            .collect();
        Self {
            data,
            cache,
            priors,
            dims,
            t_len,
            log_fact,
            constant_likelihood,
        }
    }
}

/// The mutable parameter block common to both samplers, with its likelihood
/// caches. `alpha[l*K + k]` and `excitation[l*K + k]` follow the kernel-grid
/// layout; `loglik_dim[k]` is dimension `k`'s full log-likelihood term
/// including the factorial constant.
#[derive(Clone)]
pub(crate) struct CoreState {
    pub mu: Vec<f64>,
    pub alpha: Vec<f64>,
    pub excitation: Vec<Vec<f64>>,
    pub loglik_dim: Vec<f64>,
}

impl CoreState {
    /// Dimension `k`'s log-likelihood with optional single-entry overrides of
    /// the baseline, one magnitude, or one excitation vector. `−∞` marks a
    /// non-finite intensity, which rejects the proposal.
    pub fn loglik_dim_with(
        &self,
        ws: &Workspace,
        k: usize,
        mu_k: f64,
        alpha_over: Option<(usize, f64)>,
        exc_over: Option<(usize, &[f64])>,
    ) -> f64 {
        if ws.constant_likelihood {
            return 0.0;
        }
        let dims = ws.dims;
        let y = ws.data.row(k);
        let mut total = 0.0;
        for t in 0..ws.t_len {
            let mut lambda = mu_k;
            for l in 0..dims {
                let a = match alpha_over {
                    Some((lo, v)) if lo == l => v,
                    _ => self.alpha[l * dims + k],
                };
                let e = match exc_over {
                    Some((lo, ev)) if lo == l => ev[t],
                    _ => self.excitation[l * dims + k][t],
                };
                lambda += a * e;
            }
            if !(lambda.is_finite() && lambda > 0.0) {
                return f64::NEG_INFINITY;
            }
            let yt = y[t];
            total += if yt > 0.0 { yt * lambda.ln() } else { 0.0 } - lambda;
        }
        total - ws.log_fact[k]
    }

    /// Total cached log-likelihood.
    pub fn loglik(&self) -> f64 {
        self.loglik_dim.iter().sum()
    }

    /// Rebuilds `loglik_dim` from the current parameters and excitations.
    pub fn refresh_loglik(&mut self, ws: &Workspace) {
        for k in 0..ws.dims {
            self.loglik_dim[k] = self.loglik_dim_with(ws, k, self.mu[k], None, None);
        }
    }

    /// Log-scale random-walk update of baseline `μ^k`.
    pub fn update_baseline(
        &mut self,
        ws: &Workspace,
        rng: &mut ChaCha8Rng,
        counters: &mut MoveCounters,
        k: usize,
        step_variance: f64,
    ) {
        let cur_log = self.mu[k].ln();
        let z: f64 = StandardNormal.sample(rng);
        let prop_log = cur_log + step_variance.sqrt() * z;
        let prior = ws.priors.prior(Param::Baseline(k));
        let d_prior = prior.log_density(prop_log) - prior.log_density(cur_log);
        if d_prior == f64::NEG_INFINITY {
            counters.baseline.record(false);
            return;
        }
        let prop = prop_log.exp();
        let new_ll = self.loglik_dim_with(ws, k, prop, None, None);
        let log_a = d_prior + new_ll - self.loglik_dim[k];
        if accept(rng, log_a) {
            self.mu[k] = prop;
            self.loglik_dim[k] = new_ll;
            counters.baseline.record(true);
        } else {
            counters.baseline.record(false);
        }
    }

    /// Log-scale random-walk update of magnitude `α^{lk}`.
    pub fn update_magnitude(
        &mut self,
        ws: &Workspace,
        rng: &mut ChaCha8Rng,
        counters: &mut MoveCounters,
        l: usize,
        k: usize,
        step_variance: f64,
    ) {
        let idx = l * ws.dims + k;
        let cur_log = self.alpha[idx].ln();
        let z: f64 = StandardNormal.sample(rng);
        let prop_log = cur_log + step_variance.sqrt() * z;
        let prior = ws.priors.prior(Param::Magnitude(l, k));
        let d_prior = prior.log_density(prop_log) - prior.log_density(cur_log);
        if d_prior == f64::NEG_INFINITY {
            counters.magnitude.record(false);
            return;
        }
        let prop = prop_log.exp();
        let new_ll = self.loglik_dim_with(ws, k, self.mu[k], Some((l, prop)), None);
        let log_a = d_prior + new_ll - self.loglik_dim[k];
        if accept(rng, log_a) {
            self.alpha[idx] = prop;
            self.loglik_dim[k] = new_ll;
            counters.magnitude.record(true);
        } else {
            counters.magnitude.record(false);
        }
    }
}

/// MH acceptance on the log scale; draws a uniform only when the decision
/// needs one, and rejects `−∞` and NaN outright.
pub(crate) fn accept(rng: &mut ChaCha8Rng, log_a: f64) -> bool {
    if log_a >= 0.0 {
        true
    } else if log_a == f64::NEG_INFINITY || log_a.is_nan() {
        false
    } else {
        rng.random::<f64>().ln() < log_a
    }
}

/// Normal log-density with the variance parameterisation used throughout.
pub(crate) fn normal_log_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    let d = x - mean;
    -0.5 * (2.0 * std::f64::consts::PI * variance).ln() - d * d / (2.0 * variance)
}
