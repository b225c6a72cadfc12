//! Conditional intensities, the exact Poisson log-likelihood, and the
//! lag-count cache behind the sampler's inner loop.

use statrs::function::gamma::ln_gamma;

use crate::error::DthpError;
use crate::model::DthpModel;
use crate::series::CountSeries;
use crate::Result;

/// Conditional intensity `λ^k(t)` from counts strictly before `t`.
///
/// `t` is a 0-based time index, so `t = 0` has empty history and returns the
/// baseline exactly. Day `t`'s own count never feeds day `t`'s intensity.
pub fn intensity(model: &DthpModel, series: &CountSeries, t: usize, k: usize) -> Result<f64> {
    model.check_series(series)?;
    if t >= series.len() || k >= model.dimensions() {
        return Err(DthpError::InvalidModel(format!(
            "index out of range: t={t}, k={k} for T={}, K={}",
            series.len(),
            model.dimensions()
        )));
    }
    Ok(intensity_unchecked(model, series, t, k))
}

fn intensity_unchecked(model: &DthpModel, series: &CountSeries, t: usize, k: usize) -> f64 {
    let dims = model.dimensions();
    let mut lambda = model.mu()[k];
    for l in 0..dims {
        let alpha = model.alpha()[l][k];
        if alpha == 0.0 {
            continue;
        }
        let kernel = model.kernel(l, k);
        let d_max = (kernel.s_max() as usize).min(t);
        let mut excitation = 0.0;
        for d in 1..=d_max {
            excitation += series.count(l, t - d) * kernel.evaluate(d as u32);
        }
        lambda += alpha * excitation;
    }
    lambda
}

/// Full Poisson log-likelihood including the `−ln(y!)` constant, so values
/// are comparable across kernel families.
///
/// A non-finite result is reported as an error, never clamped.
pub fn log_likelihood(model: &DthpModel, series: &CountSeries) -> Result<f64> {
    model.check_series(series)?;
    let mut total = 0.0;
    for k in 0..model.dimensions() {
        for t in 0..series.len() {
            let lambda = intensity_unchecked(model, series, t, k);
            let y = series.count(k, t);
            let term = poisson_log_mass(y, lambda);
            if !term.is_finite() {
                return Err(DthpError::NonFiniteLikelihood { k, t, lambda });
            }
            total += term;
        }
    }
    Ok(total)
}

/// `y ln λ − λ − ln Γ(y+1)`; the `y ln λ` factor is skipped when `y = 0` so
/// the zero-count term stays finite for any positive `λ`.
#[inline]
pub fn poisson_log_mass(y: f64, lambda: f64) -> f64 {
    let rate_term = if y > 0.0 { y * lambda.ln() } else { 0.0 };
    rate_term - lambda - ln_gamma(y + 1.0)
}

/// Per-time-step lagged counts `C[t][l][d] = y^l_{t−d}`, plus prefix sums
/// over `d` so a piecewise-constant kernel's excitation reduces to a handful
/// of window sums.
///
/// The cache is read-only after construction and shareable across chains.
#[derive(Debug, Clone)]
pub struct LagCache {
    dims: usize,
    len: usize,
    s_max: usize,
    /// `[(t*K + l)*s_max + (d-1)]`, zero where `d > t`.
    by_lag: Vec<f64>,
    /// `[(t*K + l)*(s_max+1) + m] = Σ_{d=1..m} C[t][l][d]`.
    prefix: Vec<f64>,
}

impl LagCache {
    pub fn new(series: &CountSeries, s_max: u32) -> Self {
        let dims = series.dimensions();
        let len = series.len();
        let s_max = s_max as usize;
        let mut by_lag = vec![0.0; len * dims * s_max];
        let mut prefix = vec![0.0; len * dims * (s_max + 1)];
        for t in 0..len {
            for l in 0..dims {
                let base = (t * dims + l) * s_max;
                let pbase = (t * dims + l) * (s_max + 1);
                let mut run = 0.0;
                for d in 1..=s_max {
                    let c = if d <= t { series.count(l, t - d) } else { 0.0 };
                    by_lag[base + d - 1] = c;
                    run += c;
                    prefix[pbase + d] = run;
                }
            }
        }
        Self {
            dims,
            len,
            s_max,
            by_lag,
            prefix,
        }
    }

    pub fn dimensions(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn s_max(&self) -> usize {
        self.s_max
    }

    /// `C[t][l][d]` with 1-based lag `d`.
    #[inline]
    pub fn lag_count(&self, t: usize, l: usize, d: usize) -> f64 {
        self.by_lag[(t * self.dims + l) * self.s_max + d - 1]
    }

    /// Lagged counts for `d = 1..=s_max` at `(t, l)`.
    #[inline]
    pub fn lag_slice(&self, t: usize, l: usize) -> &[f64] {
        let base = (t * self.dims + l) * self.s_max;
        &self.by_lag[base..base + self.s_max]
    }

    /// `Σ_{d in (lo, hi]} C[t][l][d]` via prefix sums.
    #[inline]
    pub fn window_sum(&self, t: usize, l: usize, lo: usize, hi: usize) -> f64 {
        let pbase = (t * self.dims + l) * (self.s_max + 1);
        self.prefix[pbase + hi] - self.prefix[pbase + lo]
    }
}

/// Builds the lag-count cache for a series; see [`LagCache`].
pub fn precompute_lag_counts(series: &CountSeries, s_max: u32) -> LagCache {
    LagCache::new(series, s_max)
}

/// Intensity evaluated through the cache, summing lags in the same order as
/// [`intensity`] so the two agree bit-for-bit.
pub fn intensity_with_cache(model: &DthpModel, cache: &LagCache, t: usize, k: usize) -> f64 {
    let dims = model.dimensions();
    let mut lambda = model.mu()[k];
    for l in 0..dims {
        let alpha = model.alpha()[l][k];
        if alpha == 0.0 {
            continue;
        }
        let kernel = model.kernel(l, k);
        let masses = kernel.masses();
        let lags = cache.lag_slice(t, l);
        let d_max = (kernel.s_max() as usize).min(cache.s_max);
        let mut excitation = 0.0;
        for d in 1..=d_max {
            excitation += lags[d - 1] * masses[d - 1];
        }
        lambda += alpha * excitation;
    }
    lambda
}

/// Log-likelihood through the cache; bit-identical to [`log_likelihood`].
pub fn log_likelihood_with_cache(
    model: &DthpModel,
    series: &CountSeries,
    cache: &LagCache,
) -> Result<f64> {
    model.check_series(series)?;
    let mut total = 0.0;
    for k in 0..model.dimensions() {
        for t in 0..series.len() {
            let lambda = intensity_with_cache(model, cache, t, k);
            let y = series.count(k, t);
            let term = poisson_log_mass(y, lambda);
            if !term.is_finite() {
                return Err(DthpError::NonFiniteLikelihood { k, t, lambda });
            }
            total += term;
        }
    }
    Ok(total)
}

/// Spectral-radius stability classification of a magnitude matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stability {
    pub spectral_radius: f64,
    pub stable: bool,
}

/// Spectral radius of a non-negative matrix by power iteration (tolerance
/// 1e-10); the process is stable iff the radius is below 1.
///
/// Iterates on `A + I`, whose Perron root is `1 + ρ(A)`; the shift makes the
/// iteration converge from a positive start for periodic matrices too.
pub fn spectral_stability(alpha: &[Vec<f64>]) -> Result<Stability> {
    let k = alpha.len();
    if k == 0 || alpha.iter().any(|row| row.len() != k) {
        return Err(DthpError::InvalidModel(
            "magnitude matrix must be square and non-empty".into(),
        ));
    }
    if alpha
        .iter()
        .any(|row| row.iter().any(|&a| !a.is_finite() || a < 0.0))
    {
        return Err(DthpError::InvalidModel(
            "magnitude matrix must be non-negative and finite".into(),
        ));
    }

    const TOL: f64 = 1e-10;
    const MAX_ITER: usize = 100_000;

    let mut x = vec![1.0 / k as f64; k];
    let mut estimate = 1.0;
    for _ in 0..MAX_ITER {
        let mut y = vec![0.0; k];
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = x[i]; // identity shift
            for (j, &xj) in x.iter().enumerate() {
                acc += alpha[i][j] * xj;
            }
            *yi = acc;
        }
        let norm: f64 = y.iter().sum();
        let next = norm; // x was normalised to unit 1-norm
        for yi in &mut y {
            *yi /= norm;
        }
        x = y;
        if (next - estimate).abs() <= TOL * estimate.max(1.0) {
            estimate = next;
            break;
        }
        estimate = next;
    }
    let spectral_radius = (estimate - 1.0).max(0.0);
    Ok(Stability {
        spectral_radius,
        stable: spectral_radius < 1.0,
    })
}
