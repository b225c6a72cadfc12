//! Posterior summaries: kernel bands, RMSE distributions, intensity
//! reconstruction, and static-parameter summaries.
//!
//! All quantiles use linear interpolation of order statistics
//! (`h = (n−1)p`), so band edges are reproducible across implementations.

mod diagnostics;

pub use diagnostics::{diagnostics, ess, split_rhat, Diagnostics, ParamDiagnostics};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::DthpError;
use crate::kernel::Kernel;
use crate::likelihood::LagCache;
use crate::mcmc::SampleTrace;
use crate::series::CountSeries;
use crate::Result;

/// Linear-interpolation quantile of a sorted slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    assert!((0.0..=1.0).contains(&p));
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < sorted.len() {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[sorted.len() - 1]
    }
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite values"));
    v
}

/// Per-lag posterior mean, median, and the 10%/90% quantiles (the 80%
/// interval) of a triggering kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelBand {
    pub s_max: u32,
    /// Indexed by lag − 1.
    pub mean: Vec<f64>,
    pub median: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Evaluates every stored kernel draw for pair `(l, k)` at integer lags and
/// summarises per lag.
pub fn kernel_band(trace: &SampleTrace, l: usize, k: usize) -> Result<KernelBand> {
    check_pair(trace, l, k)?;
    let s_max = trace.s_max;
    let n = trace.draws.len() as f64;
    let mut per_lag: Vec<Vec<f64>> = vec![Vec::with_capacity(trace.draws.len()); s_max as usize];
    for draw in &trace.draws {
        let masses = draw.kernels[l][k].masses(s_max)?;
        for (d, &m) in masses.iter().enumerate() {
            per_lag[d].push(m);
        }
    }
    let mut band = KernelBand {
        s_max,
        mean: Vec::with_capacity(per_lag.len()),
        median: Vec::with_capacity(per_lag.len()),
        lower: Vec::with_capacity(per_lag.len()),
        upper: Vec::with_capacity(per_lag.len()),
    };
    for values in &per_lag {
        let s = sorted(values);
        band.mean.push(values.iter().sum::<f64>() / n);
        band.median.push(quantile_sorted(&s, 0.5));
        band.lower.push(quantile_sorted(&s, 0.1));
        band.upper.push(quantile_sorted(&s, 0.9));
    }
    Ok(band)
}

/// Root mean squared error of each stored draw against a known kernel over
/// integer lags `1..=s_max`.
pub fn rmse_per_draw(trace: &SampleTrace, l: usize, k: usize, truth: &Kernel) -> Result<Vec<f64>> {
    check_pair(trace, l, k)?;
    if truth.s_max() != trace.s_max {
        return Err(DthpError::SmaxMismatch {
            left: truth.s_max(),
            right: trace.s_max,
        });
    }
    let true_masses = truth.masses();
    let s_max = trace.s_max as f64;
    trace
        .draws
        .iter()
        .map(|draw| {
            let masses = draw.kernels[l][k].masses(trace.s_max)?;
            let sum_sq: f64 = masses
                .iter()
                .zip(&true_masses)
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum();
            Ok((sum_sq / s_max).sqrt())
        })
        .collect()
}

/// Five-number summary feeding boxplots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

pub fn five_number(values: &[f64]) -> FiveNumber {
    let s = sorted(values);
    FiveNumber {
        min: s[0],
        q1: quantile_sorted(&s, 0.25),
        median: quantile_sorted(&s, 0.5),
        q3: quantile_sorted(&s, 0.75),
        max: s[s.len() - 1],
    }
}

/// Per-time-point posterior intensity band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityBand {
    /// `[k][t]`.
    pub median: Vec<Vec<f64>>,
    pub lower: Vec<Vec<f64>>,
    pub upper: Vec<Vec<f64>>,
}

/// Evaluates the conditional intensity of every draw at every `(k, t)` on the
/// observed history and returns the per-point median and 10%/90% quantiles.
pub fn intensity_band(trace: &SampleTrace, data: &CountSeries) -> Result<IntensityBand> {
    if trace.draws.is_empty() {
        return Err(DthpError::EmptyTrace);
    }
    if data.dimensions() != trace.dims {
        return Err(DthpError::DimensionMismatch {
            model_k: trace.dims,
            series_k: data.dimensions(),
        });
    }
    let dims = trace.dims;
    let s_max = trace.s_max;
    let cache = LagCache::new(data, s_max);

    // per-draw masses, flattened [draw][l*K + k][d-1]
    let all_masses: Vec<Vec<Vec<f64>>> = trace
        .draws
        .iter()
        .map(|draw| {
            let mut per_pair = Vec::with_capacity(dims * dims);
            for l in 0..dims {
                for k in 0..dims {
                    per_pair.push(draw.kernels[l][k].masses(s_max)?);
                }
            }
            Ok(per_pair)
        })
        .collect::<Result<_>>()?;

    let mut band = IntensityBand {
        median: vec![vec![0.0; data.len()]; dims],
        lower: vec![vec![0.0; data.len()]; dims],
        upper: vec![vec![0.0; data.len()]; dims],
    };
    for k in 0..dims {
        let summaries: Vec<(f64, f64, f64)> = (0..data.len())
            .into_par_iter()
            .map(|t| {
                let mut lambdas: Vec<f64> = trace
                    .draws
                    .iter()
                    .zip(&all_masses)
                    .map(|(draw, masses)| {
                        let mut lambda = draw.mu[k];
                        for l in 0..dims {
                            let m = &masses[l * dims + k];
                            let lags = cache.lag_slice(t, l);
                            let mut e = 0.0;
                            for d in 0..s_max as usize {
                                e += lags[d] * m[d];
                            }
                            lambda += draw.alpha[l][k] * e;
                        }
                        lambda
                    })
                    .collect();
                lambdas.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite intensity"));
                (
                    quantile_sorted(&lambdas, 0.1),
                    quantile_sorted(&lambdas, 0.5),
                    quantile_sorted(&lambdas, 0.9),
                )
            })
            .collect();
        for (t, (lo, med, hi)) in summaries.into_iter().enumerate() {
            band.lower[k][t] = lo;
            band.median[k][t] = med;
            band.upper[k][t] = hi;
        }
    }
    Ok(band)
}

/// Natural-scale posterior median and 80% interval of one parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Medians and 80% intervals of every baseline and magnitude parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticSummary {
    pub mu: Vec<ParamSummary>,
    /// Row `l`, column `k`.
    pub alpha: Vec<Vec<ParamSummary>>,
}

pub fn static_summary(trace: &SampleTrace) -> Result<StaticSummary> {
    if trace.draws.is_empty() {
        return Err(DthpError::EmptyTrace);
    }
    let dims = trace.dims;
    let summarise = |values: &[f64]| {
        let s = sorted(values);
        ParamSummary {
            median: quantile_sorted(&s, 0.5),
            lower: quantile_sorted(&s, 0.1),
            upper: quantile_sorted(&s, 0.9),
        }
    };
    let mu = (0..dims)
        .map(|k| {
            let values: Vec<f64> = trace.draws.iter().map(|d| d.mu[k]).collect();
            summarise(&values)
        })
        .collect();
    let alpha = (0..dims)
        .map(|l| {
            (0..dims)
                .map(|k| {
                    let values: Vec<f64> = trace.draws.iter().map(|d| d.alpha[l][k]).collect();
                    summarise(&values)
                })
                .collect()
        })
        .collect();
    Ok(StaticSummary { mu, alpha })
}

fn check_pair(trace: &SampleTrace, l: usize, k: usize) -> Result<()> {
    if trace.draws.is_empty() {
        return Err(DthpError::EmptyTrace);
    }
    if l >= trace.dims || k >= trace.dims {
        return Err(DthpError::InvalidConfig(format!(
            "kernel pair ({l},{k}) out of range for K={}",
            trace.dims
        )));
    }
    Ok(())
}
