//! Convergence diagnostics: split-R̂, effective sample size, lag
//! autocorrelations, move acceptance rates, and component-count occupancy.

use serde::{Deserialize, Serialize};

use crate::error::DthpError;
use crate::mcmc::{MoveCounters, SampleTrace};
use crate::Result;

/// Per-parameter convergence summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDiagnostics {
    pub name: String,
    pub mean: f64,
    pub ess: f64,
    /// NaN when fewer than two chains are available.
    pub split_rhat: f64,
    /// Pooled-chain autocorrelations at lags `1..=max_lag`.
    pub autocorr: Vec<f64>,
}

/// Full diagnostic report for one (possibly pooled) trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub params: Vec<ParamDiagnostics>,
    /// `j_occupancy[l][k][j-1]`: relative frequency of J = j for pair (l,k).
    pub j_occupancy: Vec<Vec<Vec<f64>>>,
    /// Acceptance counters per constituent chain, in chain order.
    pub acceptance: Vec<MoveCounters>,
}

/// Split-R̂ over chains of equal length: each chain is halved and the
/// potential scale reduction computed over the halves.
pub fn split_rhat(chains: &[Vec<f64>]) -> f64 {
    if chains.len() < 2 {
        return f64::NAN;
    }
    let halves = split_in_halves(chains);
    rhat(&halves)
}

fn split_in_halves(chains: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    let half = n / 2;
    let mut out = Vec::with_capacity(chains.len() * 2);
    for chain in chains {
        out.push(chain[..half].to_vec());
        out.push(chain[n - half..n].to_vec());
    }
    out
}

fn rhat(chains: &[Vec<f64>]) -> f64 {
    let m = chains.len() as f64;
    let n = chains[0].len() as f64;
    if n < 2.0 {
        return f64::NAN;
    }
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let grand = mean(&means);
    let b = n / (m - 1.0) * means.iter().map(|&x| (x - grand) * (x - grand)).sum::<f64>();
    let w = chains
        .iter()
        .zip(&means)
        .map(|(c, &mu)| c.iter().map(|&x| (x - mu) * (x - mu)).sum::<f64>() / (n - 1.0))
        .sum::<f64>()
        / m;
    if w == 0.0 {
        return if b == 0.0 { f64::NAN } else { f64::INFINITY };
    }
    let var_plus = (n - 1.0) / n * w + b / n;
    (var_plus / w).sqrt()
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Effective sample size across chains, using the combined-chain
/// autocorrelation with Geyer's initial positive-sequence truncation.
pub fn ess(chains: &[Vec<f64>]) -> f64 {
    let m = chains.len();
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    if m == 0 || n < 4 {
        return f64::NAN;
    }
    let total = (m * n) as f64;

    let means: Vec<f64> = chains.iter().map(|c| mean(&c[..n])).collect();
    let vars: Vec<f64> = chains
        .iter()
        .zip(&means)
        .map(|(c, &mu)| c[..n].iter().map(|&x| (x - mu) * (x - mu)).sum::<f64>() / (n - 1) as f64)
        .collect();
    let w = mean(&vars);
    let var_plus = if m > 1 {
        let grand = mean(&means);
        let b_over_n =
            means.iter().map(|&x| (x - grand) * (x - grand)).sum::<f64>() / (m - 1) as f64;
        (n - 1) as f64 / n as f64 * w + b_over_n
    } else {
        w
    };
    if var_plus == 0.0 {
        return f64::NAN;
    }

    // combined autocorrelation ρ̂_t = 1 − (W − mean autocovariance_t)/var⁺,
    // summed while Geyer pairs stay positive
    let autocov_at = |t: usize| -> f64 {
        let mut acc = 0.0;
        for (c, &mu) in chains.iter().zip(&means) {
            let mut s = 0.0;
            for i in 0..n - t {
                s += (c[i] - mu) * (c[i + t] - mu);
            }
            acc += s / n as f64;
        }
        acc / m as f64
    };

    let mut tau = 1.0;
    let mut t = 1;
    while t + 1 < n {
        let rho_a = 1.0 - (w - autocov_at(t)) / var_plus;
        let rho_b = 1.0 - (w - autocov_at(t + 1)) / var_plus;
        if rho_a + rho_b <= 0.0 {
            break;
        }
        tau += 2.0 * (rho_a + rho_b);
        t += 2;
    }
    (total / tau).min(total)
}

/// Pooled-sample autocorrelations at lags `1..=max_lag` (chains demeaned
/// separately, autocovariances averaged).
pub fn autocorrelations(chains: &[Vec<f64>], max_lag: usize) -> Vec<f64> {
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    let means: Vec<f64> = chains.iter().map(|c| mean(&c[..n])).collect();
    let var: f64 = chains
        .iter()
        .zip(&means)
        .map(|(c, &mu)| c[..n].iter().map(|&x| (x - mu) * (x - mu)).sum::<f64>() / n as f64)
        .sum::<f64>()
        / chains.len() as f64;
    (1..=max_lag.min(n.saturating_sub(1)))
        .map(|t| {
            if var == 0.0 {
                return f64::NAN;
            }
            let acc: f64 = chains
                .iter()
                .zip(&means)
                .map(|(c, &mu)| {
                    (0..n - t).map(|i| (c[i] - mu) * (c[i + t] - mu)).sum::<f64>() / n as f64
                })
                .sum::<f64>()
                / chains.len() as f64;
            acc / var
        })
        .collect()
}

/// Maximum autocorrelation lag reported per parameter.
const DIAGNOSTIC_LAGS: usize = 20;

/// Computes the full diagnostic report from a trace's per-chain provenance.
pub fn diagnostics(trace: &SampleTrace) -> Result<Diagnostics> {
    if trace.draws.is_empty() {
        return Err(DthpError::EmptyTrace);
    }
    let dims = trace.dims;

    let chain_values = |extract: &dyn Fn(&crate::mcmc::Draw) -> f64| -> Vec<Vec<f64>> {
        (0..trace.chains.len())
            .map(|c| trace.chain_draws(c).iter().map(extract).collect())
            .collect()
    };

    let mut params = Vec::new();
    for k in 0..dims {
        let chains = chain_values(&move |d| d.mu[k]);
        params.push(param_diagnostics(format!("mu[{k}]"), &chains));
    }
    for l in 0..dims {
        for k in 0..dims {
            let chains = chain_values(&move |d| d.alpha[l][k]);
            params.push(param_diagnostics(format!("alpha[{l}][{k}]"), &chains));
        }
    }

    let mut j_occupancy = vec![vec![vec![0.0; trace.s_max as usize]; dims]; dims];
    for draw in &trace.draws {
        for l in 0..dims {
            for k in 0..dims {
                let j = draw.kernels[l][k].components();
                j_occupancy[l][k][j - 1] += 1.0;
            }
        }
    }
    let n = trace.draws.len() as f64;
    for row in &mut j_occupancy {
        for cell in row {
            for freq in cell.iter_mut() {
                *freq /= n;
            }
        }
    }

    Ok(Diagnostics {
        params,
        j_occupancy,
        acceptance: trace.chains.iter().map(|c| c.counters).collect(),
    })
}

fn param_diagnostics(name: String, chains: &[Vec<f64>]) -> ParamDiagnostics {
    let all: Vec<f64> = chains.iter().flatten().copied().collect();
    ParamDiagnostics {
        name,
        mean: mean(&all),
        ess: ess(chains),
        split_rhat: split_rhat(chains),
        autocorr: autocorrelations(chains, DIAGNOSTIC_LAGS),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, STREAM_SIMULATION};
    use rand_distr::{Distribution, StandardNormal};

    fn iid_chains(n_chains: usize, len: usize, seed: u64) -> Vec<Vec<f64>> {
        (0..n_chains)
            .map(|i| {
                let mut rng = stream_rng(seed, STREAM_SIMULATION, i as u64);
                (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
            })
            .collect()
    }

    #[test]
    fn iid_chains_look_converged() {
        let chains = iid_chains(4, 10_000, 31);
        let r = split_rhat(&chains);
        assert!((0.99..=1.01).contains(&r), "R̂ = {r}");
        let e = ess(&chains);
        let total = 40_000.0;
        assert!((e - total).abs() < 0.2 * total, "ESS = {e}");
    }

    #[test]
    fn single_iid_chain_ess_near_length() {
        let chains = iid_chains(1, 10_000, 77);
        let e = ess(&chains);
        assert!((e - 10_000.0).abs() < 2_000.0, "ESS = {e}");
        assert!(split_rhat(&chains).is_nan());
    }

    #[test]
    fn divergent_constant_chains_flagged() {
        let chains = vec![vec![0.0; 1_000], vec![1.0; 1_000]];
        let r = split_rhat(&chains);
        assert!(r > 1.1, "R̂ = {r}");
    }

    #[test]
    fn correlated_chain_has_reduced_ess() {
        // AR(1) with φ = 0.9: τ = (1+φ)/(1−φ) = 19
        let mut rng = stream_rng(5, STREAM_SIMULATION, 0);
        let n = 50_000;
        let phi: f64 = 0.9;
        let mut x = 0.0;
        let chain: Vec<f64> = (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                x = phi * x + z;
                x
            })
            .collect();
        let e = ess(&[chain]);
        let expected = n as f64 / 19.0;
        assert!(
            (e - expected).abs() < 0.35 * expected,
            "ESS = {e}, expected ≈ {expected}"
        );
    }

    #[test]
    fn autocorrelation_of_iid_is_small() {
        let chains = iid_chains(2, 20_000, 13);
        let ac = autocorrelations(&chains, 5);
        for (lag, &rho) in ac.iter().enumerate() {
            assert!(rho.abs() < 0.05, "lag {} autocorr {rho}", lag + 1);
        }
    }
}
