//! Sampler correctness under a constant likelihood: with the data term
//! switched off, every stationary marginal must match its prior. This is the
//! canonical reversible-jump test — any error in the birth-death acceptance
//! ratio shows up as a tilted component-count distribution.

use std::collections::HashMap;

use dthp::mcmc::{run_chain, ChainConfig, KernelDraw, SampleTrace};
use dthp::prior::{Param, PriorConfig, PriorSetting};
use dthp::series::CountSeries;
use dthp::stats::ks_test;

fn dummy_data() -> CountSeries {
    CountSeries::new(vec![vec![1.0, 0.0, 2.0]]).unwrap()
}

fn constant_likelihood_trace(
    s_max: u32,
    setting: PriorSetting,
    draws: u64,
    thin: u64,
    seed: u64,
) -> SampleTrace {
    let data = dummy_data();
    let priors = PriorConfig::new(setting, 1, s_max, None).unwrap();
    let burn_in = 5_000;
    let config = ChainConfig {
        iterations: burn_in + draws * thin,
        burn_in,
        chains: 1,
        thin,
        seed,
        constant_likelihood: true,
        ..ChainConfig::default()
    };
    run_chain(&data, &priors, &config, 0).unwrap()
}

fn component_counts(trace: &SampleTrace) -> Vec<usize> {
    trace
        .draws
        .iter()
        .map(|d| d.kernels[0][0].components())
        .collect()
}

#[test]
fn component_count_is_uniform() {
    // 2×10⁵ post-burn-in draws at s_max = 7: every cell within ±0.02 of 1/7
    let s_max = 7u32;
    let trace = constant_likelihood_trace(s_max, PriorSetting::RelativelyInformative, 200_000, 10, 42);
    let js = component_counts(&trace);
    let n = js.len() as f64;
    let mut occupancy = vec![0.0; s_max as usize + 1];
    for &j in &js {
        occupancy[j] += 1.0;
    }
    for j in 1..=s_max as usize {
        let p = occupancy[j] / n;
        let target = 1.0 / f64::from(s_max);
        assert!(
            (p - target).abs() < 0.02,
            "P(J={j}) = {p:.4}, expected {target:.4} ± 0.02"
        );
    }
}

#[test]
fn knot_configurations_uniform_given_j() {
    // s_max = 5: conditional on J, all C(4, J−1) configurations carry equal
    // mass; total-variation distance per J below 0.05
    let s_max = 5u32;
    let trace = constant_likelihood_trace(s_max, PriorSetting::RelativelyInformative, 200_000, 10, 7);

    let mut per_j: HashMap<usize, HashMap<Vec<u32>, f64>> = HashMap::new();
    for draw in &trace.draws {
        if let KernelDraw::Histogram { s, .. } = &draw.kernels[0][0] {
            *per_j
                .entry(s.len() - 1)
                .or_default()
                .entry(s.clone())
                .or_insert(0.0) += 1.0;
        }
    }

    for (j, configs) in &per_j {
        let expected_configs = binomial(s_max as usize - 1, j - 1);
        let total: f64 = configs.values().sum();
        if total < 5_000.0 {
            continue; // not enough mass for a sharp TV estimate
        }
        assert_eq!(
            configs.len(),
            expected_configs,
            "J={j}: visited {} of {expected_configs} configurations",
            configs.len()
        );
        let uniform = 1.0 / expected_configs as f64;
        let tv: f64 = configs
            .values()
            .map(|&c| (c / total - uniform).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.05, "J={j}: TV distance {tv:.4} ≥ 0.05");
    }
    // all five component counts must actually appear
    assert_eq!(per_j.len(), s_max as usize);
}

fn binomial(n: usize, k: usize) -> usize {
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

#[test]
fn static_parameters_recover_standard_normal_prior() {
    // KS test on thinned draws of log μ and log α against N(0,1)
    let trace = constant_likelihood_trace(7, PriorSetting::RelativelyInformative, 20_000, 50, 3);
    let priors = PriorConfig::new(PriorSetting::RelativelyInformative, 1, 7, None).unwrap();
    let cdf = |x: f64| priors.prior(Param::Baseline(0)).cdf(x);

    let log_mu: Vec<f64> = trace.draws.iter().map(|d| d.mu[0].ln()).collect();
    let (d, p) = ks_test(&log_mu, cdf);
    assert!(p > 0.01, "log μ prior recovery failed: D={d:.4}, p={p:.4}");

    let log_alpha: Vec<f64> = trace.draws.iter().map(|d| d.alpha[0][0].ln()).collect();
    let (d, p) = ks_test(&log_alpha, cdf);
    assert!(p > 0.01, "log α prior recovery failed: D={d:.4}, p={p:.4}");
}

#[test]
fn static_parameters_recover_uniform_prior() {
    let trace = constant_likelihood_trace(7, PriorSetting::QuiteUninformative, 20_000, 50, 13);
    let priors = PriorConfig::new(PriorSetting::QuiteUninformative, 1, 7, None).unwrap();
    let cdf = |x: f64| priors.prior(Param::Baseline(0)).cdf(x);
    let log_mu: Vec<f64> = trace.draws.iter().map(|d| d.mu[0].ln()).collect();
    let (d, p) = ks_test(&log_mu, cdf);
    assert!(p > 0.01, "log μ prior recovery failed: D={d:.4}, p={p:.4}");
}

#[test]
fn heights_recover_prior_per_coordinate() {
    // conditional on J ≥ 2, the first free height's log follows its prior
    let trace = constant_likelihood_trace(7, PriorSetting::RelativelyInformative, 40_000, 25, 99);
    let priors = PriorConfig::new(PriorSetting::RelativelyInformative, 1, 7, None).unwrap();
    let cdf = |x: f64| priors.prior(Param::Height).cdf(x);

    let log_heights: Vec<f64> = trace
        .draws
        .iter()
        .filter_map(|d| match &d.kernels[0][0] {
            KernelDraw::Histogram { theta, .. } if theta.len() >= 2 => Some(theta[1].ln()),
            _ => None,
        })
        .collect();
    assert!(log_heights.len() > 5_000);
    let (d, p) = ks_test(&log_heights, cdf);
    assert!(p > 0.01, "height prior recovery failed: D={d:.4}, p={p:.4}");
}

#[test]
fn detailed_balance_flows_on_frozen_state_space() {
    // s_max = 3, heights binned onto a coarse grid. Each individual move is
    // a reversible kernel, so for the stationary chain observed move-by-move
    // the transition counts a→b and b→a agree within Monte Carlo error on
    // every observed pair. (Whole sweeps are fixed-order compositions and
    // carry no such per-sweep guarantee.)
    let data = dummy_data();
    let priors = PriorConfig::new(PriorSetting::QuiteUninformative, 1, 3, None).unwrap();
    let config = ChainConfig {
        iterations: 400_000,
        burn_in: 1,
        chains: 1,
        seed: 17,
        constant_likelihood: true,
        ..ChainConfig::default()
    };

    type Binned = (Vec<u32>, Vec<i64>);
    let key = |draw: &KernelDraw| -> Binned {
        match draw {
            KernelDraw::Histogram { s, theta } => (
                s.clone(),
                theta.iter().map(|&h| (h.ln() / 2.5).floor() as i64).collect(),
            ),
            _ => unreachable!(),
        }
    };

    let burn_in_moves = 50_000u64;
    let mut seen = 0u64;
    let mut previous: Option<Binned> = None;
    let mut flows: HashMap<(Binned, Binned), f64> = HashMap::new();
    dthp::mcmc::run_chain_observing(&data, &priors, &config, 0, |draw| {
        seen += 1;
        let state = key(draw);
        if seen > burn_in_moves {
            if let Some(prev) = previous.take() {
                if prev != state {
                    *flows.entry((prev, state.clone())).or_insert(0.0) += 1.0;
                }
            }
        }
        previous = Some(state);
    })
    .unwrap();

    let mut checked = 0;
    for ((a, b), &n_ab) in &flows {
        if a >= b {
            continue; // visit each unordered pair once
        }
        let n_ba = flows.get(&(b.clone(), a.clone())).copied().unwrap_or(0.0);
        let total = n_ab + n_ba;
        if total < 100.0 {
            continue;
        }
        checked += 1;
        let diff = (n_ab - n_ba).abs();
        assert!(
            diff <= 6.0 * total.sqrt(),
            "flow imbalance {a:?}↔{b:?}: {n_ab} vs {n_ba}"
        );
    }
    assert!(checked >= 3, "too few well-visited state pairs: {checked}");
}
