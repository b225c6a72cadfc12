//! Goodness-of-fit helpers used by the simulator law checks and the
//! sampler's prior-recovery oracles.

use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::gamma::ln_gamma;

/// One-sample Kolmogorov-Smirnov statistic against a reference CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    assert!(!samples.is_empty());
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Asymptotic Kolmogorov p-value with the finite-sample correction
/// `λ = D (√n + 0.12 + 0.11/√n)`.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let lambda = d * (sqrt_n + 0.12 + 0.11 / sqrt_n);
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut p = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = 2.0 * (-1.0f64).powi(k as i32 - 1) * (-2.0 * k * k * lambda * lambda).exp();
        p += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

/// One-sample KS test; returns `(statistic, p)`.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> (f64, f64) {
    let d = ks_statistic(samples, &cdf);
    (d, ks_p_value(d, samples.len()))
}

/// Chi-square goodness-of-fit over pre-binned counts; returns
/// `(statistic, degrees of freedom, p)`. Degrees of freedom are
/// `bins − 1 − fitted_params`.
pub fn chi_square_gof(observed: &[f64], expected: &[f64], fitted_params: usize) -> (f64, f64, f64) {
    assert_eq!(observed.len(), expected.len());
    assert!(observed.len() > 1 + fitted_params);
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            assert!(e > 0.0, "expected bin count must be positive");
            (o - e) * (o - e) / e
        })
        .sum();
    let df = (observed.len() - 1 - fitted_params) as f64;
    let dist = ChiSquared::new(df).expect("positive df");
    (stat, df, 1.0 - dist.cdf(stat))
}

/// Poisson pmf, numerically via the log form.
pub fn poisson_pmf(k: u64, mean: f64) -> f64 {
    (-mean + k as f64 * mean.ln() - ln_gamma(k as f64 + 1.0)).exp()
}

/// Chi-square GoF test of integer draws against Poisson(mean), pooling the
/// tail so every expected bin count is at least `min_expected`.
pub fn chi_square_poisson_gof(draws: &[f64], mean: f64, min_expected: f64) -> (f64, f64, f64) {
    let n = draws.len() as f64;
    let max = draws.iter().fold(0.0f64, |a, &b| a.max(b)) as u64;

    // expected counts per value, then pool from the left until ≥ min_expected
    let mut edges: Vec<u64> = Vec::new(); // bin upper bounds, inclusive
    let mut expected: Vec<f64> = Vec::new();
    let mut acc = 0.0;
    let mut cum = 0.0;
    for k in 0..=max {
        acc += n * poisson_pmf(k, mean);
        cum += poisson_pmf(k, mean);
        if acc >= min_expected {
            edges.push(k);
            expected.push(acc);
            acc = 0.0;
        }
    }
    // final open bin for the remaining tail mass
    edges.push(u64::MAX);
    expected.push(n * (1.0 - cum) + acc);

    // merge the tail bin backwards if it is too thin
    while expected.len() > 2 && *expected.last().unwrap() < min_expected {
        let last = expected.pop().unwrap();
        edges.pop();
        *expected.last_mut().unwrap() += last;
        *edges.last_mut().unwrap() = u64::MAX;
    }

    let mut observed = vec![0.0; expected.len()];
    for &d in draws {
        let v = d as u64;
        let idx = edges.partition_point(|&e| e < v);
        observed[idx] += 1.0;
    }
    chi_square_gof(&observed, &expected, 0)
}
