//! Desk-scale simulation-recovery probe: simulate from a known model, fit,
//! and check that the posterior concentrates near the truth. The full-scale
//! protocol lives in the acceptance suite; this uses shorter chains.

use dthp::analysis::{kernel_band, static_summary};
use dthp::kernel::HistogramKernel;
use dthp::mcmc::{run_parallel, ChainConfig};
use dthp::model::DthpModel;
use dthp::prior::{PriorConfig, PriorSetting};
use dthp::simulate::{simulate, SimulationConfig};

fn peaked_kernel() -> HistogramKernel {
    HistogramKernel::new(vec![0, 2, 4, 7], vec![1.0, 2.0, 0.25]).unwrap()
}

#[test]
fn univariate_recovery_short_chains() {
    let truth = peaked_kernel();
    let model = DthpModel::univariate(1.0, 0.9, truth.clone().into()).unwrap();
    let sim = SimulationConfig::new(model, 500, 2024);
    let data = simulate(&sim).unwrap();
    let total = data.total_events();
    assert!(
        (1_000.0..20_000.0).contains(&total),
        "total events {total} outside plausibility band"
    );

    let priors = PriorConfig::new(PriorSetting::RelativelyInformative, 1, 7, None).unwrap();
    let config = ChainConfig {
        iterations: 20_000,
        burn_in: 10_000,
        chains: 3,
        seed: 5,
        ..ChainConfig::default()
    };
    let start = std::time::Instant::now();
    let trace = run_parallel(&data, &priors, &config).unwrap();
    eprintln!(
        "fit took {:.1}s for 3x20k sweeps, {} events",
        start.elapsed().as_secs_f64(),
        total
    );

    let summary = static_summary(&trace).unwrap();
    eprintln!(
        "alpha median {:.3} [{:.3}, {:.3}], mu median {:.3} [{:.3}, {:.3}]",
        summary.alpha[0][0].median,
        summary.alpha[0][0].lower,
        summary.alpha[0][0].upper,
        summary.mu[0].median,
        summary.mu[0].lower,
        summary.mu[0].upper,
    );
    assert!(
        (0.7..1.1).contains(&summary.alpha[0][0].median),
        "alpha median {} far from truth 0.9",
        summary.alpha[0][0].median
    );

    let band = kernel_band(&trace, 0, 0).unwrap();
    let true_masses = truth.masses();
    let mut covered = 0;
    for d in 0..7 {
        let inside = true_masses[d] >= band.lower[d] && true_masses[d] <= band.upper[d];
        eprintln!(
            "lag {}: true {:.4} band [{:.4}, {:.4}] median {:.4} {}",
            d + 1,
            true_masses[d],
            band.lower[d],
            band.upper[d],
            band.median[d],
            if inside { "in" } else { "OUT" }
        );
        covered += usize::from(inside);
    }
    assert!(covered >= 4, "true kernel inside band at only {covered}/7 lags");

    // per-move acceptance rates land in a usable range under defaults
    let counters = trace.chains[0].counters;
    let static_rate = counters.baseline.rate();
    eprintln!(
        "acceptance: baseline {:.2} magnitude {:.2} height {:.2} knot {:.2} birth {:.2} death {:.2}",
        counters.baseline.rate(),
        counters.magnitude.rate(),
        counters.height.rate(),
        counters.knot_shift.rate(),
        counters.birth.rate(),
        counters.death.rate(),
    );
    assert!(
        (0.1..0.6).contains(&static_rate),
        "baseline acceptance {static_rate} outside (0.1, 0.6)"
    );
}

#[test]
fn static_acceptance_in_tuning_band_at_short_horizon() {
    // Default steps track both static posteriors at mid-length horizons.
    // The band narrows with T: by T=500 the magnitude posterior is tight
    // enough that a fixed non-adaptive step accepts below 0.1, while at
    // T=50 the baseline posterior is wide enough to push acceptance above
    // 0.6. T=200 sits inside on both.
    let truth = peaked_kernel();
    let model = DthpModel::univariate(1.0, 0.9, truth.into()).unwrap();
    let sim = SimulationConfig::new(model, 200, 81);
    let data = simulate(&sim).unwrap();
    let priors = PriorConfig::new(PriorSetting::RelativelyInformative, 1, 7, None).unwrap();
    let config = ChainConfig {
        iterations: 20_000,
        burn_in: 5_000,
        chains: 1,
        seed: 6,
        ..ChainConfig::default()
    };
    let trace = run_parallel(&data, &priors, &config).unwrap();
    let counters = trace.chains[0].counters;
    for (name, rate) in [
        ("baseline", counters.baseline.rate()),
        ("magnitude", counters.magnitude.rate()),
    ] {
        assert!(
            (0.1..0.6).contains(&rate),
            "{name} acceptance {rate} outside (0.1, 0.6)"
        );
    }
}
