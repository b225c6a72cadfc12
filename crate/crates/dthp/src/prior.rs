//! Log-priors for the continuous parameters (three named settings) and the
//! discrete priors on histogram structure.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::DthpError;
use crate::kernel::HistogramKernel;
use crate::Result;

/// Named prior settings for the continuous parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorSetting {
    Informative,
    RelativelyInformative,
    QuiteUninformative,
}

/// Variance of the informative normal priors. The matching mean offset is
/// `variance/2`, which makes the implied lognormal mean on the natural scale
/// equal the true parameter exactly.
pub const INFORMATIVE_VARIANCE: f64 = 0.5;
/// Support half-width of the quite-uninformative uniform priors.
pub const UNINFORMATIVE_BOUND: f64 = 5.0;

/// A prior on the natural logarithm of a positive parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LogScalePrior {
    Normal { mean: f64, variance: f64 },
    Uniform { low: f64, high: f64 },
}

impl LogScalePrior {
    fn validate(&self) -> Result<()> {
        match *self {
            LogScalePrior::Normal { variance, mean } => {
                if !(variance > 0.0) || !mean.is_finite() {
                    return Err(DthpError::InvalidPrior(format!(
                        "normal prior needs finite mean and positive variance, got ({mean}, {variance})"
                    )));
                }
            }
            LogScalePrior::Uniform { low, high } => {
                if !(low < high) {
                    return Err(DthpError::InvalidPrior(format!(
                        "uniform prior bounds must be ordered, got ({low}, {high})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Log-density at a log-scale value; `−∞` outside a uniform's support.
    pub fn log_density(&self, x: f64) -> f64 {
        match *self {
            LogScalePrior::Normal { mean, variance } => {
                let d = x - mean;
                -0.5 * (2.0 * std::f64::consts::PI * variance).ln() - d * d / (2.0 * variance)
            }
            LogScalePrior::Uniform { low, high } => {
                if x >= low && x <= high {
                    -(high - low).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    /// Draws a log-scale value from the prior.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            LogScalePrior::Normal { mean, variance } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + variance.sqrt() * z
            }
            LogScalePrior::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
        }
    }

    /// CDF at a log-scale value.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            LogScalePrior::Normal { mean, variance } => {
                let z = (x - mean) / (2.0 * variance).sqrt();
                0.5 * (1.0 + statrs::function::erf::erf(z))
            }
            LogScalePrior::Uniform { low, high } => ((x - low) / (high - low)).clamp(0.0, 1.0),
        }
    }
}

/// Which continuous parameter a prior query refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    /// Baseline `μ^k`.
    Baseline(usize),
    /// Magnitude `α^{lk}` (source `l`, target `k`).
    Magnitude(usize, usize),
    /// An unnormalised histogram height.
    Height,
}

/// True parameter values, required to build the informative setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueValues {
    pub mu: Vec<f64>,
    /// Row `l`, column `k`.
    pub alpha: Vec<Vec<f64>>,
    /// Average of the true histogram heights (including the fixed first one).
    pub gamma_avg: f64,
}

/// Per-parameter continuous priors plus the memory bound for the discrete
/// structure priors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PriorConfig {
    setting: PriorSetting,
    s_max: u32,
    baseline: Vec<LogScalePrior>,
    /// Row `l`, column `k`.
    magnitude: Vec<Vec<LogScalePrior>>,
    height: LogScalePrior,
}

impl PriorConfig {
    /// Builds the Table-of-settings priors for a K-dimensional model.
    ///
    /// The informative setting centres each normal prior at
    /// `log(true) − variance/2` and rejects construction without true values;
    /// the other settings ignore `true_values`.
    pub fn new(
        setting: PriorSetting,
        dims: usize,
        s_max: u32,
        true_values: Option<&TrueValues>,
    ) -> Result<Self> {
        if dims == 0 {
            return Err(DthpError::InvalidPrior("K must be at least 1".into()));
        }
        if s_max == 0 {
            return Err(DthpError::InvalidPrior("s_max must be positive".into()));
        }
        let (baseline, magnitude, height) = match setting {
            PriorSetting::Informative => {
                let tv = true_values.ok_or_else(|| {
                    DthpError::InvalidPrior(
                        "informative setting requires true parameter values".into(),
                    )
                })?;
                if tv.mu.len() != dims
                    || tv.alpha.len() != dims
                    || tv.alpha.iter().any(|r| r.len() != dims)
                {
                    return Err(DthpError::InvalidPrior(format!(
                        "true values must cover {dims} baselines and a {dims}x{dims} magnitude matrix"
                    )));
                }
                let informative = |x: f64| -> Result<LogScalePrior> {
                    if !(x > 0.0) {
                        return Err(DthpError::InvalidPrior(format!(
                            "informative priors need positive true values, got {x}"
                        )));
                    }
                    Ok(LogScalePrior::Normal {
                        mean: x.ln() - INFORMATIVE_VARIANCE / 2.0,
                        variance: INFORMATIVE_VARIANCE,
                    })
                };
                let baseline = tv.mu.iter().map(|&m| informative(m)).collect::<Result<_>>()?;
                let magnitude = tv
                    .alpha
                    .iter()
                    .map(|row| row.iter().map(|&a| informative(a)).collect::<Result<_>>())
                    .collect::<Result<_>>()?;
                (baseline, magnitude, informative(tv.gamma_avg)?)
            }
            PriorSetting::RelativelyInformative => {
                let std_normal = LogScalePrior::Normal {
                    mean: 0.0,
                    variance: 1.0,
                };
                (
                    vec![std_normal; dims],
                    vec![vec![std_normal; dims]; dims],
                    std_normal,
                )
            }
            PriorSetting::QuiteUninformative => {
                let wide = LogScalePrior::Uniform {
                    low: -UNINFORMATIVE_BOUND,
                    high: UNINFORMATIVE_BOUND,
                };
                (vec![wide; dims], vec![vec![wide; dims]; dims], wide)
            }
        };
        let cfg = Self {
            setting,
            s_max,
            baseline,
            magnitude,
            height,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        for p in &self.baseline {
            p.validate()?;
        }
        for row in &self.magnitude {
            for p in row {
                p.validate()?;
            }
        }
        self.height.validate()
    }

    pub fn setting(&self) -> PriorSetting {
        self.setting
    }

    pub fn s_max(&self) -> u32 {
        self.s_max
    }

    pub fn dimensions(&self) -> usize {
        self.baseline.len()
    }

    pub fn prior(&self, which: Param) -> &LogScalePrior {
        match which {
            Param::Baseline(k) => &self.baseline[k],
            Param::Magnitude(l, k) => &self.magnitude[l][k],
            Param::Height => &self.height,
        }
    }

    /// Replaces one parameter's prior (hyperparameter override).
    pub fn set_prior(&mut self, which: Param, prior: LogScalePrior) -> Result<()> {
        prior.validate()?;
        match which {
            Param::Baseline(k) => self.baseline[k] = prior,
            Param::Magnitude(l, k) => self.magnitude[l][k] = prior,
            Param::Height => self.height = prior,
        }
        Ok(())
    }
}

/// Log-density of one continuous parameter's prior at a log-scale value.
pub fn log_prior_continuous(config: &PriorConfig, which: Param, log_value: f64) -> f64 {
    config.prior(which).log_density(log_value)
}

/// Joint log-mass of `(J, s)` as printed: `log(1/s_max) + log(J!(s_max−J)!/s_max!)`.
///
/// The second factor is constant over the knot configurations sharing a given
/// `J` but is not their reciprocal count, so summing it over all admissible
/// configurations does not give `1/s_max` per component; see
/// [`log_prior_structure_normalized`] for the form the sampler targets.
pub fn log_prior_structure(j: usize, knots: &[u32], s_max: u32) -> Result<f64> {
    validate_structure(j, knots, s_max)?;
    let j = j as f64;
    let s = f64::from(s_max);
    Ok(-s.ln() + ln_gamma(j + 1.0) + ln_gamma(s - j + 1.0) - ln_gamma(s + 1.0))
}

/// Joint log-mass of `(J, s)` with the number of components exactly uniform
/// on `1..=s_max` and the knot configuration uniform given `J`:
/// `log(1/s_max) − log C(s_max−1, J−1)`.
pub fn log_prior_structure_normalized(j: usize, s_max: u32) -> f64 {
    let j = j as f64;
    let s = f64::from(s_max);
    -s.ln() - (ln_gamma(s) - ln_gamma(j) - ln_gamma(s - j + 1.0))
}

fn validate_structure(j: usize, knots: &[u32], s_max: u32) -> Result<()> {
    if j == 0 || j as u64 > u64::from(s_max) {
        return Err(DthpError::InvalidPrior(format!(
            "J must lie in 1..=s_max, got J={j}, s_max={s_max}"
        )));
    }
    if knots.len() != j + 1
        || knots[0] != 0
        || *knots.last().unwrap() != s_max
        || !knots.windows(2).all(|w| w[0] < w[1])
    {
        return Err(DthpError::InvalidPrior(format!(
            "invalid knot vector {knots:?} for J={j}, s_max={s_max}"
        )));
    }
    Ok(())
}

/// Arithmetic mean of the unnormalised heights, including the fixed first.
pub fn gamma_avg(kernel: &HistogramKernel) -> f64 {
    let h = kernel.heights();
    h.iter().sum::<f64>() / h.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relatively_informative_density_at_zero() {
        let cfg = PriorConfig::new(PriorSetting::RelativelyInformative, 1, 7, None).unwrap();
        let v = log_prior_continuous(&cfg, Param::Baseline(0), 0.0);
        assert!((v - (1.0 / (2.0 * std::f64::consts::PI).sqrt()).ln()).abs() < 1e-9);
        assert!((v + 0.918939).abs() < 1e-6);
    }

    #[test]
    fn quite_uninformative_outside_support() {
        let cfg = PriorConfig::new(PriorSetting::QuiteUninformative, 1, 7, None).unwrap();
        assert_eq!(
            log_prior_continuous(&cfg, Param::Height, 6.0),
            f64::NEG_INFINITY
        );
        assert!((log_prior_continuous(&cfg, Param::Height, 0.0) - (-(10.0f64).ln())).abs() < 1e-12);
    }

    #[test]
    fn informative_mean_offset() {
        let tv = TrueValues {
            mu: vec![1.0],
            alpha: vec![vec![0.9]],
            gamma_avg: 1.0,
        };
        let cfg = PriorConfig::new(PriorSetting::Informative, 1, 7, Some(&tv)).unwrap();
        match *cfg.prior(Param::Baseline(0)) {
            LogScalePrior::Normal { mean, variance } => {
                assert!((mean + 0.25).abs() < 1e-12);
                assert_eq!(variance, 0.5);
            }
            _ => panic!("expected normal prior"),
        }
    }

    #[test]
    fn informative_requires_true_values() {
        assert!(PriorConfig::new(PriorSetting::Informative, 1, 7, None).is_err());
    }

    #[test]
    fn informative_lognormal_mean_identity() {
        // with mean log(x) − v/2, E[e^X] = x exactly
        for &x in &[0.3, 1.0, 4.7] {
            let tv = TrueValues {
                mu: vec![x],
                alpha: vec![vec![x]],
                gamma_avg: x,
            };
            let cfg = PriorConfig::new(PriorSetting::Informative, 1, 7, Some(&tv)).unwrap();
            if let LogScalePrior::Normal { mean, variance } = *cfg.prior(Param::Baseline(0)) {
                let implied = (mean + variance / 2.0).exp();
                assert!((implied - x).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn structure_prior_examples() {
        // s_max=7, J=2: log(1/7) + log(1/21) = log(1/147)
        let v = log_prior_structure(2, &[0, 3, 7], 7).unwrap();
        assert!((v - (1.0f64 / 147.0).ln()).abs() < 1e-12);
        // s_max=1, J=1: single admissible structure
        let v = log_prior_structure(1, &[0, 1], 1).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn structure_prior_ratio() {
        // Π(J+1)/Π(J) = (J+1)/(s_max−J) for the printed formula
        for s_max in [5u32, 7, 12] {
            for j in 1..s_max as usize {
                let knots_j: Vec<u32> = (0..j as u32).chain([s_max]).collect();
                let knots_j1: Vec<u32> = (0..=j as u32).chain([s_max]).collect();
                let a = log_prior_structure(j, &knots_j, s_max).unwrap();
                let b = log_prior_structure(j + 1, &knots_j1, s_max).unwrap();
                let expect = ((j as f64 + 1.0) / (f64::from(s_max) - j as f64)).ln();
                assert!((b - a - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn normalized_structure_prior_sums_to_one() {
        // Σ_J C(s_max−1, J−1) · exp(log Π_n) = 1
        for s_max in [2u32, 5, 8] {
            let mut total = 0.0;
            for j in 1..=s_max as usize {
                let n_configs = binomial(s_max as usize - 1, j - 1);
                total += n_configs as f64 * log_prior_structure_normalized(j, s_max).exp();
            }
            assert!((total - 1.0).abs() < 1e-12, "s_max={s_max}: {total}");
        }
    }

    fn binomial(n: usize, k: usize) -> u64 {
        let mut acc = 1u64;
        for i in 0..k {
            acc = acc * (n - i) as u64 / (i + 1) as u64;
        }
        acc
    }

    #[test]
    fn structure_prior_rejects_invalid() {
        assert!(log_prior_structure(0, &[0, 7], 7).is_err());
        assert!(log_prior_structure(2, &[0, 7], 7).is_err());
        assert!(log_prior_structure(2, &[0, 3, 6], 7).is_err());
        assert!(log_prior_structure(2, &[1, 3, 7], 7).is_err());
        assert!(log_prior_structure(8, &[0, 1, 2, 3, 4, 5, 6, 7, 7], 7).is_err());
    }

    #[test]
    fn gamma_avg_examples() {
        let k = HistogramKernel::flat(7).unwrap();
        assert_eq!(gamma_avg(&k), 1.0);
        let k = HistogramKernel::new(vec![0, 2, 4, 7], vec![1.0, 0.5, 2.5]).unwrap();
        assert!((gamma_avg(&k) - 4.0 / 3.0).abs() < 1e-12);
        let k = HistogramKernel::new(vec![0, 2, 4, 7], vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(gamma_avg(&k), 1.0);
    }

    #[test]
    fn priors_integrate_to_one() {
        // Simpson's rule over a wide grid
        let integrate = |p: &LogScalePrior, lo: f64, hi: f64| -> f64 {
            let n = 20_000; // even
            let h = (hi - lo) / n as f64;
            let f = |x: f64| p.log_density(x).exp();
            let mut acc = f(lo) + f(hi);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * f(lo + i as f64 * h);
            }
            acc * h / 3.0
        };
        let cases = [
            LogScalePrior::Normal {
                mean: 0.0,
                variance: 1.0,
            },
            LogScalePrior::Normal {
                mean: -0.25,
                variance: 0.5,
            },
            LogScalePrior::Uniform {
                low: -5.0,
                high: 5.0,
            },
        ];
        for p in &cases {
            // integrate over the prior's own support: Simpson's rule degrades
            // at the uniform's jump discontinuities
            let (lo, hi) = match *p {
                LogScalePrior::Normal { mean, variance } => {
                    let sd = variance.sqrt();
                    (mean - 15.0 * sd, mean + 15.0 * sd)
                }
                LogScalePrior::Uniform { low, high } => (low, high),
            };
            let v = integrate(p, lo, hi);
            assert!((v - 1.0).abs() < 1e-6, "{p:?} integrates to {v}");
        }
    }

    #[test]
    fn cdf_matches_density() {
        let p = LogScalePrior::Normal {
            mean: 0.5,
            variance: 2.0,
        };
        assert!((p.cdf(0.5) - 0.5).abs() < 1e-12);
        let u = LogScalePrior::Uniform {
            low: -1.0,
            high: 3.0,
        };
        assert_eq!(u.cdf(-2.0), 0.0);
        assert_eq!(u.cdf(1.0), 0.5);
        assert_eq!(u.cdf(4.0), 1.0);
    }

    #[test]
    fn override_replaces_single_prior() {
        let mut cfg = PriorConfig::new(PriorSetting::RelativelyInformative, 2, 7, None).unwrap();
        cfg.set_prior(
            Param::Magnitude(0, 1),
            LogScalePrior::Normal {
                mean: -1.0,
                variance: 0.25,
            },
        )
        .unwrap();
        assert_eq!(
            *cfg.prior(Param::Magnitude(0, 1)),
            LogScalePrior::Normal {
                mean: -1.0,
                variance: 0.25
            }
        );
        assert_eq!(
            *cfg.prior(Param::Magnitude(1, 0)),
            LogScalePrior::Normal {
                mean: 0.0,
                variance: 1.0
            }
        );
    }
}
