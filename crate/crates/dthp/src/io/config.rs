//! The run configuration document: one JSON file drives simulation,
//! fitting, and summarisation. `RunConfig::template()` carries every default
//! explicitly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::DthpError;
use crate::kernel::HistogramKernel;
use crate::mcmc::{fingerprint, ChainConfig};
use crate::model::DthpModel;
use crate::prior::{LogScalePrior, Param, PriorConfig, PriorSetting, TrueValues};
use crate::simulate::{SimulationConfig, DEFAULT_COUNT_CEILING};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Master seed; chain and replicate streams derive from it.
    pub seed: u64,
    /// Maximum memory of every triggering kernel, in days.
    pub s_max: u32,
    pub data: DataConfig,
    pub prior: PriorSection,
    pub chain: ChainConfig,
    pub simulate: SimulateSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            s_max: 7,
            data: DataConfig::default(),
            prior: PriorSection::default(),
            chain: ChainConfig::default(),
            simulate: SimulateSection::default(),
        }
    }
}

/// Preprocessing applied to loaded count data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct DataConfig {
    /// Rolling-smoothing window in days; 0 disables smoothing.
    pub smoothing_window: usize,
    /// Keep real-valued counts after smoothing instead of rounding half-up;
    /// the likelihood then uses the log-gamma generalisation of log(y!).
    pub allow_real_counts: bool,
    /// 1-based time indices starting new phases; empty keeps one phase.
    pub phases: Vec<usize>,
    /// Restrict to these dimension labels (dated files only); empty keeps all.
    pub dimensions: Vec<String>,
}

/// Prior setting plus optional per-parameter-class hyperparameter overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorSection {
    pub setting: PriorSetting,
    /// Required for the informative setting.
    pub true_values: Option<TrueValues>,
    pub overrides: PriorOverrides,
}

impl Default for PriorSection {
    fn default() -> Self {
        Self {
            setting: PriorSetting::RelativelyInformative,
            true_values: None,
            overrides: PriorOverrides::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct PriorOverrides {
    pub baseline: Option<LogScalePrior>,
    pub magnitude: Option<LogScalePrior>,
    pub height: Option<LogScalePrior>,
}

/// Ground-truth model and horizon for the `simulate` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulateSection {
    pub model: Option<DthpModel>,
    pub horizon: usize,
    pub replicates: usize,
    pub count_ceiling: f64,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            model: None,
            horizon: 500,
            replicates: 1,
            count_ceiling: DEFAULT_COUNT_CEILING,
        }
    }
}

impl RunConfig {
    /// A fully explicit template with a univariate example model.
    pub fn template() -> Self {
        let kernel = HistogramKernel::new(vec![0, 2, 4, 7], vec![1.0, 2.0, 0.25])
            .expect("valid template kernel");
        let model = DthpModel::univariate(1.0, 0.9, kernel.into()).expect("valid template model");
        Self {
            simulate: SimulateSection {
                model: Some(model),
                ..SimulateSection::default()
            },
            ..Self::default()
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: Self = serde_json::from_str(&text)
            .map_err(|e| DthpError::InvalidConfig(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_file(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        super::atomic_write(path, text.as_bytes())
    }

    pub fn validate(&self) -> Result<()> {
        if self.s_max == 0 {
            return Err(DthpError::InvalidConfig("s_max must be ≥ 1".into()));
        }
        self.chain.validate()?;
        for w in self.data.phases.windows(2) {
            if w[0] >= w[1] {
                return Err(DthpError::InvalidConfig(format!(
                    "phase boundaries must be strictly increasing: {:?}",
                    self.data.phases
                )));
            }
        }
        if let Some(model) = &self.simulate.model {
            model.validate()?;
            if self.simulate.horizon == 0 {
                return Err(DthpError::InvalidConfig("horizon must be ≥ 1".into()));
            }
            if self.simulate.replicates == 0 {
                return Err(DthpError::InvalidConfig("replicates must be ≥ 1".into()));
            }
        }
        Ok(())
    }

    /// Short hex fingerprint of the full resolved configuration.
    pub fn fingerprint(&self) -> String {
        fingerprint(self)
    }

    /// The chain configuration with the master seed applied.
    pub fn chain_config(&self) -> ChainConfig {
        let mut chain = self.chain.clone();
        chain.seed = self.seed;
        chain
    }

    /// Builds the per-parameter priors for a K-dimensional fit, applying any
    /// class-level overrides.
    pub fn build_priors(&self, dims: usize) -> Result<PriorConfig> {
        let mut priors = PriorConfig::new(
            self.prior.setting,
            dims,
            self.s_max,
            self.prior.true_values.as_ref(),
        )?;
        if let Some(p) = self.prior.overrides.baseline {
            for k in 0..dims {
                priors.set_prior(Param::Baseline(k), p)?;
            }
        }
        if let Some(p) = self.prior.overrides.magnitude {
            for l in 0..dims {
                for k in 0..dims {
                    priors.set_prior(Param::Magnitude(l, k), p)?;
                }
            }
        }
        if let Some(p) = self.prior.overrides.height {
            priors.set_prior(Param::Height, p)?;
        }
        Ok(priors)
    }

    /// The simulation configuration, if a ground-truth model is present.
    pub fn simulation_config(&self) -> Result<SimulationConfig> {
        let model = self.simulate.model.clone().ok_or_else(|| {
            DthpError::InvalidConfig("config has no simulate.model section".into())
        })?;
        let mut cfg = SimulationConfig::new(model, self.simulate.horizon, self.seed)
            .with_replicates(self.simulate.replicates);
        cfg.count_ceiling = self.simulate.count_ceiling;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_roundtrips_exactly() {
        let config = RunConfig::template();
        let json = serde_json::to_string_pretty(&config).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn template_is_valid_and_fingerprint_stable() {
        let config = RunConfig::template();
        config.validate().unwrap();
        assert_eq!(config.fingerprint(), RunConfig::template().fingerprint());
        let mut other = RunConfig::template();
        other.seed = 2;
        assert_ne!(config.fingerprint(), other.fingerprint());
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        let config = RunConfig::template();
        config.to_file(&path).unwrap();
        let back = RunConfig::from_file(&path).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let json = r#"{"seed": 9, "s_max": 14}"#;
        let config: RunConfig = serde_json::from_str(json).unwrap();
        assert_eq!(config.seed, 9);
        assert_eq!(config.s_max, 14);
        assert_eq!(config.chain.iterations, 60_000);
        assert_eq!(config.chain.burn_in, 30_000);
        assert_eq!(config.chain.chains, 3);
    }

    #[test]
    fn informative_requires_true_values_via_config() {
        let mut config = RunConfig::template();
        config.prior.setting = PriorSetting::Informative;
        assert!(config.build_priors(1).is_err());
        config.prior.true_values = Some(TrueValues {
            mu: vec![1.0],
            alpha: vec![vec![0.9]],
            gamma_avg: 1.0,
        });
        assert!(config.build_priors(1).is_ok());
    }

    #[test]
    fn overrides_apply() {
        let mut config = RunConfig::template();
        config.prior.overrides.magnitude = Some(LogScalePrior::Normal {
            mean: -2.0,
            variance: 0.3,
        });
        let priors = config.build_priors(2).unwrap();
        assert_eq!(
            *priors.prior(Param::Magnitude(1, 0)),
            LogScalePrior::Normal {
                mean: -2.0,
                variance: 0.3
            }
        );
        assert_eq!(
            *priors.prior(Param::Baseline(0)),
            LogScalePrior::Normal {
                mean: 0.0,
                variance: 1.0
            }
        );
    }

    #[test]
    fn rejects_invalid_configs() {
        let mut config = RunConfig::template();
        config.s_max = 0;
        assert!(config.validate().is_err());

        let mut config = RunConfig::template();
        config.chain.burn_in = config.chain.iterations;
        assert!(config.validate().is_err());

        let mut config = RunConfig::template();
        config.data.phases = vec![9, 4];
        assert!(config.validate().is_err());
    }
}
