//! The DTHP model: baselines, magnitudes, and a kernel per dimension pair.

use serde::{Deserialize, Serialize};

use crate::error::DthpError;
use crate::kernel::Kernel;
use crate::series::CountSeries;
use crate::Result;

/// A K-dimensional discrete-time Hawkes process.
///
/// `alpha[l][k]` is the expected number of offspring events in dimension `k`
/// per parent event in dimension `l`; `kernels[l][k]` spreads that mass over
/// integer lags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DthpModel {
    mu: Vec<f64>,
    alpha: Vec<Vec<f64>>,
    kernels: Vec<Vec<Kernel>>,
}

impl DthpModel {
    pub fn new(mu: Vec<f64>, alpha: Vec<Vec<f64>>, kernels: Vec<Vec<Kernel>>) -> Result<Self> {
        let model = Self { mu, alpha, kernels };
        model.validate()?;
        Ok(model)
    }

    /// Re-runs construction checks; deserialized models bypass them.
    pub fn validate(&self) -> Result<()> {
        let k = self.mu.len();
        if k == 0 {
            return Err(DthpError::InvalidModel("K must be at least 1".into()));
        }
        if !self.mu.iter().all(|&m| m.is_finite() && m > 0.0) {
            return Err(DthpError::InvalidModel(
                "all baselines must be finite and strictly positive".into(),
            ));
        }
        if self.alpha.len() != k || self.alpha.iter().any(|row| row.len() != k) {
            return Err(DthpError::InvalidModel(format!(
                "magnitude matrix must be {k}x{k}"
            )));
        }
        if !self
            .alpha
            .iter()
            .all(|row| row.iter().all(|&a| a.is_finite() && a >= 0.0))
        {
            return Err(DthpError::InvalidModel(
                "all magnitudes must be finite and non-negative".into(),
            ));
        }
        if self.kernels.len() != k || self.kernels.iter().any(|row| row.len() != k) {
            return Err(DthpError::InvalidModel(format!(
                "kernel grid must be {k}x{k}"
            )));
        }
        for row in &self.kernels {
            for kernel in row {
                kernel.validate()?;
            }
        }
        Ok(())
    }

    /// Univariate shorthand.
    pub fn univariate(mu: f64, alpha: f64, kernel: Kernel) -> Result<Self> {
        Self::new(vec![mu], vec![vec![alpha]], vec![vec![kernel]])
    }

    pub fn dimensions(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn alpha(&self) -> &[Vec<f64>] {
        &self.alpha
    }

    /// Kernel from source dimension `l` into target dimension `k`.
    pub fn kernel(&self, l: usize, k: usize) -> &Kernel {
        &self.kernels[l][k]
    }

    pub fn kernels(&self) -> &[Vec<Kernel>] {
        &self.kernels
    }

    /// Largest `s_max` over all kernel pairs.
    pub fn max_memory(&self) -> u32 {
        self.kernels
            .iter()
            .flatten()
            .map(Kernel::s_max)
            .max()
            .unwrap()
    }

    /// Checks that a series has the same dimension count as the model.
    pub fn check_series(&self, series: &CountSeries) -> Result<()> {
        if series.dimensions() != self.dimensions() {
            return Err(DthpError::DimensionMismatch {
                model_k: self.dimensions(),
                series_k: series.dimensions(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::HistogramKernel;

    fn flat(s_max: u32) -> Kernel {
        HistogramKernel::flat(s_max).unwrap().into()
    }

    #[test]
    fn validates_shapes_and_signs() {
        assert!(DthpModel::univariate(1.0, 0.9, flat(7)).is_ok());
        assert!(DthpModel::univariate(0.0, 0.9, flat(7)).is_err());
        assert!(DthpModel::univariate(1.0, -0.1, flat(7)).is_err());
        assert!(DthpModel::new(vec![1.0, 1.0], vec![vec![0.2; 2]], vec![vec![flat(7); 2]; 2])
            .is_err());
        assert!(DthpModel::new(
            vec![1.0, 1.0],
            vec![vec![0.2; 2]; 2],
            vec![vec![flat(7); 2]]
        )
        .is_err());
    }

    #[test]
    fn series_dimension_check() {
        let m = DthpModel::univariate(1.0, 0.9, flat(7)).unwrap();
        let s1 = CountSeries::new(vec![vec![0.0, 1.0]]).unwrap();
        let s2 = CountSeries::new(vec![vec![0.0], vec![1.0]]).unwrap();
        assert!(m.check_series(&s1).is_ok());
        assert!(m.check_series(&s2).is_err());
    }
}
