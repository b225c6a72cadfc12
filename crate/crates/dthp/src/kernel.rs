//! Triggering kernels: normalised random histograms and the truncated
//! geometric baseline.

use serde::{Deserialize, Serialize};

use crate::error::DthpError;
use crate::Result;

/// Piecewise-constant triggering kernel on integer lags `1..=s_max`.
///
/// Knots `s_0 = 0 < s_1 < … < s_J = s_max` are integers; interval `j` is the
/// half-open `(s_{j-1}, s_j]` with unnormalised height `θ_j`, where `θ_1` is
/// pinned to 1 so that the height vector producing a given shape is unique.
/// Evaluation divides by `Σ_h (s_h − s_{h-1}) θ_h`, so the per-lag masses over
/// `1..=s_max` sum to exactly 1 and the kernel is invariant to rescaling all
/// heights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramKernel {
    knots: Vec<u32>,
    heights: Vec<f64>,
}

impl HistogramKernel {
    /// Builds a kernel from the full knot vector (including the fixed
    /// endpoints 0 and `s_max`) and one height per interval.
    pub fn new(knots: Vec<u32>, heights: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(DthpError::InvalidKernel(
                "knot vector needs at least the two endpoints".into(),
            ));
        }
        if knots[0] != 0 {
            return Err(DthpError::InvalidKernel("first knot must be 0".into()));
        }
        if !knots.windows(2).all(|w| w[0] < w[1]) {
            return Err(DthpError::InvalidKernel(
                "knots must be strictly increasing".into(),
            ));
        }
        if heights.len() != knots.len() - 1 {
            return Err(DthpError::InvalidKernel(format!(
                "{} heights for {} intervals",
                heights.len(),
                knots.len() - 1
            )));
        }
        if heights[0] != 1.0 {
            return Err(DthpError::InvalidKernel(format!(
                "first height must be exactly 1, got {}",
                heights[0]
            )));
        }
        if !heights.iter().all(|&h| h.is_finite() && h > 0.0) {
            return Err(DthpError::InvalidKernel(
                "all heights must be finite and strictly positive".into(),
            ));
        }
        Ok(Self { knots, heights })
    }

    /// The single-step kernel, uniform over `1..=s_max`.
    pub fn flat(s_max: u32) -> Result<Self> {
        Self::new(vec![0, s_max], vec![1.0])
    }

    /// Maximum memory in days.
    pub fn s_max(&self) -> u32 {
        *self.knots.last().unwrap()
    }

    /// Number of components J.
    pub fn components(&self) -> usize {
        self.heights.len()
    }

    /// Full knot vector `s_0..s_J`.
    pub fn knots(&self) -> &[u32] {
        &self.knots
    }

    /// Unnormalised heights `θ_1..θ_J` (with `θ_1 = 1`).
    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// `Σ_h (s_h − s_{h-1}) θ_h`, the normalising constant.
    pub fn normalizer(&self) -> f64 {
        self.knots
            .windows(2)
            .zip(&self.heights)
            .map(|(w, &h)| f64::from(w[1] - w[0]) * h)
            .sum()
    }

    /// Normalised mass at an integer lag; 0 beyond `s_max`.
    pub fn evaluate(&self, lag: u32) -> f64 {
        if lag == 0 || lag > self.s_max() {
            return 0.0;
        }
        let z = self.normalizer();
        // lag falls in (s_{j-1}, s_j]
        let j = self.knots.partition_point(|&s| s < lag) - 1;
        self.heights[j] / z
    }

    /// Per-lag masses for lags `1..=s_max`.
    pub fn masses(&self) -> Vec<f64> {
        let z = self.normalizer();
        let mut out = Vec::with_capacity(self.s_max() as usize);
        for (w, &h) in self.knots.windows(2).zip(&self.heights) {
            let mass = h / z;
            out.extend(std::iter::repeat(mass).take((w[1] - w[0]) as usize));
        }
        out
    }

    /// Normalised height per interval, `θ_j / Z`.
    pub fn interval_weights(&self) -> Vec<f64> {
        let z = self.normalizer();
        self.heights.iter().map(|&h| h / z).collect()
    }
}

/// Geometric triggering kernel truncated at `s_max` and renormalised, so its
/// masses over `1..=s_max` sum to 1 and the magnitude parameter keeps its
/// branching interpretation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricKernel {
    beta: f64,
    s_max: u32,
}

impl GeometricKernel {
    pub fn new(beta: f64, s_max: u32) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(DthpError::InvalidKernel(format!(
                "geometric beta must lie in (0,1), got {beta}"
            )));
        }
        if s_max == 0 {
            return Err(DthpError::InvalidKernel("s_max must be positive".into()));
        }
        Ok(Self { beta, s_max })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn s_max(&self) -> u32 {
        self.s_max
    }

    /// `β(1−β)^{lag−1} / (1 − (1−β)^{s_max})` for `1 ≤ lag ≤ s_max`, else 0.
    pub fn evaluate(&self, lag: u32) -> f64 {
        if lag == 0 || lag > self.s_max {
            return 0.0;
        }
        let q = 1.0 - self.beta;
        self.beta * q.powi(lag as i32 - 1) / (1.0 - q.powi(self.s_max as i32))
    }

    /// Per-lag masses for lags `1..=s_max`.
    pub fn masses(&self) -> Vec<f64> {
        (1..=self.s_max).map(|d| self.evaluate(d)).collect()
    }
}

/// Either kernel family, as stored in a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    Histogram(HistogramKernel),
    Geometric(GeometricKernel),
}

impl Kernel {
    /// Re-runs construction checks; deserialized kernels bypass them.
    pub fn validate(&self) -> Result<()> {
        match self {
            Kernel::Histogram(k) => {
                HistogramKernel::new(k.knots.clone(), k.heights.clone()).map(drop)
            }
            Kernel::Geometric(k) => GeometricKernel::new(k.beta, k.s_max).map(drop),
        }
    }

    pub fn s_max(&self) -> u32 {
        match self {
            Kernel::Histogram(k) => k.s_max(),
            Kernel::Geometric(k) => k.s_max(),
        }
    }

    pub fn evaluate(&self, lag: u32) -> f64 {
        match self {
            Kernel::Histogram(k) => k.evaluate(lag),
            Kernel::Geometric(k) => k.evaluate(lag),
        }
    }

    pub fn masses(&self) -> Vec<f64> {
        match self {
            Kernel::Histogram(k) => k.masses(),
            Kernel::Geometric(k) => k.masses(),
        }
    }
}

impl From<HistogramKernel> for Kernel {
    fn from(k: HistogramKernel) -> Self {
        Kernel::Histogram(k)
    }
}

impl From<GeometricKernel> for Kernel {
    fn from(k: GeometricKernel) -> Self {
        Kernel::Geometric(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_kernel_is_uniform() {
        let k = HistogramKernel::flat(7).unwrap();
        assert!((k.evaluate(4) - 1.0 / 7.0).abs() < 1e-15);
        assert_eq!(k.evaluate(8), 0.0);
        assert_eq!(k.evaluate(0), 0.0);
    }

    #[test]
    fn two_bin_worked_example() {
        // s=(0,2,7), θ=(1, 0.5): Z = 2·1 + 5·0.5 = 4.5
        let k = HistogramKernel::new(vec![0, 2, 7], vec![1.0, 0.5]).unwrap();
        assert!((k.evaluate(2) - 1.0 / 4.5).abs() < 1e-12);
        assert!((k.evaluate(5) - 0.5 / 4.5).abs() < 1e-12);
        let sum: f64 = k.masses().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_open_interval_boundaries() {
        let k = HistogramKernel::new(vec![0, 3, 7], vec![1.0, 2.0]).unwrap();
        // lag 3 belongs to (0,3], lag 4 to (3,7]
        assert!((k.evaluate(3) - 1.0 / 11.0).abs() < 1e-12);
        assert!((k.evaluate(4) - 2.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid_structure() {
        assert!(HistogramKernel::new(vec![0, 7], vec![0.5]).is_err()); // θ₁ ≠ 1
        assert!(HistogramKernel::new(vec![1, 7], vec![1.0]).is_err()); // s₀ ≠ 0
        assert!(HistogramKernel::new(vec![0, 3, 3, 7], vec![1.0, 1.0, 1.0]).is_err());
        assert!(HistogramKernel::new(vec![0, 3, 7], vec![1.0, -1.0]).is_err());
        assert!(HistogramKernel::new(vec![0, 7], vec![1.0, 1.0]).is_err());
        assert!(HistogramKernel::new(vec![0], vec![]).is_err());
    }

    #[test]
    fn geometric_truncated_and_renormalised() {
        let g = GeometricKernel::new(0.5, 7).unwrap();
        // 0.5 / (1 − 0.5⁷) = 0.5 / 0.9921875
        assert!((g.evaluate(1) - 0.5 / 0.9921875).abs() < 1e-12);
        assert_eq!(g.evaluate(8), 0.0);
        let sum: f64 = g.masses().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn geometric_rejects_bad_beta() {
        assert!(GeometricKernel::new(0.0, 7).is_err());
        assert!(GeometricKernel::new(1.0, 7).is_err());
        assert!(GeometricKernel::new(0.5, 0).is_err());
    }

    #[test]
    fn kernel_enum_roundtrip() {
        let k: Kernel = HistogramKernel::flat(7).unwrap().into();
        let json = serde_json::to_string(&k).unwrap();
        let back: Kernel = serde_json::from_str(&json).unwrap();
        assert_eq!(k, back);
        let g: Kernel = GeometricKernel::new(0.3, 7).unwrap().into();
        let json = serde_json::to_string(&g).unwrap();
        let back: Kernel = serde_json::from_str(&json).unwrap();
        assert_eq!(g, back);
    }
}
