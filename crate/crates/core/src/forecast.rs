//! Forecast containers and the interface every model exposes to the backtest.

use crate::error::Result;

/// Forecasts issued at one origin for horizons `1..=H`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSet {
    /// Index of the last observed period.
    pub origin: usize,
    /// `points[h - 1]` forecasts period `origin + h`.
    pub points: Vec<f64>,
    /// `ensemble[h - 1]` holds the simulated values for horizon `h`.
    pub ensemble: Option<Vec<Vec<f64>>>,
}

impl ForecastSet {
    pub fn horizon(&self) -> usize {
        self.points.len()
    }

    pub fn target(&self, h: usize) -> usize {
        self.origin + h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DensitySpec {
    pub n_sims: usize,
    pub seed: u64,
}

pub trait Forecaster: Send + Sync {
    fn name(&self) -> &str;

    /// Forecasts periods `origin + 1 ..= origin + horizon` using data up to
    /// and including `origin`.
    fn forecast(&self, origin: usize, horizon: usize, density: Option<&DensitySpec>) -> Result<ForecastSet>;
}
