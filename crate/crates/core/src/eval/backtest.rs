use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::crps_ensemble;
use crate::error::{Error, Result};
use crate::forecast::{DensitySpec, Forecaster};

/// Target periods `first..=last` of the evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalWindow {
    pub first: usize,
    pub last: usize,
}

impl EvalWindow {
    pub fn new(first: usize, last: usize) -> Result<Self> {
        if first == 0 || last < first {
            return Err(Error::Parameter(format!("bad evaluation window {first}..={last}")));
        }
        Ok(Self { first, last })
    }

    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastRecord {
    pub origin: usize,
    pub horizon: usize,
    pub target: usize,
    pub forecast: f64,
    pub actual: f64,
    pub crps: Option<f64>,
}

impl ForecastRecord {
    pub fn error(&self) -> f64 {
        self.forecast - self.actual
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestRun {
    pub model: String,
    pub window: EvalWindow,
    pub horizon: usize,
    /// Ordered by origin, then horizon.
    pub records: Vec<ForecastRecord>,
    /// Pairs whose target lies past the window or the data.
    pub omitted: usize,
    /// Pairs the model could not forecast.
    pub failed: usize,
}

impl BacktestRun {
    pub fn at_horizon(&self, h: usize) -> impl Iterator<Item = &ForecastRecord> {
        self.records.iter().filter(move |r| r.horizon == h)
    }
}

/// Rolls the origin from the last period before the window to the one
/// before its end. A pair is evaluated when its target lies in the window
/// and in the data, so targets early in the window are only reached at
/// the horizons that do not need an origin inside the fit period.
pub fn rolling_backtest(
    model: &dyn Forecaster,
    actuals: &[f64],
    window: EvalWindow,
    horizon: usize,
    density: Option<&DensitySpec>,
) -> Result<BacktestRun> {
    if horizon == 0 {
        return Err(Error::Parameter("horizon must be at least 1".into()));
    }
    let n = actuals.len();
    if window.first >= n {
        return Err(Error::Parameter(format!(
            "evaluation window starts at {} but the data end at {}",
            window.first,
            n.saturating_sub(1)
        )));
    }
    let last_target = window.last.min(n - 1);
    let origins: Vec<usize> = (window.first - 1..window.last).collect();
    let results: Vec<(Vec<ForecastRecord>, usize, usize)> = origins
        .par_iter()
        .map(|&origin| {
            let h_eff = horizon.min(last_target.saturating_sub(origin));
            let omitted = horizon - h_eff;
            if h_eff == 0 {
                return (Vec::new(), omitted, 0);
            }
            match model.forecast(origin, h_eff, density) {
                Ok(set) => {
                    let recs = (1..=h_eff)
                        .map(|h| {
                            let target = origin + h;
                            let actual = actuals[target];
                            ForecastRecord {
                                origin,
                                horizon: h,
                                target,
                                forecast: set.points[h - 1],
                                actual,
                                crps: set.ensemble.as_ref().map(|e| crps_ensemble(&e[h - 1], actual)),
                            }
                        })
                        .collect();
                    (recs, omitted, 0)
                }
                Err(e) => {
                    log::warn!("{}: no forecast from origin {origin}: {e}", model.name());
                    (Vec::new(), omitted, h_eff)
                }
            }
        })
        .collect();
    let mut run = BacktestRun {
        model: model.name().to_string(),
        window,
        horizon,
        records: Vec::new(),
        omitted: 0,
        failed: 0,
    };
    for (recs, omitted, failed) in results {
        run.records.extend(recs);
        run.omitted += omitted;
        run.failed += failed;
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::ForecastSet;

    struct Persistence;

    impl Forecaster for Persistence {
        fn name(&self) -> &str {
            "persistence"
        }

        fn forecast(&self, origin: usize, horizon: usize, density: Option<&DensitySpec>) -> Result<ForecastSet> {
            let v = origin as f64;
            Ok(ForecastSet {
                origin,
                points: vec![v; horizon],
                ensemble: density.map(|d| vec![vec![v; d.n_sims]; horizon]),
            })
        }
    }

    #[test]
    fn counting() {
        let y: Vec<f64> = (0..400).map(|i| i as f64 + 1.0).collect();
        let w = EvalWindow::new(200, 295).unwrap();
        let run = rolling_backtest(&Persistence, &y, w, 48, None).unwrap();
        // oracle: count pairs (o, h) with o in 199..295, h in 1..=48 and o + h <= 295
        let mut expect = 0;
        for o in 199..295 {
            for h in 1..=48 {
                if o + h <= 295 {
                    expect += 1;
                }
            }
        }
        assert_eq!(run.records.len(), expect);
        assert_eq!(run.records.len() + run.omitted, 96 * 48);
        assert!(run.records.iter().all(|r| (200..=295).contains(&r.target)));
        assert_eq!(run.records[0].origin, 199);
        assert_eq!(run.at_horizon(1).count(), 96);

        let one = rolling_backtest(&Persistence, &y, w, 1, None).unwrap();
        assert_eq!(one.records.len(), 96);
        assert_eq!(one.omitted, 0);
        assert_eq!(run, rolling_backtest(&Persistence, &y, w, 48, None).unwrap());
    }

    #[test]
    fn data_end_and_density() {
        let y: Vec<f64> = (0..250).map(|i| i as f64 + 1.0).collect();
        let w = EvalWindow::new(200, 299).unwrap();
        let run = rolling_backtest(&Persistence, &y, w, 4, Some(&DensitySpec { n_sims: 3, seed: 1 })).unwrap();
        assert!(run.records.iter().all(|r| r.target < 250));
        let r = run.records[0];
        assert_eq!(r.crps, Some((r.forecast - r.actual).abs()));
        assert!(rolling_backtest(&Persistence, &y, EvalWindow::new(260, 270).unwrap(), 4, None).is_err());
    }
}
