use rand_distr::{Distribution, Normal};

use super::fit::FittedSarma;
use super::model::{LagContext, Recursion, Regime};
use super::SarmaParams;
use crate::error::{Error, Result};
use crate::forecast::{DensitySpec, ForecastSet, Forecaster};
use crate::rng;

/// A fitted model attached to a series, with innovations precomputed so
/// that any origin can be forecast without rerunning the recursion.
#[derive(Debug, Clone)]
pub struct SarmaForecaster {
    name: String,
    params: SarmaParams,
    ctx: LagContext,
    z: Vec<f64>,
    e: Vec<f64>,
}

impl SarmaForecaster {
    pub fn new(name: impl Into<String>, params: SarmaParams, ctx: LagContext, series: &[f64]) -> Result<Self> {
        if series.len() > ctx.n_periods() {
            return Err(Error::Parameter("lag plan does not cover the series".into()));
        }
        if let Some(i) = series.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("missing or non-finite value at period {i}")));
        }
        let z: Vec<f64> = series.iter().map(|y| y - params.c).collect();
        let e = Recursion::new(&params, &ctx).residuals_of_deviations(&z);
        Ok(Self {
            name: name.into(),
            params,
            ctx,
            z,
            e,
        })
    }

    pub fn from_fit(name: impl Into<String>, fitted: &FittedSarma, ctx: LagContext, series: &[f64]) -> Result<Self> {
        Self::new(name, fitted.params.clone(), ctx, series)
    }

    pub fn params(&self) -> &SarmaParams {
        &self.params
    }

    pub fn innovations(&self) -> &[f64] {
        &self.e
    }

    fn check(&self, origin: usize, horizon: usize) -> Result<()> {
        if origin >= self.z.len() {
            return Err(Error::Horizon {
                origin,
                horizon,
                msg: format!("origin beyond the {} observed periods", self.z.len()),
            });
        }
        if origin + horizon >= self.ctx.n_periods() {
            return Err(Error::Horizon {
                origin,
                horizon,
                msg: format!("lag plan covers only {} periods", self.ctx.n_periods()),
            });
        }
        Ok(())
    }

    /// One path of future deviations; `shock(h)` supplies the innovation at
    /// horizon `h` (1-based).
    fn path(&self, rec: &Recursion, origin: usize, horizon: usize, mut shock: impl FnMut(usize) -> f64) -> Vec<f64> {
        let mut fz: Vec<f64> = Vec::with_capacity(horizon);
        let mut fe: Vec<f64> = Vec::with_capacity(horizon);
        for h in 1..=horizon {
            let t = origin + h;
            let eps = shock(h);
            let ar = rec.ar_sum(t, |i| if i <= origin { self.z[i] } else { fz[i - origin - 1] });
            let ma = rec.ma_sum(t, |i| if i <= origin { self.e[i] } else { fe[i - origin - 1] });
            fz.push(eps - ar + ma);
            fe.push(eps);
        }
        fz
    }
}

impl Forecaster for SarmaForecaster {
    fn name(&self) -> &str {
        &self.name
    }

    fn forecast(&self, origin: usize, horizon: usize, density: Option<&DensitySpec>) -> Result<ForecastSet> {
        self.check(origin, horizon)?;
        let rec = Recursion::new(&self.params, &self.ctx);
        let c = self.params.c;
        let points = self.path(&rec, origin, horizon, |_| 0.0).into_iter().map(|z| z + c).collect();
        let ensemble = match density {
            None => None,
            Some(spec) => {
                let sd_n = self.params.sigma2_normal.sqrt();
                let sd_s = self.params.sigma2_special.sqrt();
                let std = Normal::new(0.0, 1.0).expect("unit normal");
                let mut members = vec![Vec::with_capacity(spec.n_sims); horizon];
                for sim in 0..spec.n_sims {
                    let mut r = rng::stream(spec.seed, origin as u64, sim as u64);
                    let path = self.path(&rec, origin, horizon, |h| {
                        let sd = match self.ctx.regime(origin + h) {
                            Regime::Normal => sd_n,
                            Regime::Special => sd_s,
                        };
                        sd * std.sample(&mut r)
                    });
                    for (m, z) in members.iter_mut().zip(path) {
                        m.push(z + c);
                    }
                }
                Some(members)
            }
        };
        Ok(ForecastSet {
            origin,
            points,
            ensemble,
        })
    }
}

/// Point forecasts for horizons `1..=horizon` from `origin`.
pub fn forecast_point(params: &SarmaParams, ctx: &LagContext, series: &[f64], origin: usize, horizon: usize) -> Result<ForecastSet> {
    let upto = &series[..(origin + 1).min(series.len())];
    SarmaForecaster::new("sarma", params.clone(), ctx.clone(), upto)?.forecast(origin, horizon, None)
}

/// Point forecasts plus an ensemble of `n_sims` simulated paths.
pub fn forecast_density(
    params: &SarmaParams,
    ctx: &LagContext,
    series: &[f64],
    origin: usize,
    horizon: usize,
    n_sims: usize,
    seed: u64,
) -> Result<ForecastSet> {
    let upto = &series[..(origin + 1).min(series.len())];
    SarmaForecaster::new("sarma", params.clone(), ctx.clone(), upto)?.forecast(
        origin,
        horizon,
        Some(&DensitySpec { n_sims, seed }),
    )
}
