use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::poly::LagPoly;
use super::{AnnualMode, SarmaOrders, SarmaParams};
use crate::calendar::{ClassifiedSpan, DAYS_PER_WEEK};
use crate::error::{Error, Result};
use crate::rules::{build_lag_plan, day_lag_chain, AnnualLagPlan, MAX_ANNUAL_DEPTH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Normal,
    Special,
}

/// Per-day annual lag chains and regime flags over the span a model may
/// touch (estimation data plus forecast targets).
#[derive(Debug, Clone, PartialEq)]
pub struct LagContext {
    periods_per_day: usize,
    mode: AnnualMode,
    /// Cumulative annual lags in periods, per day.
    chains: Vec<Vec<usize>>,
    /// Day uses the special annual polynomials.
    special_factor: Vec<bool>,
    /// Day uses the special innovation variance.
    special_variance: Vec<bool>,
}

impl LagContext {
    pub fn new(plan: &AnnualLagPlan, periods_per_day: usize, mode: AnnualMode) -> Self {
        let special: Vec<bool> = plan.entries().iter().map(|e| e.is_special()).collect();
        let chain_plan = match mode {
            AnnualMode::Switched => plan.clone(),
            AnnualMode::Shared => {
                let normal = ClassifiedSpan::all_normal(plan.start(), plan.len());
                build_lag_plan(&normal, plan.start())
            }
        };
        let chains = (0..plan.len())
            .map(|d| {
                day_lag_chain(d, &chain_plan, MAX_ANNUAL_DEPTH)
                    .into_iter()
                    .map(|days| days * periods_per_day)
                    .collect()
            })
            .collect();
        let special_factor = match mode {
            AnnualMode::Switched => special.clone(),
            AnnualMode::Shared => vec![false; plan.len()],
        };
        Self {
            periods_per_day,
            mode,
            chains,
            special_factor,
            special_variance: special,
        }
    }

    /// Context where every day is normal (the plain seasonal model).
    pub fn all_normal(plan: &AnnualLagPlan, periods_per_day: usize) -> Self {
        let normal = ClassifiedSpan::all_normal(plan.start(), plan.len());
        Self::new(&build_lag_plan(&normal, plan.start()), periods_per_day, AnnualMode::Switched)
    }

    pub fn periods_per_day(&self) -> usize {
        self.periods_per_day
    }

    pub fn mode(&self) -> AnnualMode {
        self.mode
    }

    /// Longest annual chain among periods from `from` on.
    pub fn max_chain_depth(&self, from: usize) -> usize {
        self.chains[(from / self.periods_per_day).min(self.chains.len())..]
            .iter()
            .map(Vec::len)
            .max()
            .unwrap_or(0)
    }

    pub fn n_days(&self) -> usize {
        self.chains.len()
    }

    pub fn n_periods(&self) -> usize {
        self.chains.len() * self.periods_per_day
    }

    pub fn chain(&self, t: usize) -> &[usize] {
        &self.chains[t / self.periods_per_day]
    }

    pub fn uses_special_factor(&self, t: usize) -> bool {
        self.special_factor[t / self.periods_per_day]
    }

    pub fn regime(&self, t: usize) -> Regime {
        if self.special_variance[t / self.periods_per_day] {
            Regime::Special
        } else {
            Regime::Normal
        }
    }

    /// Whether any period from `from` to `to` (exclusive) uses the special
    /// annual polynomials.
    pub fn any_special_factor(&self, from: usize, to: usize) -> bool {
        let m1 = self.periods_per_day;
        (from / m1..to.div_ceil(m1).min(self.n_days())).any(|d| self.special_factor[d])
    }

    pub fn any_special_variance(&self, from: usize, to: usize) -> bool {
        let m1 = self.periods_per_day;
        (from / m1..to.div_ceil(m1).min(self.n_days())).any(|d| self.special_variance[d])
    }

    fn check_covers(&self, n: usize) -> Result<()> {
        if n > self.n_periods() {
            return Err(Error::Parameter(format!(
                "lag plan covers {} periods, series has {n}",
                self.n_periods()
            )));
        }
        Ok(())
    }
}

/// The expanded non-annual polynomials and annual coefficients of a model,
/// ready to run the recursion.
#[derive(Debug, Clone)]
pub struct Recursion<'a> {
    ctx: &'a LagContext,
    /// AR side without its annual factor, including lag 0.
    ar: Vec<(usize, f64)>,
    /// MA side without its annual factor, including lag 0.
    ma: Vec<(usize, f64)>,
    psi: Vec<f64>,
    theta: Vec<f64>,
    lambda: Vec<f64>,
    kappa: Vec<f64>,
    c: f64,
}

fn base_polys(params: &SarmaParams, m1: usize) -> (LagPoly, LagPoly) {
    let m2 = m1 * DAYS_PER_WEEK;
    let ar = LagPoly::seasonal_factor(&params.ar, 1, -1.0)
        .multiply(&LagPoly::seasonal_factor(&params.ar_daily, m1, -1.0))
        .multiply(&LagPoly::seasonal_factor(&params.ar_weekly, m2, -1.0));
    let ma = LagPoly::seasonal_factor(&params.ma, 1, 1.0)
        .multiply(&LagPoly::seasonal_factor(&params.ma_daily, m1, 1.0))
        .multiply(&LagPoly::seasonal_factor(&params.ma_weekly, m2, 1.0));
    (ar, ma)
}

impl<'a> Recursion<'a> {
    pub fn new(params: &SarmaParams, ctx: &'a LagContext) -> Self {
        let (ar, ma) = base_polys(params, ctx.periods_per_day());
        Self {
            ctx,
            ar: ar.terms().to_vec(),
            ma: ma.terms().to_vec(),
            psi: params.psi.clone(),
            theta: params.theta.clone(),
            lambda: params.lambda.clone(),
            kappa: params.kappa.clone(),
            c: params.c,
        }
    }

    pub fn context(&self) -> &LagContext {
        self.ctx
    }

    pub fn constant(&self) -> f64 {
        self.c
    }

    fn annual(&self, t: usize) -> (&[usize], &[f64], &[f64]) {
        let chain = self.ctx.chain(t);
        let (ar, ma) = if self.ctx.uses_special_factor(t) {
            (&self.theta, &self.kappa)
        } else {
            (&self.psi, &self.lambda)
        };
        let d = chain.len().min(ar.len());
        (&chain[..d], &ar[..d], &ma[..d])
    }

    /// `Σ_{ℓ>0} a_ℓ(t)·z(t−ℓ)` with `z` zero before the series start.
    #[inline]
    pub fn ar_sum(&self, t: usize, z: impl Fn(usize) -> f64) -> f64 {
        let (chain, eta, _) = self.annual(t);
        Self::lagged_sum(t, &self.ar, chain, eta, &z)
    }

    /// `Σ_{ℓ>0} b_ℓ(t)·e(t−ℓ)` with `e` zero before the series start.
    #[inline]
    pub fn ma_sum(&self, t: usize, e: impl Fn(usize) -> f64) -> f64 {
        let (chain, _, eta) = self.annual(t);
        Self::lagged_sum(t, &self.ma, chain, eta, &e)
    }

    #[inline]
    fn lagged_sum(t: usize, base: &[(usize, f64)], chain: &[usize], eta: &[f64], x: &impl Fn(usize) -> f64) -> f64 {
        let mut s = 0.0;
        for &(j, a) in base {
            if j > t {
                break;
            }
            if j > 0 {
                s += a * x(t - j);
            }
            let mut inner = 0.0;
            for (&lag, &k) in chain.iter().zip(eta) {
                if j + lag <= t {
                    inner += k * x(t - j - lag);
                }
            }
            s += a * inner;
        }
        s
    }

    /// Innovations for the deviations `z = y − c`.
    pub fn residuals_of_deviations(&self, z: &[f64]) -> Vec<f64> {
        let mut e = vec![0.0; z.len()];
        for t in 0..z.len() {
            let ar = self.ar_sum(t, |i| z[i]);
            let ma = self.ma_sum(t, |i| e[i]);
            e[t] = z[t] + ar - ma;
        }
        e
    }

    /// Deviations `z = y − c` driven by the innovations `e`.
    pub fn deviations_from_innovations(&self, e: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; e.len()];
        for t in 0..e.len() {
            let ar = self.ar_sum(t, |i| z[i]);
            let ma = self.ma_sum(t, |i| e[i]);
            z[t] = e[t] - ar + ma;
        }
        z
    }
}

/// Fully multiplied-out AR-side and MA-side lag maps at period `t`.
pub fn expand_composite_polynomials(
    orders: &SarmaOrders,
    params: &SarmaParams,
    t: usize,
    ctx: &LagContext,
) -> Result<(BTreeMap<usize, f64>, BTreeMap<usize, f64>)> {
    params.validate(orders)?;
    if t >= ctx.n_periods() {
        return Err(Error::PeriodOutOfRange {
            index: t,
            len: ctx.n_periods(),
        });
    }
    let (ar, ma) = base_polys(params, ctx.periods_per_day());
    let rec = Recursion::new(params, ctx);
    let (chain, eta_ar, eta_ma) = rec.annual(t);
    let annual = |eta: &[f64]| LagPoly::from_terms(std::iter::once((0, 1.0)).chain(chain.iter().copied().zip(eta.iter().copied())));
    Ok((
        ar.multiply(&annual(eta_ar)).to_map(),
        ma.multiply(&annual(eta_ma)).to_map(),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSeries {
    pub eps: Vec<f64>,
    pub regime: Vec<Regime>,
}

fn check_series(series: &[f64]) -> Result<()> {
    if let Some(i) = series.iter().position(|v| !v.is_finite()) {
        return Err(Error::Data(format!("missing or non-finite value at period {i}")));
    }
    Ok(())
}

/// Innovations of the model on `series`, with pre-sample deviations and
/// innovations set to zero.
pub fn residuals(params: &SarmaParams, orders: &SarmaOrders, series: &[f64], ctx: &LagContext) -> Result<ResidualSeries> {
    params.validate(orders)?;
    check_series(series)?;
    ctx.check_covers(series.len())?;
    let rec = Recursion::new(params, ctx);
    let z: Vec<f64> = series.iter().map(|y| y - params.c).collect();
    let eps = rec.residuals_of_deviations(&z);
    let regime = (0..series.len()).map(|t| ctx.regime(t)).collect();
    Ok(ResidualSeries { eps, regime })
}

/// Simulates `n` periods; returns the series and the innovations drawn.
pub fn simulate<R: Rng>(
    params: &SarmaParams,
    orders: &SarmaOrders,
    ctx: &LagContext,
    n: usize,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>)> {
    params.validate(orders)?;
    ctx.check_covers(n)?;
    let normal = Normal::new(0.0, params.sigma2_normal.sqrt()).map_err(|e| Error::Parameter(e.to_string()))?;
    let special = Normal::new(0.0, params.sigma2_special.sqrt()).map_err(|e| Error::Parameter(e.to_string()))?;
    let e: Vec<f64> = (0..n)
        .map(|t| match ctx.regime(t) {
            Regime::Normal => normal.sample(rng),
            Regime::Special => special.sample(rng),
        })
        .collect();
    let rec = Recursion::new(params, ctx);
    let y = rec
        .deviations_from_innovations(&e)
        .into_iter()
        .map(|z| z + params.c)
        .collect();
    Ok((y, e))
}
