use std::collections::BTreeMap;

use crate::calendar::{SeasonalGrid, DAYS_PER_WEEK};
use crate::error::{Error, Result};
use crate::forecast::{DensitySpec, ForecastSet, Forecaster};
use crate::optim::{nelder_mead_with_steps, NelderMeadOptions};
use crate::params_doc::{content_hash, ParamDocument};
use crate::sarma::{profile_log_likelihood, LagContext, Regime};

const WEEKS_PER_YEAR: usize = 52;

/// Smoothing constants, the AR(1) error adjustment, and the initial level and
/// seasonal indices estimated from the first 52 weeks.
#[derive(Debug, Clone, PartialEq)]
pub struct HwtParams {
    pub alpha: f64,
    pub delta: f64,
    pub omega: f64,
    pub phi: f64,
    pub rho: f64,
    pub level: f64,
    /// One value per intraday slot.
    pub intraday: Vec<f64>,
    /// One value per period of the week.
    pub intraweek: Vec<f64>,
    /// One value per period of the first 52 weeks.
    pub intrayear: Vec<f64>,
    pub sigma2_normal: f64,
    pub sigma2_special: f64,
}

impl HwtParams {
    /// First-year initialization: slot mean over day mean, day mean over week
    /// mean, week mean over year mean, and the year mean as the level. All
    /// smoothing constants are zero.
    pub fn initialize(series: &[f64], periods_per_day: usize) -> Result<Self> {
        let m1 = periods_per_day;
        let m2 = m1 * DAYS_PER_WEEK;
        let n0 = WEEKS_PER_YEAR * m2;
        if series.len() <= n0 {
            return Err(Error::Data(format!(
                "need more than 52 weeks ({n0} periods) of data, found {}",
                series.len()
            )));
        }
        if let Some(i) = series[..n0].iter().position(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Data(format!("multiplicative smoothing needs positive load, period {i}")));
        }
        let first = &series[..n0];
        let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
        let level = mean(first);
        let day_means: Vec<f64> = first.chunks(m1).map(mean).collect();
        let week_means: Vec<f64> = first.chunks(m2).map(mean).collect();

        let n_days = day_means.len() as f64;
        let intraday: Vec<f64> = (0..m1)
            .map(|h| (0..day_means.len()).map(|d| first[d * m1 + h] / day_means[d]).sum::<f64>() / n_days)
            .collect();
        let intraweek: Vec<f64> = (0..DAYS_PER_WEEK)
            .flat_map(|k| {
                let w = (0..WEEKS_PER_YEAR)
                    .map(|w| day_means[w * DAYS_PER_WEEK + k] / week_means[w])
                    .sum::<f64>()
                    / WEEKS_PER_YEAR as f64;
                std::iter::repeat_n(w, m1)
            })
            .collect();
        let intrayear: Vec<f64> = week_means
            .iter()
            .flat_map(|w| std::iter::repeat_n(w / level, m2))
            .collect();
        Ok(Self {
            alpha: 0.0,
            delta: 0.0,
            omega: 0.0,
            phi: 0.0,
            rho: 0.0,
            level,
            intraday,
            intraweek,
            intrayear,
            sigma2_normal: 1.0,
            sigma2_special: 1.0,
        })
    }

    pub fn smoothing(&self) -> [f64; 5] {
        [self.alpha, self.delta, self.omega, self.phi, self.rho]
    }

    pub fn with_smoothing(&self, [alpha, delta, omega, phi, rho]: [f64; 5]) -> Self {
        Self {
            alpha,
            delta,
            omega,
            phi,
            rho,
            ..self.clone()
        }
    }

    pub fn periods_per_day(&self) -> usize {
        self.intraday.len()
    }

    pub fn to_document(&self, model: &str, grid: &SeasonalGrid, training: &[f64], log_likelihood: f64) -> ParamDocument {
        let mut values = BTreeMap::new();
        for (k, v) in ["alpha", "delta", "omega", "phi", "rho"].into_iter().zip(self.smoothing()) {
            values.insert(k.to_string(), vec![v]);
        }
        values.insert("level".into(), vec![self.level]);
        values.insert("intraday".into(), self.intraday.clone());
        values.insert("intraweek".into(), self.intraweek.clone());
        values.insert("intrayear".into(), self.intrayear.clone());
        values.insert("sigma2".into(), vec![self.sigma2_normal, self.sigma2_special]);
        values.insert("log_likelihood".into(), vec![log_likelihood]);
        ParamDocument {
            model: model.to_string(),
            periods_per_day: grid.periods_per_day,
            series_start: grid.series_start,
            training_hash: content_hash(training),
            training_periods: training.len(),
            settings: BTreeMap::new(),
            values,
        }
    }

    pub fn from_document(doc: &ParamDocument) -> Result<Self> {
        let m1 = doc.periods_per_day;
        let vector = |key: &str, len: usize| -> Result<Vec<f64>> {
            let v = doc.list(key)?;
            if v.len() != len {
                return Err(Error::Config(format!("`{key}` should hold {len} values, found {}", v.len())));
            }
            Ok(v.to_vec())
        };
        let sigma2 = vector("sigma2", 2)?;
        Ok(Self {
            alpha: doc.scalar("alpha")?,
            delta: doc.scalar("delta")?,
            omega: doc.scalar("omega")?,
            phi: doc.scalar("phi")?,
            rho: doc.scalar("rho")?,
            level: doc.scalar("level")?,
            intraday: vector("intraday", m1)?,
            intraweek: vector("intraweek", m1 * DAYS_PER_WEEK)?,
            intrayear: vector("intrayear", m1 * DAYS_PER_WEEK * WEEKS_PER_YEAR)?,
            sigma2_normal: sigma2[0],
            sigma2_special: sigma2[1],
        })
    }
}

/// Filtered states of the smoothing recursion at every observed period.
#[derive(Debug, Clone)]
struct States {
    level: Vec<f64>,
    intraday: Vec<f64>,
    intraweek: Vec<f64>,
    intrayear: Vec<f64>,
    error: Vec<f64>,
}

fn annual_lag(ctx: &LagContext, t: usize, normal: usize) -> usize {
    match ctx.chain(t).first() {
        Some(&m3) if m3 <= t => m3,
        _ => normal,
    }
}

/// Runs the recursion over `series`. On special days the intraday and
/// intraweek indices carry over unchanged so that they keep describing
/// normal days; the level and the intrayear index absorb the error.
fn filter(p: &HwtParams, ctx: &LagContext, series: &[f64]) -> Result<States> {
    let m1 = p.periods_per_day();
    let m2 = m1 * DAYS_PER_WEEK;
    let n0 = WEEKS_PER_YEAR * m2;
    let n = series.len();
    if ctx.periods_per_day() != m1 {
        return Err(Error::Parameter("lag plan grid does not match the parameters".into()));
    }
    if n > ctx.n_periods() {
        return Err(Error::Parameter("lag plan does not cover the series".into()));
    }
    if n <= n0 {
        return Err(Error::Data(format!("need more than {n0} periods, found {n}")));
    }
    let mut s = States {
        level: vec![p.level; n],
        intraday: (0..n).map(|t| p.intraday[t % m1]).collect(),
        intraweek: (0..n).map(|t| p.intraweek[t % m2]).collect(),
        intrayear: vec![0.0; n],
        error: vec![0.0; n],
    };
    s.intrayear[..n0].copy_from_slice(&p.intrayear);
    for t in n0..n {
        let l = s.level[t - 1];
        let d = s.intraday[t - m1];
        let w = s.intraweek[t - m2];
        let y = s.intrayear[t - annual_lag(ctx, t, n0)];
        let e = series[t] - (l * d * w * y + p.rho * s.error[t - 1]);
        if !e.is_finite() {
            return Err(Error::Data(format!("non-finite smoothing error at period {t}")));
        }
        s.error[t] = e;
        s.level[t] = l + p.alpha * e / (d * w * y);
        s.intrayear[t] = y + p.phi * e / (l * d * w);
        if ctx.regime(t) == Regime::Special {
            s.intraday[t] = d;
            s.intraweek[t] = w;
        } else {
            s.intraday[t] = d + p.delta * e / (l * w * y);
            s.intraweek[t] = w + p.omega * e / (l * d * y);
        }
    }
    Ok(s)
}

fn regimes(ctx: &LagContext, n: usize) -> Vec<Regime> {
    (0..n).map(|t| ctx.regime(t)).collect()
}

/// Triple-seasonal Holt-Winters-Taylor forecaster attached to a series.
///
/// With a context built from the special-day lag plan this is the
/// rule-based variant; with [`LagContext::all_normal`] it is the plain one.
#[derive(Debug, Clone)]
pub struct HwtForecaster {
    name: String,
    params: HwtParams,
    ctx: LagContext,
    states: States,
}

impl HwtForecaster {
    pub fn new(name: impl Into<String>, params: HwtParams, ctx: LagContext, series: &[f64]) -> Result<Self> {
        let states = filter(&params, &ctx, series)?;
        Ok(Self {
            name: name.into(),
            params,
            ctx,
            states,
        })
    }

    pub fn params(&self) -> &HwtParams {
        &self.params
    }

    /// One-step errors; zero over the initialization year.
    pub fn errors(&self) -> &[f64] {
        &self.states.error
    }

    fn index_at(series: &[f64], mut idx: usize, origin: usize, step: usize) -> f64 {
        while idx > origin {
            idx -= step;
        }
        series[idx]
    }
}

impl Forecaster for HwtForecaster {
    fn name(&self) -> &str {
        &self.name
    }

    /// Seasonal indices beyond the origin are taken from their last updated
    /// cycle; the error adjustment decays as `rho^k`.
    fn forecast(&self, origin: usize, horizon: usize, _density: Option<&DensitySpec>) -> Result<ForecastSet> {
        let m1 = self.params.periods_per_day();
        let m2 = m1 * DAYS_PER_WEEK;
        let n0 = WEEKS_PER_YEAR * m2;
        let n = self.states.level.len();
        if origin >= n || origin + 1 < n0 {
            return Err(Error::Horizon {
                origin,
                horizon,
                msg: format!("origin must lie within observed periods {}..{n}", n0 - 1),
            });
        }
        if origin + horizon >= self.ctx.n_periods() {
            return Err(Error::Horizon {
                origin,
                horizon,
                msg: "targets extend past the lag plan".into(),
            });
        }
        let s = &self.states;
        let l = s.level[origin];
        let e = s.error[origin];
        let mut rho_k = 1.0;
        let points = (1..=horizon)
            .map(|k| {
                let t = origin + k;
                rho_k *= self.params.rho;
                let d = Self::index_at(&s.intraday, t - m1, origin, m1);
                let w = Self::index_at(&s.intraweek, t - m2, origin, m2);
                let y = Self::index_at(&s.intrayear, t - annual_lag(&self.ctx, t, n0), origin, n0);
                l * d * w * y + rho_k * e
            })
            .collect();
        Ok(ForecastSet {
            origin,
            points,
            ensemble: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HwtFitOptions {
    /// Starting `[alpha, delta, omega, phi, rho]`.
    pub start: [f64; 5],
    pub nelder_mead: NelderMeadOptions,
    pub restarts: usize,
}

impl Default for HwtFitOptions {
    fn default() -> Self {
        Self {
            start: [0.05, 0.1, 0.1, 0.05, 0.8],
            nelder_mead: NelderMeadOptions {
                initial_step: 0.5,
                x_tol: 1e-5,
                f_tol: 1e-6,
                max_evals: 4000,
            },
            restarts: 2,
        }
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-9, 1.0 - 1e-9);
    (p / (1.0 - p)).ln()
}

fn to_smoothing(x: &[f64]) -> [f64; 5] {
    [logistic(x[0]), logistic(x[1]), logistic(x[2]), logistic(x[3]), x[4].tanh()]
}

/// Maximum-likelihood smoothing constants under the dual-variance Gaussian
/// likelihood of the one-step errors, excluding the first 365 days. The
/// rates are kept in `[0, 1]` and `rho` in `(-1, 1)`. Returns the fitted
/// parameters and the log-likelihood.
pub fn hwt_fit(series: &[f64], ctx: &LagContext, opts: &HwtFitOptions) -> Result<(HwtParams, f64)> {
    let m1 = ctx.periods_per_day();
    let burn_in = 365 * m1;
    if series.len() <= burn_in {
        return Err(Error::Data(format!(
            "series of {} periods does not exceed the burn-in of {burn_in}",
            series.len()
        )));
    }
    let init = HwtParams::initialize(series, m1)?;
    let regime = regimes(ctx, series.len());
    let objective = |x: &[f64]| -> f64 {
        let p = init.with_smoothing(to_smoothing(x));
        match filter(&p, ctx, series) {
            Ok(s) => {
                let ll = profile_log_likelihood(&s.error, &regime, burn_in).2;
                if ll.is_finite() {
                    -ll
                } else {
                    1e300
                }
            }
            Err(_) => 1e300,
        }
    };
    let mut f = objective;
    let mut x: Vec<f64> = opts.start[..4].iter().map(|&v| logit(v)).collect();
    x.push(opts.start[4].clamp(-0.999, 0.999).atanh());
    let steps = vec![opts.nelder_mead.initial_step; 5];
    let mut best = nelder_mead_with_steps(&mut f, &x, &steps, &opts.nelder_mead)?;
    for _ in 0..opts.restarts {
        let next = nelder_mead_with_steps(&mut f, &best.x, &steps, &opts.nelder_mead)?;
        let improved = best.value - next.value > opts.nelder_mead.f_tol;
        if next.value <= best.value {
            best = next;
        }
        if !improved {
            break;
        }
    }
    if best.value >= 1e300 {
        return Err(Error::Fit("no finite likelihood found for the smoothing model".into()));
    }
    let mut p = init.with_smoothing(to_smoothing(&best.x));
    let s = filter(&p, ctx, series)?;
    let (s2n, s2s, ll) = profile_log_likelihood(&s.error, &regime, burn_in);
    p.sigma2_normal = s2n;
    p.sigma2_special = s2s;
    Ok((p, ll))
}
