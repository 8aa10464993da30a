//! Wiring from a series and a calendar to fitted models and forecasters for
//! every model kind.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{Days, NaiveDate};

use crate::benchmarks::{hwt_fit, HwtFitOptions, HwtForecaster, HwtParams, SimpleBenchmark, SimpleKind};
use crate::calendar::{classify_days, ClassifiedSpan, HolidayCalendar};
use crate::data::LoadSeries;
use crate::error::{Error, Result};
use crate::forecast::Forecaster;
use crate::params_doc::{content_hash, ParamDocument};
use crate::rules::{build_lag_plan, AnnualLagPlan};
use crate::sarma::{self, fit, AnnualMode, FitOptions, LagContext, SarmaForecaster, SarmaOrders, SarmaParams};
use crate::sarmax::{
    compute_indicators, sarmax_fit, Coding, IndicatorOptions, IndicatorTable, SarmaxFitOptions, SarmaxForecaster,
    SarmaxParams,
};

/// Days classified past the end of the data so forecasts may run beyond it.
pub const LOOKAHEAD_DAYS: u64 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Sarma,
    RbSarma,
    SarmaxAbc,
    Hwt,
    RbHwt,
    Simple(SimpleKind),
}

impl ModelKind {
    pub const ALL: [ModelKind; 10] = [
        ModelKind::Sarma,
        ModelKind::RbSarma,
        ModelKind::SarmaxAbc,
        ModelKind::Hwt,
        ModelKind::RbHwt,
        ModelKind::Simple(SimpleKind::RecentSunday),
        ModelKind::Simple(SimpleKind::Srw),
        ModelKind::Simple(SimpleKind::SrwDay),
        ModelKind::Simple(SimpleKind::SrwWkDayWkEnd),
        ModelKind::Simple(SimpleKind::SrwIc),
    ];

    pub fn id(self) -> &'static str {
        match self {
            ModelKind::Sarma => "sarma",
            ModelKind::RbSarma => "rb-sarma",
            ModelKind::SarmaxAbc => "sarmax-abc",
            ModelKind::Hwt => "hwt",
            ModelKind::RbHwt => "rb-hwt",
            ModelKind::Simple(k) => k.id(),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL.into_iter().find(|k| k.id() == s).ok_or_else(|| {
            let known: Vec<&str> = ModelKind::ALL.iter().map(|k| k.id()).collect();
            Error::Config(format!("unknown model `{s}` (expected one of {})", known.join(", ")))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelSpec {
    pub orders: SarmaOrders,
    pub sarma: FitOptions,
    pub hwt: HwtFitOptions,
    pub indicators: IndicatorOptions,
    pub coding: Coding,
    /// Regression/ARMA alternations of the indicator model.
    pub alternations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
enum Params {
    Sarma(SarmaParams),
    Sarmax(SarmaxParams),
    Hwt(HwtParams),
    Simple,
}

/// Estimated model plus its parameter document.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub kind: ModelKind,
    pub document: ParamDocument,
    pub log_likelihood: Option<f64>,
    params: Params,
}

impl FittedModel {
    pub fn from_document(doc: &ParamDocument) -> Result<Self> {
        let kind: ModelKind = doc.model.parse()?;
        let params = match kind {
            ModelKind::Sarma | ModelKind::RbSarma => Params::Sarma(sarma::from_document(doc)?.2),
            ModelKind::SarmaxAbc => Params::Sarmax(SarmaxParams::from_document(doc)?.1),
            ModelKind::Hwt | ModelKind::RbHwt => Params::Hwt(HwtParams::from_document(doc)?),
            ModelKind::Simple(_) => Params::Simple,
        };
        Ok(Self {
            kind,
            document: doc.clone(),
            log_likelihood: doc.scalar("log_likelihood").ok(),
            params,
        })
    }
}

/// A series with its day classification and special-day lag plan.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub series: LoadSeries,
    pub span: ClassifiedSpan,
    pub plan: AnnualLagPlan,
}

impl Experiment {
    pub fn new(series: LoadSeries, calendar: &HolidayCalendar) -> Result<Self> {
        let span = classify_days(calendar, series.start(), series.end() + Days::new(LOOKAHEAD_DAYS))?;
        let plan = build_lag_plan(&span, series.start());
        Ok(Self { series, span, plan })
    }

    pub fn periods_per_day(&self) -> usize {
        self.series.periods_per_day()
    }

    /// Number of periods up to and including `date`.
    pub fn periods_through(&self, date: NaiveDate) -> Result<usize> {
        let n = (self.series.grid().day_of_date(date)? + 1) * self.periods_per_day();
        if n > self.series.len() {
            return Err(Error::DateOutOfRange(date));
        }
        Ok(n)
    }

    pub fn context(&self, kind: ModelKind) -> LagContext {
        let m1 = self.periods_per_day();
        match kind {
            ModelKind::RbSarma | ModelKind::RbHwt => LagContext::new(&self.plan, m1, AnnualMode::Switched),
            ModelKind::SarmaxAbc => LagContext::new(&self.plan, m1, AnnualMode::Shared),
            _ => LagContext::all_normal(&self.plan, m1),
        }
    }

    pub fn indicators(&self, opts: &IndicatorOptions) -> Result<IndicatorTable> {
        compute_indicators(&self.series, &self.span, &self.plan, opts)
    }

    /// Fits `kind` on the periods before `train_periods`.
    pub fn fit(&self, kind: ModelKind, spec: &ModelSpec, train_periods: usize) -> Result<FittedModel> {
        if train_periods > self.series.len() {
            return Err(Error::Parameter(format!(
                "training span of {train_periods} periods exceeds the {} observed",
                self.series.len()
            )));
        }
        let train = &self.series.values()[..train_periods];
        let grid = self.series.grid();
        let ctx = self.context(kind);
        let (params, document, ll) = match kind {
            ModelKind::Sarma | ModelKind::RbSarma => {
                let mut opts = spec.sarma.clone();
                if kind == ModelKind::RbSarma && opts.init.is_none() {
                    // estimate from the shared-variance optimum of the nested model
                    let shared = FitOptions {
                        standard_errors: false,
                        ..spec.sarma.clone()
                    };
                    let base = fit(train, &self.context(ModelKind::Sarma), &spec.orders, &shared)?;
                    let mut init = base.params;
                    init.theta = init.psi.clone();
                    init.kappa = init.lambda.clone();
                    opts.init = Some(init);
                }
                let f = fit(train, &ctx, &spec.orders, &opts)?;
                let doc = sarma::to_document(kind.id(), &f, grid, train);
                (Params::Sarma(f.params.clone()), doc, Some(f.log_likelihood))
            }
            ModelKind::SarmaxAbc => {
                let table = self.indicators(&spec.indicators)?;
                let opts = SarmaxFitOptions {
                    sarma: spec.sarma.clone(),
                    coding: spec.coding,
                    alternations: spec.alternations.unwrap_or(5),
                };
                let f = sarmax_fit(train, &table, &ctx, &spec.orders, &opts)?;
                let mut doc = f.params.to_document(&f.arma, grid, train);
                doc.model = kind.id().into();
                (Params::Sarmax(f.params.clone()), doc, Some(f.log_likelihood))
            }
            ModelKind::Hwt | ModelKind::RbHwt => {
                let (p, ll) = hwt_fit(train, &ctx, &spec.hwt)?;
                let doc = p.to_document(kind.id(), grid, train, ll);
                (Params::Hwt(p), doc, Some(ll))
            }
            ModelKind::Simple(_) => (
                Params::Simple,
                ParamDocument {
                    model: kind.id().into(),
                    periods_per_day: grid.periods_per_day,
                    series_start: grid.series_start,
                    training_hash: content_hash(train),
                    training_periods: train.len(),
                    settings: BTreeMap::new(),
                    values: BTreeMap::new(),
                },
                None,
            ),
        };
        Ok(FittedModel {
            kind,
            document,
            log_likelihood: ll,
            params,
        })
    }

    /// Forecaster attached to the full series; forecasts from any origin use
    /// only data up to that origin.
    pub fn forecaster(&self, model: &FittedModel, spec: &ModelSpec) -> Result<Box<dyn Forecaster>> {
        let doc = &model.document;
        let grid = self.series.grid();
        if doc.periods_per_day != grid.periods_per_day || doc.series_start != grid.series_start {
            return Err(Error::Config(format!(
                "parameters were fitted on a {}-period grid from {}, data use {} periods from {}",
                doc.periods_per_day, doc.series_start, grid.periods_per_day, grid.series_start
            )));
        }
        let y = self.series.values();
        let ctx = self.context(model.kind);
        let name = model.kind.id();
        Ok(match &model.params {
            Params::Sarma(p) => Box::new(SarmaForecaster::new(name, p.clone(), ctx, y)?),
            Params::Sarmax(p) => {
                let table = self.indicators(&spec.indicators)?;
                Box::new(SarmaxForecaster::new(name, p.clone(), table, ctx, y)?)
            }
            Params::Hwt(p) => Box::new(HwtForecaster::new(name, p.clone(), ctx, y)?),
            Params::Simple => {
                let ModelKind::Simple(k) = model.kind else { unreachable!() };
                Box::new(SimpleBenchmark::new(k, self.series.clone(), self.span.clone(), self.plan.clone()))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_round_trip() {
        for k in ModelKind::ALL {
            assert_eq!(k.id().parse::<ModelKind>().unwrap(), k);
        }
        assert!("arima".parse::<ModelKind>().is_err());
    }
}
