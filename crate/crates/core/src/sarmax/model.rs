use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::indicators::{Code, IndicatorTable};
use crate::calendar::SeasonalGrid;
use crate::error::{Error, Result};
use crate::forecast::{DensitySpec, ForecastSet, Forecaster};
use crate::params_doc::ParamDocument;
use crate::sarma::{
    self, fit, log_likelihood, FitOptions, FittedSarma, LagContext, LikelihoodContext, Recursion, Regime,
    SarmaForecaster, SarmaOrders, SarmaParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coding {
    /// Three binary indicators A, B, C. Since `A = B + C`, the A
    /// coefficients are fixed at zero and B, C carry the full effect.
    #[default]
    Abc,
    /// A binary A and a two-valued B (1 moderate, 2 large); no C.
    Kim,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SarmaxParams {
    pub coding: Coding,
    /// ARMA error model; `c` is the intercept of the regression.
    pub arma: SarmaParams,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl SarmaxParams {
    pub fn new(coding: Coding, arma: SarmaParams, periods_per_day: usize) -> Self {
        Self {
            coding,
            arma,
            alpha: vec![0.0; periods_per_day],
            beta: vec![0.0; periods_per_day],
            gamma: vec![0.0; periods_per_day],
        }
    }

    pub fn periods_per_day(&self) -> usize {
        self.alpha.len()
    }

    /// Deterministic indicator term at a period with indicator `code`.
    pub fn regression(&self, code: Code, slot: usize) -> f64 {
        let a = f64::from(u8::from(code.a));
        match self.coding {
            Coding::Abc => {
                a * self.alpha[slot] + f64::from(u8::from(code.b)) * self.beta[slot] + f64::from(u8::from(code.c)) * self.gamma[slot]
            }
            Coding::Kim => a * self.alpha[slot] + f64::from(code.kim_b()) * self.beta[slot],
        }
    }

    fn validate(&self) -> Result<()> {
        let m1 = self.periods_per_day();
        if m1 == 0 || self.beta.len() != m1 || self.gamma.len() != m1 {
            return Err(Error::Parameter("indicator coefficients need one value per slot".into()));
        }
        Ok(())
    }

    /// `y` minus the indicator term.
    fn adjusted(&self, series: &[f64], table: &IndicatorTable) -> Result<Vec<f64>> {
        self.validate()?;
        let m1 = self.periods_per_day();
        if table.grid().periods_per_day != m1 {
            return Err(Error::Parameter("indicator table grid does not match the parameters".into()));
        }
        if table.n_periods() < series.len() {
            return Err(Error::Parameter(format!(
                "indicator table covers {} periods, series has {}",
                table.n_periods(),
                series.len()
            )));
        }
        Ok(series
            .iter()
            .enumerate()
            .map(|(t, y)| y - self.regression(table.code(t), t % m1))
            .collect())
    }

    pub fn to_document(&self, fitted: &FittedSarma, grid: &SeasonalGrid, training: &[f64]) -> ParamDocument {
        let mut f = fitted.clone();
        f.params = self.arma.clone();
        let mut doc = sarma::to_document("sarmax-abc", &f, grid, training);
        doc.values.insert("alpha".into(), self.alpha.clone());
        doc.values.insert("beta".into(), self.beta.clone());
        doc.values.insert("gamma".into(), self.gamma.clone());
        let coding = match self.coding {
            Coding::Abc => "abc",
            Coding::Kim => "kim",
        };
        doc.settings.insert("coding".into(), coding.into());
        doc
    }

    pub fn from_document(doc: &ParamDocument) -> Result<(SarmaOrders, Self)> {
        let (orders, _, arma) = sarma::from_document(doc)?;
        let coding = match doc.settings.get("coding").map(String::as_str) {
            None | Some("abc") => Coding::Abc,
            Some("kim") => Coding::Kim,
            Some(other) => return Err(Error::Config(format!("unknown coding `{other}`"))),
        };
        let p = Self {
            coding,
            arma,
            alpha: doc.list("alpha")?.to_vec(),
            beta: doc.list("beta")?.to_vec(),
            gamma: doc.list("gamma")?.to_vec(),
        };
        p.validate().map_err(|e| Error::Config(e.to_string()))?;
        if p.periods_per_day() != doc.periods_per_day {
            return Err(Error::Config("indicator coefficients do not match periods_per_day".into()));
        }
        Ok((orders, p))
    }
}

/// Log-likelihood of the indicator-adjusted series under the ARMA error
/// model.
pub fn sarmax_log_likelihood(
    params: &SarmaxParams,
    orders: &SarmaOrders,
    series: &[f64],
    table: &IndicatorTable,
    ctx: &LagContext,
) -> Result<f64> {
    log_likelihood(&params.arma, orders, &params.adjusted(series, table)?, ctx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SarmaxFitOptions {
    pub sarma: FitOptions,
    pub coding: Coding,
    /// Regression/ARMA alternations.
    pub alternations: usize,
}

impl Default for SarmaxFitOptions {
    fn default() -> Self {
        Self {
            sarma: FitOptions::default(),
            coding: Coding::Abc,
            alternations: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SarmaxFit {
    pub orders: SarmaOrders,
    pub params: SarmaxParams,
    /// Final ARMA fit to the adjusted series.
    pub arma: FittedSarma,
    /// Standard errors of the indicator coefficients; 0 where a coefficient
    /// is not estimated.
    pub std_errors: Option<(Vec<f64>, Vec<f64>, Vec<f64>)>,
    pub log_likelihood: f64,
    pub alternations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Column {
    Alpha(usize),
    Beta(usize),
    Gamma(usize),
}

fn design(table: &IndicatorTable, coding: Coding, n: usize) -> (Vec<Column>, Vec<Vec<f64>>) {
    let m1 = table.grid().periods_per_day;
    let value = |col: Column, code: Code| -> f64 {
        match (coding, col) {
            (Coding::Abc, Column::Beta(_)) => f64::from(u8::from(code.b)),
            (Coding::Abc, Column::Gamma(_)) => f64::from(u8::from(code.c)),
            (Coding::Kim, Column::Alpha(_)) => f64::from(u8::from(code.a)),
            (Coding::Kim, Column::Beta(_)) => f64::from(code.kim_b()),
            _ => 0.0,
        }
    };
    let candidates: Vec<Column> = match coding {
        Coding::Abc => (0..m1).map(Column::Beta).chain((0..m1).map(Column::Gamma)).collect(),
        Coding::Kim => (0..m1).map(Column::Alpha).chain((0..m1).map(Column::Beta)).collect(),
    };
    let mut cols = Vec::new();
    let mut data = Vec::new();
    for col in candidates {
        let slot = match col {
            Column::Alpha(h) | Column::Beta(h) | Column::Gamma(h) => h,
        };
        let x: Vec<f64> = (0..n)
            .map(|t| if t % m1 == slot { value(col, table.code(t)) } else { 0.0 })
            .collect();
        if x.iter().any(|v| *v != 0.0) {
            cols.push(col);
            data.push(x);
        }
    }
    (cols, data)
}

/// Weighted least squares of `y` on an intercept and `xs`, after passing
/// everything through the ARMA residual filter (identity when `arma` is
/// `None`). Returns the coefficients without the intercept and their
/// covariance.
fn regression(
    y: &[f64],
    xs: &[Vec<f64>],
    arma: Option<(&SarmaParams, &LagContext)>,
    burn_in: usize,
) -> (Vec<f64>, DMatrix<f64>) {
    let n = y.len();
    let ones = vec![1.0; n];
    let columns: Vec<&[f64]> = std::iter::once(ones.as_slice()).chain(xs.iter().map(Vec::as_slice)).collect();
    let (filtered_y, filtered, weights): (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) = match arma {
        None => (y.to_vec(), columns.iter().map(|c| c.to_vec()).collect(), vec![1.0; n]),
        Some((p, ctx)) => {
            let rec = Recursion::new(p, ctx);
            let w = (0..n)
                .map(|t| match ctx.regime(t) {
                    Regime::Normal => 1.0 / p.sigma2_normal,
                    Regime::Special => 1.0 / p.sigma2_special,
                })
                .collect();
            (
                rec.residuals_of_deviations(y),
                columns.iter().map(|c| rec.residuals_of_deviations(c)).collect(),
                w,
            )
        }
    };
    let k = filtered.len();
    let mut m = DMatrix::<f64>::zeros(k, k);
    let mut r = DVector::<f64>::zeros(k);
    for t in burn_in.min(n)..n {
        let w = weights[t];
        for i in 0..k {
            let wi = w * filtered[i][t];
            if wi == 0.0 {
                continue;
            }
            r[i] += wi * filtered_y[t];
            for j in i..k {
                m[(i, j)] += wi * filtered[j][t];
            }
        }
    }
    for i in 0..k {
        for j in 0..i {
            m[(i, j)] = m[(j, i)];
        }
    }
    let max = m.diagonal().max().max(f64::MIN_POSITIVE);
    let inv = m.pseudo_inverse(1e-12 * max).unwrap_or_else(|_| DMatrix::zeros(k, k));
    let beta = &inv * r;
    (beta.iter().skip(1).copied().collect(), inv.view((1, 1), (k - 1, k - 1)).into_owned())
}

fn assemble(template: &SarmaxParams, cols: &[Column], theta: &[f64]) -> SarmaxParams {
    let mut p = template.clone();
    for v in [&mut p.alpha, &mut p.beta, &mut p.gamma] {
        v.iter_mut().for_each(|x| *x = 0.0);
    }
    for (col, v) in cols.iter().zip(theta) {
        match *col {
            Column::Alpha(h) => p.alpha[h] = *v,
            Column::Beta(h) => p.beta[h] = *v,
            Column::Gamma(h) => p.gamma[h] = *v,
        }
    }
    p
}

/// Alternates an exact weighted regression for the indicator coefficients
/// (given the ARMA filter) with a simplex fit of the ARMA error model (given
/// the regression), stopping when the likelihood no longer improves.
pub fn sarmax_fit(
    series: &[f64],
    table: &IndicatorTable,
    ctx: &LagContext,
    orders: &SarmaOrders,
    opts: &SarmaxFitOptions,
) -> Result<SarmaxFit> {
    if ctx.any_special_factor(0, series.len()) {
        return Err(Error::Parameter(
            "indicator model uses the normal annual lag everywhere; build the context in shared annual mode".into(),
        ));
    }
    let m1 = ctx.periods_per_day();
    if table.grid().periods_per_day != m1 || table.n_periods() < series.len() {
        return Err(Error::Parameter("indicator table does not cover the series".into()));
    }
    let n = series.len();
    let regime: Vec<Regime> = (0..n).map(|t| ctx.regime(t)).collect();
    let burn_in = LikelihoodContext::new(&regime, m1)?.burn_in;
    let (cols, xs) = design(table, opts.coding, n);
    let template = SarmaxParams::new(opts.coding, SarmaParams::zeros(orders), m1);

    let (theta, _) = regression(series, &xs, None, 0);
    let mut params = assemble(&template, &cols, &theta);
    let mut arma = fit(&params.adjusted(series, table)?, ctx, orders, &opts.sarma)?;
    params.arma = arma.params.clone();
    let mut rounds = 1;
    while rounds < opts.alternations.max(1) && !cols.is_empty() {
        let (theta, _) = regression(series, &xs, Some((&arma.params, ctx)), burn_in);
        let mut next = assemble(&params, &cols, &theta);
        let sarma_opts = FitOptions {
            init: Some(arma.params.clone()),
            ..opts.sarma.clone()
        };
        let next_fit = fit(&next.adjusted(series, table)?, ctx, orders, &sarma_opts)?;
        rounds += 1;
        let gain = next_fit.log_likelihood - arma.log_likelihood;
        if gain <= 0.0 {
            break;
        }
        next.arma = next_fit.params.clone();
        params = next;
        arma = next_fit;
        if gain < 1e-8 * arma.log_likelihood.abs().max(1.0) {
            break;
        }
    }

    let std_errors = (!cols.is_empty()).then(|| {
        let (_, cov) = regression(series, &xs, Some((&arma.params, ctx)), burn_in);
        let mut se = (vec![0.0; m1], vec![0.0; m1], vec![0.0; m1]);
        for (i, col) in cols.iter().enumerate() {
            let s = cov[(i, i)].max(0.0).sqrt();
            match *col {
                Column::Alpha(h) => se.0[h] = s,
                Column::Beta(h) => se.1[h] = s,
                Column::Gamma(h) => se.2[h] = s,
            }
        }
        se
    });
    Ok(SarmaxFit {
        orders: *orders,
        log_likelihood: arma.log_likelihood,
        params,
        arma,
        std_errors,
        alternations: rounds,
    })
}

/// ARMA error forecasts of the adjusted series plus the indicator term at
/// each target.
#[derive(Debug, Clone)]
pub struct SarmaxForecaster {
    params: SarmaxParams,
    table: IndicatorTable,
    inner: SarmaForecaster,
}

impl SarmaxForecaster {
    pub fn new(name: impl Into<String>, params: SarmaxParams, table: IndicatorTable, ctx: LagContext, series: &[f64]) -> Result<Self> {
        let adjusted = params.adjusted(series, &table)?;
        let inner = SarmaForecaster::new(name, params.arma.clone(), ctx, &adjusted)?;
        Ok(Self { params, table, inner })
    }

    pub fn params(&self) -> &SarmaxParams {
        &self.params
    }
}

impl Forecaster for SarmaxForecaster {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn forecast(&self, origin: usize, horizon: usize, density: Option<&DensitySpec>) -> Result<ForecastSet> {
        if origin + horizon >= self.table.n_periods() {
            return Err(Error::Horizon {
                origin,
                horizon,
                msg: format!("indicator table covers only {} periods", self.table.n_periods()),
            });
        }
        let mut f = self.inner.forecast(origin, horizon, density)?;
        let m1 = self.params.periods_per_day();
        for h in 1..=horizon {
            let t = origin + h;
            let shift = self.params.regression(self.table.code(t), t % m1);
            f.points[h - 1] += shift;
            if let Some(ens) = f.ensemble.as_mut() {
                ens[h - 1].iter_mut().for_each(|v| *v += shift);
            }
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::{classify_days, HolidayCalendar};
    use crate::rules::build_lag_plan;
    use crate::sarma::{simulate, AnnualMode};
    use chrono::NaiveDate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const M1: usize = 8;

    fn start() -> NaiveDate {
        NaiveDate::from_ymd_opt(2001, 1, 1).unwrap()
    }

    fn shared_ctx(years: i32) -> LagContext {
        let cal = HolidayCalendar::french(2001, 2001 + years).unwrap();
        let span = classify_days(&cal, start(), NaiveDate::from_ymd_opt(2000 + years, 12, 31).unwrap()).unwrap();
        LagContext::new(&build_lag_plan(&span, start()), M1, AnnualMode::Shared)
    }

    fn orders() -> SarmaOrders {
        SarmaOrders::new(1, 0, 1, 0, 0, 0, 1).unwrap()
    }

    fn arma() -> SarmaParams {
        let mut p = SarmaParams::zeros(&orders());
        p.c = 1000.0;
        p.ar[0] = 0.6;
        p.ar_daily[0] = 0.3;
        p.psi[0] = 0.2;
        p.sigma2_normal = 100.0;
        p.sigma2_special = 400.0;
        p
    }

    fn grid() -> SeasonalGrid {
        SeasonalGrid::new(M1, start()).unwrap()
    }

    #[test]
    fn zero_table_collapses_to_plain_model() {
        let ctx = shared_ctx(2);
        let n = ctx.n_periods();
        let (y, _) = simulate(&arma(), &orders(), &ctx, n, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let table = IndicatorTable::zeros(grid(), n);
        let p = SarmaxParams::new(Coding::Abc, arma(), M1);
        let a = sarmax_log_likelihood(&p, &orders(), &y, &table, &ctx).unwrap();
        let b = log_likelihood(&arma(), &orders(), &y, &ctx).unwrap();
        assert_eq!(a, b);
        let f = sarmax_fit(&y, &table, &ctx, &orders(), &SarmaxFitOptions::default()).unwrap();
        let g = fit(&y, &ctx, &orders(), &FitOptions::default()).unwrap();
        assert_eq!(f.params.arma, g.params);
        assert!(f.std_errors.is_none());
    }

    #[test]
    fn recovers_an_injected_dip() {
        let ctx = shared_ctx(3);
        let n = ctx.n_periods();
        let (mut y, _) = simulate(&arma(), &orders(), &ctx, n, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        // C on slots 2..6 of every 10th day, B on slots 0..2 of every 15th
        let table = IndicatorTable::from_codes(grid(), n, |t| {
            let (d, s) = (t / M1, t % M1);
            let c = d % 10 == 3 && (2..6).contains(&s);
            let b = d % 15 == 4 && s < 2;
            Code { a: b || c, b, c }
        });
        for (t, v) in y.iter_mut().enumerate() {
            if table.code(t).c {
                *v -= 500.0;
            }
        }
        let opts = SarmaxFitOptions {
            sarma: FitOptions {
                standard_errors: false,
                ..FitOptions::default()
            },
            ..SarmaxFitOptions::default()
        };
        let f = sarmax_fit(&y, &table, &ctx, &orders(), &opts).unwrap();
        let (_, se_b, se_c) = f.std_errors.clone().unwrap();
        for h in 2..6 {
            let g = f.params.gamma[h];
            assert!((g + 500.0).abs() < 3.0 * se_c[h], "gamma[{h}] = {g} +- {}", se_c[h]);
        }
        for h in 0..2 {
            assert!(f.params.beta[h].abs() < 3.0 * se_b[h], "beta[{h}] = {}", f.params.beta[h]);
        }
        assert!(f.params.alpha.iter().all(|a| *a == 0.0));
        assert_eq!(f.params.gamma[7], 0.0);
        let again = sarmax_fit(&y, &table, &ctx, &orders(), &opts).unwrap();
        assert_eq!(again.params, f.params);

        let grid = grid();
        let doc = f.params.to_document(&f.arma, &grid, &y);
        let (o, back) = SarmaxParams::from_document(&ParamDocument::from_text(&doc.to_text().unwrap()).unwrap()).unwrap();
        assert_eq!(o, orders());
        assert_eq!(back, f.params);
    }

    #[test]
    fn forecast_shifts_linearly_with_alpha() {
        let ctx = shared_ctx(2);
        let n = ctx.n_periods();
        let (y, _) = simulate(&arma(), &orders(), &ctx, n, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let origin = n - 3 * M1;
        let table = IndicatorTable::from_codes(grid(), n, |t| {
            let s = t % M1;
            let on = t > origin && (3..5).contains(&s);
            Code { a: on, b: on, c: false }
        });
        let base = SarmaxParams::new(Coding::Abc, arma(), M1);
        let mut shifted = base.clone();
        shifted.alpha[3] += 25.0;
        let fa = SarmaxForecaster::new("x", base, table.clone(), ctx.clone(), &y[..=origin]).unwrap();
        let fb = SarmaxForecaster::new("x", shifted, table.clone(), ctx, &y[..=origin]).unwrap();
        let a = fa.forecast(origin, 2 * M1, None).unwrap();
        let b = fb.forecast(origin, 2 * M1, None).unwrap();
        for h in 1..=2 * M1 {
            let t = origin + h;
            let expect = if table.code(t).a && t % M1 == 3 { 25.0 } else { 0.0 };
            assert!((b.points[h - 1] - a.points[h - 1] - expect).abs() < 1e-9, "h={h}");
        }
    }

    #[test]
    fn kim_coding_uses_two_valued_b() {
        let mut p = SarmaxParams::new(Coding::Kim, arma(), M1);
        p.alpha[1] = -10.0;
        p.beta[1] = -100.0;
        let strong = Code {
            a: true,
            b: false,
            c: true,
        };
        assert_eq!(p.regression(strong, 1), -210.0);
        let ctx = LagContext::new(
            &build_lag_plan(&classify_days(&HolidayCalendar::french(2001, 2002).unwrap(), start(), NaiveDate::from_ymd_opt(2001, 12, 31).unwrap()).unwrap(), start()),
            M1,
            AnnualMode::Switched,
        );
        let y = vec![1.0; ctx.n_periods()];
        let table = IndicatorTable::zeros(grid(), y.len());
        assert!(sarmax_fit(&y, &table, &ctx, &orders(), &SarmaxFitOptions::default()).is_err());
    }
}
