use super::likelihood::{profile_log_likelihood, LikelihoodContext};
use super::model::{LagContext, Recursion, Regime};
use super::{AnnualMode, SarmaOrders, SarmaParams};
use crate::error::{Error, Result};
use crate::optim::{nelder_mead_with_steps, numerical_hessian, standard_errors, NelderMeadOptions};

const PENALTY: f64 = 1e300;

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Starting coefficients; defaults to 0.05 everywhere and the sample mean.
    pub init: Option<SarmaParams>,
    pub nelder_mead: NelderMeadOptions,
    /// Fresh simplex restarts from the best point found.
    pub restarts: usize,
    pub standard_errors: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            init: None,
            nelder_mead: NelderMeadOptions {
                initial_step: 0.1,
                x_tol: 1e-6,
                f_tol: 1e-7,
                max_evals: 40_000,
            },
            restarts: 3,
            standard_errors: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedSarma {
    pub orders: SarmaOrders,
    pub mode: AnnualMode,
    pub params: SarmaParams,
    /// Standard errors in the shape of the parameters; variances and
    /// frozen coefficients carry 0.
    pub std_errors: Option<SarmaParams>,
    pub log_likelihood: f64,
    pub likelihood: LikelihoodContext,
    pub evals: usize,
    pub converged: bool,
}

/// Which coefficients are estimated, and how to map the search vector.
struct Layout {
    template: SarmaParams,
    /// `(group, index)` of each free coefficient.
    free: Vec<(usize, usize)>,
    mean: f64,
    scale: f64,
}

impl Layout {
    fn params(&self, x: &[f64]) -> SarmaParams {
        let mut p = self.template.clone();
        p.c = self.mean + x[0] * self.scale;
        let groups = p.groups_mut();
        for (&(g, i), v) in self.free.iter().zip(&x[1..]) {
            groups[g][i] = *v;
        }
        p
    }

    fn vector(&self, p: &SarmaParams) -> Vec<f64> {
        let groups = p.groups();
        std::iter::once((p.c - self.mean) / self.scale)
            .chain(self.free.iter().map(|&(g, i)| groups[g].1[i]))
            .collect()
    }
}

/// Maximum-likelihood fit by simplex search over the coefficients, with
/// both variances profiled out.
pub fn fit(series: &[f64], ctx: &LagContext, orders: &SarmaOrders, opts: &FitOptions) -> Result<FittedSarma> {
    orders.validate()?;
    if let Some(i) = series.iter().position(|v| !v.is_finite()) {
        return Err(Error::Data(format!("missing or non-finite value at period {i}")));
    }
    if series.len() > ctx.n_periods() {
        return Err(Error::Parameter("lag plan does not cover the series".into()));
    }
    let m1 = ctx.periods_per_day();
    let regime: Vec<Regime> = (0..series.len()).map(|t| ctx.regime(t)).collect();
    let lik = LikelihoodContext::new(&regime, m1)?;
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let sd = (series.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n).sqrt();
    let scale = if sd > 0.0 { sd } else { 1.0 };

    let special_factor = ctx.mode() == AnnualMode::Switched && ctx.any_special_factor(lik.burn_in, series.len());
    let depth = ctx.max_chain_depth(lik.burn_in);
    if depth < orders.annual_depth {
        log::warn!(
            "annual depth {} exceeds the {} chained annual lags available after the burn-in; deeper terms are fixed at 0",
            orders.annual_depth,
            depth
        );
    }
    let mut template = opts.init.clone().unwrap_or_else(|| {
        let mut p = SarmaParams::zeros(orders);
        for g in p.groups_mut() {
            g.iter_mut().for_each(|x| *x = 0.05);
        }
        p.c = mean;
        p
    });
    template.validate(orders)?;
    let mut free = Vec::new();
    for (g, coefs) in template.groups_mut().into_iter().enumerate() {
        let annual = g >= 6;
        let special_group = g == 7 || g == 9;
        for (i, x) in coefs.iter_mut().enumerate() {
            let frozen = (annual && i >= depth) || (special_group && !special_factor);
            if frozen {
                *x = 0.0;
            } else {
                free.push((g, i));
            }
        }
    }
    let layout = Layout {
        template,
        free,
        mean,
        scale,
    };

    let objective = |x: &[f64]| -> f64 {
        let p = layout.params(x);
        if !p.is_admissible(m1) {
            return PENALTY;
        }
        let rec = Recursion::new(&p, ctx);
        let z: Vec<f64> = series.iter().map(|y| y - p.c).collect();
        let e = rec.residuals_of_deviations(&z);
        let (_, _, ll) = profile_log_likelihood(&e, &regime, lik.burn_in);
        if ll.is_finite() {
            -ll
        } else {
            PENALTY
        }
    };

    let start = layout.vector(&layout.template);
    if objective(&start) >= PENALTY {
        return Err(Error::Fit("starting parameters are not stationary/invertible".into()));
    }
    let steps = vec![opts.nelder_mead.initial_step; start.len()];
    let mut obj = objective;
    let mut best = nelder_mead_with_steps(&mut obj, &start, &steps, &opts.nelder_mead)?;
    let mut evals = best.evals;
    for _ in 0..opts.restarts {
        let again = nelder_mead_with_steps(&mut obj, &best.x, &steps, &opts.nelder_mead)?;
        evals += again.evals;
        let improved = best.value - again.value > 1e-9 * best.value.abs().max(1.0);
        if again.value < best.value {
            best = again;
        }
        if !improved {
            break;
        }
    }
    if best.value >= PENALTY {
        return Err(Error::Fit(format!("simplex search stayed in the penalty region after {evals} evaluations")));
    }

    let mut params = layout.params(&best.x);
    let rec = Recursion::new(&params, ctx);
    let z: Vec<f64> = series.iter().map(|y| y - params.c).collect();
    let e = rec.residuals_of_deviations(&z);
    let (s2n, s2s, ll) = profile_log_likelihood(&e, &regime, lik.burn_in);
    params.sigma2_normal = s2n;
    params.sigma2_special = s2s;

    let std_errors = if opts.standard_errors {
        let h_steps: Vec<f64> = best.x.iter().map(|x| 1e-3 * x.abs().max(0.1)).collect();
        let hess = numerical_hessian(&mut obj, &best.x, &h_steps);
        standard_errors(&hess).map(|se| {
            let mut out = SarmaParams::zeros(orders);
            out.c = se[0] * scale;
            out.sigma2_normal = 0.0;
            out.sigma2_special = 0.0;
            let groups = out.groups_mut();
            for (&(g, i), s) in layout.free.iter().zip(&se[1..]) {
                groups[g][i] = *s;
            }
            out
        })
    } else {
        None
    };
    if opts.standard_errors && std_errors.is_none() {
        log::warn!("Hessian at the optimum is not positive definite; standard errors unavailable");
    }

    Ok(FittedSarma {
        orders: *orders,
        mode: ctx.mode(),
        params,
        std_errors,
        log_likelihood: ll,
        likelihood: lik,
        evals,
        converged: best.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::{classify_days, HolidayCalendar};
    use crate::rules::build_lag_plan;
    use crate::sarma::simulate;
    use chrono::NaiveDate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx(years: i32, m1: usize, mode: AnnualMode) -> LagContext {
        let start = NaiveDate::from_ymd_opt(2001, 1, 1).unwrap();
        let end = NaiveDate::from_ymd_opt(2000 + years, 12, 31).unwrap();
        let cal = HolidayCalendar::french(2001, 2001 + years).unwrap();
        let span = classify_days(&cal, start, end).unwrap();
        LagContext::new(&build_lag_plan(&span, start), m1, mode)
    }

    #[test]
    fn recovers_an_ar1_with_intraday_term() {
        let o = SarmaOrders::new(1, 0, 1, 0, 0, 0, 0).unwrap();
        let mut truth = SarmaParams::zeros(&o);
        truth.c = 100.0;
        truth.ar[0] = 0.6;
        truth.ar_daily[0] = 0.3;
        let c = ctx(2, 8, AnnualMode::Switched);
        let (y, _) = simulate(&truth, &o, &c, 2 * 365 * 8, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let f = fit(&y, &c, &o, &FitOptions::default()).unwrap();
        let se = f.std_errors.as_ref().unwrap();
        assert!((f.params.ar[0] - 0.6).abs() < 4.0 * se.ar[0].max(0.01), "{:?}", f.params);
        assert!((f.params.ar_daily[0] - 0.3).abs() < 4.0 * se.ar_daily[0].max(0.01));
        assert!((f.params.sigma2_normal - 1.0).abs() < 0.1);
        assert_eq!(f.likelihood.n_normal + f.likelihood.n_special, y.len() - f.likelihood.burn_in);
        // determinism
        let again = fit(&y, &c, &o, &FitOptions::default()).unwrap();
        assert_eq!(f, again);
    }

    #[test]
    fn special_coefficients_frozen_without_special_days() {
        let o = SarmaOrders::new(0, 0, 0, 0, 0, 0, 1).unwrap();
        let c = ctx(2, 4, AnnualMode::Shared);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (y, _) = simulate(&SarmaParams::zeros(&o), &o, &c, 2 * 365 * 4, &mut rng).unwrap();
        let f = fit(&y, &c, &o, &FitOptions::default()).unwrap();
        assert_eq!(f.params.theta, vec![0.0]);
        assert_eq!(f.params.kappa, vec![0.0]);
        // annual AR and MA terms cancel on white noise, only their difference is identified
        assert!((f.params.psi[0] - f.params.lambda[0]).abs() < 0.2);
    }

    #[test]
    fn too_short_series_is_an_error() {
        let o = SarmaOrders::new(1, 0, 0, 0, 0, 0, 0).unwrap();
        let c = ctx(1, 4, AnnualMode::Switched);
        assert!(fit(&vec![1.0; 300 * 4], &c, &o, &FitOptions::default()).is_err());
    }
}
