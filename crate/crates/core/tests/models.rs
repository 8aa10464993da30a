use chrono::{Datelike, NaiveDate};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use loadrule::benchmarks::SimpleKind;
use loadrule::calendar::{classify_days, HolidayCalendar};
use loadrule::data::{generate_synthetic, SynthConfig};
use loadrule::eval::{crps_ensemble, mape, rolling_backtest, EvalWindow};
use loadrule::pipeline::{Experiment, ModelKind, ModelSpec};
use loadrule::rules::build_lag_plan;
use loadrule::sarma::{fit, residuals, simulate, AnnualMode, FitOptions, LagContext, SarmaOrders, SarmaParams};

fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

fn experiment(start: NaiveDate, years: u32, m1: usize) -> Experiment {
    let cfg = SynthConfig {
        start,
        years,
        periods_per_day: m1,
        ..SynthConfig::default()
    };
    let cal = HolidayCalendar::french(start.year(), start.year() + years as i32).unwrap();
    Experiment::new(generate_synthetic(&cfg, &cal).unwrap(), &cal).unwrap()
}

#[test]
fn srw_for_bastille_day_replays_the_previous_year() {
    let exp = experiment(ymd(2003, 1, 1), 7, 48);
    let spec = ModelSpec::default();
    let srw = exp.fit(ModelKind::Simple(SimpleKind::Srw), &spec, exp.series.len()).unwrap();
    let fc = exp.forecaster(&srw, &spec).unwrap();
    let origin = exp.series.period_of(ymd(2009, 7, 14)).unwrap() - 1;
    let set = fc.forecast(origin, 48, None).unwrap();
    assert_eq!(set.points, exp.series.day_of(ymd(2008, 7, 14)).unwrap());

    let wk = exp.fit(ModelKind::Simple(SimpleKind::SrwWkDayWkEnd), &spec, exp.series.len()).unwrap();
    let fc = exp.forecaster(&wk, &spec).unwrap();
    let origin = exp.series.period_of(ymd(2009, 12, 26)).unwrap() - 1;
    assert_eq!(fc.forecast(origin, 48, None).unwrap().points, exp.series.day_of(ymd(2004, 12, 26)).unwrap());
}

#[test]
fn simple_benchmarks_only_copy_history() {
    let exp = experiment(ymd(2001, 1, 1), 3, 8);
    let spec = ModelSpec::default();
    let values = exp.series.values();
    let first = exp.periods_through(ymd(2002, 12, 31)).unwrap();
    let window = EvalWindow::new(first, first + 8 * 40).unwrap();
    for kind in ModelKind::ALL.into_iter().filter(|k| matches!(k, ModelKind::Simple(_))) {
        let f = exp.fit(kind, &spec, first).unwrap();
        let fc = exp.forecaster(&f, &spec).unwrap();
        let run = rolling_backtest(fc.as_ref(), values, window, 8, None).unwrap();
        // 2003-01-01 is a Wednesday and no earlier New Year's Day in the sample is
        let expected = if kind == ModelKind::Simple(SimpleKind::SrwDay) { 8 * 8 } else { 0 };
        assert_eq!(run.failed, expected, "{kind}");
        for r in &run.records {
            let copied = values[..=r.origin].iter().rev().any(|v| v.to_bits() == r.forecast.to_bits());
            assert!(copied, "{kind} at target {}", r.target);
        }
    }
}

#[test]
fn fitting_is_deterministic_and_partitions_the_sample() {
    let exp = experiment(ymd(2001, 1, 1), 2, 8);
    let orders = SarmaOrders::new(1, 0, 1, 0, 1, 0, 1).unwrap();
    let ctx = exp.context(ModelKind::RbSarma);
    let y = exp.series.values();
    let opts = FitOptions {
        standard_errors: false,
        ..FitOptions::default()
    };
    let a = fit(y, &ctx, &orders, &opts).unwrap();
    let b = fit(y, &ctx, &orders, &opts).unwrap();
    assert_eq!(a.params, b.params);
    assert_eq!(a.likelihood.n_normal + a.likelihood.n_special, y.len() - 365 * 8);
    assert!(a.likelihood.n_special > 0);
}

#[test]
fn zero_truth_is_recovered_near_zero() {
    let cal = HolidayCalendar::french(2001, 2004).unwrap();
    let span = classify_days(&cal, ymd(2001, 1, 1), ymd(2003, 12, 31)).unwrap();
    let ctx = LagContext::all_normal(&build_lag_plan(&span, ymd(2001, 1, 1)), 8);
    let orders = SarmaOrders::new(1, 0, 1, 0, 1, 0, 0).unwrap();
    let mut truth = SarmaParams::zeros(&orders);
    truth.c = 50.0;
    let (y, _) = simulate(&truth, &orders, &ctx, ctx.n_periods(), &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
    let f = fit(&y, &ctx, &orders, &FitOptions::default()).unwrap();
    for (name, v) in f.params.groups() {
        assert!(v.iter().all(|x| x.abs() < 0.05), "{name}: {v:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn simulation_round_trip(seed in 0u64..10_000, a in -0.8f64..0.8, d in -0.8f64..0.8, w in -0.8f64..0.8, eta in -0.9f64..0.9) {
        let cal = HolidayCalendar::french(2001, 2004).unwrap();
        let span = classify_days(&cal, ymd(2001, 1, 1), ymd(2003, 12, 31)).unwrap();
        let ctx = LagContext::new(&build_lag_plan(&span, ymd(2001, 1, 1)), 8, AnnualMode::Switched);
        let orders = SarmaOrders::new(1, 1, 1, 1, 1, 0, 1).unwrap();
        let mut p = SarmaParams::zeros(&orders);
        p.c = 10.0;
        p.ar = vec![a];
        p.ma = vec![-a / 2.0];
        p.ar_daily = vec![d];
        p.ma_daily = vec![d / 3.0];
        p.ar_weekly = vec![w];
        p.psi = vec![eta];
        p.theta = vec![-eta];
        p.lambda = vec![eta / 2.0];
        p.kappa = vec![0.3];
        p.sigma2_special = 3.0;
        let (y, e) = simulate(&p, &orders, &ctx, ctx.n_periods(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let r = residuals(&p, &orders, &y, &ctx).unwrap();
        let worst = (365 * 8..y.len()).map(|t| (r.eps[t] - e[t]).abs()).fold(0.0, f64::max);
        prop_assert!(worst < 1e-10, "{}", worst);
    }

    #[test]
    fn crps_is_nonnegative_and_vanishes_on_exact_ensembles(xs in prop::collection::vec(-50.0f64..50.0, 1..30), y in -50.0f64..50.0) {
        let c = crps_ensemble(&xs, y);
        prop_assert!(c >= 0.0);
        prop_assert!(crps_ensemble(&vec![y; xs.len()], y) < 1e-12);
        if xs.iter().any(|x| *x != y) {
            prop_assert!(c > 0.0);
        }
        prop_assert!((crps_ensemble(&xs[..1], y) - (xs[0] - y).abs()).abs() < 1e-12);
    }

    #[test]
    fn mape_is_scale_invariant(pairs in prop::collection::vec((1.0f64..1000.0, 1.0f64..1000.0), 1..50), s in 0.01f64..100.0) {
        let (f, a): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let scaled = |v: &[f64]| v.iter().map(|x| x * s).collect::<Vec<_>>();
        let m = mape(&f, &a).unwrap();
        prop_assert!((mape(&scaled(&f), &scaled(&a)).unwrap() - m).abs() <= 1e-9 * m.max(1.0));
    }
}
