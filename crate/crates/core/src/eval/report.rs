use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::NaiveDate;
use serde::Serialize;

use super::backtest::{BacktestRun, EvalWindow, ForecastRecord};
use super::metrics::{diebold_mariano, DmResult};
use crate::calendar::{ClassifiedSpan, SeasonalGrid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Slice {
    SpecialOnly,
    NormalOnly,
    AllDays,
}

impl Slice {
    pub const ALL: [Slice; 3] = [Slice::SpecialOnly, Slice::NormalOnly, Slice::AllDays];

    pub fn id(self) -> &'static str {
        match self {
            Slice::SpecialOnly => "special-only",
            Slice::NormalOnly => "normal-only",
            Slice::AllDays => "all-days",
        }
    }

    fn contains(self, special: bool) -> bool {
        match self {
            Slice::SpecialOnly => special,
            Slice::NormalOnly => !special,
            Slice::AllDays => true,
        }
    }
}

/// Three-hour bucket label, `1-3h` for bucket 0.
pub fn bucket_label(bucket: usize) -> String {
    format!("{}-{}h", 3 * bucket + 1, 3 * bucket + 3)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketRow {
    pub model: String,
    pub bucket: String,
    pub slice: Slice,
    pub mape: Option<f64>,
    pub rmspe: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeOfDayRow {
    pub model: String,
    pub horizon: usize,
    pub slice: Slice,
    pub slot: usize,
    pub time: String,
    pub mape: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpecialDayRow {
    pub model: String,
    pub horizon: usize,
    pub date: NaiveDate,
    pub holiday: String,
    pub category: String,
    pub mape: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrpsRow {
    pub model: String,
    pub horizon: usize,
    pub slice: Slice,
    pub crps: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DmRow {
    pub model_a: String,
    pub model_b: String,
    pub horizon: usize,
    pub slice: Slice,
    /// Common one-step targets.
    pub n: usize,
    /// Absent when fewer than 30 common targets exist.
    pub result: Option<DmResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSummary {
    pub model: String,
    pub forecasts: usize,
    pub omitted: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub periods_per_day: usize,
    pub horizon: usize,
    pub window: EvalWindow,
    pub models: Vec<ModelSummary>,
    pub buckets: Vec<BucketRow>,
    pub time_of_day: Vec<TimeOfDayRow>,
    pub special_days: Vec<SpecialDayRow>,
    pub crps: Vec<CrpsRow>,
    pub dm: Vec<DmRow>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    abs: f64,
    sq: f64,
    n: usize,
}

impl Acc {
    fn add(&mut self, r: &ForecastRecord) -> Result<()> {
        if r.actual == 0.0 {
            return Err(Error::Metric(format!("zero actual at period {}", r.target)));
        }
        let e = (r.forecast - r.actual) / r.actual;
        self.abs += e.abs();
        self.sq += e * e;
        self.n += 1;
        Ok(())
    }

    fn mape(&self) -> Option<f64> {
        (self.n > 0).then(|| 100.0 * self.abs / self.n as f64)
    }

    fn rmspe(&self) -> Option<f64> {
        (self.n > 0).then(|| 100.0 * (self.sq / self.n as f64).sqrt())
    }
}

/// Tables of every report slicing for runs sharing one evaluation window.
pub fn build_report(runs: &[BacktestRun], span: &ClassifiedSpan, grid: &SeasonalGrid) -> Result<EvaluationReport> {
    let first = runs.first().ok_or_else(|| Error::Parameter("no backtest runs to report".into()))?;
    if runs.iter().any(|r| r.window != first.window || r.horizon != first.horizon) {
        return Err(Error::Parameter("runs must share the evaluation window and horizon".into()));
    }
    let m1 = grid.periods_per_day;
    if m1 % 8 != 0 {
        return Err(Error::Parameter(format!("{m1} periods per day do not split into 3-hour buckets")));
    }
    let bucket_size = m1 / 8;
    let horizon = first.horizon;
    let date_of = |t: usize| grid.date_of_day(t / m1);
    let special = |t: usize| span.get(date_of(t)).is_some_and(|d| !d.is_normal());

    let mut report = EvaluationReport {
        periods_per_day: m1,
        horizon,
        window: first.window,
        models: Vec::new(),
        buckets: Vec::new(),
        time_of_day: Vec::new(),
        special_days: Vec::new(),
        crps: Vec::new(),
        dm: Vec::new(),
    };
    let tod_horizons: Vec<usize> = [m1 / 4, m1].into_iter().filter(|h| *h >= 1 && *h <= horizon).collect();
    let day_horizon = m1.min(horizon);

    for run in runs {
        report.models.push(ModelSummary {
            model: run.model.clone(),
            forecasts: run.records.len(),
            omitted: run.omitted,
            failed: run.failed,
        });
        let n_buckets = horizon.div_ceil(bucket_size);
        let mut buckets = vec![[Acc::default(); 3]; n_buckets];
        let mut tod: BTreeMap<(usize, usize), [Acc; 3]> = BTreeMap::new();
        let mut days: BTreeMap<NaiveDate, Acc> = BTreeMap::new();
        let mut crps: BTreeMap<usize, [(f64, usize); 3]> = BTreeMap::new();
        for r in &run.records {
            let sp = special(r.target);
            for (k, slice) in Slice::ALL.into_iter().enumerate() {
                if !slice.contains(sp) {
                    continue;
                }
                buckets[(r.horizon - 1) / bucket_size][k].add(r)?;
                if tod_horizons.contains(&r.horizon) {
                    tod.entry((r.horizon, r.target % m1)).or_default()[k].add(r)?;
                }
                if let Some(c) = r.crps {
                    let cell = &mut crps.entry(r.horizon).or_insert([(0.0, 0); 3])[k];
                    cell.0 += c;
                    cell.1 += 1;
                }
            }
            if sp && r.horizon == day_horizon {
                days.entry(date_of(r.target)).or_default().add(r)?;
            }
        }
        for (b, accs) in buckets.iter().enumerate() {
            for (k, slice) in Slice::ALL.into_iter().enumerate() {
                report.buckets.push(BucketRow {
                    model: run.model.clone(),
                    bucket: bucket_label(b),
                    slice,
                    mape: accs[k].mape(),
                    rmspe: accs[k].rmspe(),
                    n: accs[k].n,
                });
            }
        }
        for &h in &tod_horizons {
            for slot in 0..m1 {
                let accs = tod.get(&(h, slot)).copied().unwrap_or_default();
                for (k, slice) in Slice::ALL.into_iter().enumerate() {
                    report.time_of_day.push(TimeOfDayRow {
                        model: run.model.clone(),
                        horizon: h,
                        slice,
                        slot,
                        time: grid.slot_label(slot),
                        mape: accs[k].mape(),
                        n: accs[k].n,
                    });
                }
            }
        }
        let special_dates = span
            .special_days()
            .filter(|d| {
                grid.day_of_date(d.date)
                    .is_ok_and(|day| (first.window.first / m1..=first.window.last / m1).contains(&day))
            });
        for d in special_dates {
            let acc = days.get(&d.date).copied().unwrap_or_default();
            report.special_days.push(SpecialDayRow {
                model: run.model.clone(),
                horizon: day_horizon,
                date: d.date,
                holiday: d.holiday().unwrap_or_default().to_string(),
                category: d.category().map(|c| c.to_string()).unwrap_or_default(),
                mape: acc.mape(),
                n: acc.n,
            });
        }
        for (h, cells) in crps {
            for (k, slice) in Slice::ALL.into_iter().enumerate() {
                let (sum, n) = cells[k];
                report.crps.push(CrpsRow {
                    model: run.model.clone(),
                    horizon: h,
                    slice,
                    crps: (n > 0).then(|| sum / n as f64),
                    n,
                });
            }
        }
    }

    let one_step: Vec<BTreeMap<usize, f64>> = runs
        .iter()
        .map(|r| r.at_horizon(1).map(|x| (x.target, x.error())).collect())
        .collect();
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            for slice in [Slice::SpecialOnly, Slice::AllDays] {
                let (a, b): (Vec<f64>, Vec<f64>) = one_step[i]
                    .iter()
                    .filter(|(t, _)| slice.contains(special(**t)))
                    .filter_map(|(t, ea)| one_step[j].get(t).map(|eb| (*ea, *eb)))
                    .unzip();
                report.dm.push(DmRow {
                    model_a: runs[i].model.clone(),
                    model_b: runs[j].model.clone(),
                    horizon: 1,
                    slice,
                    n: a.len(),
                    result: diebold_mariano(&a, &b, 1).ok(),
                });
            }
        }
    }
    Ok(report)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl EvaluationReport {
    /// `model,bucket,slice,mape,rmspe,n`
    pub fn buckets_csv(&self) -> String {
        let mut out = String::from("model,bucket,slice,mape,rmspe,n\n");
        for r in &self.buckets {
            let _ = writeln!(out, "{},{},{},{},{},{}", r.model, r.bucket, r.slice.id(), opt(r.mape), opt(r.rmspe), r.n);
        }
        out
    }

    /// `model,horizon,slice,slot,time,mape,n`
    pub fn time_of_day_csv(&self) -> String {
        let mut out = String::from("model,horizon,slice,slot,time,mape,n\n");
        for r in &self.time_of_day {
            let _ = writeln!(out, "{},{},{},{},{},{},{}", r.model, r.horizon, r.slice.id(), r.slot, r.time, opt(r.mape), r.n);
        }
        out
    }

    /// `model,horizon,date,holiday,category,mape,n`
    pub fn special_days_csv(&self) -> String {
        let mut out = String::from("model,horizon,date,holiday,category,mape,n\n");
        for r in &self.special_days {
            let _ = writeln!(out, "{},{},{},{},{},{},{}", r.model, r.horizon, r.date, r.holiday, r.category, opt(r.mape), r.n);
        }
        out
    }

    /// `model,horizon,slice,crps,n`
    pub fn crps_csv(&self) -> String {
        let mut out = String::from("model,horizon,slice,crps,n\n");
        for r in &self.crps {
            let _ = writeln!(out, "{},{},{},{},{}", r.model, r.horizon, r.slice.id(), opt(r.crps), r.n);
        }
        out
    }

    /// `model_a,model_b,horizon,slice,statistic,p_value,n`; a degenerate pair
    /// has an empty statistic and p-value 1.
    pub fn dm_csv(&self) -> String {
        let mut out = String::from("model_a,model_b,horizon,slice,statistic,p_value,n\n");
        for r in &self.dm {
            let (stat, p) = match r.result {
                Some(DmResult::Statistic { statistic, p_value, .. }) => (statistic.to_string(), p_value.to_string()),
                Some(DmResult::NoDifference { .. }) => (String::new(), "1".into()),
                None => (String::new(), String::new()),
            };
            let _ = writeln!(out, "{},{},{},{},{stat},{p},{}", r.model_a, r.model_b, r.horizon, r.slice.id(), r.n);
        }
        out
    }

    /// MAPE of one `(model, bucket, slice)` cell.
    pub fn bucket_mape(&self, model: &str, bucket: usize, slice: Slice) -> Option<f64> {
        let label = bucket_label(bucket);
        self.buckets
            .iter()
            .find(|r| r.model == model && r.bucket == label && r.slice == slice)
            .and_then(|r| r.mape)
    }

    pub fn n_buckets(&self) -> usize {
        self.horizon.div_ceil(self.periods_per_day / 8)
    }
}

/// `model,origin,horizon,target,date,slot,forecast,actual,crps`
pub fn records_csv(run: &BacktestRun, grid: &SeasonalGrid) -> String {
    let m1 = grid.periods_per_day;
    let mut out = String::from("model,origin,horizon,target,date,slot,forecast,actual,crps\n");
    for r in &run.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            run.model,
            r.origin,
            r.horizon,
            r.target,
            grid.date_of_day(r.target / m1),
            r.target % m1,
            r.forecast,
            r.actual,
            opt(r.crps)
        );
    }
    out
}
