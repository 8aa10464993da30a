use std::collections::HashMap;
use std::fmt::Write as _;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::benchmarks::{select_source_day, SimpleKind};
use crate::calendar::{ClassifiedSpan, SeasonalGrid, DAYS_PER_WEEK};
use crate::data::LoadSeries;
use crate::error::Result;
use crate::rules::AnnualLagPlan;

pub const BASELINE_COUNT: usize = 4;

/// Indicator values of one period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Code {
    pub a: bool,
    pub b: bool,
    pub c: bool,
}

impl Code {
    /// The two-valued B of the compatibility coding: 1 for a moderate
    /// deviation, 2 where the three-variable coding sets C.
    pub fn kim_b(self) -> u8 {
        if self.c {
            2
        } else {
            u8::from(self.b)
        }
    }
}

/// `a` at 10% or more, `b` on `[10%, 20%]`, `c` above 20%.
pub fn code_from_pct(pct: f64) -> Code {
    Code {
        a: pct >= 0.10,
        b: (0.10..=0.20).contains(&pct),
        c: pct > 0.20,
    }
}

/// Which earlier days supply the normal-day baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineStepping {
    /// The 4 previous same-weekday days.
    #[default]
    Weekly,
    /// The 4 previous calendar days.
    Daily,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IndicatorOptions {
    pub stepping: BaselineStepping,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorEntry {
    pub date: NaiveDate,
    pub slot: usize,
    pub code: Code,
    /// `(mu - y_ref) / mu`; `None` when no baseline or reference exists.
    pub pct_diff: Option<f64>,
    pub mu: Option<f64>,
    pub reference_date: Option<NaiveDate>,
    /// Normal days that entered the baseline mean.
    pub baselines: usize,
}

impl IndicatorEntry {
    /// Fewer than four baselines, or no reference day.
    pub fn flagged(&self) -> bool {
        self.baselines < BASELINE_COUNT || self.reference_date.is_none()
    }
}

/// Indicator codes for every special-day period of a span; other periods
/// are implicitly all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorTable {
    grid: SeasonalGrid,
    n_periods: usize,
    entries: Vec<IndicatorEntry>,
    by_period: HashMap<usize, usize>,
}

impl IndicatorTable {
    /// Builds a table from explicit entries over `n_periods` periods.
    pub fn from_entries(grid: SeasonalGrid, n_periods: usize, mut entries: Vec<IndicatorEntry>) -> Result<Self> {
        entries.sort_by_key(|e| (e.date, e.slot));
        let mut by_period = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            let t = grid.date_to_period(e.date, e.slot, n_periods)?.0;
            by_period.insert(t, i);
        }
        Ok(Self {
            grid,
            n_periods,
            entries,
            by_period,
        })
    }

    /// Table where period `t` carries `codes(t)`.
    pub fn from_codes(grid: SeasonalGrid, n_periods: usize, codes: impl Fn(usize) -> Code) -> Self {
        let m1 = grid.periods_per_day;
        let entries = (0..n_periods)
            .filter_map(|t| {
                let code = codes(t);
                (code != Code::default()).then(|| IndicatorEntry {
                    date: grid.date_of_day(t / m1),
                    slot: t % m1,
                    code,
                    pct_diff: None,
                    mu: None,
                    reference_date: None,
                    baselines: 0,
                })
            })
            .collect();
        Self::from_entries(grid, n_periods, entries).expect("periods lie on the grid")
    }

    pub fn zeros(grid: SeasonalGrid, n_periods: usize) -> Self {
        Self::from_codes(grid, n_periods, |_| Code::default())
    }

    pub fn grid(&self) -> &SeasonalGrid {
        &self.grid
    }

    pub fn n_periods(&self) -> usize {
        self.n_periods
    }

    pub fn entries(&self) -> &[IndicatorEntry] {
        &self.entries
    }

    pub fn code(&self, t: usize) -> Code {
        self.by_period.get(&t).map(|&i| self.entries[i].code).unwrap_or_default()
    }

    pub fn flagged(&self) -> impl Iterator<Item = &IndicatorEntry> {
        self.entries.iter().filter(|e| e.flagged())
    }

    /// CSV `date,slot,a,b,c,pct_diff,reference_date`, one row per special-day
    /// period.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("date,slot,a,b,c,pct_diff,reference_date\n");
        for e in &self.entries {
            let pct = e.pct_diff.map(|p| format!("{p:.6}")).unwrap_or_default();
            let reference = e.reference_date.map(|d| d.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{pct},{reference}",
                e.date,
                e.slot,
                u8::from(e.code.a),
                u8::from(e.code.b),
                u8::from(e.code.c)
            );
        }
        out
    }

    /// Runs of slots of one day where `pick` holds, as `first-last` slot
    /// start times joined by `, `, or `-` when there are none.
    pub fn day_ranges(&self, date: NaiveDate, pick: impl Fn(Code) -> bool) -> String {
        let m1 = self.grid.periods_per_day;
        let Ok(day) = self.grid.day_of_date(date) else {
            return "-".into();
        };
        let on: Vec<bool> = (0..m1).map(|h| pick(self.code(day * m1 + h))).collect();
        let mut ranges = Vec::new();
        let mut h = 0;
        while h < m1 {
            if on[h] {
                let from = h;
                while h < m1 && on[h] {
                    h += 1;
                }
                ranges.push(format!("{}-{}", self.grid.slot_label(from), self.grid.slot_label(h - 1)));
            } else {
                h += 1;
            }
        }
        if ranges.is_empty() {
            "-".into()
        } else {
            ranges.join(", ")
        }
    }

    /// Per special day: the periods with `(a, b)` set and those with
    /// `(a, c)` set.
    pub fn report(&self, span: &ClassifiedSpan) -> String {
        let mut out = String::from("special day | A=1,B=1 | A=1,C=1\n");
        let mut dates: Vec<NaiveDate> = self.entries.iter().map(|e| e.date).collect();
        dates.dedup();
        for date in dates {
            let name = span.get(date).and_then(|d| d.holiday()).unwrap_or("?");
            let _ = writeln!(
                out,
                "{name} : {} | {} | {}",
                date.format("%a %d/%m/%Y"),
                self.day_ranges(date, |c| c.a && c.b),
                self.day_ranges(date, |c| c.a && c.c)
            );
        }
        out
    }
}

/// Codes every special-day period of `series` against last year's same
/// special day and the mean of the previous normal-day values at the same
/// slot.
pub fn compute_indicators(
    series: &LoadSeries,
    span: &ClassifiedSpan,
    plan: &AnnualLagPlan,
    opts: &IndicatorOptions,
) -> Result<IndicatorTable> {
    let grid = *series.grid();
    let m1 = grid.periods_per_day;
    let step = match opts.stepping {
        BaselineStepping::Weekly => DAYS_PER_WEEK as u64,
        BaselineStepping::Daily => 1,
    };
    let mut entries = Vec::new();
    for day in 0..series.n_days() {
        let date = grid.date_of_day(day);
        let Some(class) = span.get(date) else { continue };
        if class.is_normal() {
            continue;
        }
        let reference = date
            .pred_opt()
            .and_then(|last| select_source_day(SimpleKind::Srw, date, last, span, plan).ok())
            .filter(|r| *r >= series.start());
        let baseline_days: Vec<usize> = (1..=BASELINE_COUNT as u64)
            .filter_map(|k| date.checked_sub_days(Days::new(k * step)))
            .filter(|d| *d >= series.start() && span.get(*d).is_some_and(|c| c.is_normal()))
            .map(|d| grid.day_of_date(d).expect("after the series start"))
            .collect();
        if baseline_days.len() < BASELINE_COUNT {
            log::debug!("{date}: only {} normal-day baselines", baseline_days.len());
        }
        for slot in 0..m1 {
            let mu = (!baseline_days.is_empty()).then(|| {
                baseline_days.iter().map(|&d| series.day(d)[slot]).sum::<f64>() / baseline_days.len() as f64
            });
            let pct = match (mu, reference) {
                (Some(mu), Some(r)) => Some((mu - series.day_of(r)?[slot]) / mu),
                _ => None,
            };
            entries.push(IndicatorEntry {
                date,
                slot,
                code: pct.map(code_from_pct).unwrap_or_default(),
                pct_diff: pct,
                mu,
                reference_date: reference,
                baselines: baseline_days.len(),
            });
        }
    }
    IndicatorTable::from_entries(grid, series.len(), entries)
}
