use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Days, Months, NaiveDate, Weekday};

use crate::calendar::{ClassifiedSpan, DayClassification};
use crate::data::LoadSeries;
use crate::error::{Error, Result};
use crate::forecast::{DensitySpec, ForecastSet, Forecaster};
use crate::rules::AnnualLagPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimpleKind {
    /// The most recent fully observed Sunday.
    RecentSunday,
    /// The same special day in the previous year; 52 weeks back on normal days.
    Srw,
    /// The same special day in the most recent year it fell on the same weekday.
    SrwDay,
    /// The corresponding past day chosen by the special-day rule.
    SrwWkDayWkEnd,
    /// The most recent fully observed day of the same intraday cycle
    /// (Monday, Tuesday to Thursday, Friday, Saturday, Sunday).
    SrwIc,
}

impl SimpleKind {
    pub const ALL: [SimpleKind; 5] = [
        SimpleKind::RecentSunday,
        SimpleKind::Srw,
        SimpleKind::SrwDay,
        SimpleKind::SrwWkDayWkEnd,
        SimpleKind::SrwIc,
    ];

    pub fn id(self) -> &'static str {
        match self {
            SimpleKind::RecentSunday => "recent-sunday",
            SimpleKind::Srw => "srw",
            SimpleKind::SrwDay => "srw-day",
            SimpleKind::SrwWkDayWkEnd => "srw-wkday-wkend",
            SimpleKind::SrwIc => "srw-ic",
        }
    }
}

impl fmt::Display for SimpleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for SimpleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SimpleKind::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown simple benchmark `{s}`")))
    }
}

fn cycle(w: Weekday) -> u8 {
    match w {
        Weekday::Mon => 0,
        Weekday::Tue | Weekday::Wed | Weekday::Thu => 1,
        Weekday::Fri => 2,
        Weekday::Sat => 3,
        Weekday::Sun => 4,
    }
}

fn same_kind(a: &DayClassification, b: &DayClassification) -> bool {
    a.holiday() == b.holiday() && a.category().map(|c| c.is_basic()) == b.category().map(|c| c.is_basic())
}

/// Past special days of the same holiday (and, for proximity days, the same
/// category), most recent first.
fn precedents<'a>(target: &'a DayClassification, span: &'a ClassifiedSpan) -> impl Iterator<Item = &'a DayClassification> {
    let start = span.index_of(target.date).unwrap_or(0);
    (0..start).rev().map(move |i| span.day(i)).filter(move |d| {
        same_kind(d, target) && (target.category().is_some_and(|c| c.is_basic()) || d.category() == target.category())
    })
}

/// Historical day whose profile the benchmark copies for target day
/// `target`, given that days up to `last_complete` are observed.
pub fn select_source_day(
    kind: SimpleKind,
    target: NaiveDate,
    last_complete: NaiveDate,
    span: &ClassifiedSpan,
    plan: &AnnualLagPlan,
) -> Result<NaiveDate> {
    let day = span.get(target).ok_or(Error::DateOutOfRange(target))?;
    let found = match kind {
        SimpleKind::RecentSunday => {
            let back = (last_complete.weekday().num_days_from_sunday()) as u64;
            Some(last_complete - Days::new(back))
        }
        SimpleKind::SrwIc => {
            let c = cycle(target.weekday());
            (0..7u64).map(|k| last_complete - Days::new(k)).find(|d| cycle(d.weekday()) == c)
        }
        SimpleKind::Srw => {
            if day.is_normal() {
                Some(target - Days::new(364))
            } else {
                let a_year_ago = target.checked_sub_months(Months::new(12));
                let basic = day.category().is_some_and(|c| c.is_basic());
                let nearest = precedents(day, span)
                    .filter(|d| Some(d.date.year()) == a_year_ago.map(|a| a.year()))
                    .min_by_key(|d| (a_year_ago.map(|a| (d.date - a).num_days().abs()).unwrap_or(0), d.date));
                match nearest {
                    Some(d) => Some(d.date),
                    None if basic => precedents(day, span).next().map(|d| d.date),
                    None => a_year_ago,
                }
            }
        }
        SimpleKind::SrwDay => {
            if day.is_normal() {
                Some(target - Days::new(364))
            } else {
                precedents(day, span)
                    .find(|d| d.date.weekday() == target.weekday())
                    .map(|d| d.date)
            }
        }
        SimpleKind::SrwWkDayWkEnd => plan.get(target).map(|e| e.past_date),
    };
    match found {
        Some(d) if d >= span.start() && d <= last_complete && d < target => Ok(d),
        _ => Err(Error::Benchmark(target)),
    }
}

/// A simple benchmark bound to a series.
#[derive(Debug, Clone)]
pub struct SimpleBenchmark {
    kind: SimpleKind,
    series: LoadSeries,
    span: ClassifiedSpan,
    plan: AnnualLagPlan,
}

impl SimpleBenchmark {
    pub fn new(kind: SimpleKind, series: LoadSeries, span: ClassifiedSpan, plan: AnnualLagPlan) -> Self {
        Self {
            kind,
            series,
            span,
            plan,
        }
    }

    pub fn kind(&self) -> SimpleKind {
        self.kind
    }
}

/// The full intraday profile the benchmark predicts for `target`, copied from
/// the selected day; all earlier days are treated as observed.
pub fn simple_benchmark(
    kind: SimpleKind,
    series: &LoadSeries,
    span: &ClassifiedSpan,
    plan: &AnnualLagPlan,
    target: NaiveDate,
) -> Result<Vec<f64>> {
    let last = target.pred_opt().ok_or(Error::Benchmark(target))?;
    let source = select_source_day(kind, target, last.min(series.end()), span, plan)?;
    Ok(series.day_of(source)?.to_vec())
}

impl Forecaster for SimpleBenchmark {
    fn name(&self) -> &str {
        self.kind.id()
    }

    fn forecast(&self, origin: usize, horizon: usize, _density: Option<&DensitySpec>) -> Result<ForecastSet> {
        let m1 = self.series.periods_per_day();
        let grid = self.series.grid();
        let complete_days = (origin + 1) / m1;
        if complete_days == 0 {
            return Err(Error::Horizon {
                origin,
                horizon,
                msg: "no complete day observed".into(),
            });
        }
        let last_complete = grid.date_of_day(complete_days - 1);
        let mut points = Vec::with_capacity(horizon);
        let mut cached: Option<(usize, usize)> = None;
        for h in 1..=horizon {
            let t = origin + h;
            let day = t / m1;
            let src = match cached {
                Some((d, s)) if d == day => s,
                _ => {
                    let date = grid.date_of_day(day);
                    let s = select_source_day(self.kind, date, last_complete, &self.span, &self.plan)?;
                    let s = grid.day_of_date(s)?;
                    cached = Some((day, s));
                    s
                }
            };
            points.push(self.series.values()[src * m1 + t % m1]);
        }
        Ok(ForecastSet {
            origin,
            points,
            ensemble: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::{classify_days, HolidayCalendar, SeasonalGrid};
    use crate::rules::build_lag_plan;

    fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    fn setup() -> (LoadSeries, ClassifiedSpan, AnnualLagPlan) {
        let start = ymd(2001, 1, 1);
        let cal = HolidayCalendar::french(2001, 2010).unwrap();
        let span = classify_days(&cal, start, ymd(2009, 12, 31)).unwrap();
        let plan = build_lag_plan(&span, start);
        let values: Vec<f64> = (0..span.len() * 48).map(|i| 1.0 + i as f64).collect();
        let series = LoadSeries::new(SeasonalGrid::half_hourly(start), values).unwrap();
        (series, span, plan)
    }

    fn source(kind: SimpleKind, target: NaiveDate) -> NaiveDate {
        let (_, span, plan) = setup();
        select_source_day(kind, target, target.pred_opt().unwrap(), &span, &plan).unwrap()
    }

    #[test]
    fn srw_bastille_copies_last_year() {
        let (series, span, plan) = setup();
        let p = simple_benchmark(SimpleKind::Srw, &series, &span, &plan, ymd(2009, 7, 14)).unwrap();
        assert_eq!(p.as_slice(), series.day_of(ymd(2008, 7, 14)).unwrap());
    }

    #[test]
    fn rule_benchmark_follows_the_table_pairing() {
        assert_eq!(source(SimpleKind::SrwWkDayWkEnd, ymd(2009, 12, 26)), ymd(2004, 12, 26));
        assert_eq!(source(SimpleKind::SrwWkDayWkEnd, ymd(2009, 5, 22)), ymd(2007, 5, 18));
    }

    #[test]
    fn recent_sunday_and_cycles() {
        // Wednesday 2009-07-15: preceding Sunday is 2009-07-12
        assert_eq!(source(SimpleKind::RecentSunday, ymd(2009, 7, 15)), ymd(2009, 7, 12));
        assert_eq!(source(SimpleKind::SrwIc, ymd(2009, 7, 16)), ymd(2009, 7, 15));
        assert_eq!(source(SimpleKind::SrwIc, ymd(2009, 7, 13)), ymd(2009, 7, 6));
        assert_eq!(source(SimpleKind::SrwIc, ymd(2009, 7, 14)), ymd(2009, 7, 9));
    }

    #[test]
    fn srw_day_matches_the_weekday() {
        assert_eq!(source(SimpleKind::SrwDay, ymd(2008, 7, 14)), ymd(2003, 7, 14));
        let (_, span, plan) = setup();
        // no Tuesday Bastille Day between 2001 and 2008
        let r = select_source_day(SimpleKind::SrwDay, ymd(2009, 7, 14), ymd(2009, 7, 13), &span, &plan);
        assert!(matches!(r, Err(Error::Benchmark(_))));
        // Easter Monday is always a Monday
        assert_eq!(source(SimpleKind::SrwDay, ymd(2009, 4, 13)), ymd(2008, 3, 24));
    }

    #[test]
    fn agrees_with_rule_when_classes_match() {
        let (_, span, plan) = setup();
        for d in span.special_days().filter(|d| d.date.year() == 2009) {
            let last = d.date.pred_opt().unwrap();
            let srw = select_source_day(SimpleKind::Srw, d.date, last, &span, &plan).unwrap();
            let rule = select_source_day(SimpleKind::SrwWkDayWkEnd, d.date, last, &span, &plan).unwrap();
            let same_class = crate::calendar::is_weekend(srw) == crate::calendar::is_weekend(d.date);
            if same_class && d.category().is_some_and(|c| c.is_basic()) {
                assert_eq!(srw, rule, "{}", d.date);
            }
        }
    }

    #[test]
    fn forecasts_are_exact_copies() {
        let (series, span, plan) = setup();
        let b = SimpleBenchmark::new(SimpleKind::Srw, series.clone(), span, plan);
        let origin = series.period_of(ymd(2009, 7, 14)).unwrap() - 1;
        let f = b.forecast(origin, 48, None).unwrap();
        assert_eq!(f.points.as_slice(), series.day_of(ymd(2008, 7, 14)).unwrap());
        let mid = b.forecast(origin + 10, 48, None).unwrap();
        assert_eq!(&mid.points[..38], &series.day_of(ymd(2008, 7, 14)).unwrap()[10..]);
        assert!(matches!(
            simple_benchmark(SimpleKind::SrwDay, &series, &b.span, &b.plan, ymd(2001, 7, 14)),
            Err(Error::Benchmark(_))
        ));
    }
}
