use std::collections::HashMap;
use std::fmt;

use chrono::{Datelike, Months, NaiveDate};

use super::m3_normal_weeks;
use crate::calendar::{is_weekend, Category, ClassifiedSpan, DayClassification};
use crate::error::{Error, Result};

/// Why a day received the annual lag it has.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rationale {
    /// Normal day, lag of 52 or 53 weeks.
    Normal { weeks: u32 },
    /// Most recent past day of the same category (A/B: same holiday whose
    /// weekday/weekend class matches).
    SameCategory,
    /// A/B day with no class-matching precedent: most recent occurrence of the
    /// holiday regardless of class.
    ClassFallback,
    /// Proximity day with no same-category precedent: the sibling category of
    /// the same holiday was used.
    Sibling(Category),
    /// Same calendar date in the previous year.
    PreviousYear,
    /// No candidate at all; the day is treated as a normal day.
    RuleError(String),
}

impl Rationale {
    pub fn is_fallback(&self) -> bool {
        matches!(
            self,
            Rationale::ClassFallback | Rationale::Sibling(_) | Rationale::PreviousYear | Rationale::RuleError(_)
        )
    }
}

impl fmt::Display for Rationale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rationale::Normal { weeks } => write!(f, "normal-{weeks}w"),
            Rationale::SameCategory => f.write_str("same-category"),
            Rationale::ClassFallback => f.write_str("class-fallback"),
            Rationale::Sibling(c) => write!(f, "sibling-{c}"),
            Rationale::PreviousYear => f.write_str("previous-year"),
            Rationale::RuleError(msg) => write!(f, "rule-error ({msg}); treated as normal"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanEntry {
    pub date: NaiveDate,
    /// Category of the day, `None` for normal days.
    pub category: Option<Category>,
    pub past_date: NaiveDate,
    /// Lag in days; the lag in periods is `m3_days * periods_per_day`.
    pub m3_days: u32,
    pub rationale: Rationale,
}

impl PlanEntry {
    pub fn m3_periods(&self, periods_per_day: usize) -> usize {
        self.m3_days as usize * periods_per_day
    }

    /// Whether the day is modelled as special (rule errors degrade to normal).
    pub fn is_special(&self) -> bool {
        self.category.is_some() && !matches!(self.rationale, Rationale::RuleError(_))
    }
}

/// Past special days keyed by `(holiday, category)`, each list in date order.
#[derive(Debug, Clone, Default)]
pub struct SpecialDayIndex {
    by_key: HashMap<(String, Category), Vec<NaiveDate>>,
}

impl SpecialDayIndex {
    pub fn new(span: &ClassifiedSpan) -> Self {
        let mut by_key: HashMap<(String, Category), Vec<NaiveDate>> = HashMap::new();
        for d in span.special_days() {
            let (Some(h), Some(c)) = (d.holiday(), d.category()) else {
                continue;
            };
            by_key.entry((h.to_string(), c)).or_default().push(d.date);
        }
        Self { by_key }
    }

    fn dates(&self, holiday: &str, category: Category) -> &[NaiveDate] {
        self.by_key
            .get(&(holiday.to_string(), category))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

/// Distance in days between `date` and `candidate` moved into `date`'s year.
fn position_distance(date: NaiveDate, candidate: NaiveDate) -> i64 {
    let shifted = NaiveDate::from_ymd_opt(date.year(), candidate.month(), candidate.day())
        .or_else(|| NaiveDate::from_ymd_opt(date.year(), candidate.month(), 28))
        .expect("valid shifted date");
    (shifted - date).num_days().abs()
}

/// Among `candidates` from earlier years, the one in the most recent year at
/// the closest date position (earlier date on ties).
fn most_recent_by_position(date: NaiveDate, candidates: &[NaiveDate], history_start: NaiveDate) -> Option<NaiveDate> {
    let eligible = candidates
        .iter()
        .copied()
        .filter(|d| *d >= history_start && d.year() < date.year());
    let year = eligible.clone().map(|d| d.year()).max()?;
    eligible
        .filter(|d| d.year() == year)
        .min_by_key(|d| (position_distance(date, *d), *d))
}

fn choose(current: &DayClassification, index: &SpecialDayIndex, history_start: NaiveDate) -> Result<(NaiveDate, Rationale)> {
    let date = current.date;
    let (Some(category), Some(holiday)) = (current.category(), current.holiday()) else {
        return Err(Error::Parameter(format!("{date} is not a special day")));
    };
    if category.is_basic() {
        let mut occurrences: Vec<NaiveDate> = index
            .dates(holiday, Category::A)
            .iter()
            .chain(index.dates(holiday, Category::B))
            .copied()
            .filter(|d| *d >= history_start && *d < date)
            .collect();
        occurrences.sort();
        let weekend = is_weekend(date);
        if let Some(d) = occurrences.iter().rev().find(|d| is_weekend(**d) == weekend) {
            return Ok((*d, Rationale::SameCategory));
        }
        if let Some(d) = occurrences.last() {
            return Ok((*d, Rationale::ClassFallback));
        }
    } else {
        if let Some(d) = most_recent_by_position(date, index.dates(holiday, category), history_start) {
            return Ok((d, Rationale::SameCategory));
        }
        if let Some(sib) = category.sibling() {
            if let Some(d) = most_recent_by_position(date, index.dates(holiday, sib), history_start) {
                return Ok((d, Rationale::Sibling(sib)));
            }
        }
        if let Some(d) = date.checked_sub_months(Months::new(12)) {
            if d >= history_start {
                return Ok((d, Rationale::PreviousYear));
            }
        }
    }
    Err(Error::Rule {
        date,
        reason: format!("no past {holiday} day of category {category} since {history_start}"),
    })
}

/// Corresponding past day and annual lag (in days) for a special day.
pub fn select_corresponding_past_day(
    current: &DayClassification,
    history: &ClassifiedSpan,
    history_start: NaiveDate,
) -> Result<(NaiveDate, u32, Rationale)> {
    let index = SpecialDayIndex::new(history);
    let (past, why) = choose(current, &index, history_start)?;
    Ok((past, (current.date - past).num_days() as u32, why))
}

/// Lag plan for every day of a classified span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnualLagPlan {
    start: NaiveDate,
    entries: Vec<PlanEntry>,
}

/// Builds the plan for every day of `span`; candidates must lie on or after
/// `history_start`. Days where the rule finds nothing are planned as normal
/// days and carry [`Rationale::RuleError`].
pub fn build_lag_plan(span: &ClassifiedSpan, history_start: NaiveDate) -> AnnualLagPlan {
    let index = SpecialDayIndex::new(span);
    let entries = span
        .iter()
        .map(|day| {
            let normal = |rationale: Rationale| {
                let weeks = m3_normal_weeks(day.date);
                PlanEntry {
                    date: day.date,
                    category: day.category(),
                    past_date: day.date - chrono::Days::new(weeks as u64 * 7),
                    m3_days: weeks * 7,
                    rationale,
                }
            };
            if day.is_normal() {
                return normal(Rationale::Normal {
                    weeks: m3_normal_weeks(day.date),
                });
            }
            match choose(day, &index, history_start) {
                Ok((past, rationale)) => PlanEntry {
                    date: day.date,
                    category: day.category(),
                    past_date: past,
                    m3_days: (day.date - past).num_days() as u32,
                    rationale,
                },
                Err(e) => {
                    log::debug!("{e}; treating {} as a normal day", day.date);
                    normal(Rationale::RuleError(e.to_string()))
                }
            }
        })
        .collect();
    AnnualLagPlan {
        start: span.start(),
        entries,
    }
}

impl AnnualLagPlan {
    /// Plan where every day is normal (the non-rule-based baseline).
    pub fn all_normal(span: &ClassifiedSpan) -> Self {
        let normal = ClassifiedSpan::all_normal(span.start(), span.len());
        build_lag_plan(&normal, span.start())
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, day: usize) -> Option<&PlanEntry> {
        self.entries.get(day)
    }

    pub fn get(&self, date: NaiveDate) -> Option<&PlanEntry> {
        let diff = (date - self.start).num_days();
        if diff < 0 {
            return None;
        }
        self.entries.get(diff as usize)
    }

    pub fn entries(&self) -> &[PlanEntry] {
        &self.entries
    }

    /// Entries that fired a fallback or a rule error.
    pub fn fallbacks(&self) -> impl Iterator<Item = &PlanEntry> {
        self.entries.iter().filter(|e| e.rationale.is_fallback())
    }

    /// Audit CSV (`current_date,category,past_date,m3_periods,rationale`) for
    /// special days between `from` and `to` inclusive.
    pub fn to_csv(&self, periods_per_day: usize, from: NaiveDate, to: NaiveDate) -> String {
        let mut out = String::from("current_date,category,past_date,m3_periods,rationale\n");
        for e in self
            .entries
            .iter()
            .filter(|e| e.category.is_some() && e.date >= from && e.date <= to)
        {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.date,
                e.category.map(|c| c.to_string()).unwrap_or_default(),
                e.past_date,
                e.m3_periods(periods_per_day),
                e.rationale.to_string().replace(',', ";"),
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::{classify_days, HolidayCalendar};

    fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    fn plan() -> (ClassifiedSpan, AnnualLagPlan) {
        let cal = HolidayCalendar::french(2001, 2009).unwrap();
        let span = classify_days(&cal, ymd(2001, 1, 1), ymd(2009, 12, 31)).unwrap();
        let plan = build_lag_plan(&span, ymd(2001, 1, 1));
        (span, plan)
    }

    #[test]
    fn worked_examples() {
        let (_, plan) = plan();
        let bastille = plan.get(ymd(2009, 7, 14)).unwrap();
        assert_eq!(bastille.past_date, ymd(2008, 7, 14));
        assert_eq!(bastille.m3_periods(48), 17_520);

        let after_ascension = plan.get(ymd(2009, 5, 22)).unwrap();
        assert_eq!(after_ascension.past_date, ymd(2007, 5, 18));
        assert_eq!(after_ascension.m3_periods(48), (365 + 366 + 4) * 48);

        let boxing = plan.get(ymd(2009, 12, 26)).unwrap();
        assert_eq!(boxing.past_date, ymd(2004, 12, 26));

        let whit = plan.get(ymd(2009, 6, 1)).unwrap();
        assert_eq!(whit.past_date, ymd(2008, 5, 12));

        let before_bastille = plan.get(ymd(2009, 7, 13)).unwrap();
        assert_eq!(before_bastille.past_date, ymd(2005, 7, 15));
        assert_eq!(before_bastille.rationale, Rationale::Sibling(Category::D));
    }

    #[test]
    fn normal_day_uses_52_weeks() {
        let (_, plan) = plan();
        let e = plan.get(ymd(2009, 7, 21)).unwrap();
        assert_eq!(e.past_date, ymd(2008, 7, 22));
        assert_eq!(e.rationale, Rationale::Normal { weeks: 52 });
    }

    #[test]
    fn first_year_special_days_degrade_to_normal() {
        let (_, plan) = plan();
        let e = plan.get(ymd(2001, 7, 14)).unwrap();
        assert!(matches!(e.rationale, Rationale::RuleError(_)));
        assert!(!e.is_special());
        assert_eq!(e.m3_days, 364);
    }

    #[test]
    fn select_matches_plan() {
        let (span, plan) = plan();
        let bastille = span.get(ymd(2009, 7, 14)).unwrap();
        let (past, days, why) = select_corresponding_past_day(bastille, &span, ymd(2001, 1, 1)).unwrap();
        assert_eq!((past, days, why), (ymd(2008, 7, 14), 365, Rationale::SameCategory));
        assert_eq!(plan.get(ymd(2009, 7, 14)).unwrap().past_date, past);

        let early = span.get(ymd(2001, 1, 1)).unwrap();
        assert!(matches!(
            select_corresponding_past_day(early, &span, ymd(2001, 1, 1)),
            Err(Error::Rule { .. })
        ));
    }

    #[test]
    fn plan_invariants() {
        let (span, plan) = plan();
        assert_eq!(plan.len(), span.len());
        for (e, d) in plan.entries().iter().zip(span.iter()) {
            assert!(e.m3_days > 0);
            assert_eq!(e.date, d.date);
            assert_eq!((e.date - e.past_date).num_days(), e.m3_days as i64);
            if matches!(d.category(), Some(Category::A | Category::B)) && e.rationale == Rationale::SameCategory {
                assert_eq!(is_weekend(e.date), is_weekend(e.past_date), "{}", e.date);
            }
        }
        // deterministic
        let (_, again) = self::plan();
        assert_eq!(plan, again);
    }
}
