use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Days, NaiveDate, Weekday};

use super::holidays::{HolidayCalendar, Role};
use super::is_weekend;
use crate::error::{Error, Result};

/// Special-day categories.
///
/// * A/B: basic holiday on a weekday/weekend.
/// * C/D: bridging proximity day before (Monday) / after (Friday) a holiday.
/// * E/F: non-bridging weekday proximity day before/after.
/// * G: non-bridging weekend proximity day after.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl Category {
    pub fn is_basic(self) -> bool {
        matches!(self, Category::A | Category::B)
    }

    /// Category tried when no same-category precedent exists.
    pub fn sibling(self) -> Option<Category> {
        match self {
            Category::C => Some(Category::D),
            Category::D => Some(Category::C),
            Category::E => Some(Category::F),
            Category::F => Some(Category::E),
            Category::G => Some(Category::F),
            Category::A | Category::B => None,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "A" => Category::A,
            "B" => Category::B,
            "C" => Category::C,
            "D" => Category::D,
            "E" => Category::E,
            "F" => Category::F,
            "G" => Category::G,
            other => return Err(format!("unknown category `{other}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DayKind {
    NormalWeekday,
    NormalWeekend,
    Special { category: Category, holiday: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DayClassification {
    pub date: NaiveDate,
    pub kind: DayKind,
}

impl DayClassification {
    pub fn normal(date: NaiveDate) -> Self {
        let kind = if is_weekend(date) {
            DayKind::NormalWeekend
        } else {
            DayKind::NormalWeekday
        };
        Self { date, kind }
    }

    /// The `I_N` indicator: true on normal days.
    pub fn is_normal(&self) -> bool {
        !matches!(self.kind, DayKind::Special { .. })
    }

    pub fn category(&self) -> Option<Category> {
        match &self.kind {
            DayKind::Special { category, .. } => Some(*category),
            _ => None,
        }
    }

    /// The basic holiday (or named week) this day is, or is attached to.
    pub fn holiday(&self) -> Option<&str> {
        match &self.kind {
            DayKind::Special { holiday, .. } => Some(holiday),
            _ => None,
        }
    }

    pub fn weekday(&self) -> Weekday {
        self.date.weekday()
    }
}

/// A contiguous run of classified days.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifiedSpan {
    start: NaiveDate,
    days: Vec<DayClassification>,
}

impl ClassifiedSpan {
    /// Every day in the span is a normal day.
    pub fn all_normal(start: NaiveDate, n_days: usize) -> Self {
        let days = (0..n_days)
            .map(|i| DayClassification::normal(start + Days::new(i as u64)))
            .collect();
        Self { start, days }
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn end(&self) -> NaiveDate {
        self.start + Days::new(self.days.len().saturating_sub(1) as u64)
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        let diff = (date - self.start).num_days();
        (diff >= 0 && (diff as usize) < self.days.len()).then_some(diff as usize)
    }

    pub fn get(&self, date: NaiveDate) -> Option<&DayClassification> {
        self.index_of(date).map(|i| &self.days[i])
    }

    pub fn day(&self, index: usize) -> &DayClassification {
        &self.days[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = &DayClassification> {
        self.days.iter()
    }

    pub fn special_days(&self) -> impl Iterator<Item = &DayClassification> {
        self.days.iter().filter(|d| !d.is_normal())
    }
}

/// Classifies every date in `start..=end` against the roster.
pub fn classify_days(calendar: &HolidayCalendar, start: NaiveDate, end: NaiveDate) -> Result<ClassifiedSpan> {
    if end < start {
        return Err(Error::Parameter(format!("empty span {start}..={end}")));
    }
    let mut basic: HashMap<NaiveDate, &str> = HashMap::new();
    for e in calendar.entries.iter().filter(|e| e.role == Role::Basic) {
        basic.entry(e.date).or_insert(&e.name);
    }
    let mut proximity: HashMap<NaiveDate, (&str, Role)> = HashMap::new();
    for e in calendar.entries.iter().filter(|e| e.role != Role::Basic) {
        proximity.entry(e.date).or_insert((&e.name, e.role));
    }

    let n_days = (end - start).num_days() as usize + 1;
    let mut days = Vec::with_capacity(n_days);
    for i in 0..n_days {
        let date = start + Days::new(i as u64);
        let weekend = is_weekend(date);
        let kind = if let Some(name) = basic.get(&date) {
            DayKind::Special {
                category: if weekend { Category::B } else { Category::A },
                holiday: name.to_string(),
            }
        } else if let Some(&(name, role)) = proximity.get(&date) {
            let category = match role {
                Role::ProximityBefore => {
                    if weekend {
                        return Err(Error::Config(format!(
                            "{date}: weekend day before a special day has no category"
                        )));
                    }
                    let bridging = date.weekday() == Weekday::Mon
                        && basic.contains_key(&(date + Days::new(1)));
                    if bridging {
                        Category::C
                    } else {
                        Category::E
                    }
                }
                Role::ProximityAfter => {
                    let bridging = date.weekday() == Weekday::Fri
                        && basic.contains_key(&(date - Days::new(1)));
                    if bridging {
                        Category::D
                    } else if weekend {
                        Category::G
                    } else {
                        Category::F
                    }
                }
                Role::Basic => unreachable!(),
            };
            DayKind::Special {
                category,
                holiday: name.to_string(),
            }
        } else if weekend {
            DayKind::NormalWeekend
        } else {
            DayKind::NormalWeekday
        };
        days.push(DayClassification { date, kind });
    }
    Ok(ClassifiedSpan { start, days })
}
