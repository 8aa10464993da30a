//! French public holidays, clock-change dates, and the special-day roster
//! (basic holidays plus proximity days) used by the classifier.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{Datelike, Days, NaiveDate, Weekday};

use super::easter::easter_date;
use super::is_weekend;
use crate::error::{Error, Result};

/// Name used for the proximity days around Christmas that are attached to the
/// week rather than to a single holiday.
pub const CHRISTMAS_WEEK: &str = "ChristmasWeek";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HolidayOccurrence {
    pub date: NaiveDate,
    pub name: &'static str,
    pub weekday: Weekday,
}

fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid date")
}

/// The basic French special days of `year`.
///
/// Fixed-date holidays are listed before the Easter-based ones so that, when
/// two holidays share a date (Ascension fell on Labor Day in 2008), the
/// fixed-date holiday takes precedence under the first-entry-wins rule. Within
/// each group the list is in date order.
pub fn french_holidays(year: i32) -> Result<Vec<HolidayOccurrence>> {
    let easter = easter_date(year)?;
    let fixed = [
        (ymd(year, 1, 1), "NewYearsDay"),
        (ymd(year, 5, 1), "LaborDay"),
        (ymd(year, 5, 8), "VictoryDay"),
        (ymd(year, 7, 14), "BastilleDay"),
        (ymd(year, 8, 15), "Assumption"),
        (ymd(year, 11, 1), "AllSaintsDay"),
        (ymd(year, 11, 11), "RemembranceDay"),
        (ymd(year, 12, 25), "ChristmasDay"),
        (ymd(year, 12, 26), "BoxingDay"),
        (ymd(year, 12, 31), "NewYearsEve"),
    ];
    let movable = [
        (easter + Days::new(1), "EasterMonday"),
        (easter + Days::new(39), "AscensionDay"),
        (easter + Days::new(50), "WhitMonday"),
    ];
    Ok(fixed
        .into_iter()
        .chain(movable)
        .map(|(date, name)| HolidayOccurrence {
            date,
            name,
            weekday: date.weekday(),
        })
        .collect())
}

fn last_sunday(year: i32, month: u32) -> NaiveDate {
    let mut d = ymd(year, month + 1, 1) - Days::new(1);
    while d.weekday() != Weekday::Sun {
        d = d - Days::new(1);
    }
    d
}

/// Spring (last Sunday of March) and autumn (last Sunday of October) clock
/// changes.
pub fn clock_change_dates(year: i32) -> (NaiveDate, NaiveDate) {
    (last_sunday(year, 3), last_sunday(year, 10))
}

/// Whether `date` lies in the summer-time phase. The spring change day counts
/// as summer, the autumn change day as winter.
pub fn is_summer_time(date: NaiveDate) -> bool {
    let (spring, autumn) = clock_change_dates(date.year());
    date >= spring && date < autumn
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Basic,
    ProximityBefore,
    ProximityAfter,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Basic => "basic",
            Role::ProximityBefore => "proximity-before",
            Role::ProximityAfter => "proximity-after",
        })
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "basic" => Ok(Role::Basic),
            "proximity-before" => Ok(Role::ProximityBefore),
            "proximity-after" => Ok(Role::ProximityAfter),
            other => Err(format!("unknown role `{other}`")),
        }
    }
}

/// One record of the calendar config: `date,name,role`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CalendarEntry {
    pub date: NaiveDate,
    pub name: String,
    pub role: Role,
}

/// An ordered roster of special-day records. When several records share a
/// date, the first one wins (basic records always beat proximity records).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HolidayCalendar {
    pub entries: Vec<CalendarEntry>,
}

impl HolidayCalendar {
    /// Built-in French roster for `first_year..=last_year`.
    ///
    /// Proximity days follow a fixed pattern every year:
    /// * the Monday before a Tuesday holiday and the Friday after a Thursday
    ///   holiday (bridging days);
    /// * Christmas week: weekdays 21–24 December (before) and 27–30 December
    ///   (after), plus any weekend day of 27–30 December whose two neighbours
    ///   are both basic holidays or weekday proximity days.
    ///
    /// Days that are already basic holidays are never proximity days, and a
    /// bridging day attached to a holiday takes precedence over the Christmas
    /// week pattern.
    pub fn french(first_year: i32, last_year: i32) -> Result<Self> {
        let mut basic: BTreeMap<NaiveDate, &'static str> = BTreeMap::new();
        let mut entries = Vec::new();
        for year in (first_year - 1)..=(last_year + 1) {
            for h in french_holidays(year)? {
                if (first_year..=last_year).contains(&year) {
                    entries.push(CalendarEntry {
                        date: h.date,
                        name: h.name.to_string(),
                        role: Role::Basic,
                    });
                }
                basic.entry(h.date).or_insert(h.name);
            }
        }

        let in_range = |d: NaiveDate| (first_year..=last_year).contains(&d.year());
        let mut proximity: BTreeMap<NaiveDate, (String, Role)> = BTreeMap::new();
        for (&date, &name) in &basic {
            let (candidate, role) = match date.weekday() {
                Weekday::Tue => (date - Days::new(1), Role::ProximityBefore),
                Weekday::Thu => (date + Days::new(1), Role::ProximityAfter),
                _ => continue,
            };
            if in_range(candidate) && !basic.contains_key(&candidate) {
                proximity
                    .entry(candidate)
                    .or_insert_with(|| (name.to_string(), role));
            }
        }

        for year in first_year..=last_year {
            let windows = [(21..=24, Role::ProximityBefore), (27..=30, Role::ProximityAfter)];
            for (days, role) in windows {
                for day in days {
                    let d = ymd(year, 12, day);
                    if !is_weekend(d) && !basic.contains_key(&d) {
                        proximity
                            .entry(d)
                            .or_insert_with(|| (CHRISTMAS_WEEK.to_string(), role));
                    }
                }
            }
            let special: BTreeSet<NaiveDate> =
                basic.keys().chain(proximity.keys()).copied().collect();
            for day in 27..=30 {
                let d = ymd(year, 12, day);
                if is_weekend(d)
                    && !basic.contains_key(&d)
                    && special.contains(&(d - Days::new(1)))
                    && special.contains(&(d + Days::new(1)))
                {
                    proximity
                        .entry(d)
                        .or_insert_with(|| (CHRISTMAS_WEEK.to_string(), Role::ProximityAfter));
                }
            }
        }

        entries.extend(proximity.into_iter().map(|(date, (name, role))| CalendarEntry {
            date,
            name,
            role,
        }));
        // stable sort keeps the fixed-before-movable order on shared dates
        entries.sort_by_key(|e| (e.date, e.role != Role::Basic));
        Ok(Self { entries })
    }

    /// Parses the line-oriented config format. Blank lines and lines starting
    /// with `#` are ignored; a leading `date,name,role` header is optional.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line == "date,name,role" {
                continue;
            }
            let err = |msg: String| Error::CalendarConfig { line: line_no, msg };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(err(format!("expected 3 fields, found {}", fields.len())));
            }
            let date = NaiveDate::parse_from_str(fields[0], "%Y-%m-%d")
                .map_err(|e| err(format!("bad date `{}`: {e}", fields[0])))?;
            if fields[1].is_empty() {
                return Err(err("empty holiday name".into()));
            }
            let role: Role = fields[2].parse().map_err(err)?;
            if role == Role::ProximityBefore && is_weekend(date) {
                return Err(err(format!(
                    "{date} is a weekend day; proximity-before days must be weekdays"
                )));
            }
            entries.push(CalendarEntry {
                date,
                name: fields[1].to_string(),
                role,
            });
        }
        Ok(Self { entries })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_config_string(&self) -> String {
        let mut out = String::from("date,name,role\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{}\n", e.date.format("%Y-%m-%d"), e.name, e.role));
        }
        out
    }
}
