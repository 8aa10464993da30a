//! Calendar arithmetic: the fixed intraday grid, French holidays, clock
//! changes, and day-type classification.

mod classify;
mod easter;
mod grid;
mod holidays;

use chrono::{Datelike, NaiveDate, Weekday};

pub use classify::{classify_days, Category, ClassifiedSpan, DayClassification, DayKind};
pub use easter::easter_date;
pub use grid::{PeriodIndex, SeasonalGrid, DAYS_PER_WEEK};
pub use holidays::{
    clock_change_dates, french_holidays, is_summer_time, CalendarEntry, HolidayCalendar,
    HolidayOccurrence, Role, CHRISTMAS_WEEK,
};

pub fn is_weekend(date: NaiveDate) -> bool {
    matches!(date.weekday(), Weekday::Sat | Weekday::Sun)
}
