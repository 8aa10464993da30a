use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DAYS_PER_WEEK: usize = 7;

/// Offset from the series start, in grid periods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PeriodIndex(pub usize);

/// A fixed intraday grid anchored at a local calendar date.
///
/// Every calendar day carries exactly `periods_per_day` periods, including
/// clock-change days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeasonalGrid {
    pub periods_per_day: usize,
    pub series_start: NaiveDate,
}

impl SeasonalGrid {
    pub fn new(periods_per_day: usize, series_start: NaiveDate) -> Result<Self> {
        if periods_per_day == 0 {
            return Err(Error::Parameter("periods_per_day must be positive".into()));
        }
        Ok(Self {
            periods_per_day,
            series_start,
        })
    }

    /// Half-hourly grid (48 periods per day).
    pub fn half_hourly(series_start: NaiveDate) -> Self {
        Self {
            periods_per_day: 48,
            series_start,
        }
    }

    pub fn periods_per_week(&self) -> usize {
        self.periods_per_day * DAYS_PER_WEEK
    }

    pub fn day_offset(&self, t: PeriodIndex) -> usize {
        t.0 / self.periods_per_day
    }

    pub fn slot(&self, t: PeriodIndex) -> usize {
        t.0 % self.periods_per_day
    }

    pub fn date_of_day(&self, day: usize) -> NaiveDate {
        self.series_start + Days::new(day as u64)
    }

    /// Day offset of `date`; errors for dates before the series start.
    pub fn day_of_date(&self, date: NaiveDate) -> Result<usize> {
        let diff = (date - self.series_start).num_days();
        if diff < 0 {
            return Err(Error::DateOutOfRange(date));
        }
        Ok(diff as usize)
    }

    /// Maps a period to `(date, slot)`. `len` is the series extent in periods.
    pub fn period_to_date(&self, t: PeriodIndex, len: usize) -> Result<(NaiveDate, usize)> {
        if t.0 >= len {
            return Err(Error::PeriodOutOfRange { index: t.0, len });
        }
        Ok((self.date_of_day(self.day_offset(t)), self.slot(t)))
    }

    /// Inverse of [`period_to_date`](Self::period_to_date).
    pub fn date_to_period(&self, date: NaiveDate, slot: usize, len: usize) -> Result<PeriodIndex> {
        if slot >= self.periods_per_day {
            return Err(Error::Parameter(format!(
                "slot {slot} outside 0..{}",
                self.periods_per_day
            )));
        }
        let day = self.day_of_date(date)?;
        let t = day * self.periods_per_day + slot;
        if t >= len {
            return Err(Error::PeriodOutOfRange { index: t, len });
        }
        Ok(PeriodIndex(t))
    }

    /// Wall-clock start of a slot as `HH:MM`.
    pub fn slot_label(&self, slot: usize) -> String {
        let minutes = slot * 24 * 60 / self.periods_per_day;
        format!("{:02}:{:02}", minutes / 60, minutes % 60)
    }
}
