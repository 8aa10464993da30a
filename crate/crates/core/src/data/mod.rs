//! Load series: validated storage, CSV exchange, profiling, and a synthetic
//! generator with holiday structure.

mod csv_io;
mod profiles;
mod synth;

use chrono::{Datelike, NaiveDate};

pub use csv_io::{load_csv, read_csv, write_csv, CsvOptions};
pub use profiles::{compare_profiles, weekday_profiles, ProfileTable};
pub use synth::{generate_synthetic, NoiseConfig, SynthConfig};

use crate::calendar::SeasonalGrid;
use crate::error::{Error, Result};

/// Strictly positive load values on a complete grid of whole days.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadSeries {
    grid: SeasonalGrid,
    values: Vec<f64>,
}

impl LoadSeries {
    pub fn new(grid: SeasonalGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() % grid.periods_per_day != 0 {
            return Err(Error::Data(format!(
                "{} values is not a whole number of {}-period days",
                values.len(),
                grid.periods_per_day
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            let m1 = grid.periods_per_day;
            return Err(Error::Data(format!(
                "non-positive load {} on {} slot {}",
                values[i],
                grid.date_of_day(i / m1),
                i % m1
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &SeasonalGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn periods_per_day(&self) -> usize {
        self.grid.periods_per_day
    }

    pub fn n_days(&self) -> usize {
        self.values.len() / self.grid.periods_per_day
    }

    pub fn start(&self) -> NaiveDate {
        self.grid.series_start
    }

    /// Last covered date.
    pub fn end(&self) -> NaiveDate {
        self.grid.date_of_day(self.n_days().saturating_sub(1))
    }

    pub fn day(&self, day: usize) -> &[f64] {
        let m1 = self.grid.periods_per_day;
        &self.values[day * m1..(day + 1) * m1]
    }

    /// Intraday values on `date`.
    pub fn day_of(&self, date: NaiveDate) -> Result<&[f64]> {
        let d = self.grid.day_of_date(date)?;
        if d >= self.n_days() {
            return Err(Error::DateOutOfRange(date));
        }
        Ok(self.day(d))
    }

    /// First period of `date`.
    pub fn period_of(&self, date: NaiveDate) -> Result<usize> {
        let d = self.grid.day_of_date(date)?;
        if d >= self.n_days() {
            return Err(Error::DateOutOfRange(date));
        }
        Ok(d * self.grid.periods_per_day)
    }

    /// Days `from..=to` as a new series.
    pub fn slice_dates(&self, from: NaiveDate, to: NaiveDate) -> Result<LoadSeries> {
        let a = self.period_of(from)?;
        let b = self.period_of(to)? + self.grid.periods_per_day;
        Ok(LoadSeries {
            grid: SeasonalGrid {
                periods_per_day: self.grid.periods_per_day,
                series_start: from,
            },
            values: self.values[a..b].to_vec(),
        })
    }

    /// Number of calendar years touched by the series.
    pub fn years(&self) -> (i32, i32) {
        (self.start().year(), self.end().year())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> SeasonalGrid {
        SeasonalGrid::new(4, NaiveDate::from_ymd_opt(2001, 1, 1).unwrap()).unwrap()
    }

    #[test]
    fn validation() {
        assert!(LoadSeries::new(grid(), vec![1.0; 8]).is_ok());
        assert!(LoadSeries::new(grid(), vec![1.0; 7]).is_err());
        let mut v = vec![1.0; 8];
        v[5] = 0.0;
        let err = LoadSeries::new(grid(), v).unwrap_err().to_string();
        assert!(err.contains("2001-01-02") && err.contains("slot 1"), "{err}");
    }

    #[test]
    fn day_access_and_slicing() {
        let s = LoadSeries::new(grid(), (1..=12).map(f64::from).collect()).unwrap();
        assert_eq!(s.n_days(), 3);
        assert_eq!(s.end(), NaiveDate::from_ymd_opt(2001, 1, 3).unwrap());
        assert_eq!(s.day_of(NaiveDate::from_ymd_opt(2001, 1, 2).unwrap()).unwrap(), &[5.0, 6.0, 7.0, 8.0]);
        let t = s
            .slice_dates(NaiveDate::from_ymd_opt(2001, 1, 2).unwrap(), NaiveDate::from_ymd_opt(2001, 1, 3).unwrap())
            .unwrap();
        assert_eq!(t.values(), &[5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0]);
        assert!(s.day_of(NaiveDate::from_ymd_opt(2001, 1, 4).unwrap()).is_err());
    }
}
