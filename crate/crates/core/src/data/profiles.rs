use chrono::{Datelike, NaiveDate};

use super::LoadSeries;
use crate::calendar::ClassifiedSpan;
use crate::error::{Error, Result};

/// Mean intraday profile per day of week, Monday first. With a
/// classification only normal days contribute.
pub fn weekday_profiles(series: &LoadSeries, normal_only: Option<&ClassifiedSpan>) -> Result<[Vec<f64>; 7]> {
    if series.n_days() < 7 {
        return Err(Error::Data("weekday profiles need at least one week".into()));
    }
    let m1 = series.periods_per_day();
    let mut sums: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; m1]);
    let mut counts = [0usize; 7];
    for d in 0..series.n_days() {
        let date = series.grid().date_of_day(d);
        if let Some(span) = normal_only {
            if !span.get(date).is_some_and(|c| c.is_normal()) {
                continue;
            }
        }
        let w = date.weekday().num_days_from_monday() as usize;
        counts[w] += 1;
        for (s, v) in sums[w].iter_mut().zip(series.day(d)) {
            *s += v;
        }
    }
    for (w, count) in counts.iter().enumerate() {
        if *count == 0 {
            return Err(Error::Data(format!("no qualifying days for weekday {w}")));
        }
        sums[w].iter_mut().for_each(|s| *s /= *count as f64);
    }
    Ok(sums)
}

/// Intraday profiles of several dates side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub slot_labels: Vec<String>,
    pub dates: Vec<NaiveDate>,
    /// `columns[i]` is the profile of `dates[i]`.
    pub columns: Vec<Vec<f64>>,
}

impl ProfileTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("slot,time");
        for d in &self.dates {
            out.push_str(&format!(",{d}"));
        }
        out.push('\n');
        for (s, label) in self.slot_labels.iter().enumerate() {
            out.push_str(&format!("{s},{label}"));
            for c in &self.columns {
                out.push_str(&format!(",{}", c[s]));
            }
            out.push('\n');
        }
        out
    }
}

pub fn compare_profiles(series: &LoadSeries, dates: &[NaiveDate]) -> Result<ProfileTable> {
    let columns = dates
        .iter()
        .map(|d| series.day_of(*d).map(<[f64]>::to_vec))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProfileTable {
        slot_labels: (0..series.periods_per_day()).map(|s| series.grid().slot_label(s)).collect(),
        dates: dates.to_vec(),
        columns,
    })
}
