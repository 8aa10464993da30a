use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{Days, NaiveDate};

use super::LoadSeries;
use crate::calendar::SeasonalGrid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CsvOptions {
    /// Periods per day; inferred from the largest slot when absent.
    pub periods_per_day: Option<usize>,
    /// Fill isolated single-period gaps by linear interpolation.
    pub interpolate_single_gaps: bool,
}

#[derive(serde::Deserialize)]
struct Row {
    date: NaiveDate,
    slot: usize,
    load_mw: f64,
}

const MAX_LISTED: usize = 10;

fn listing(items: &[String]) -> String {
    let mut s = items.iter().take(MAX_LISTED).cloned().collect::<Vec<_>>().join(", ");
    if items.len() > MAX_LISTED {
        s.push_str(&format!(" and {} more", items.len() - MAX_LISTED));
    }
    s
}

/// Reads a `date,slot,load_mw` CSV.
pub fn load_csv(path: &Path, opts: &CsvOptions) -> Result<LoadSeries> {
    let file = std::fs::File::open(path)?;
    read_csv(file, opts)
}

pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<LoadSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut cells: BTreeMap<(NaiveDate, usize), f64> = BTreeMap::new();
    let mut duplicates = Vec::new();
    let mut non_positive = Vec::new();
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| Error::Data(format!("row {}: {e}", i + 2)))?;
        if !(row.load_mw.is_finite() && row.load_mw > 0.0) {
            non_positive.push(format!("{} slot {} ({})", row.date, row.slot, row.load_mw));
        }
        if cells.insert((row.date, row.slot), row.load_mw).is_some() {
            duplicates.push(format!("{} slot {}", row.date, row.slot));
        }
    }
    if !duplicates.is_empty() {
        return Err(Error::Data(format!("duplicate rows: {}", listing(&duplicates))));
    }
    if !non_positive.is_empty() {
        return Err(Error::Data(format!("non-positive load: {}", listing(&non_positive))));
    }
    let (Some(&(first, _)), Some(&(last, _))) = (cells.keys().next(), cells.keys().next_back()) else {
        return Err(Error::Data("no rows".into()));
    };
    let max_slot = cells.keys().map(|k| k.1).max().unwrap_or(0);
    let m1 = opts.periods_per_day.unwrap_or(max_slot + 1);
    if max_slot >= m1 {
        return Err(Error::Data(format!("slot {max_slot} outside 0..{m1}")));
    }
    let n_days = (last - first).num_days() as usize + 1;
    let mut values = vec![f64::NAN; n_days * m1];
    for (&(date, slot), &v) in &cells {
        values[(date - first).num_days() as usize * m1 + slot] = v;
    }
    let missing: Vec<usize> = (0..values.len()).filter(|&i| values[i].is_nan()).collect();
    let label = |i: usize| format!("{} slot {}", first + Days::new((i / m1) as u64), i % m1);
    if !missing.is_empty() {
        let isolated = |i: usize| i > 0 && i + 1 < values.len() && !values[i - 1].is_nan() && !values[i + 1].is_nan();
        if opts.interpolate_single_gaps && missing.iter().all(|&i| isolated(i)) {
            for &i in &missing {
                values[i] = 0.5 * (values[i - 1] + values[i + 1]);
                log::info!("interpolated missing value at {}", label(i));
            }
        } else {
            let rows: Vec<String> = missing.iter().map(|&i| label(i)).collect();
            return Err(Error::Data(format!("missing rows: {}", listing(&rows))));
        }
    }
    LoadSeries::new(SeasonalGrid::new(m1, first)?, values)
}

/// Writes the series as `date,slot,load_mw` using the shortest exact
/// decimal form of every value.
pub fn write_csv<W: Write>(series: &LoadSeries, mut out: W) -> Result<()> {
    writeln!(out, "date,slot,load_mw")?;
    let m1 = series.periods_per_day();
    for (i, v) in series.values().iter().enumerate() {
        writeln!(out, "{},{},{}", series.grid().date_of_day(i / m1), i % m1, v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text(rows: &[(&str, usize, f64)]) -> String {
        let mut s = String::from("date,slot,load_mw\n");
        for (d, slot, v) in rows {
            s.push_str(&format!("{d},{slot},{v}\n"));
        }
        s
    }

    fn two_days() -> Vec<(&'static str, usize, f64)> {
        let mut rows = Vec::new();
        for d in ["2009-07-13", "2009-07-14"] {
            for s in 0..48 {
                rows.push((d, s, 50_000.0 + s as f64));
            }
        }
        rows
    }

    #[test]
    fn two_full_days() {
        let s = read_csv(text(&two_days()).as_bytes(), &CsvOptions::default()).unwrap();
        assert_eq!(s.len(), 96);
        assert_eq!(s.periods_per_day(), 48);
    }

    #[test]
    fn missing_row_is_named() {
        let mut rows = two_days();
        rows.remove(60);
        let err = read_csv(text(&rows).as_bytes(), &CsvOptions::default()).unwrap_err().to_string();
        assert!(err.contains("2009-07-14 slot 12"), "{err}");
    }

    #[test]
    fn single_gap_interpolation_is_opt_in() {
        let mut rows = two_days();
        rows.remove(60);
        let opts = CsvOptions {
            interpolate_single_gaps: true,
            ..Default::default()
        };
        let s = read_csv(text(&rows).as_bytes(), &opts).unwrap();
        assert_eq!(s.values()[60], 50_012.0);
        rows.remove(60);
        assert!(read_csv(text(&rows).as_bytes(), &opts).is_err());
    }

    #[test]
    fn duplicate_and_non_positive_rows() {
        let mut rows = two_days();
        rows.push(("2009-07-13", 5, 1.0));
        let err = read_csv(text(&rows).as_bytes(), &CsvOptions::default()).unwrap_err().to_string();
        assert!(err.contains("duplicate") && err.contains("2009-07-13 slot 5"), "{err}");
        let mut rows = two_days();
        rows[3].2 = -4.0;
        assert!(read_csv(text(&rows).as_bytes(), &CsvOptions::default()).is_err());
    }

    #[test]
    fn write_then_read_is_identity() {
        let grid = SeasonalGrid::new(4, NaiveDate::from_ymd_opt(2004, 2, 28).unwrap()).unwrap();
        let values = vec![0.1 + 0.2, 1e-3, 123456.789, 5.0, 7.25, 1.0 / 3.0, 2.0f64.sqrt(), 9e10];
        let s = LoadSeries::new(grid, values).unwrap();
        let mut buf = Vec::new();
        write_csv(&s, &mut buf).unwrap();
        let back = read_csv(buf.as_slice(), &CsvOptions { periods_per_day: Some(4), ..Default::default() }).unwrap();
        assert_eq!(back, s);
    }
}
