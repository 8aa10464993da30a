use chrono::NaiveDate;

use crate::error::{Error, Result};

/// Easter Sunday in the Gregorian calendar (anonymous computus, a.k.a.
/// Meeus/Jones/Butcher).
pub fn easter_date(year: i32) -> Result<NaiveDate> {
    if !(1583..=4099).contains(&year) {
        return Err(Error::YearOutOfRange(year));
    }
    let a = year % 19;
    let b = year / 100;
    let c = year % 100;
    let d = b / 4;
    let e = b % 4;
    let f = (b + 8) / 25;
    let g = (b - f + 1) / 3;
    let h = (19 * a + b - d - g + 15) % 30;
    let i = c / 4;
    let k = c % 4;
    let l = (32 + 2 * e + 2 * i - h - k) % 7;
    let m = (a + 11 * h + 22 * l) / 451;
    let month = (h + l - 7 * m + 114) / 31;
    let day = (h + l - 7 * m + 114) % 31 + 1;
    Ok(NaiveDate::from_ymd_opt(year, month as u32, day as u32).expect("computus yields a valid date"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    #[test]
    fn known_easter_sundays() {
        assert_eq!(easter_date(2009).unwrap(), ymd(2009, 4, 12));
        assert_eq!(easter_date(2008).unwrap(), ymd(2008, 3, 23));
        assert_eq!(easter_date(2007).unwrap(), ymd(2007, 4, 8));
        // extremes of the Gregorian range of Easter dates
        assert_eq!(easter_date(1818).unwrap(), ymd(1818, 3, 22));
        assert_eq!(easter_date(2038).unwrap(), ymd(2038, 4, 25));
    }

    #[test]
    fn out_of_range_years() {
        assert!(matches!(easter_date(1582), Err(Error::YearOutOfRange(1582))));
        assert!(easter_date(4100).is_err());
        assert!(easter_date(4099).is_ok());
    }

    #[test]
    fn always_a_sunday_between_march_22_and_april_25() {
        use chrono::{Datelike, Weekday};
        for y in 1583..=4099 {
            let e = easter_date(y).unwrap();
            assert_eq!(e.weekday(), Weekday::Sun, "{y}");
            assert!(e >= ymd(y, 3, 22) && e <= ymd(y, 4, 25), "{y}");
        }
    }
}
