use chrono::{Datelike, NaiveDate, Weekday};
use proptest::prelude::*;

use loadrule::calendar::{classify_days, is_weekend, Category, HolidayCalendar};
use loadrule::rules::{build_lag_plan, resolve_lag_chain, Rationale};

fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

fn plan_2009() -> loadrule::rules::AnnualLagPlan {
    let cal = HolidayCalendar::french(2001, 2010).unwrap();
    let span = classify_days(&cal, ymd(2001, 1, 1), ymd(2009, 12, 31)).unwrap();
    build_lag_plan(&span, ymd(2001, 1, 1))
}

#[test]
fn special_days_of_2009_and_their_past_days() {
    use Category::*;
    let expected = [
        ((1, 1), A, (2008, 1, 1)),
        ((4, 13), A, (2008, 3, 24)),
        ((5, 1), A, (2008, 5, 1)),
        ((5, 8), A, (2008, 5, 8)),
        ((5, 21), A, (2007, 5, 17)),
        ((6, 1), A, (2008, 5, 12)),
        ((7, 14), A, (2008, 7, 14)),
        ((11, 11), A, (2008, 11, 11)),
        ((12, 25), A, (2008, 12, 25)),
        ((12, 31), A, (2008, 12, 31)),
        ((11, 1), B, (2008, 11, 1)),
        ((12, 26), B, (2004, 12, 26)),
        ((7, 13), C, (2005, 7, 15)),
        ((1, 2), D, (2004, 1, 2)),
        ((5, 22), D, (2007, 5, 18)),
        ((12, 21), E, (2008, 12, 22)),
        ((12, 22), E, (2008, 12, 22)),
        ((12, 23), E, (2008, 12, 23)),
        ((12, 24), E, (2008, 12, 24)),
        ((12, 28), F, (2008, 12, 29)),
        ((12, 29), F, (2008, 12, 29)),
        ((12, 30), F, (2008, 12, 30)),
        ((12, 27), G, (2006, 12, 30)),
    ];
    let plan = plan_2009();
    for ((m, d), cat, (py, pm, pd)) in expected {
        let e = plan.get(ymd(2009, m, d)).unwrap();
        assert_eq!(e.category, Some(cat), "2009-{m:02}-{d:02}");
        assert_eq!(e.past_date, ymd(py, pm, pd), "2009-{m:02}-{d:02}");
    }
    let specials = plan
        .entries()
        .iter()
        .filter(|e| e.date.year() == 2009 && e.category.is_some())
        .count();
    assert_eq!(specials, 24);
}

#[test]
fn assumption_2009_takes_the_last_weekend_occurrence() {
    // 15/08/2004 was a Sunday, so a weekend precedent exists in the history
    let e = plan_2009().get(ymd(2009, 8, 15)).cloned().unwrap();
    assert_eq!(e.category, Some(Category::B));
    assert_eq!(e.past_date, ymd(2004, 8, 15));
    assert_eq!(e.rationale, Rationale::SameCategory);
}

#[test]
fn worked_lags() {
    let plan = plan_2009();
    assert_eq!(plan.get(ymd(2009, 5, 22)).unwrap().m3_periods(48), (365 + 366 + 4) * 48);
    assert_eq!(plan.get(ymd(2009, 7, 14)).unwrap().m3_periods(48), 365 * 48);
    assert_eq!(plan.get(ymd(2009, 7, 13)).unwrap().rationale, Rationale::Sibling(Category::D));
    let normal = plan.get(ymd(2009, 6, 16)).unwrap();
    assert_eq!(normal.past_date, ymd(2009, 6, 16) - chrono::Days::new(364));
}

#[test]
fn bastille_chain_follows_the_pairings() {
    let plan = plan_2009();
    let grid = loadrule::calendar::SeasonalGrid::half_hourly(ymd(2001, 1, 1));
    let t = grid.day_of_date(ymd(2009, 7, 14)).unwrap() * 48 + 20;
    let chain = resolve_lag_chain(loadrule::calendar::PeriodIndex(t), &plan, 48, 3);
    assert_eq!(chain.depth(), 3);
    let mut date = ymd(2009, 7, 14);
    let mut total = 0;
    for lag in chain.lags {
        let past = plan.get(date).unwrap().past_date;
        total += (date - past).num_days() as usize * 48;
        assert_eq!(lag, total);
        date = past;
    }
}

fn span_for(year: i32) -> loadrule::calendar::ClassifiedSpan {
    let cal = HolidayCalendar::french(year - 8, year + 1).unwrap();
    classify_days(&cal, ymd(year - 8, 1, 1), ymd(year, 12, 31)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rule_invariants(year in 2000i32..2040, m1 in prop::sample::select(vec![8usize, 16, 24, 48])) {
        let span = span_for(year);
        let plan = build_lag_plan(&span, span.start());
        prop_assert_eq!(plan.len(), span.len());
        for (e, day) in plan.entries().iter().zip(span.iter()) {
            prop_assert_eq!(e.date, day.date);
            prop_assert_eq!(e.category, day.category());
            let m3 = e.m3_periods(m1);
            prop_assert!(m3 > 0 && m3 % m1 == 0);
            prop_assert!(e.past_date < e.date);
            match e.category {
                Some(Category::A) => prop_assert!(!is_weekend(e.date)),
                Some(Category::B) => prop_assert!(is_weekend(e.date)),
                Some(Category::C) => prop_assert_eq!(e.date.weekday(), Weekday::Mon),
                Some(Category::D) => prop_assert_eq!(e.date.weekday(), Weekday::Fri),
                _ => {}
            }
            if e.date.year() < year {
                continue;
            }
            if matches!(e.category, Some(Category::A | Category::B)) && e.rationale == Rationale::SameCategory {
                prop_assert_eq!(is_weekend(e.date), is_weekend(e.past_date), "{}", e.date);
            }
            if e.rationale == Rationale::SameCategory {
                prop_assert_eq!(span.get(e.past_date).unwrap().category(), e.category, "{}", e.date);
            }
        }
    }
}
