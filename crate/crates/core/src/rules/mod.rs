//! The special-day rule: for every day, pick the corresponding past day that
//! defines the annual lag `m3`, and resolve the chained annual lags.

mod chain;
mod plan;

use chrono::{Days, NaiveDate};

use crate::calendar::{is_summer_time, PeriodIndex, SeasonalGrid};

pub use chain::{day_lag_chain, resolve_lag_chain, LagChain, MAX_ANNUAL_DEPTH};
pub use plan::{
    build_lag_plan, select_corresponding_past_day, AnnualLagPlan, PlanEntry, Rationale,
    SpecialDayIndex,
};

/// Annual lag in weeks for a normal day: 52, or 53 when the 52-week lag lands
/// in the other summer/winter-time phase.
pub fn m3_normal_weeks(date: NaiveDate) -> u32 {
    let back = date - Days::new(52 * 7);
    if is_summer_time(back) == is_summer_time(date) {
        52
    } else {
        53
    }
}

/// Annual lag, in periods, for a normal-day period.
pub fn m3_normal(t: PeriodIndex, grid: &SeasonalGrid) -> usize {
    let date = grid.date_of_day(grid.day_offset(t));
    m3_normal_weeks(date) as usize * grid.periods_per_week()
}
