use super::plan::AnnualLagPlan;
use crate::calendar::PeriodIndex;

/// Deepest annual lag chain the models use.
pub const MAX_ANNUAL_DEPTH: usize = 3;

/// Cumulative annual lags, in periods, for one period: the first is `m3(t)`,
/// each next one adds the lag of the day reached by the previous one.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LagChain {
    pub lags: Vec<usize>,
}

impl LagChain {
    pub fn depth(&self) -> usize {
        self.lags.len()
    }
}

/// Cumulative annual lags in days for the plan day `day`, stopping before
/// the chain leaves the plan.
pub fn day_lag_chain(day: usize, plan: &AnnualLagPlan, depth: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(depth);
    let mut total = 0usize;
    while out.len() < depth {
        let Some(entry) = plan.entry(day - total) else {
            break;
        };
        let next = total + entry.m3_days as usize;
        if next > day {
            break;
        }
        total = next;
        out.push(total);
    }
    out
}

/// Resolves up to `depth` chained annual lags for period `t`; lags that
/// would reach before the first period are dropped.
pub fn resolve_lag_chain(t: PeriodIndex, plan: &AnnualLagPlan, periods_per_day: usize, depth: usize) -> LagChain {
    let day = t.0 / periods_per_day;
    let lags = day_lag_chain(day, plan, depth)
        .into_iter()
        .map(|d| d * periods_per_day)
        .take_while(|&lag| lag <= t.0)
        .collect();
    LagChain { lags }
}
