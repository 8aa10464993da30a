//! Rolling-origin backtests, accuracy metrics, the Diebold-Mariano test and
//! the sliced evaluation report.

mod backtest;
mod metrics;
mod report;

pub use backtest::{rolling_backtest, BacktestRun, EvalWindow, ForecastRecord};
pub use metrics::{crps_ensemble, diebold_mariano, mape, rmspe, DmResult};
pub use report::{build_report, records_csv, ModelSummary, bucket_label, BucketRow, CrpsRow, DmRow, EvaluationReport, Slice, SpecialDayRow, TimeOfDayRow};
