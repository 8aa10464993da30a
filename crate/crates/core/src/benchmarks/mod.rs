//! Simple copy-a-past-day benchmarks and triple-seasonal Holt-Winters-Taylor
//! exponential smoothing.

mod hwt;
mod simple;

pub use hwt::{hwt_fit, HwtFitOptions, HwtForecaster, HwtParams};
pub use simple::{select_source_day, simple_benchmark, SimpleBenchmark, SimpleKind};
