//! Triple-seasonal ARMA errors plus per-slot indicator regressors coding how
//! far last year's same special day fell below the normal-day baseline.

mod indicators;
mod model;

pub use indicators::{
    code_from_pct, compute_indicators, BaselineStepping, Code, IndicatorEntry, IndicatorOptions, IndicatorTable,
};
pub use model::{sarmax_fit, sarmax_log_likelihood, Coding, SarmaxFit, SarmaxFitOptions, SarmaxForecaster, SarmaxParams};
