pub mod benchmarks;
pub mod calendar;
pub mod data;
pub mod error;
pub mod eval;
pub mod forecast;
pub mod optim;
pub mod params_doc;
pub mod pipeline;
pub mod rng;
pub mod rules;
pub mod sarma;
pub mod sarmax;

pub use error::{Error, Result};
