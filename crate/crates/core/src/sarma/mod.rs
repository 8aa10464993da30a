//! Triple-seasonal ARMA with regime-switched annual polynomials and dual
//! innovation variances.

mod acf;
mod fit;
mod forecast;
mod likelihood;
mod model;
mod persist;
mod poly;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use acf::{acf_pacf, autocorrelations, partial_autocorrelations};
pub use fit::{fit, FitOptions, FittedSarma};
pub use forecast::{forecast_density, forecast_point, SarmaForecaster};
pub use likelihood::{gaussian_log_likelihood, log_likelihood, profile_log_likelihood, LikelihoodContext};
pub use model::{
    expand_composite_polynomials, residuals, simulate, LagContext, Recursion, Regime, ResidualSeries,
};
pub use persist::{from_document, to_document};
pub use poly::{roots_outside, LagPoly};

use crate::error::{Error, Result};

/// Roots of every non-annual factor must lie outside this radius.
pub const ROOT_RADIUS: f64 = 1.001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SarmaOrders {
    pub p: usize,
    pub q: usize,
    pub p1: usize,
    pub q1: usize,
    pub p2: usize,
    pub q2: usize,
    pub annual_depth: usize,
}

impl SarmaOrders {
    pub fn new(p: usize, q: usize, p1: usize, q1: usize, p2: usize, q2: usize, annual_depth: usize) -> Result<Self> {
        let o = Self {
            p,
            q,
            p1,
            q1,
            p2,
            q2,
            annual_depth,
        };
        o.validate()?;
        Ok(o)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.p, self.q, self.p1, self.q1, self.p2, self.q2, self.annual_depth];
        if all.iter().any(|&o| o > 3) {
            return Err(Error::Parameter(format!("orders must be at most 3, got {self}")));
        }
        Ok(())
    }

    pub fn as_array(&self) -> [usize; 7] {
        [self.p, self.q, self.p1, self.q1, self.p2, self.q2, self.annual_depth]
    }
}

impl Default for SarmaOrders {
    fn default() -> Self {
        Self {
            p: 2,
            q: 2,
            p1: 1,
            q1: 1,
            p2: 1,
            q2: 1,
            annual_depth: 3,
        }
    }
}

impl fmt::Display for SarmaOrders {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.as_array();
        write!(f, "{},{},{},{},{},{},{}", a[0], a[1], a[2], a[3], a[4], a[5], a[6])
    }
}

impl FromStr for SarmaOrders {
    type Err = Error;

    /// Parses `p,q,P1,Q1,P2,Q2,annualDepth`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|x| x.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parameter(format!("orders `{s}`: {e}")))?;
        let [p, q, p1, q1, p2, q2, d] = parts[..] else {
            return Err(Error::Parameter(format!("orders `{s}`: expected 7 comma-separated integers")));
        };
        Self::new(p, q, p1, q1, p2, q2, d)
    }
}

/// Whether special days switch to their own annual polynomials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AnnualMode {
    /// Ψ/Λ on normal days, θ/K on special days.
    #[default]
    Switched,
    /// Ψ/Λ on every day; only the innovation variance switches.
    Shared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SarmaParams {
    pub c: f64,
    /// Non-seasonal, intraday and intraweek AR coefficients.
    pub ar: Vec<f64>,
    pub ar_daily: Vec<f64>,
    pub ar_weekly: Vec<f64>,
    /// Non-seasonal, intraday and intraweek MA coefficients.
    pub ma: Vec<f64>,
    pub ma_daily: Vec<f64>,
    pub ma_weekly: Vec<f64>,
    /// Annual coefficients: AR side normal/special, MA side normal/special.
    pub psi: Vec<f64>,
    pub theta: Vec<f64>,
    pub lambda: Vec<f64>,
    pub kappa: Vec<f64>,
    pub sigma2_normal: f64,
    pub sigma2_special: f64,
}

impl SarmaParams {
    /// All coefficients zero, unit variances.
    pub fn zeros(orders: &SarmaOrders) -> Self {
        let d = orders.annual_depth;
        Self {
            c: 0.0,
            ar: vec![0.0; orders.p],
            ar_daily: vec![0.0; orders.p1],
            ar_weekly: vec![0.0; orders.p2],
            ma: vec![0.0; orders.q],
            ma_daily: vec![0.0; orders.q1],
            ma_weekly: vec![0.0; orders.q2],
            psi: vec![0.0; d],
            theta: vec![0.0; d],
            lambda: vec![0.0; d],
            kappa: vec![0.0; d],
            sigma2_normal: 1.0,
            sigma2_special: 1.0,
        }
    }

    pub fn orders(&self) -> SarmaOrders {
        SarmaOrders {
            p: self.ar.len(),
            q: self.ma.len(),
            p1: self.ar_daily.len(),
            q1: self.ma_daily.len(),
            p2: self.ar_weekly.len(),
            q2: self.ma_weekly.len(),
            annual_depth: self.psi.len(),
        }
    }

    pub fn validate(&self, orders: &SarmaOrders) -> Result<()> {
        if self.orders() != *orders || self.theta.len() != orders.annual_depth
            || self.lambda.len() != orders.annual_depth
            || self.kappa.len() != orders.annual_depth
        {
            return Err(Error::Parameter(format!(
                "coefficient lengths {} do not match orders {orders}",
                self.orders()
            )));
        }
        if !(self.sigma2_normal > 0.0 && self.sigma2_special > 0.0) {
            return Err(Error::Parameter(format!(
                "variances must be positive (normal {}, special {})",
                self.sigma2_normal, self.sigma2_special
            )));
        }
        Ok(())
    }

    /// Named coefficient groups in a fixed order (excluding `c` and variances).
    pub fn groups(&self) -> [(&'static str, &Vec<f64>); 10] {
        [
            ("ar", &self.ar),
            ("ar_daily", &self.ar_daily),
            ("ar_weekly", &self.ar_weekly),
            ("ma", &self.ma),
            ("ma_daily", &self.ma_daily),
            ("ma_weekly", &self.ma_weekly),
            ("psi", &self.psi),
            ("theta", &self.theta),
            ("lambda", &self.lambda),
            ("kappa", &self.kappa),
        ]
    }

    pub fn groups_mut(&mut self) -> [&mut Vec<f64>; 10] {
        [
            &mut self.ar,
            &mut self.ar_daily,
            &mut self.ar_weekly,
            &mut self.ma,
            &mut self.ma_daily,
            &mut self.ma_weekly,
            &mut self.psi,
            &mut self.theta,
            &mut self.lambda,
            &mut self.kappa,
        ]
    }

    /// Stationarity of the AR factors and invertibility of the MA factors,
    /// plus the `[-1, 1]` bound on annual coefficients.
    pub fn is_admissible(&self, periods_per_day: usize) -> bool {
        let m2 = periods_per_day * crate::calendar::DAYS_PER_WEEK;
        let r = |m: usize| ROOT_RADIUS.powi(m as i32);
        roots_outside(&self.ar, -1.0, r(1))
            && roots_outside(&self.ar_daily, -1.0, r(periods_per_day))
            && roots_outside(&self.ar_weekly, -1.0, r(m2))
            && roots_outside(&self.ma, 1.0, r(1))
            && roots_outside(&self.ma_daily, 1.0, r(periods_per_day))
            && roots_outside(&self.ma_weekly, 1.0, r(m2))
            && [&self.psi, &self.theta, &self.lambda, &self.kappa]
                .iter()
                .all(|v| v.iter().all(|x| x.abs() <= 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_parse_and_validate() {
        let o: SarmaOrders = "2,2,1,1,1,1,3".parse().unwrap();
        assert_eq!(o, SarmaOrders::default());
        assert_eq!(o.to_string(), "2,2,1,1,1,1,3");
        assert!("1,2,3".parse::<SarmaOrders>().is_err());
        assert!("4,0,0,0,0,0,0".parse::<SarmaOrders>().is_err());
        assert!("a,0,0,0,0,0,0".parse::<SarmaOrders>().is_err());
    }

    #[test]
    fn admissibility() {
        let o = SarmaOrders::new(1, 1, 1, 0, 0, 0, 1).unwrap();
        let mut p = SarmaParams::zeros(&o);
        assert!(p.is_admissible(8));
        p.ar[0] = 0.99;
        assert!(p.is_admissible(8));
        p.ar[0] = 1.0;
        assert!(!p.is_admissible(8));
        p.ar[0] = 0.5;
        p.ma[0] = -1.2;
        assert!(!p.is_admissible(8));
        p.ma[0] = 0.3;
        p.psi[0] = -1.01;
        assert!(!p.is_admissible(8));
        // root of the intraday factor at about 1.000125 in L
        p.psi[0] = 0.0;
        p.ar_daily[0] = 0.999;
        assert!(!p.is_admissible(8));
        p.ar_daily[0] = 0.99;
        assert!(p.is_admissible(8));
    }

    #[test]
    fn validation_errors() {
        let o = SarmaOrders::new(1, 0, 0, 0, 0, 0, 0).unwrap();
        let mut p = SarmaParams::zeros(&o);
        assert!(p.validate(&o).is_ok());
        p.sigma2_special = 0.0;
        assert!(p.validate(&o).is_err());
        let other = SarmaOrders::new(2, 0, 0, 0, 0, 0, 0).unwrap();
        assert!(SarmaParams::zeros(&o).validate(&other).is_err());
    }
}
