use std::f64::consts::PI;

use super::model::{residuals, LagContext, Regime};
use super::{SarmaOrders, SarmaParams};
use crate::error::{Error, Result};

/// Log-likelihood reported for inadmissible parameters.
pub const PENALTY_LOG_LIKELIHOOD: f64 = -1e300;

/// Sample sizes of the likelihood: the first 365 days are excluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LikelihoodContext {
    pub n: usize,
    pub n_normal: usize,
    pub n_special: usize,
    pub burn_in: usize,
}

impl LikelihoodContext {
    pub fn new(regime: &[Regime], periods_per_day: usize) -> Result<Self> {
        Self::with_burn_in(regime, 365 * periods_per_day)
    }

    pub fn with_burn_in(regime: &[Regime], burn_in: usize) -> Result<Self> {
        if regime.len() <= burn_in {
            return Err(Error::Data(format!(
                "series of {} periods does not exceed the burn-in of {burn_in}",
                regime.len()
            )));
        }
        let n_special = regime[burn_in..].iter().filter(|r| **r == Regime::Special).count();
        Ok(Self {
            n: regime.len(),
            n_normal: regime.len() - burn_in - n_special,
            n_special,
            burn_in,
        })
    }
}

/// Dual-variance Gaussian log-likelihood of the residuals after `burn_in`.
pub fn gaussian_log_likelihood(
    eps: &[f64],
    regime: &[Regime],
    burn_in: usize,
    sigma2_normal: f64,
    sigma2_special: f64,
) -> Result<f64> {
    if !(sigma2_normal > 0.0 && sigma2_special > 0.0) {
        return Err(Error::Parameter(format!(
            "variances must be positive (normal {sigma2_normal}, special {sigma2_special})"
        )));
    }
    let (ssn, nn, sss, ns) = regime_sums(eps, regime, burn_in);
    Ok(-(nn as f64) / 2.0 * (2.0 * PI * sigma2_normal).ln()
        - (ns as f64) / 2.0 * (2.0 * PI * sigma2_special).ln()
        - ssn / (2.0 * sigma2_normal)
        - sss / (2.0 * sigma2_special))
}

fn regime_sums(eps: &[f64], regime: &[Regime], burn_in: usize) -> (f64, usize, f64, usize) {
    let mut ssn = 0.0;
    let mut sss = 0.0;
    let mut nn = 0;
    let mut ns = 0;
    for (e, r) in eps.iter().zip(regime).skip(burn_in) {
        match r {
            Regime::Normal => {
                ssn += e * e;
                nn += 1;
            }
            Regime::Special => {
                sss += e * e;
                ns += 1;
            }
        }
    }
    (ssn, nn, sss, ns)
}

/// Variances maximizing the likelihood for fixed residuals, and the
/// resulting log-likelihood. With no special periods the special variance
/// reported equals the normal one.
pub fn profile_log_likelihood(eps: &[f64], regime: &[Regime], burn_in: usize) -> (f64, f64, f64) {
    let (ssn, nn, sss, ns) = regime_sums(eps, regime, burn_in);
    let var = |ss: f64, n: usize| (ss / n as f64).max(f64::MIN_POSITIVE);
    let s2n = if nn > 0 { var(ssn, nn) } else { var(sss, ns) };
    let s2s = if ns > 0 { var(sss, ns) } else { s2n };
    let ll = -(nn as f64) / 2.0 * ((2.0 * PI * s2n).ln() + 1.0) - (ns as f64) / 2.0 * ((2.0 * PI * s2s).ln() + 1.0);
    (s2n, s2s, ll)
}

/// Log-likelihood of the model on `series` using the parameters' variances.
pub fn log_likelihood(params: &SarmaParams, orders: &SarmaOrders, series: &[f64], ctx: &LagContext) -> Result<f64> {
    params.validate(orders)?;
    let lik = LikelihoodContext::new(&vec![Regime::Normal; series.len()], ctx.periods_per_day())?;
    if !params.is_admissible(ctx.periods_per_day()) {
        return Ok(PENALTY_LOG_LIKELIHOOD);
    }
    let r = residuals(params, orders, series, ctx)?;
    gaussian_log_likelihood(&r.eps, &r.regime, lik.burn_in, params.sigma2_normal, params.sigma2_special)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_normal_residuals() {
        let eps = [9.0, 1.0, -1.0, 0.0];
        let reg = [Regime::Normal; 4];
        let ll = gaussian_log_likelihood(&eps, &reg, 1, 1.0, 1.0).unwrap();
        let want = -1.5 * (2.0 * PI).ln() - 1.0;
        assert!((ll - want).abs() < 1e-12);
        assert!((ll - -3.7568).abs() < 1e-4);
        let special = gaussian_log_likelihood(&eps, &[Regime::Special; 4], 1, 7.0, 1.0).unwrap();
        assert!((special - ll).abs() < 1e-12);
    }

    #[test]
    fn doubling_variance_with_zero_residuals() {
        let eps = [0.0; 10];
        let reg = [Regime::Normal; 10];
        let a = gaussian_log_likelihood(&eps, &reg, 0, 1.0, 1.0).unwrap();
        let b = gaussian_log_likelihood(&eps, &reg, 0, 2.0, 1.0).unwrap();
        assert!((a - b - 5.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn non_positive_variance_is_an_error() {
        assert!(gaussian_log_likelihood(&[0.0], &[Regime::Normal], 0, 0.0, 1.0).is_err());
        assert!(gaussian_log_likelihood(&[0.0], &[Regime::Normal], 0, 1.0, -1.0).is_err());
    }

    #[test]
    fn profile_maximizes() {
        let eps = [0.5, -1.0, 2.0, 0.3, -0.7, 1.1];
        let reg = [
            Regime::Normal,
            Regime::Special,
            Regime::Normal,
            Regime::Special,
            Regime::Normal,
            Regime::Special,
        ];
        let (s2n, s2s, ll) = profile_log_likelihood(&eps, &reg, 0);
        let direct = gaussian_log_likelihood(&eps, &reg, 0, s2n, s2s).unwrap();
        assert!((ll - direct).abs() < 1e-12);
        for (dn, ds) in [(1.1, 1.0), (0.9, 1.0), (1.0, 1.1), (1.0, 0.9)] {
            let other = gaussian_log_likelihood(&eps, &reg, 0, s2n * dn, s2s * ds).unwrap();
            assert!(other < ll);
        }
    }

    #[test]
    fn context_counts() {
        let mut reg = vec![Regime::Normal; 3000];
        for r in reg.iter_mut().skip(2950) {
            *r = Regime::Special;
        }
        reg[10] = Regime::Special;
        let c = LikelihoodContext::new(&reg, 8).unwrap();
        assert_eq!(c.burn_in, 2920);
        assert_eq!(c.n_special, 50);
        assert_eq!(c.n_normal + c.n_special, c.n - c.burn_in);
        assert!(LikelihoodContext::new(&reg[..2920], 8).is_err());
    }
}
