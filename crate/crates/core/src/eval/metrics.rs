use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

fn relative_errors(forecasts: &[f64], actuals: &[f64]) -> Result<Vec<f64>> {
    if forecasts.len() != actuals.len() {
        return Err(Error::Metric(format!(
            "{} forecasts against {} actuals",
            forecasts.len(),
            actuals.len()
        )));
    }
    if forecasts.is_empty() {
        return Err(Error::Metric("empty group".into()));
    }
    forecasts
        .iter()
        .zip(actuals)
        .enumerate()
        .map(|(i, (f, a))| {
            if *a == 0.0 {
                Err(Error::Metric(format!("zero actual at position {i}")))
            } else {
                Ok((f - a) / a)
            }
        })
        .collect()
}

/// Mean absolute percentage error, in percent.
pub fn mape(forecasts: &[f64], actuals: &[f64]) -> Result<f64> {
    let r = relative_errors(forecasts, actuals)?;
    Ok(100.0 * r.iter().map(|e| e.abs()).sum::<f64>() / r.len() as f64)
}

/// Root mean squared percentage error, in percent.
pub fn rmspe(forecasts: &[f64], actuals: &[f64]) -> Result<f64> {
    let r = relative_errors(forecasts, actuals)?;
    Ok(100.0 * (r.iter().map(|e| e * e).sum::<f64>() / r.len() as f64).sqrt())
}

/// Empirical CRPS of an ensemble against one observation, using the sorted
/// form of the pairwise term.
pub fn crps_ensemble(ensemble: &[f64], observation: f64) -> f64 {
    let n = ensemble.len();
    if n == 0 {
        return f64::NAN;
    }
    let nf = n as f64;
    let spread_to_obs = ensemble.iter().map(|x| (x - observation).abs()).sum::<f64>() / nf;
    let mut sorted = ensemble.to_vec();
    sorted.sort_by(f64::total_cmp);
    // sum over i, j of |x_i - x_j| = 2 * sum_i (2i - n + 1) x_(i)
    let pairwise: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, x)| (2.0 * i as f64 - nf + 1.0) * x)
        .sum::<f64>()
        * 2.0;
    (spread_to_obs - pairwise / (2.0 * nf * nf)).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DmResult {
    Statistic { statistic: f64, p_value: f64, n: usize },
    /// The loss differential has zero variance.
    NoDifference { n: usize },
}

impl DmResult {
    pub fn statistic(&self) -> Option<f64> {
        match self {
            DmResult::Statistic { statistic, .. } => Some(*statistic),
            DmResult::NoDifference { .. } => None,
        }
    }

    pub fn p_value(&self) -> f64 {
        match self {
            DmResult::Statistic { p_value, .. } => *p_value,
            DmResult::NoDifference { .. } => 1.0,
        }
    }
}

/// Diebold-Mariano test on squared-error differentials with a rectangular
/// long-run variance truncated at lag `h - 1`; two-sided normal p-value.
/// Positive statistics mean `a` has the larger errors.
pub fn diebold_mariano(errors_a: &[f64], errors_b: &[f64], h: usize) -> Result<DmResult> {
    if errors_a.len() != errors_b.len() {
        return Err(Error::Metric(format!(
            "error series differ in length ({} vs {})",
            errors_a.len(),
            errors_b.len()
        )));
    }
    let n = errors_a.len();
    if n < 30 {
        return Err(Error::Metric(format!("need at least 30 paired errors, found {n}")));
    }
    if h == 0 {
        return Err(Error::Metric("horizon must be at least 1".into()));
    }
    let d: Vec<f64> = errors_a.iter().zip(errors_b).map(|(a, b)| a * a - b * b).collect();
    let nf = n as f64;
    let mean = d.iter().sum::<f64>() / nf;
    let autocov = |k: usize| -> f64 { (k..n).map(|t| (d[t] - mean) * (d[t - k] - mean)).sum::<f64>() / nf };
    let gamma0 = autocov(0);
    if gamma0 <= 0.0 || d.iter().all(|x| *x == d[0]) {
        return Ok(DmResult::NoDifference { n });
    }
    let mut lrv = gamma0 + 2.0 * (1..h.min(n)).map(autocov).sum::<f64>();
    if lrv <= 0.0 {
        lrv = gamma0;
    }
    let statistic = mean / (lrv / nf).sqrt();
    let std = Normal::new(0.0, 1.0).expect("unit normal");
    let p_value = 2.0 * (1.0 - std.cdf(statistic.abs()));
    Ok(DmResult::Statistic { statistic, p_value, n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal as RNormal};

    #[test]
    fn hand_values() {
        assert_eq!(mape(&[105.0, 95.0], &[100.0, 100.0]).unwrap(), 5.0);
        assert_eq!(rmspe(&[105.0, 95.0], &[100.0, 100.0]).unwrap(), 5.0);
        assert_eq!(mape(&[100.0, 100.0], &[100.0, 100.0]).unwrap(), 0.0);
        assert_eq!(mape(&[110.0, 100.0], &[100.0, 100.0]).unwrap(), 5.0);
        assert!((rmspe(&[110.0, 100.0], &[100.0, 100.0]).unwrap() - 50f64.sqrt()).abs() < 1e-12);
        assert!(matches!(mape(&[1.0], &[0.0]), Err(Error::Metric(_))));
    }

    /// Direct double sum.
    fn crps_oracle(xs: &[f64], y: f64) -> f64 {
        let n = xs.len() as f64;
        let a = xs.iter().map(|x| (x - y).abs()).sum::<f64>() / n;
        let b: f64 = xs.iter().flat_map(|x| xs.iter().map(move |z| (x - z).abs())).sum();
        a - b / (2.0 * n * n)
    }

    #[test]
    fn crps_cases() {
        assert_eq!(crps_ensemble(&[1.0], 1.0), 0.0);
        assert_eq!(crps_ensemble(&[0.0, 2.0], 1.0), 0.5);
        assert_eq!(crps_ensemble(&[0.0], 3.0), 3.0);
    }

    proptest! {
        #[test]
        fn crps_matches_double_sum(xs in prop::collection::vec(-100.0f64..100.0, 1..40), y in -100.0f64..100.0) {
            let c = crps_ensemble(&xs, y);
            prop_assert!(c >= 0.0);
            prop_assert!((c - crps_oracle(&xs, y)).abs() < 1e-9 * (1.0 + c));
            prop_assert!((crps_ensemble(&xs[..1], y) - (xs[0] - y).abs()).abs() < 1e-12);
        }

        #[test]
        fn mape_is_scale_invariant(pairs in prop::collection::vec((1.0f64..1e4, 1.0f64..1e4), 1..30), s in 0.01f64..100.0) {
            let (f, a): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let fs: Vec<f64> = f.iter().map(|x| x * s).collect();
            let as_: Vec<f64> = a.iter().map(|x| x * s).collect();
            let m = mape(&f, &a).unwrap();
            prop_assert!((mape(&fs, &as_).unwrap() - m).abs() < 1e-9 * (1.0 + m));
        }

        #[test]
        fn dm_antisymmetric(a in prop::collection::vec(-5.0f64..5.0, 30..80), seed in 0u64..1000, h in 1usize..5) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let z = RNormal::new(0.0, 1.0).unwrap();
            let b: Vec<f64> = a.iter().map(|_| z.sample(&mut rng)).collect();
            let ab = diebold_mariano(&a, &b, h).unwrap();
            let ba = diebold_mariano(&b, &a, h).unwrap();
            match (ab, ba) {
                (DmResult::Statistic { statistic: x, p_value: p, .. }, DmResult::Statistic { statistic: y, p_value: q, .. }) => {
                    prop_assert!((x + y).abs() < 1e-9 * (1.0 + x.abs()));
                    prop_assert!((p - q).abs() < 1e-12);
                }
                (DmResult::NoDifference { .. }, DmResult::NoDifference { .. }) => {}
                other => prop_assert!(false, "{:?}", other),
            }
        }
    }

    #[test]
    fn dm_degenerate_and_errors() {
        let a: Vec<f64> = (0..50).map(|i| i as f64).collect();
        assert_eq!(diebold_mariano(&a, &a, 1).unwrap(), DmResult::NoDifference { n: 50 });
        assert!(diebold_mariano(&a[..10], &a[..10], 1).is_err());
        assert!(diebold_mariano(&a, &a[..40], 1).is_err());
    }

    #[test]
    fn dm_power_against_doubled_variance() {
        let mut rejections = 0;
        for seed in 0..200u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let wide = RNormal::new(0.0, 2f64.sqrt()).unwrap();
            let narrow = RNormal::new(0.0, 1.0).unwrap();
            let a: Vec<f64> = (0..1000).map(|_| wide.sample(&mut rng)).collect();
            let b: Vec<f64> = (0..1000).map(|_| narrow.sample(&mut rng)).collect();
            if diebold_mariano(&a, &b, 1).unwrap().statistic().unwrap() > 1.96 {
                rejections += 1;
            }
        }
        assert!(rejections >= 190, "{rejections}/200");
    }
}
