use crate::error::{Error, Result};

/// Sample autocorrelations for lags `1..=max_lag`.
pub fn autocorrelations(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if n <= max_lag {
        return Err(Error::Correlation(format!("{n} values cannot give lag {max_lag}")));
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let d: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let c0: f64 = d.iter().map(|v| v * v).sum();
    if c0 <= f64::EPSILON * mean.abs().max(1.0) * n as f64 {
        return Err(Error::Correlation("constant series has no autocorrelation".into()));
    }
    Ok((1..=max_lag)
        .map(|k| d[k..].iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() / c0)
        .collect())
}

/// Partial autocorrelations from the autocorrelations (Durbin-Levinson).
pub fn partial_autocorrelations(acf: &[f64]) -> Vec<f64> {
    let mut pacf = Vec::with_capacity(acf.len());
    let mut phi: Vec<f64> = Vec::new();
    for k in 0..acf.len() {
        let num = acf[k] - phi.iter().enumerate().map(|(j, p)| p * acf[k - 1 - j]).sum::<f64>();
        let den = 1.0 - phi.iter().enumerate().map(|(j, p)| p * acf[j]).sum::<f64>();
        let kk = num / den;
        let next: Vec<f64> = phi
            .iter()
            .enumerate()
            .map(|(j, p)| p - kk * phi[k - 1 - j])
            .chain(std::iter::once(kk))
            .collect();
        phi = next;
        pacf.push(kk);
    }
    pacf
}

/// Autocorrelation and partial autocorrelation functions up to `max_lag`.
pub fn acf_pacf(x: &[f64], max_lag: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let acf = autocorrelations(x, max_lag)?;
    let pacf = partial_autocorrelations(&acf);
    Ok((acf, pacf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut r)).collect()
    }

    #[test]
    fn white_noise_is_uncorrelated() {
        let x = noise(4000, 1);
        let (acf, _) = acf_pacf(&x, 5).unwrap();
        assert!(acf[0].abs() < 2.0 / 4000f64.sqrt());
    }

    #[test]
    fn ar1_signature() {
        let e = noise(20_000, 2);
        let mut x = vec![0.0; e.len()];
        for t in 1..x.len() {
            x[t] = 0.8 * x[t - 1] + e[t];
        }
        let (acf, pacf) = acf_pacf(&x, 3).unwrap();
        assert!((acf[0] - 0.8).abs() < 0.05);
        assert!((pacf[0] - acf[0]).abs() < 1e-12);
        assert!(pacf[1].abs() < 0.03);
    }

    #[test]
    fn pacf_of_ar2_correlations() {
        // theoretical ACF of x_t = 0.5 x_{t-1} + 0.3 x_{t-2}
        let r1 = 0.5 / (1.0 - 0.3);
        let r2 = 0.5 * r1 + 0.3;
        let r3 = 0.5 * r2 + 0.3 * r1;
        let p = partial_autocorrelations(&[r1, r2, r3]);
        assert!((p[1] - 0.3).abs() < 1e-12);
        assert!(p[2].abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(autocorrelations(&[1.0; 50], 3).is_err());
        assert!(autocorrelations(&[1.0, 2.0], 2).is_err());
    }
}
