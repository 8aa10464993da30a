//! Derivative-free minimization and numerical curvature.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Initial simplex offset along each coordinate.
    pub initial_step: f64,
    /// Stop when every vertex is within this distance of the best one...
    pub x_tol: f64,
    /// ...and the objective spread is below this.
    pub f_tol: f64,
    pub max_evals: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.05,
            x_tol: 1e-8,
            f_tol: 1e-10,
            max_evals: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Nelder-Mead simplex search with reflection 1, expansion 2, contraction
/// 0.5 and shrink 0.5.
pub fn nelder_mead_minimize<F>(mut f: F, start: &[f64], opts: &NelderMeadOptions) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> f64,
{
    let steps = vec![opts.initial_step; start.len()];
    nelder_mead_with_steps(&mut f, start, &steps, opts)
}

/// As [`nelder_mead_minimize`] with a per-coordinate initial step.
pub fn nelder_mead_with_steps<F>(f: &mut F, start: &[f64], steps: &[f64], opts: &NelderMeadOptions) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = start.len();
    let f0 = f(start);
    if !f0.is_finite() {
        return Err(Error::Fit(format!("objective is not finite at the start ({f0})")));
    }
    if n == 0 {
        return Ok(Minimum {
            x: Vec::new(),
            value: f0,
            evals: 1,
            converged: true,
        });
    }
    let mut evals = 1;
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), f0));
    for i in 0..n {
        let mut x = start.to_vec();
        let step = if steps[i] != 0.0 { steps[i] } else { opts.initial_step };
        x[i] += step;
        let v = f(&x);
        evals += 1;
        simplex.push((x, v));
    }

    let mut converged = false;
    while evals < opts.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &simplex[0];
        let spread = simplex[n].1 - best.1;
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&best.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if size <= opts.x_tol && spread <= opts.f_tol {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = f(&xe);
            evals += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = along(0.5);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = f(&xc);
            (xc, fc)
        };
        evals += 1;
        if fc < fr.min(worst.1) {
            simplex[n] = (xc, fc);
            continue;
        }
        let x0 = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            for (xi, bi) in v.0.iter_mut().zip(&x0) {
                *xi = bi + 0.5 * (*xi - bi);
            }
            v.1 = f(&v.0);
            evals += 1;
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Ok(Minimum {
        x,
        value,
        evals,
        converged,
    })
}

/// Central-difference Hessian of `f` at `x`.
pub fn numerical_hessian<F>(mut f: F, x: &[f64], steps: &[f64]) -> DMatrix<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x.len();
    let mut h = DMatrix::zeros(n, n);
    let f0 = f(x);
    let mut at = |dx: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(i, d) in dx {
            y[i] += d;
        }
        f(&y)
    };
    for i in 0..n {
        let hi = steps[i];
        let fp = at(&[(i, hi)]);
        let fm = at(&[(i, -hi)]);
        h[(i, i)] = (fp - 2.0 * f0 + fm) / (hi * hi);
        for j in 0..i {
            let hj = steps[j];
            let fpp = at(&[(i, hi), (j, hj)]);
            let fpm = at(&[(i, hi), (j, -hj)]);
            let fmp = at(&[(i, -hi), (j, hj)]);
            let fmm = at(&[(i, -hi), (j, -hj)]);
            let v = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    h
}

/// Standard errors from the inverse Hessian of a negative log-likelihood.
/// Returns `None` when the Hessian is not positive definite.
pub fn standard_errors(hessian: &DMatrix<f64>) -> Option<Vec<f64>> {
    let inv = hessian.clone().cholesky()?.inverse();
    let se: Vec<f64> = (0..inv.nrows()).map(|i| inv[(i, i)].sqrt()).collect();
    se.iter().all(|s| s.is_finite()).then_some(se)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tight() -> NelderMeadOptions {
        NelderMeadOptions {
            initial_step: 0.5,
            x_tol: 1e-10,
            f_tol: 1e-14,
            max_evals: 50_000,
        }
    }

    #[test]
    fn quadratic_bowl() {
        let m = nelder_mead_minimize(|x| (x[0] - 2.0).powi(2) + (x[1] + 1.0).powi(2), &[0.0, 0.0], &tight()).unwrap();
        assert!((m.x[0] - 2.0).abs() < 1e-4 && (m.x[1] + 1.0).abs() < 1e-4, "{:?}", m.x);
        assert!(m.converged);
    }

    #[test]
    fn absolute_value() {
        let m = nelder_mead_minimize(|x| x[0].abs(), &[5.0], &tight()).unwrap();
        assert!(m.x[0].abs() < 1e-4);
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead_minimize(f, &[-1.2, 1.0], &tight()).unwrap();
        assert!((m.x[0] - 1.0).abs() < 1e-3 && (m.x[1] - 1.0).abs() < 1e-3, "{:?}", m.x);
    }

    #[test]
    fn non_finite_start_is_an_error() {
        assert!(nelder_mead_minimize(|_| f64::NAN, &[0.0], &tight()).is_err());
    }

    #[test]
    fn hessian_of_quadratic() {
        let f = |x: &[f64]| 3.0 * x[0] * x[0] + x[0] * x[1] + 2.0 * x[1] * x[1];
        let h = numerical_hessian(f, &[0.3, -0.2], &[1e-3, 1e-3]);
        assert!((h[(0, 0)] - 6.0).abs() < 1e-6);
        assert!((h[(0, 1)] - 1.0).abs() < 1e-6);
        assert!((h[(1, 1)] - 4.0).abs() < 1e-6);
        let se = standard_errors(&h).unwrap();
        // inverse of [[6,1],[1,4]] has diagonal 4/23, 6/23
        assert!((se[0] - (4.0f64 / 23.0).sqrt()).abs() < 1e-6);
        assert!((se[1] - (6.0f64 / 23.0).sqrt()).abs() < 1e-6);
    }
}
