use std::collections::BTreeMap;

/// Sparse lag polynomial as `(lag, coefficient)` pairs in increasing lag order.
#[derive(Debug, Clone, PartialEq)]
pub struct LagPoly {
    terms: Vec<(usize, f64)>,
}

impl LagPoly {
    pub fn one() -> Self {
        Self { terms: vec![(0, 1.0)] }
    }

    /// `1 + sign·Σ c_i L^{i·spacing}`.
    pub fn seasonal_factor(coefs: &[f64], spacing: usize, sign: f64) -> Self {
        let mut terms = vec![(0, 1.0)];
        terms.extend(
            coefs
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(i, c)| ((i + 1) * spacing, sign * c)),
        );
        Self { terms }
    }

    /// Builds a polynomial from arbitrary terms, merging repeated lags.
    pub fn from_terms(terms: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for (lag, c) in terms {
            *acc.entry(lag).or_insert(0.0) += c;
        }
        Self {
            terms: acc.into_iter().filter(|(_, c)| *c != 0.0).collect(),
        }
    }

    pub fn multiply(&self, other: &LagPoly) -> LagPoly {
        Self::from_terms(
            self.terms
                .iter()
                .flat_map(|&(la, ca)| other.terms.iter().map(move |&(lb, cb)| (la + lb, ca * cb))),
        )
    }

    pub fn terms(&self) -> &[(usize, f64)] {
        &self.terms
    }

    pub fn to_map(&self) -> BTreeMap<usize, f64> {
        self.terms.iter().copied().collect()
    }
}

/// True when every root of `1 + sign·Σ c_i x^i` lies strictly outside the
/// circle of the given radius (Schur-Cohn step-down).
pub fn roots_outside(coefs: &[f64], sign: f64, radius: f64) -> bool {
    let n = match coefs.iter().rposition(|c| *c != 0.0) {
        Some(i) => i + 1,
        None => return true,
    };
    // substitute x = radius·u and test the unit circle
    let mut a: Vec<f64> = std::iter::once(1.0)
        .chain(coefs[..n].iter().enumerate().map(|(i, c)| sign * c * radius.powi(i as i32 + 1)))
        .collect();
    for m in (1..=n).rev() {
        let k = a[m];
        if !k.is_finite() || k.abs() >= 1.0 {
            return false;
        }
        let denom = 1.0 - k * k;
        let prev = a.clone();
        for i in 0..m {
            a[i] = (prev[i] - k * prev[m - i]) / denom;
        }
        a.truncate(m);
    }
    true
}
