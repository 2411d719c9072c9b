//! Scalar localization measures of a position distribution.

#[allow(unused_imports)] // float methods come from here without std
use num_traits::Float;

use alloc::vec::Vec;

use crate::lattice::ProbabilityDistribution;
use crate::stats::linear_fit;
use crate::{Error, Result};

/// Default `n_norm` for [`normalized_ipr`].
pub const DEFAULT_IPR_NORM: usize = 400;

/// Second moment `Σ n² P_n` about the origin.
pub fn variance(p: &ProbabilityDistribution) -> f64 {
    p.iter().map(|(n, pn)| (n * n) as f64 * pn).sum()
}

/// `(n_norm · Σ P_n²)^{-1}`.
pub fn normalized_ipr(p: &ProbabilityDistribution, n_norm: usize) -> f64 {
    assert!(n_norm > 0, "n_norm must be positive");
    let s: f64 = p.as_slice().iter().map(|x| x * x).sum();
    1.0 / (n_norm as f64 * s)
}

/// Sites `min_abs ≤ |n| ≤ max_abs` used by [`fit_localization_length`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FitWindow {
    pub min_abs: u64,
    pub max_abs: u64,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self { min_abs: 2, max_abs: 20 }
    }
}

impl FitWindow {
    /// Coordinates in the window, both signs, increasing.
    pub fn sites(&self) -> impl Iterator<Item = i64> + Clone {
        let (lo, hi) = (self.min_abs as i64, self.max_abs as i64);
        (-hi..=hi).filter(move |n| n.abs() >= lo)
    }
}

/// Result of fitting `P_n ∝ exp(-2|n|/λ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalizationFit {
    pub lambda: f64,
    /// RMS residual of `ln P_n` about the fitted line.
    pub residual: f64,
}

/// Least-squares fit of `ln P_n = c - 2|n|/λ` over `window`.
pub fn fit_localization_length(p: &ProbabilityDistribution, window: FitWindow) -> Result<LocalizationFit> {
    // The walker moves one site per step, so one parity sublattice is
    // identically empty at every time. Such a sublattice is left out.
    let all: Vec<i64> = window.sites().collect();
    let empty = |parity: i64| all.iter().filter(|n| n.rem_euclid(2) == parity).all(|&n| p.at(n) == 0.0);
    let sites: Vec<i64> = match (empty(0), empty(1)) {
        (false, true) => all.iter().copied().filter(|n| n.rem_euclid(2) == 0).collect(),
        (true, false) => all.iter().copied().filter(|n| n.rem_euclid(2) == 1).collect(),
        _ => all,
    };
    let points = sites.len();
    if points < 3 {
        return Err(Error::DegenerateWindow { points });
    }
    if let Some(&n) = sites.iter().find(|&&n| p.at(n).is_nan() || p.at(n) <= 0.0) {
        return Err(Error::NonPositiveProbability { n });
    }
    let pts = sites.iter().map(|&n| (n.abs() as f64, p.at(n).ln()));
    let fit = linear_fit(pts).ok_or(Error::DegenerateWindow { points })?;
    if fit.slope >= 0.0 {
        return Err(Error::NonDecayingProfile { slope: fit.slope });
    }
    Ok(LocalizationFit { lambda: -2.0 / fit.slope, residual: fit.rms_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use approx::assert_abs_diff_eq;

    fn exp_profile(half: i64, lambda: f64) -> ProbabilityDistribution {
        let raw: Vec<f64> = (-half..=half).map(|n| (-2.0 * n.abs() as f64 / lambda).exp()).collect();
        let z: f64 = raw.iter().sum();
        ProbabilityDistribution::new(raw.into_iter().map(|x| x / z).collect())
    }

    #[test]
    fn variance_examples() {
        assert_eq!(variance(&ProbabilityDistribution::delta(5, 0)), 0.0);
        let p = ProbabilityDistribution::new(alloc::vec![0.5, 0.0, 0.5]);
        assert_abs_diff_eq!(variance(&p), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn ipr_examples() {
        let uniform = ProbabilityDistribution::new(alloc::vec![0.25; 4]);
        assert_abs_diff_eq!(normalized_ipr(&uniform, 4), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(normalized_ipr(&ProbabilityDistribution::delta(9, 0), 400), 1.0 / 400.0);
        let half = ProbabilityDistribution::new(alloc::vec![0.5, 0.5, 0.0, 0.0]);
        assert_abs_diff_eq!(normalized_ipr(&half, 4), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn fit_recovers_generator() {
        for lambda in [0.4, 1.6, 3.0, 11.0] {
            let p = exp_profile(20, lambda);
            let f = fit_localization_length(&p, FitWindow::default()).unwrap();
            assert_abs_diff_eq!(f.lambda, lambda, epsilon = 1e-6 * lambda);
            assert!(f.residual < 1e-9);
        }
    }

    #[test]
    fn fit_skips_an_empty_parity_sublattice() {
        let mut v = exp_profile(20, 1.6).into_vec();
        for (i, x) in v.iter_mut().enumerate() {
            if i % 2 == 1 {
                *x = 0.0;
            }
        }
        let f = fit_localization_length(&ProbabilityDistribution::new(v), FitWindow::default()).unwrap();
        assert_abs_diff_eq!(f.lambda, 1.6, epsilon = 1e-9);
    }

    #[test]
    fn fit_errors() {
        let p = exp_profile(20, 1.6);
        let narrow = FitWindow { min_abs: 2, max_abs: 2 };
        assert_eq!(fit_localization_length(&p, narrow), Err(Error::DegenerateWindow { points: 2 }));
        let wide = FitWindow { min_abs: 2, max_abs: 21 };
        assert_eq!(fit_localization_length(&p, wide), Err(Error::NonPositiveProbability { n: -21 }));
        let flat = ProbabilityDistribution::new(alloc::vec![1.0 / 41.0; 41]);
        assert!(matches!(fit_localization_length(&flat, FitWindow::default()), Err(Error::NonDecayingProfile { .. })));
    }
}
