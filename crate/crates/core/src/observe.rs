//! Snapshot records shared by the full-state engines.

use alloc::vec::Vec;
#[allow(unused_imports)] // float methods come from here without std
use num_traits::Float;

use crate::lattice::ProbabilityDistribution;

/// Which observables to evaluate when taking a snapshot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Observables {
    pub walker: bool,
    pub spins: bool,
    pub entropies: bool,
}

impl Default for Observables {
    fn default() -> Self {
        Self { walker: true, spins: true, entropies: true }
    }
}

impl Observables {
    pub const NONE: Self = Self { walker: false, spins: false, entropies: false };
}

/// State summary at one time step. Fields not requested are left empty.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: usize,
    pub walker: Option<ProbabilityDistribution>,
    /// `⟨X_n⟩, ⟨Y_n⟩, ⟨Z_n⟩` per site.
    pub spin_x: Vec<f64>,
    pub spin_y: Vec<f64>,
    pub spin_z: Vec<f64>,
    /// Entropy in bits at bond `k` (between sites `k` and `k + 1`).
    pub entropies: Vec<f64>,
    pub max_bond: usize,
    pub discarded_weight: f64,
}

/// `-Σ p log₂ p` over the positive entries of `weights`.
pub fn entropy_bits(weights: impl IntoIterator<Item = f64>) -> f64 {
    -weights.into_iter().filter(|&p| p > 0.0).map(|p| p * p.log2()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy_bits([1.0]), 0.0);
        assert_abs_diff_eq!(entropy_bits([0.5, 0.5]), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(entropy_bits([0.25; 4]), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(entropy_bits([0.5, 0.5, 0.0]), 1.0, epsilon = 1e-15);
    }
}
