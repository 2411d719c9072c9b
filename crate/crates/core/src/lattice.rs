//! Lattice coordinates and position distributions.
//!
//! Sites are stored by array index `0..N`. The walker starts at index
//! `N / 2`, which is lattice coordinate `n = 0`; coordinates run over
//! `-(N/2) ..= N - 1 - N/2`. For odd `N` this is the symmetric range
//! `[-(N-1)/2, (N-1)/2]`.

use alloc::vec::Vec;

/// Boundary condition for the conditional shift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Boundary {
    /// Open chain. Amplitude reaching an edge with an outgoing coin is an
    /// error, so the lattice must hold `2·steps + 1` sites.
    #[default]
    Open,
    /// Ring: the shift wraps `n ± 1` modulo `N`.
    Periodic,
}

/// Array index of the lattice origin.
#[inline]
pub fn origin(n_sites: usize) -> usize {
    n_sites / 2
}

/// Lattice coordinate of array index `i`.
#[inline]
pub fn coord(n_sites: usize, i: usize) -> i64 {
    i as i64 - origin(n_sites) as i64
}

/// Walker position probabilities `P_n`, indexed by lattice site.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityDistribution {
    probs: Vec<f64>,
}

impl ProbabilityDistribution {
    pub fn new(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    /// All weight on coordinate `n`.
    pub fn delta(n_sites: usize, n: i64) -> Self {
        let mut probs = alloc::vec![0.0; n_sites];
        probs[(n + origin(n_sites) as i64) as usize] = 1.0;
        Self { probs }
    }

    pub fn n_sites(&self) -> usize {
        self.probs.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    /// Probability at lattice coordinate `n`, zero outside the lattice.
    pub fn at(&self, n: i64) -> f64 {
        let i = n + origin(self.n_sites()) as i64;
        if i < 0 || i as usize >= self.n_sites() {
            0.0
        } else {
            self.probs[i as usize]
        }
    }

    /// `(n, P_n)` pairs in increasing `n`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let n = self.n_sites();
        self.probs.iter().enumerate().map(move |(i, &p)| (coord(n, i), p))
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Largest `|P_n - Q_n|`. Panics if the lattices differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n_sites(), other.n_sites());
        self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}
