//! Averaging the walker distribution over spin sectors.
//!
//! For a `Z`-basis product spin state every sector carries weight `2^{-N}`, so
//! `P_n(t)` is the uniform average of the single-sector distributions. The
//! average is estimated by sampling sectors i.i.d. or, for small `N`, by
//! enumerating all of them.

mod diagnostics;

pub use diagnostics::{
    fit_localization_length, normalized_ipr, variance, FitWindow, LocalizationFit, DEFAULT_IPR_NORM,
};

use alloc::string::String;
use alloc::vec::Vec;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::exec::{tree_reduce, Join, Sequential};
use crate::lattice::{self, ProbabilityDistribution};
use crate::walk::{SectorState, SectorStepper, SpinSector, WalkParams};
use crate::{Error, Result};

/// Largest lattice for which exhaustive enumeration is allowed.
pub const EXHAUSTIVE_MAX_SITES: usize = 20;

/// How sectors are drawn.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnsembleConfig {
    /// Number of sampled sectors (ignored when `exhaustive`).
    pub n_samples: usize,
    pub seed: u64,
    /// Enumerate all `2^N` sectors instead of sampling.
    pub exhaustive: bool,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self { n_samples: 4000, seed: 0, exhaustive: false }
    }
}

impl EnsembleConfig {
    pub fn sampled(n_samples: usize, seed: u64) -> Self {
        Self { n_samples, seed, exhaustive: false }
    }

    pub fn exhaustive() -> Self {
        Self { n_samples: 0, seed: 0, exhaustive: true }
    }

    pub fn validate(&self, n_sites: usize) -> Result<()> {
        if self.exhaustive {
            if n_sites > EXHAUSTIVE_MAX_SITES {
                return Err(Error::TooManySites { n_sites, limit: EXHAUSTIVE_MAX_SITES });
            }
        } else if self.n_samples == 0 {
            return Err(Error::InvalidParams("n_samples must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of ensemble members for a lattice of `n_sites`.
    pub fn members(&self, n_sites: usize) -> usize {
        if self.exhaustive {
            1 << n_sites
        } else {
            self.n_samples
        }
    }

    /// Member `k`. Sampled sectors depend only on `(seed, k)`.
    pub fn sector(&self, n_sites: usize, k: usize) -> SpinSector {
        if self.exhaustive {
            return SpinSector::from_index(n_sites, k as u64);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(k as u64);
        let mut signs = Vec::with_capacity(n_sites);
        let mut bits = 0u64;
        for n in 0..n_sites {
            if n % 64 == 0 {
                bits = rng.next_u64();
            }
            signs.push(if (bits >> (n % 64)) & 1 == 1 { -1 } else { 1 });
        }
        SpinSector::new(signs).expect("entries are ±1 by construction")
    }
}

/// All members of the ensemble, in index order.
pub fn sample_sectors(n_sites: usize, config: &EnsembleConfig) -> Result<Vec<SpinSector>> {
    config.validate(n_sites)?;
    Ok((0..config.members(n_sites)).map(|k| config.sector(n_sites, k)).collect())
}

/// Named scalar time series.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableSeries {
    times: Vec<usize>,
    values: Vec<f64>,
    label: String,
}

impl ObservableSeries {
    pub fn new(label: impl Into<String>, times: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::LengthMismatch { expected: times.len(), found: values.len() });
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams("series times must be strictly increasing".into()));
        }
        Ok(Self { times, values, label: label.into() })
    }

    pub fn times(&self) -> &[usize] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Value at time `t`, if recorded.
    pub fn at(&self, t: usize) -> Option<f64> {
        self.times.binary_search(&t).ok().map(|i| self.values[i])
    }
}

/// Output of [`run_ensemble`].
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleRun {
    /// Ensemble-averaged `P_n` at each requested snapshot time, in the order
    /// requested.
    pub snapshots: Vec<(usize, ProbabilityDistribution)>,
    /// `σ²(t)` for every `t = 0..=steps`.
    pub variance: ObservableSeries,
    pub members: usize,
}

struct Partial {
    probs: Vec<Vec<f64>>,
    variance: Vec<f64>,
}

fn add_into(a: &mut [f64], b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

fn evolve_member(params: &WalkParams, sector: &SpinSector, snapshot_times: &[usize]) -> Result<Partial> {
    let n_sites = params.n_sites;
    let stepper = SectorStepper::new(sector, params)?;
    let mut state = SectorState::initial(params);
    let mut probs = alloc::vec![Vec::new(); snapshot_times.len()];
    let mut var = Vec::with_capacity(params.steps + 1);
    for t in 0..=params.steps {
        if t > 0 {
            stepper.step(&mut state)?;
        }
        let support = state.support();
        let amps = &state.amplitudes()[support.clone()];
        let v: f64 = amps
            .iter()
            .zip(support.clone())
            .map(|(a, i)| {
                let n = lattice::coord(n_sites, i) as f64;
                n * n * (a[0].norm_sqr() + a[1].norm_sqr())
            })
            .sum();
        var.push(v);
        for (slot, &s) in probs.iter_mut().zip(snapshot_times) {
            if s == t {
                *slot = state.amplitudes().iter().map(|a| a[0].norm_sqr() + a[1].norm_sqr()).collect();
            }
        }
    }
    Ok(Partial { probs, variance: var })
}

/// Evolves every ensemble member for `params.steps` steps and averages.
///
/// The sum runs as a fixed binary tree over member indices, so the result is
/// bitwise identical for every executor.
pub fn run_ensemble<E: Join>(
    exec: &E,
    params: &WalkParams,
    config: &EnsembleConfig,
    snapshot_times: &[usize],
) -> Result<EnsembleRun> {
    params.validate()?;
    config.validate(params.n_sites)?;
    if let Some(&bad) = snapshot_times.iter().find(|&&t| t > params.steps) {
        return Err(Error::InvalidParams(alloc::format!(
            "snapshot time {bad} is after the final step {}",
            params.steps
        )));
    }
    let members = config.members(params.n_sites);
    let leaf = |k: usize| -> Result<Partial> {
        let sector = config.sector(params.n_sites, k);
        evolve_member(params, &sector, snapshot_times)
    };
    let merge = |a: Result<Partial>, b: Result<Partial>| -> Result<Partial> {
        let mut a = a?;
        let b = b?;
        for (x, y) in a.probs.iter_mut().zip(&b.probs) {
            add_into(x, y);
        }
        add_into(&mut a.variance, &b.variance);
        Ok(a)
    };
    let total = tree_reduce(exec, 0, members, &leaf, &merge)?;
    let scale = 1.0 / members as f64;
    let snapshots = snapshot_times
        .iter()
        .zip(total.probs)
        .map(|(&t, p)| (t, ProbabilityDistribution::new(p.into_iter().map(|x| x * scale).collect())))
        .collect();
    let variance = ObservableSeries::new(
        "variance",
        (0..=params.steps).collect(),
        total.variance.into_iter().map(|x| x * scale).collect(),
    )?;
    Ok(EnsembleRun { snapshots, variance, members })
}

/// Ensemble-averaged `P_n(t)`, evaluated sequentially.
pub fn ensemble_distribution(
    params: &WalkParams,
    t: usize,
    config: &EnsembleConfig,
) -> Result<ProbabilityDistribution> {
    ensemble_distribution_with(&Sequential, params, t, config)
}

/// [`ensemble_distribution`] on a caller-supplied executor.
pub fn ensemble_distribution_with<E: Join>(
    exec: &E,
    params: &WalkParams,
    t: usize,
    config: &EnsembleConfig,
) -> Result<ProbabilityDistribution> {
    if t > params.steps {
        return Err(Error::InvalidParams(alloc::format!("t = {t} exceeds the configured {} steps", params.steps)));
    }
    let mut p = params.clone();
    p.steps = t;
    let mut run = run_ensemble(exec, &p, config, &[t])?;
    Ok(run.snapshots.remove(0).1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::{evolve_sector, position_distribution};
    use approx::assert_abs_diff_eq;

    #[test]
    fn sampling_is_deterministic() {
        let c = EnsembleConfig::sampled(1, 42);
        assert_eq!(sample_sectors(30, &c).unwrap(), sample_sectors(30, &c).unwrap());
        let c2 = EnsembleConfig::sampled(5, 42);
        assert_eq!(c2.sector(30, 3), sample_sectors(30, &c2).unwrap()[3]);
        assert_ne!(c2.sector(30, 0), c2.sector(30, 1));
        assert_ne!(c2.sector(30, 0), EnsembleConfig::sampled(5, 43).sector(30, 0));
    }

    #[test]
    fn sampled_signs_are_balanced() {
        let k = 100_000;
        let c = EnsembleConfig::sampled(k, 7);
        let mut sums = [0i64; 20];
        for i in 0..k {
            for (s, &x) in sums.iter_mut().zip(c.sector(20, i).signs()) {
                *s += x as i64;
            }
        }
        let bound = 3.0 * (1.0 / k as f64).sqrt();
        let ok = sums.iter().filter(|&&s| (s as f64 / k as f64).abs() < bound).count();
        assert!(ok >= 19, "only {ok} of 20 sites within the bound");
    }

    #[test]
    fn long_lattices_use_several_words() {
        let c = EnsembleConfig::sampled(1, 3);
        let s = c.sector(200, 0);
        let tail = &s.signs()[64..];
        assert!(tail.contains(&1) && tail.contains(&-1));
    }

    #[test]
    fn exhaustive_enumerates_each_sector_once() {
        let all = sample_sectors(3, &EnsembleConfig::exhaustive()).unwrap();
        assert_eq!(all.len(), 8);
        for (k, s) in all.iter().enumerate() {
            assert_eq!(s.index(), k as u64);
        }
        assert!(sample_sectors(21, &EnsembleConfig::exhaustive()).is_err());
        assert!(sample_sectors(4, &EnsembleConfig::sampled(0, 1)).is_err());
    }

    #[test]
    fn zero_coupling_gives_standard_walk() {
        let params = WalkParams::new(0.0, 25);
        let reference = {
            let s = SpinSector::polarized(params.n_sites, 1);
            let st = evolve_sector(&SectorState::initial(&params), &s, &params, 25, &[25]).unwrap();
            position_distribution(&st[0])
        };
        let p = ensemble_distribution(&params, 25, &EnsembleConfig::sampled(17, 5)).unwrap();
        assert!(p.max_abs_diff(&reference) < 1e-14);
        assert_abs_diff_eq!(p.total(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn variance_series_matches_snapshots() {
        let params = WalkParams::new(1.0, 15);
        let run = run_ensemble(&Sequential, &params, &EnsembleConfig::sampled(9, 2), &[15, 7]).unwrap();
        assert_eq!(run.variance.len(), 16);
        for (t, p) in &run.snapshots {
            assert_abs_diff_eq!(variance(p), run.variance.at(*t).unwrap(), epsilon = 1e-12);
            assert_abs_diff_eq!(p.total(), 1.0, epsilon = 1e-12);
        }
        assert_eq!(run.snapshots[0].0, 15);
    }

    #[test]
    fn series_rejects_bad_times() {
        assert!(ObservableSeries::new("x", alloc::vec![1, 1], alloc::vec![0.0, 0.0]).is_err());
        assert!(ObservableSeries::new("x", alloc::vec![1], alloc::vec![]).is_err());
    }
}
