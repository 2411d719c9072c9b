//! Walker dynamics inside one conserved spin sector.
//!
//! With the spins frozen in an `X`-basis configuration `s = (s_1, …, s_N)`,
//! the step operator reduces to `W_s = T · C · D_s`, where `D_s` multiplies
//! the amplitude on site `n` by `exp(iφ s_n)`, `C = exp(-iθX)` acts on the coin
//! and `T` moves coin 0 one site right and coin 1 one site left.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, TAU};
#[allow(unused_imports)] // float methods come from here without std
use num_traits::Float;

use crate::lattice::{self, Boundary, ProbabilityDistribution};
use crate::{Error, Result, C64};

/// Coin angle used unless overridden.
pub const DEFAULT_THETA: f64 = core::f64::consts::FRAC_PI_4;

/// Parameters shared by every engine.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkParams {
    /// Coin rotation angle θ.
    pub theta: f64,
    /// Walker–spin interaction angle φ.
    pub phi: f64,
    pub n_sites: usize,
    pub steps: usize,
    /// Initial coin amplitudes `(a_0, a_1)` at the origin.
    pub coin_init: [C64; 2],
    /// Initial `Z`-basis spin per site; `true` is `|1⟩`.
    pub spin_init: Vec<bool>,
    pub boundary: Boundary,
}

impl WalkParams {
    /// Defaults: θ = π/4, balanced coin `(1,1)/√2`, all spins `|0⟩`, open
    /// lattice of `2·steps + 1` sites.
    pub fn new(phi: f64, steps: usize) -> Self {
        let n_sites = 2 * steps + 1;
        Self {
            theta: DEFAULT_THETA,
            phi,
            n_sites,
            steps,
            coin_init: [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)],
            spin_init: alloc::vec![false; n_sites],
            boundary: Boundary::Open,
        }
    }

    /// Ring of `n_sites` sites.
    pub fn periodic(phi: f64, steps: usize, n_sites: usize) -> Self {
        Self::new(phi, steps).with_sites(n_sites).with_boundary(Boundary::Periodic)
    }

    /// Resizes the lattice, resetting the spins to `|0⟩`.
    pub fn with_sites(mut self, n_sites: usize) -> Self {
        self.n_sites = n_sites;
        self.spin_init = alloc::vec![false; n_sites];
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_coin(mut self, coin: [C64; 2]) -> Self {
        self.coin_init = coin;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.into()));
        if self.n_sites == 0 {
            return bad("lattice must have at least one site");
        }
        let norm = self.coin_init[0].norm_sqr() + self.coin_init[1].norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return bad("initial coin state is not normalized");
        }
        for (name, a) in [("theta", self.theta), ("phi", self.phi)] {
            if !(0.0..TAU).contains(&a) {
                return Err(Error::InvalidParams(alloc::format!("{name} = {a} is outside [0, 2π)")));
            }
        }
        if self.spin_init.len() != self.n_sites {
            return Err(Error::LengthMismatch { expected: self.n_sites, found: self.spin_init.len() });
        }
        if self.boundary == Boundary::Open {
            if self.n_sites % 2 == 0 {
                return bad("open lattices need an odd number of sites");
            }
            if self.n_sites < 2 * self.steps + 1 {
                return Err(Error::InvalidParams(alloc::format!(
                    "open lattice of {} sites is too small for {} steps (need {})",
                    self.n_sites,
                    self.steps,
                    2 * self.steps + 1
                )));
            }
        }
        Ok(())
    }
}

/// `X`-basis spin configuration labelling one conserved block.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpinSector {
    signs: Vec<i8>,
}

impl SpinSector {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidParams("sector entries must be ±1".into()));
        }
        Ok(Self { signs })
    }

    /// Uniform sector with every `s_n = sign`.
    pub fn polarized(n_sites: usize, sign: i8) -> Self {
        assert!(sign == 1 || sign == -1);
        Self { signs: alloc::vec![sign; n_sites] }
    }

    /// Sector whose `n`-th entry is `-1` exactly when bit `n` of `index` is set.
    pub fn from_index(n_sites: usize, index: u64) -> Self {
        assert!(n_sites <= 64);
        let signs = (0..n_sites).map(|n| if (index >> n) & 1 == 1 { -1 } else { 1 }).collect();
        Self { signs }
    }

    /// Inverse of [`SpinSector::from_index`]. Sites beyond 64 are ignored.
    pub fn index(&self) -> u64 {
        self.signs.iter().take(64).enumerate().fold(0, |acc, (n, &s)| if s < 0 { acc | (1 << n) } else { acc })
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    /// The sector `-s`.
    pub fn flipped(&self) -> Self {
        Self { signs: self.signs.iter().map(|s| -s).collect() }
    }

    /// Mirror image `s_n -> s_{-n}` about the lattice origin (odd `N`).
    pub fn reflected(&self) -> Self {
        let mut signs = self.signs.clone();
        signs.reverse();
        Self { signs }
    }
}

/// Walker amplitudes `a_{c,n}` within one sector.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorState {
    amps: Vec<[C64; 2]>,
    /// Half-open index range outside which every amplitude is exactly zero.
    support: (usize, usize),
}

impl SectorState {
    /// Walker at the origin with the given coin state.
    pub fn localized(n_sites: usize, coin: [C64; 2]) -> Self {
        Self::at_site(n_sites, lattice::origin(n_sites), coin)
    }

    /// Walker at array index `site` with the given coin state.
    pub fn at_site(n_sites: usize, site: usize, coin: [C64; 2]) -> Self {
        let mut amps = alloc::vec![[C64::new(0.0, 0.0); 2]; n_sites];
        amps[site] = coin;
        Self { amps, support: (site, site + 1) }
    }

    /// Initial state described by `params`.
    pub fn initial(params: &WalkParams) -> Self {
        Self::localized(params.n_sites, params.coin_init)
    }

    /// Arbitrary amplitudes, indexed `[site][coin]`.
    pub fn from_amplitudes(amps: Vec<[C64; 2]>) -> Self {
        let n = amps.len();
        Self { amps, support: (0, n) }
    }

    pub fn n_sites(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[[C64; 2]] {
        &self.amps
    }

    /// Amplitude of coin `c` at lattice coordinate `n`.
    pub fn amplitude(&self, c: usize, n: i64) -> C64 {
        let i = n + lattice::origin(self.n_sites()) as i64;
        self.amps[i as usize][c]
    }

    /// Index range outside which every amplitude is exactly zero.
    pub fn support(&self) -> core::ops::Range<usize> {
        self.support.0..self.support.1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a[0].norm_sqr() + a[1].norm_sqr()).sum()
    }

    fn active(&mut self) -> &mut [[C64; 2]] {
        let (lo, hi) = self.support;
        &mut self.amps[lo..hi]
    }
}

/// `exp(-iθX) = [[cos θ, -i sin θ], [-i sin θ, cos θ]]`.
pub fn coin_matrix(theta: f64) -> [[C64; 2]; 2] {
    let c = C64::new(theta.cos(), 0.0);
    let s = C64::new(0.0, -theta.sin());
    [[c, s], [s, c]]
}

#[inline]
fn mat2_apply(m: &[[C64; 2]; 2], v: [C64; 2]) -> [C64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// Applies `exp(-iθX)` to the coin at every site.
pub fn apply_coin(state: &mut SectorState, theta: f64) {
    let m = coin_matrix(theta);
    for a in state.active() {
        *a = mat2_apply(&m, *a);
    }
}

/// Conditional shift `Σ |c⟩⟨c| ⊗ |n + (-1)^c⟩⟨n|`.
pub fn apply_shift(state: &mut SectorState, boundary: Boundary) -> Result<()> {
    let n = state.n_sites();
    let zero = C64::new(0.0, 0.0);
    match boundary {
        Boundary::Open => {
            if state.amps[n - 1][0] != zero {
                return Err(Error::EdgeOverflow { site: n - 1 });
            }
            if state.amps[0][1] != zero {
                return Err(Error::EdgeOverflow { site: 0 });
            }
            let (lo, hi) = state.support;
            let lo = lo.saturating_sub(1);
            let hi = (hi + 1).min(n);
            for i in (lo + 1..hi).rev() {
                state.amps[i][0] = state.amps[i - 1][0];
            }
            state.amps[lo][0] = zero;
            for i in lo..hi - 1 {
                state.amps[i][1] = state.amps[i + 1][1];
            }
            state.amps[hi - 1][1] = zero;
            state.support = (lo, hi);
        }
        Boundary::Periodic => {
            let last0 = state.amps[n - 1][0];
            for i in (1..n).rev() {
                state.amps[i][0] = state.amps[i - 1][0];
            }
            state.amps[0][0] = last0;
            let first1 = state.amps[0][1];
            for i in 0..n - 1 {
                state.amps[i][1] = state.amps[i + 1][1];
            }
            state.amps[n - 1][1] = first1;
            state.support = (0, n);
        }
    }
    Ok(())
}

/// Multiplies the amplitude on site `n` by `exp(iφ s_n)`.
pub fn apply_disorder_phase(state: &mut SectorState, sector: &SpinSector, phi: f64) -> Result<()> {
    if sector.len() != state.n_sites() {
        return Err(Error::LengthMismatch { expected: state.n_sites(), found: sector.len() });
    }
    let (lo, hi) = state.support;
    let plus = C64::from_polar(1.0, phi);
    let minus = plus.conj();
    for (a, &s) in state.amps[lo..hi].iter_mut().zip(&sector.signs[lo..hi]) {
        let f = if s > 0 { plus } else { minus };
        a[0] *= f;
        a[1] *= f;
    }
    Ok(())
}

/// One application of `W_s = T C D_s` (phase first, shift last).
pub fn sector_step(state: &mut SectorState, sector: &SpinSector, params: &WalkParams) -> Result<()> {
    apply_disorder_phase(state, sector, params.phi)?;
    apply_coin(state, params.theta);
    apply_shift(state, params.boundary)
}

/// Precomputed `W_s` for repeated application; fuses the phase and coin.
#[derive(Clone, Debug)]
pub struct SectorStepper {
    /// `C · e^{iφ}` and `C · e^{-iφ}`.
    fused: [[[C64; 2]; 2]; 2],
    signs: Vec<i8>,
    boundary: Boundary,
}

impl SectorStepper {
    pub fn new(sector: &SpinSector, params: &WalkParams) -> Result<Self> {
        if sector.len() != params.n_sites {
            return Err(Error::LengthMismatch { expected: params.n_sites, found: sector.len() });
        }
        let coin = coin_matrix(params.theta);
        let scale = |f: C64| {
            let mut m = coin;
            for row in m.iter_mut() {
                for x in row.iter_mut() {
                    *x *= f;
                }
            }
            m
        };
        let plus = C64::from_polar(1.0, params.phi);
        Ok(Self { fused: [scale(plus), scale(plus.conj())], signs: sector.signs.clone(), boundary: params.boundary })
    }

    pub fn step(&self, state: &mut SectorState) -> Result<()> {
        let (lo, hi) = state.support;
        for (a, &s) in state.amps[lo..hi].iter_mut().zip(&self.signs[lo..hi]) {
            let m = &self.fused[(s < 0) as usize];
            *a = mat2_apply(m, *a);
        }
        apply_shift(state, self.boundary)
    }
}

/// Evolves `initial` for `t` steps in `sector`, returning the states at the
/// requested `snapshot_times` (in the order given).
pub fn evolve_sector(
    initial: &SectorState,
    sector: &SpinSector,
    params: &WalkParams,
    t: usize,
    snapshot_times: &[usize],
) -> Result<Vec<SectorState>> {
    if t > params.steps {
        return Err(Error::InvalidParams(alloc::format!("t = {t} exceeds the configured {} steps", params.steps)));
    }
    if let Some(&bad) = snapshot_times.iter().find(|&&s| s > t) {
        return Err(Error::InvalidParams(alloc::format!("snapshot time {bad} is after t = {t}")));
    }
    let stepper = SectorStepper::new(sector, params)?;
    let mut out: Vec<Option<SectorState>> = alloc::vec![None; snapshot_times.len()];
    let mut state = initial.clone();
    for step in 0..=t {
        if step > 0 {
            stepper.step(&mut state)?;
        }
        for (slot, &s) in out.iter_mut().zip(snapshot_times) {
            if s == step {
                *slot = Some(state.clone());
            }
        }
    }
    Ok(out.into_iter().map(|s| s.expect("every snapshot is reached")).collect())
}

/// `P_n = Σ_c |a_{c,n}|²`.
pub fn position_distribution(state: &SectorState) -> ProbabilityDistribution {
    ProbabilityDistribution::new(state.amps.iter().map(|a| a[0].norm_sqr() + a[1].norm_sqr()).collect())
}
