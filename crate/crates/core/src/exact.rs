//! Brute-force evolution of the full walker+spin state vector.
//!
//! Amplitudes `a_{c,n,s}` are stored densely at index
//! `((c · N + i) << N) | bits`, where `i` is the site's array index and bit
//! `n` of `bits` is the `Z`-basis state of spin `n` (`1` is `|1⟩`). Memory is
//! `2 · N · 2^N` amplitudes, so lattices are capped at [`MAX_SITES`].

use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use crate::lattice::{Boundary, ProbabilityDistribution};
use crate::observe::{entropy_bits, Observables, Snapshot};
use crate::walk::{coin_matrix, SectorState, SpinSector, WalkParams};
use crate::{Axis, Error, Result, C64};

/// Largest lattice the oracle accepts.
pub const MAX_SITES: usize = 14;

/// Full state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactState {
    n_sites: usize,
    amps: Vec<C64>,
}

#[inline]
fn index(n_sites: usize, c: usize, i: usize, bits: usize) -> usize {
    ((c * n_sites + i) << n_sites) | bits
}

fn check_sites(n_sites: usize) -> Result<()> {
    if n_sites == 0 {
        return Err(Error::InvalidParams("lattice must have at least one site".into()));
    }
    if n_sites > MAX_SITES {
        return Err(Error::TooManySites { n_sites, limit: MAX_SITES });
    }
    Ok(())
}

impl ExactState {
    /// Walker at the origin with `params.coin_init`, spins in `params.spin_init`.
    pub fn initial(params: &WalkParams) -> Result<Self> {
        let n = params.n_sites;
        check_sites(n)?;
        if params.spin_init.len() != n {
            return Err(Error::LengthMismatch { expected: n, found: params.spin_init.len() });
        }
        let bits =
            params.spin_init.iter().enumerate().fold(0usize, |acc, (k, &up)| if up { acc | (1 << k) } else { acc });
        let mut amps = alloc::vec![C64::new(0.0, 0.0); (2 * n) << n];
        let o = crate::lattice::origin(n);
        for c in 0..2 {
            amps[index(n, c, o, bits)] = params.coin_init[c];
        }
        Ok(Self { n_sites: n, amps })
    }

    /// Wraps a raw amplitude vector laid out as described in the module docs.
    pub fn from_amplitudes(n_sites: usize, amps: Vec<C64>) -> Result<Self> {
        check_sites(n_sites)?;
        let want = (2 * n_sites) << n_sites;
        if amps.len() != want {
            return Err(Error::LengthMismatch { expected: want, found: amps.len() });
        }
        Ok(Self { n_sites, amps })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// Amplitude of coin `c`, site index `i`, spin bitstring `bits`.
    pub fn amplitude(&self, c: usize, i: usize, bits: usize) -> C64 {
        self.amps[index(self.n_sites, c, i, bits)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Largest `|a - b|` over all components.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n_sites, other.n_sites);
        self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    fn block(&self, c: usize, i: usize) -> &[C64] {
        let len = 1 << self.n_sites;
        let start = index(self.n_sites, c, i, 0);
        &self.amps[start..start + len]
    }

    /// `P_n`, summed over coin and spins.
    pub fn walker_distribution(&self) -> ProbabilityDistribution {
        let n = self.n_sites;
        ProbabilityDistribution::new(
            (0..n).map(|i| (0..2).flat_map(|c| self.block(c, i)).map(|a| a.norm_sqr()).sum()).collect(),
        )
    }

    /// `⟨σ^axis_site⟩` with identity on the walker.
    pub fn spin_expectation(&self, site: usize, axis: Axis) -> f64 {
        assert!(site < self.n_sites);
        let mask = 1usize << site;
        let mut acc = 0.0;
        for c in 0..2 {
            for i in 0..self.n_sites {
                let b = self.block(c, i);
                for bits in 0..b.len() {
                    if bits & mask != 0 {
                        continue;
                    }
                    let (a0, a1) = (b[bits], b[bits | mask]);
                    acc += match axis {
                        Axis::Z => a0.norm_sqr() - a1.norm_sqr(),
                        Axis::X => 2.0 * (a0.conj() * a1).re,
                        Axis::Y => 2.0 * (a0.conj() * a1).im,
                    };
                }
            }
        }
        acc
    }

    /// Entanglement entropy (bits) between sites `0..=bond` and the rest.
    ///
    /// Each half carries a walker-vacuum state, so the state splits into a
    /// "walker on the left" and a "walker on the right" piece with mutually
    /// orthogonal supports on both sides; the Schmidt spectrum is the union of
    /// the two pieces' singular values.
    pub fn bond_entropy(&self, bond: usize) -> Result<f64> {
        let n = self.n_sites;
        if bond + 1 >= n {
            return Err(Error::InvalidParams(alloc::format!("bond {bond} is not inside {n} sites")));
        }
        let nl = bond + 1;
        let (dl, dr) = (1usize << nl, 1usize << (n - nl));
        let lmask = dl - 1;

        // Walker left: rows (c, i < nl, left bits), columns right bits.
        let rows = 2 * nl * dl;
        let mut left = alloc::vec![C64::new(0.0, 0.0); rows * dr];
        for c in 0..2 {
            for i in 0..nl {
                for (bits, a) in self.block(c, i).iter().enumerate() {
                    let r = (c * nl + i) * dl + (bits & lmask);
                    left[r * dr + (bits >> nl)] = *a;
                }
            }
        }
        // Walker right: rows left bits, columns (c, i >= nl, right bits).
        let nr = n - nl;
        let cols = 2 * nr * dr;
        let mut right = alloc::vec![C64::new(0.0, 0.0); dl * cols];
        for c in 0..2 {
            for i in nl..n {
                for (bits, a) in self.block(c, i).iter().enumerate() {
                    let col = (c * nr + (i - nl)) * dr + (bits >> nl);
                    right[(bits & lmask) * cols + col] = *a;
                }
            }
        }
        let mut weights = crate::linalg::singular_values(&left, rows, dr)?;
        weights.extend(crate::linalg::singular_values(&right, dl, cols)?);
        Ok(entropy_bits(weights.into_iter().map(|s| s * s)))
    }

    /// Applies `H^{⊗N}` to the spin factor, mapping `Z`-basis bits to
    /// `X`-basis bits (`0` is `|+⟩`, `1` is `|−⟩`). The map is its own inverse.
    pub fn hadamard_spins(&mut self) {
        let len = 1usize << self.n_sites;
        for chunk in self.amps.chunks_mut(len) {
            let mut h = 1;
            while h < len {
                for start in (0..len).step_by(2 * h) {
                    for j in start..start + h {
                        let (a, b) = (chunk[j], chunk[j + h]);
                        chunk[j] = (a + b) * FRAC_1_SQRT_2;
                        chunk[j + h] = (a - b) * FRAC_1_SQRT_2;
                    }
                }
                h *= 2;
            }
        }
    }

    /// Splits the state into per-sector walker states (unnormalized, carrying
    /// the sector's amplitude weight). Entry `k` belongs to
    /// `SpinSector::from_index(N, k)`.
    pub fn sector_components(&self) -> Vec<SectorState> {
        let n = self.n_sites;
        let mut x = self.clone();
        x.hadamard_spins();
        let mask = (1usize << n) - 1;
        (0..1usize << n)
            .map(|k| {
                let xbits = sector_x_bits(n, k as u64) & mask;
                let amps = (0..n).map(|i| [x.amplitude(0, i, xbits), x.amplitude(1, i, xbits)]).collect();
                SectorState::from_amplitudes(amps)
            })
            .collect()
    }

    /// Inverse of [`ExactState::sector_components`].
    pub fn from_sector_components(n_sites: usize, parts: &[SectorState]) -> Result<Self> {
        check_sites(n_sites)?;
        if parts.len() != 1 << n_sites {
            return Err(Error::LengthMismatch { expected: 1 << n_sites, found: parts.len() });
        }
        let mut amps = alloc::vec![C64::new(0.0, 0.0); (2 * n_sites) << n_sites];
        for (k, part) in parts.iter().enumerate() {
            let xbits = sector_x_bits(n_sites, k as u64);
            for (i, a) in part.amplitudes().iter().enumerate() {
                for c in 0..2 {
                    amps[index(n_sites, c, i, xbits)] = a[c];
                }
            }
        }
        let mut s = Self { n_sites, amps };
        s.hadamard_spins();
        Ok(s)
    }
}

/// `X`-basis bitstring of the sector with the given index.
///
/// `exp(-iφX)` gives `|+⟩` the phase `e^{-iφ}`, which is `e^{iφ s}` with
/// `s = -1`; so `X`-bit `0` pairs with sector sign `-1` (index bit `1`).
fn sector_x_bits(n_sites: usize, index: u64) -> usize {
    !(index as usize) & ((1usize << n_sites) - 1)
}

/// Sector label of an `X`-basis bitstring.
pub fn sector_of_x_bits(n_sites: usize, xbits: usize) -> SpinSector {
    SpinSector::from_index(n_sites, sector_x_bits(n_sites, xbits as u64) as u64)
}

/// Precomputed full step `U = T C M F`, where `F = ⊗ exp(-iφ′Z)` is an
/// optional symmetry-breaking field.
#[derive(Clone, Debug)]
pub struct ExactStepper {
    n_sites: usize,
    boundary: Boundary,
    /// `C ⊗ exp(-iφX)` on `(coin, spin)` pairs, row-major over `2c + s`.
    fused: [[C64; 4]; 4],
    fused_adj: [[C64; 4]; 4],
    field: Option<Vec<C64>>,
}

impl ExactStepper {
    pub fn new(params: &WalkParams, phi_prime: f64) -> Result<Self> {
        check_sites(params.n_sites)?;
        let coin = coin_matrix(params.theta);
        let rot = coin_matrix(params.phi);
        let mut fused = [[C64::new(0.0, 0.0); 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                fused[r][c] = coin[r / 2][c / 2] * rot[r % 2][c % 2];
            }
        }
        let mut fused_adj = fused;
        for r in 0..4 {
            for c in 0..4 {
                fused_adj[r][c] = fused[c][r].conj();
            }
        }
        let n = params.n_sites;
        let field = (phi_prime != 0.0).then(|| {
            (0..1usize << n)
                .map(|bits| {
                    let down = bits.count_ones() as f64;
                    C64::from_polar(1.0, -phi_prime * (n as f64 - 2.0 * down))
                })
                .collect()
        });
        Ok(Self { n_sites: n, boundary: params.boundary, fused, fused_adj, field })
    }

    fn apply_field(&self, state: &mut ExactState, adjoint: bool) {
        if let Some(f) = &self.field {
            for chunk in state.amps.chunks_mut(f.len()) {
                for (a, p) in chunk.iter_mut().zip(f) {
                    *a *= if adjoint { p.conj() } else { *p };
                }
            }
        }
    }

    fn target(&self, c: usize, i: usize) -> Option<usize> {
        let n = self.n_sites;
        match (c, self.boundary) {
            (0, Boundary::Open) => (i + 1 < n).then_some(i + 1),
            (_, Boundary::Open) => i.checked_sub(1),
            (0, Boundary::Periodic) => Some((i + 1) % n),
            (_, Boundary::Periodic) => Some((i + n - 1) % n),
        }
    }

    fn source(&self, c: usize, i: usize) -> Option<usize> {
        self.target(1 - c, i)
    }

    /// One forward step.
    pub fn step(&self, state: &mut ExactState) -> Result<()> {
        let n = self.n_sites;
        debug_assert_eq!(state.n_sites, n);
        self.apply_field(state, false);
        let len = 1usize << n;
        let mut out = alloc::vec![C64::new(0.0, 0.0); state.amps.len()];
        for i in 0..n {
            let mask = 1usize << i;
            let (t0, t1) = (self.target(0, i), self.target(1, i));
            let (s0, s1) = (index(n, 0, i, 0), index(n, 1, i, 0));
            for bits in (0..len).filter(|b| b & mask == 0) {
                let v = [
                    state.amps[s0 + bits],
                    state.amps[s0 + (bits | mask)],
                    state.amps[s1 + bits],
                    state.amps[s1 + (bits | mask)],
                ];
                let mut w = [C64::new(0.0, 0.0); 4];
                for r in 0..4 {
                    let row = &self.fused[r];
                    w[r] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
                }
                let zero = C64::new(0.0, 0.0);
                match t0 {
                    Some(j) => {
                        out[index(n, 0, j, bits)] = w[0];
                        out[index(n, 0, j, bits | mask)] = w[1];
                    }
                    None if w[0] != zero || w[1] != zero => return Err(Error::EdgeOverflow { site: i }),
                    None => {}
                }
                match t1 {
                    Some(j) => {
                        out[index(n, 1, j, bits)] = w[2];
                        out[index(n, 1, j, bits | mask)] = w[3];
                    }
                    None if w[2] != zero || w[3] != zero => return Err(Error::EdgeOverflow { site: i }),
                    None => {}
                }
            }
        }
        state.amps = out;
        Ok(())
    }

    /// Inverse of [`ExactStepper::step`]. On an open lattice, amplitude that
    /// would have to come from outside the lattice is an error.
    pub fn step_adjoint(&self, state: &mut ExactState) -> Result<()> {
        let n = self.n_sites;
        let len = 1usize << n;
        let zero = C64::new(0.0, 0.0);
        // Undo the shift: amplitude now at site i with coin c came from source(c, i).
        let mut pre = alloc::vec![zero; state.amps.len()];
        for c in 0..2 {
            for i in 0..n {
                let from = index(n, c, i, 0);
                match self.source(c, i) {
                    Some(j) => {
                        let to = index(n, c, j, 0);
                        pre[to..to + len].copy_from_slice(&state.amps[from..from + len]);
                    }
                    None => {
                        if state.amps[from..from + len].iter().any(|a| *a != zero) {
                            return Err(Error::EdgeOverflow { site: i });
                        }
                    }
                }
            }
        }
        for i in 0..n {
            let mask = 1usize << i;
            let (s0, s1) = (index(n, 0, i, 0), index(n, 1, i, 0));
            for bits in (0..len).filter(|b| b & mask == 0) {
                let ix = [s0 + bits, s0 + (bits | mask), s1 + bits, s1 + (bits | mask)];
                let v = ix.map(|k| pre[k]);
                for r in 0..4 {
                    let row = &self.fused_adj[r];
                    pre[ix[r]] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
                }
            }
        }
        state.amps = pre;
        self.apply_field(state, true);
        Ok(())
    }
}

/// Convenience single step without a field.
pub fn exact_step(state: &mut ExactState, params: &WalkParams) -> Result<()> {
    ExactStepper::new(params, 0.0)?.step(state)
}

/// Snapshot of the requested observables.
pub fn snapshot(state: &ExactState, t: usize, obs: Observables) -> Result<Snapshot> {
    let n = state.n_sites;
    let spins = |axis| -> Vec<f64> {
        if obs.spins {
            (0..n).map(|k| state.spin_expectation(k, axis)).collect()
        } else {
            Vec::new()
        }
    };
    let entropies = if obs.entropies {
        (0..n.saturating_sub(1)).map(|b| state.bond_entropy(b)).collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    Ok(Snapshot {
        t,
        walker: obs.walker.then(|| state.walker_distribution()),
        spin_x: spins(Axis::X),
        spin_y: spins(Axis::Y),
        spin_z: spins(Axis::Z),
        entropies,
        max_bond: 0,
        discarded_weight: 0.0,
    })
}

/// Evolves `params.steps` steps with field `phi_prime`, recording snapshots at
/// `times` (ascending).
pub fn run(params: &WalkParams, phi_prime: f64, times: &[usize], obs: Observables) -> Result<Vec<Snapshot>> {
    params.validate()?;
    if times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParams("snapshot times must be strictly increasing".into()));
    }
    if let Some(&t) = times.last() {
        if t > params.steps {
            return Err(Error::InvalidParams(alloc::format!(
                "snapshot time {t} is after the final step {}",
                params.steps
            )));
        }
    }
    let stepper = ExactStepper::new(params, phi_prime)?;
    let mut state = ExactState::initial(params)?;
    let mut out = Vec::with_capacity(times.len());
    let mut next = times.iter().peekable();
    for t in 0..=times.last().copied().unwrap_or(0) {
        if t > 0 {
            stepper.step(&mut state)?;
        }
        if next.peek() == Some(&&t) {
            next.next();
            out.push(snapshot(&state, t, obs)?);
        }
    }
    Ok(out)
}
