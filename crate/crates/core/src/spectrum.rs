//! Quasi-energy spectra of the per-sector step operator on a ring.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use faer::Mat;
#[allow(unused_imports)] // float methods come from here without std
use num_traits::Float;

use crate::ensemble::EnsembleConfig;
use crate::exec::{ordered_map, Join};
use crate::walk::{coin_matrix, SpinSector, WalkParams};
use crate::{Error, Result, C64};

/// Largest ring for which exhaustive sweeps run without an override.
pub const EXHAUSTIVE_MAX_SITES: usize = 14;

/// One eigenpair summary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumRecord {
    /// In `(-π, π]`.
    pub quasi_energy: f64,
    pub ipr: f64,
    pub sector_id: u64,
    pub phi: f64,
}

/// Dense `2N × 2N` matrix of `T C D_s` on a ring, basis index `2i + c`.
pub fn sector_unitary_matrix(sector: &SpinSector, params: &WalkParams) -> Result<Mat<C64>> {
    let n = params.n_sites;
    if sector.len() != n {
        return Err(Error::LengthMismatch { expected: n, found: sector.len() });
    }
    let coin = coin_matrix(params.theta);
    let mut u = Mat::<C64>::zeros(2 * n, 2 * n);
    for (i, &s) in sector.signs().iter().enumerate() {
        let phase = C64::from_polar(1.0, params.phi * s as f64);
        let targets = [(i + 1) % n, (i + n - 1) % n];
        for c in 0..2 {
            for (c2, &j) in targets.iter().enumerate() {
                u[(2 * j + c2, 2 * i + c)] += phase * coin[c2][c];
            }
        }
    }
    Ok(u)
}

/// Maps `-arg λ` into `(-π, π]`.
pub fn quasi_energy_of(lambda: C64) -> f64 {
    let e = -lambda.arg();
    if e <= -PI {
        e + TAU
    } else {
        e
    }
}

/// Circular distance between two angles.
fn circ_dist(a: f64, b: f64) -> f64 {
    let mut d = (a - b) % TAU;
    if d < 0.0 {
        d += TAU;
    }
    d.min(TAU - d)
}

/// Runs of `energies` (sorted ascending) whose neighbours lie within `tol`.
fn degenerate_groups(energies: &[f64], tol: f64) -> Vec<core::ops::Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for k in 1..=energies.len() {
        if k == energies.len() || energies[k] - energies[k - 1] > tol {
            groups.push(start..k);
            start = k;
        }
    }
    groups
}

/// Tolerance on `max_j |‖U e_j‖ - 1|` accepted by [`quasi_energies`].
pub const UNITARITY_TOL: f64 = 1e-10;

/// Eigen-decomposition `U v = e^{-iE} v`, sorted by `E`.
///
/// Eigenvectors belonging to quasi-energies within `degeneracy_tol` of each
/// other are re-orthonormalized together.
pub fn quasi_energies(u: &Mat<C64>, degeneracy_tol: f64) -> Result<Vec<(f64, Vec<C64>)>> {
    let n = u.nrows();
    if u.ncols() != n {
        return Err(Error::InvalidParams("matrix is not square".into()));
    }
    let deviation = (0..n)
        .map(|j| {
            let norm: f64 = (0..n).map(|i| u[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            (norm - 1.0).abs()
        })
        .fold(0.0, f64::max);
    if deviation > UNITARITY_TOL {
        return Err(Error::NonUnitaryInput { deviation });
    }
    let (vals, vecs) = crate::linalg::eigen(u)?;
    let mut pairs: Vec<(f64, Vec<C64>)> =
        vals.iter().enumerate().map(|(k, &l)| (quasi_energy_of(l), (0..n).map(|i| vecs[(i, k)]).collect())).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let energies: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut groups = degenerate_groups(&energies, degeneracy_tol);
    if groups.len() > 1 {
        let (first, last) = (groups[0].clone(), groups[groups.len() - 1].clone());
        if circ_dist(energies[first.start], energies[last.end - 1]) <= degeneracy_tol {
            groups.pop();
            groups[0] = last.start..first.end;
        }
    }
    for g in groups {
        let idx: Vec<usize> = if g.start < g.end { g.collect() } else { (g.start..n).chain(0..g.end).collect() };
        orthonormalize(&mut pairs, &idx);
    }
    Ok(pairs)
}

/// Modified Gram-Schmidt (two passes) over the selected vectors.
fn orthonormalize(pairs: &mut [(f64, Vec<C64>)], idx: &[usize]) {
    for (a, &ka) in idx.iter().enumerate() {
        for _ in 0..2 {
            for &kb in &idx[..a] {
                let proj: C64 = pairs[kb].1.iter().zip(&pairs[ka].1).map(|(x, y)| x.conj() * y).sum();
                let basis = pairs[kb].1.clone();
                for (y, x) in pairs[ka].1.iter_mut().zip(&basis) {
                    *y -= proj * x;
                }
            }
        }
        let norm: f64 = pairs[ka].1.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for y in pairs[ka].1.iter_mut() {
            *y /= norm;
        }
    }
}

/// `(n_norm · Σ_n p_n²)^{-1}` with `p_n = Σ_c |v_{2n+c}|²`.
pub fn eigenstate_ipr(v: &[C64], n_norm: usize) -> f64 {
    let s: f64 = v
        .chunks(2)
        .map(|c| {
            let p: f64 = c.iter().map(|x| x.norm_sqr()).sum();
            p * p
        })
        .sum();
    1.0 / (n_norm as f64 * s)
}

/// Which sectors a sweep diagonalizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SectorSource {
    Exhaustive,
    Sampled { count: usize, seed: u64 },
}

/// Tunables for [`spectrum_sweep`].
#[derive(Clone, Debug, PartialEq)]
pub struct SweepOptions {
    /// Quasi-energies closer than this count as degenerate.
    pub degeneracy_tol: f64,
    /// IPR normalization; `None` uses the ring size.
    pub n_norm: Option<usize>,
    /// Permit exhaustive sweeps above [`EXHAUSTIVE_MAX_SITES`].
    pub allow_large: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { degeneracy_tol: 1e-8, n_norm: None, allow_large: false }
    }
}

/// Diagonalizes every `(φ, sector)` block and returns one record per
/// eigenpair, ordered by `φ`, then sector, then quasi-energy.
///
/// At each `φ`, the IPR of levels degenerate across all sectors is replaced by
/// the group average.
pub fn spectrum_sweep<E: Join>(
    exec: &E,
    phi_grid: &[f64],
    source: &SectorSource,
    params: &WalkParams,
    opts: &SweepOptions,
) -> Result<Vec<SpectrumRecord>> {
    let n = params.n_sites;
    if n == 0 {
        return Err(Error::InvalidParams("ring must have at least one site".into()));
    }
    let config = match source {
        SectorSource::Exhaustive => {
            if n > EXHAUSTIVE_MAX_SITES && !opts.allow_large {
                return Err(Error::BudgetExceeded {
                    requested: 1u64.checked_shl(n as u32).unwrap_or(u64::MAX),
                    limit: 1 << EXHAUSTIVE_MAX_SITES,
                });
            }
            if n >= 63 {
                return Err(Error::TooManySites { n_sites: n, limit: 62 });
            }
            EnsembleConfig::exhaustive()
        }
        SectorSource::Sampled { count, seed } => EnsembleConfig::sampled(*count, *seed),
    };
    if !config.exhaustive && config.n_samples == 0 {
        return Err(Error::InvalidParams("sampled sweep needs at least one sector".into()));
    }
    let members = if config.exhaustive { 1usize << n } else { config.n_samples };
    let n_norm = opts.n_norm.unwrap_or(n);
    let jobs = phi_grid.len() * members;
    let blocks: Vec<Result<Vec<SpectrumRecord>>> = ordered_map(exec, jobs, &|job| {
        let phi = phi_grid[job / members];
        let sector = config.sector(n, job % members);
        let mut p = params.clone();
        p.phi = phi;
        let u = sector_unitary_matrix(&sector, &p)?;
        let pairs = quasi_energies(&u, opts.degeneracy_tol)?;
        Ok(pairs
            .iter()
            .map(|(e, v)| SpectrumRecord {
                quasi_energy: *e,
                ipr: eigenstate_ipr(v, n_norm),
                sector_id: sector.index(),
                phi,
            })
            .collect())
    });
    let mut records = Vec::with_capacity(jobs * 2 * n);
    for b in blocks {
        records.extend(b?);
    }
    let per_phi = members * 2 * n;
    for chunk in records.chunks_mut(per_phi) {
        average_degenerate_ipr(chunk, opts.degeneracy_tol);
    }
    Ok(records)
}

fn average_degenerate_ipr(records: &mut [SpectrumRecord], tol: f64) {
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| records[a].quasi_energy.total_cmp(&records[b].quasi_energy).then(a.cmp(&b)));
    let energies: Vec<f64> = order.iter().map(|&k| records[k].quasi_energy).collect();
    let mut groups = degenerate_groups(&energies, tol);
    if groups.len() > 1 {
        let (first, last) = (groups[0].clone(), groups[groups.len() - 1].clone());
        if circ_dist(energies[first.start], energies[last.end - 1]) <= tol {
            groups.pop();
            groups[0] = last.start..first.end;
        }
    }
    let len = order.len();
    for g in groups {
        let idx: Vec<usize> = if g.start < g.end {
            g.map(|k| order[k]).collect()
        } else {
            (g.start..len).chain(0..g.end).map(|k| order[k]).collect()
        };
        if idx.len() < 2 {
            continue;
        }
        let mean = idx.iter().map(|&k| records[k].ipr).sum::<f64>() / idx.len() as f64;
        for k in idx {
            records[k].ipr = mean;
        }
    }
}

/// Gaps between circularly adjacent quasi-energies wider than `threshold`,
/// largest first. A single level yields one gap of `2π`.
pub fn band_gaps(records: &[SpectrumRecord], threshold: f64) -> Vec<f64> {
    let mut e: Vec<f64> = records.iter().map(|r| r.quasi_energy).collect();
    if e.is_empty() {
        return Vec::new();
    }
    e.sort_by(f64::total_cmp);
    let mut gaps: Vec<f64> = e.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.push(e[0] + TAU - e[e.len() - 1]);
    gaps.retain(|&g| g > threshold);
    gaps.sort_by(|a, b| b.total_cmp(a));
    gaps
}

/// Default gap-closure threshold in radians.
pub const GAP_CLOSED_THRESHOLD: f64 = 0.1;

/// Widest gap between circularly adjacent levels (`0` for no records).
pub fn max_gap(records: &[SpectrumRecord]) -> f64 {
    band_gaps(records, 0.0).first().copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::walk::{sector_step, SectorState};
    use crate::Boundary;
    use approx::assert_abs_diff_eq;

    fn ring(phi: f64, n: usize) -> WalkParams {
        WalkParams::periodic(phi, 0, n)
    }

    #[test]
    fn single_site_ring() {
        let p = ring(0.7, 1);
        let u = sector_unitary_matrix(&SpinSector::polarized(1, -1), &p).unwrap();
        let coin = coin_matrix(p.theta);
        let ph = C64::from_polar(1.0, -0.7);
        for r in 0..2 {
            for c in 0..2 {
                assert!((u[(r, c)] - ph * coin[r][c]).norm() < 1e-15);
            }
        }
        for (e, _) in quasi_energies(&u, 1e-8).unwrap() {
            assert!(e > -PI && e <= PI);
        }
    }

    #[test]
    fn matrix_matches_ring_step() {
        let p = ring(0.9, 6);
        let sector = SpinSector::from_index(6, 0b101100);
        let u = sector_unitary_matrix(&sector, &p).unwrap();
        for col in 0..12 {
            let mut amps = alloc::vec![[C64::new(0.0, 0.0); 2]; 6];
            amps[col / 2][col % 2] = C64::new(1.0, 0.0);
            let mut s = SectorState::from_amplitudes(amps);
            sector_step(&mut s, &sector, &p).unwrap();
            for i in 0..6 {
                for c in 0..2 {
                    assert!((s.amplitudes()[i][c] - u[(2 * i + c, col)]).norm() < 1e-15);
                }
            }
        }
        assert_eq!(p.boundary, Boundary::Periodic);
    }

    #[test]
    fn identity_and_global_phase() {
        let id = Mat::<C64>::identity(4, 4);
        for (e, _) in quasi_energies(&id, 1e-8).unwrap() {
            assert_abs_diff_eq!(e, 0.0, epsilon = 1e-14);
        }
        let alpha = 1.2;
        let ph =
            Mat::<C64>::from_fn(3, 3, |i, j| if i == j { C64::from_polar(1.0, -alpha) } else { C64::new(0.0, 0.0) });
        for (e, _) in quasi_energies(&ph, 1e-8).unwrap() {
            assert_abs_diff_eq!(e, alpha, epsilon = 1e-14);
        }
        let minus = Mat::<C64>::from_fn(2, 2, |i, j| if i == j { C64::new(-1.0, 0.0) } else { C64::new(0.0, 0.0) });
        for (e, _) in quasi_energies(&minus, 1e-8).unwrap() {
            assert_abs_diff_eq!(e, PI, epsilon = 1e-14);
        }
    }

    #[test]
    fn non_unitary_rejected() {
        let m = Mat::<C64>::from_fn(2, 2, |i, j| if i == j { C64::new(2.0, 0.0) } else { C64::new(0.0, 0.0) });
        assert!(matches!(quasi_energies(&m, 1e-8), Err(Error::NonUnitaryInput { .. })));
    }

    #[test]
    fn eigenpairs_are_complete_and_orthonormal() {
        for (phi, idx) in [(0.0, 0u64), (0.4, 0b1011001), (1.1, 0b0110110), (0.0, 0b1111111)] {
            let p = ring(phi, 7);
            let u = sector_unitary_matrix(&SpinSector::from_index(7, idx), &p).unwrap();
            let pairs = quasi_energies(&u, 1e-8).unwrap();
            assert_eq!(pairs.len(), 14);
            for (a, (ea, va)) in pairs.iter().enumerate() {
                for (b, (_, vb)) in pairs.iter().enumerate() {
                    let d: C64 = va.iter().zip(vb).map(|(x, y)| x.conj() * y).sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((d - want).norm() < 1e-8, "overlap {a},{b} = {d}");
                }
                // U v = e^{-iE} v
                let lam = C64::from_polar(1.0, -ea);
                for i in 0..14 {
                    let uv: C64 = (0..14).map(|j| u[(i, j)] * va[j]).sum();
                    assert!((uv - lam * va[i]).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn ipr_examples() {
        let n = 5;
        let amp = C64::new((1.0 / (2.0 * n as f64)).sqrt(), 0.0);
        let flat = alloc::vec![amp; 2 * n];
        assert_abs_diff_eq!(eigenstate_ipr(&flat, n), 1.0, epsilon = 1e-14);
        let mut point = alloc::vec![C64::new(0.0, 0.0); 2 * n];
        point[4] = C64::new(1.0, 0.0);
        assert_abs_diff_eq!(eigenstate_ipr(&point, n), 1.0 / n as f64, epsilon = 1e-15);
    }

    #[test]
    fn gaps_of_single_level() {
        let r = SpectrumRecord { quasi_energy: 0.3, ipr: 1.0, sector_id: 0, phi: 0.0 };
        assert_eq!(band_gaps(&[r], 0.1), alloc::vec![TAU]);
    }

    #[test]
    fn exhaustive_budget_guard() {
        let p = ring(0.1, 15);
        let r = spectrum_sweep(&Sequential, &[0.1], &SectorSource::Exhaustive, &p, &SweepOptions::default());
        assert_eq!(r, Err(Error::BudgetExceeded { requested: 1 << 15, limit: 1 << 14 }));
    }

    #[test]
    fn degenerate_levels_share_ipr() {
        let p = ring(0.0, 4);
        let recs =
            spectrum_sweep(&Sequential, &[0.0], &SectorSource::Exhaustive, &p, &SweepOptions::default()).unwrap();
        assert_eq!(recs.len(), 16 * 8);
        for a in &recs {
            for b in &recs {
                if (a.quasi_energy - b.quasi_energy).abs() < 1e-8 {
                    assert_eq!(a.ipr, b.ipr);
                }
            }
        }
    }
}
