//! Matrix-product-state evolution of the full walker+spin state.
//!
//! Each site carries the six local states `|q⟩ ⊗ |s⟩` (see
//! [`LocalBasisIndex`]). The state holds exactly one walker, so every bond
//! splits by a charge: `0` if the walker sits to the right of the bond, `1` if
//! it sits to the left. A site tensor then has three blocks:
//!
//! * `vr`: charge `0 → 0`, site empty, shape `(l₀, 2, r₀)`;
//! * `w`: charge `0 → 1`, walker here, shape `(l₀, 4, r₁)`, local index `2c + s`;
//! * `vl`: charge `1 → 1`, site empty, shape `(l₁, 2, r₁)`.
//!
//! Blocks are stored row-major. The first bond has charges `(1, 0)` and the
//! last `(0, 1)`.
//!
//! A step applies the coin·interaction gate on every site, then the left-shift
//! gate on bonds `(0,1) … (N-2,N-1)` and the right-shift gate on bonds
//! `(N-2,N-1) … (0,1)`. Each shift gate swaps an occupied site with an empty
//! neighbour, and a sweep of such swaps is a cyclic translation, so the chain
//! behaves as a ring. On an open lattice that holds `2·steps + 1` sites the
//! walker never reaches the seam and the ring is indistinguishable from the
//! open chain.

mod basis;
mod gates;

pub use basis::LocalBasisIndex;
pub use gates::{apply_onsite_vector, local, BondGate, GateTag, OnsiteGate, GATE_TOL};

use alloc::vec::Vec;
#[allow(unused_imports)] // float methods come from here without std
use num_traits::Float;

use crate::lattice::{self, Boundary, ProbabilityDistribution};
use crate::linalg;
use crate::observe::{entropy_bits, Observables, Snapshot};
use crate::walk::WalkParams;
use crate::{Axis, Error, Result, C64};

/// What happens when a bond would exceed `max_bond`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CapMode {
    /// Return [`Error::BondDimOverflow`].
    #[default]
    Hard,
    /// Keep the largest `max_bond` singular values and count the event.
    Soft,
}

/// Quantity compared against `trunc_tol` when discarding singular values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TruncRule {
    /// Schmidt weight `σ²` (lost probability per discarded value).
    #[default]
    Weight,
    /// Normalized singular value `σ` itself.
    SingularValue,
}

/// Truncation settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MpsConfig {
    /// Discard threshold δ, applied after normalizing `Σσ² = 1`.
    pub trunc_tol: f64,
    pub trunc_rule: TruncRule,
    pub max_bond: Option<usize>,
    pub cap_mode: CapMode,
}

impl Default for MpsConfig {
    fn default() -> Self {
        Self { trunc_tol: 1e-8, trunc_rule: TruncRule::Weight, max_bond: Some(1024), cap_mode: CapMode::Hard }
    }
}

/// Smallest weight threshold for which bond updates use the Gram-matrix
/// spectrum instead of a full SVD.
pub const GRAM_MIN_TOL: f64 = 1e-12;

/// Direction in which a bond update leaves the orthogonality center.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sweep {
    /// Center ends on the right site of the bond.
    Right,
    /// Center ends on the left site of the bond.
    Left,
}

#[derive(Clone, Debug, PartialEq)]
struct Site {
    vr: Vec<C64>,
    w: Vec<C64>,
    vl: Vec<C64>,
}

/// Per-bond charge dimensions `[d₀, d₁]`.
type BondDims = [usize; 2];

/// Block-sparse MPS in mixed canonical form.
#[derive(Clone, Debug, PartialEq)]
pub struct MpsState {
    sites: Vec<Site>,
    /// `bonds[k]` sits left of site `k`; there are `N + 1` entries.
    bonds: Vec<BondDims>,
    center: usize,
    config: MpsConfig,
    discarded_weight: f64,
    capped_updates: usize,
    boundary: Boundary,
    steps_taken: usize,
}

fn zeros(n: usize) -> Vec<C64> {
    alloc::vec![C64::new(0.0, 0.0); n]
}

/// Applies the `k × k` matrix `m` along a middle axis of length `k` of a
/// row-major `(a, k, b)` array.
fn apply_middle<const K: usize>(data: &mut [C64], m: &[[C64; K]; K], b: usize) {
    if b == 0 {
        return;
    }
    let mut tmp = [C64::new(0.0, 0.0); K];
    for block in data.chunks_mut(K * b) {
        for j in 0..b {
            for (i, t) in tmp.iter_mut().enumerate() {
                *t = block[i * b + j];
            }
            for r in 0..K {
                block[r * b + j] = (0..K).map(|c| m[r][c] * tmp[c]).sum();
            }
        }
    }
}

/// Multiplies the left index of a row-major `(l, p·r)` block by `m (k × l)`.
fn left_mul(m: &[C64], k: usize, l: usize, block: &[C64], cols: usize) -> Vec<C64> {
    linalg::matmul(m, block, k, l, cols)
}

/// Multiplies the right index of a row-major `(rows, r)` block by `m (r × k)`.
fn right_mul(block: &[C64], rows: usize, r: usize, m: &[C64], k: usize) -> Vec<C64> {
    linalg::matmul(block, m, rows, r, k)
}

impl MpsState {
    /// Product state described by `params`.
    pub fn new(params: &WalkParams, config: MpsConfig) -> Result<Self> {
        params.validate()?;
        if config.trunc_tol.is_nan() || config.trunc_tol < 0.0 {
            return Err(Error::InvalidParams("trunc_tol must be non-negative".into()));
        }
        if config.max_bond == Some(0) {
            return Err(Error::InvalidParams("max_bond must be positive".into()));
        }
        let n = params.n_sites;
        let o = lattice::origin(n);
        let bonds: Vec<BondDims> = (0..=n).map(|b| if b <= o { [1, 0] } else { [0, 1] }).collect();
        let sites = (0..n)
            .map(|k| {
                let s = params.spin_init[k] as usize;
                let mut spin = zeros(2);
                spin[s] = C64::new(1.0, 0.0);
                match k.cmp(&o) {
                    core::cmp::Ordering::Less => Site { vr: spin, w: Vec::new(), vl: Vec::new() },
                    core::cmp::Ordering::Greater => Site { vr: Vec::new(), w: Vec::new(), vl: spin },
                    core::cmp::Ordering::Equal => {
                        let mut w = zeros(4);
                        for c in 0..2 {
                            w[2 * c + s] = params.coin_init[c];
                        }
                        Site { vr: Vec::new(), w, vl: Vec::new() }
                    }
                }
            })
            .collect();
        Ok(Self {
            sites,
            bonds,
            center: 0,
            config,
            discarded_weight: 0.0,
            capped_updates: 0,
            boundary: params.boundary,
            steps_taken: 0,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn config(&self) -> &MpsConfig {
        &self.config
    }

    /// Accumulated discarded Schmidt weight.
    pub fn discarded_weight(&self) -> f64 {
        self.discarded_weight
    }

    /// Number of bond updates clipped by a soft `max_bond`.
    pub fn capped_updates(&self) -> usize {
        self.capped_updates
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    /// Dimension of bond `b` (left of site `b`), `0 ≤ b ≤ N`.
    pub fn bond_dim(&self, b: usize) -> usize {
        self.bonds[b][0] + self.bonds[b][1]
    }

    pub fn max_bond_dim(&self) -> usize {
        (0..self.bonds.len()).map(|b| self.bond_dim(b)).max().unwrap_or(0)
    }

    fn dims(&self, k: usize) -> (BondDims, BondDims) {
        (self.bonds[k], self.bonds[k + 1])
    }

    /// `‖ψ‖²`, read off the orthogonality center.
    pub fn norm_sqr(&self) -> f64 {
        let s = &self.sites[self.center];
        s.vr.iter().chain(&s.w).chain(&s.vl).map(|a| a.norm_sqr()).sum()
    }

    /// Applies a single-site gate; bond dimensions and canonical form are
    /// unchanged.
    pub fn apply_onsite(&mut self, site: usize, gate: &OnsiteGate) {
        let (_, r) = self.dims(site);
        let s = &mut self.sites[site];
        apply_middle(&mut s.vr, &gate.vacuum, r[0]);
        apply_middle(&mut s.vl, &gate.vacuum, r[1]);
        apply_middle(&mut s.w, &gate.walker, r[1]);
    }

    /// Left-canonicalizes site `k` and moves the center to `k + 1`.
    /// Returns the Schmidt weights of bond `k + 1` when `schmidt` is set.
    fn move_right(&mut self, schmidt: bool) -> Result<Option<Vec<f64>>> {
        let k = self.center;
        assert!(k + 1 < self.n_sites());
        let (l, r) = self.dims(k);
        let site = &self.sites[k];
        // Charge 0 on the right bond: vr, rows (l0, s).
        let m0 = site.vr.clone();
        // Charge 1: vl rows then w rows.
        let mut m1 = site.vl.clone();
        m1.extend_from_slice(&site.w);
        let (rows0, rows1) = (2 * l[0], 2 * l[1] + 4 * l[0]);
        let mut weights = None;
        let (q0, t0, k0, q1, t1, k1) = if schmidt {
            let a = linalg::svd(&m0, rows0, r[0])?;
            let b = linalg::svd(&m1, rows1, r[1])?;
            weights = Some(a.s.iter().chain(&b.s).map(|x| x * x).collect());
            let (k0, k1) = (a.s.len(), b.s.len());
            let sv = |d: linalg::Svd, cols: usize| {
                let mut vh = d.vh;
                for (i, s) in d.s.iter().enumerate() {
                    for x in &mut vh[i * cols..(i + 1) * cols] {
                        *x *= s;
                    }
                }
                (d.u, vh)
            };
            let (q0, t0) = sv(a, r[0]);
            let (q1, t1) = sv(b, r[1]);
            (q0, t0, k0, q1, t1, k1)
        } else {
            let (q0, t0) = linalg::qr(&m0, rows0, r[0]);
            let (q1, t1) = linalg::qr(&m1, rows1, r[1]);
            (q0, t0, rows0.min(r[0]), q1, t1, rows1.min(r[1]))
        };
        {
            let site = &mut self.sites[k];
            site.vr = q0;
            site.vl = q1[..2 * l[1] * k1].to_vec();
            site.w = q1[2 * l[1] * k1..].to_vec();
        }
        let (_, rr) = self.dims(k + 1);
        let next = &mut self.sites[k + 1];
        next.vr = left_mul(&t0, k0, r[0], &next.vr, 2 * rr[0]);
        next.w = left_mul(&t0, k0, r[0], &next.w, 4 * rr[1]);
        next.vl = left_mul(&t1, k1, r[1], &next.vl, 2 * rr[1]);
        self.bonds[k + 1] = [k0, k1];
        self.center = k + 1;
        Ok(weights)
    }

    /// Right-canonicalizes site `k` and moves the center to `k - 1`.
    fn move_left(&mut self) {
        let k = self.center;
        assert!(k > 0);
        let (l, r) = self.dims(k);
        let site = &self.sites[k];
        // Charge 0 on the left bond: [vr | w], rows l0.
        let c0 = 2 * r[0] + 4 * r[1];
        let mut m0 = Vec::with_capacity(l[0] * c0);
        for i in 0..l[0] {
            m0.extend_from_slice(&site.vr[i * 2 * r[0]..(i + 1) * 2 * r[0]]);
            m0.extend_from_slice(&site.w[i * 4 * r[1]..(i + 1) * 4 * r[1]]);
        }
        let c1 = 2 * r[1];
        // LQ via QR of the adjoint.
        let lq = |m: &[C64], rows: usize, cols: usize| -> (Vec<C64>, Vec<C64>, usize) {
            let kk = rows.min(cols);
            let adj = linalg::adjoint(m, rows, cols);
            let (q, rr) = linalg::qr(&adj, cols, rows);
            // m = rr^H q^H: L = rr^H (rows × kk), Q = q^H (kk × cols).
            (linalg::adjoint(&rr, kk, rows), linalg::adjoint(&q, cols, kk), kk)
        };
        let (l0m, q0, k0) = lq(&m0, l[0], c0);
        let (l1m, q1, k1) = lq(&site.vl, l[1], c1);
        {
            let site = &mut self.sites[k];
            let mut vr = Vec::with_capacity(k0 * 2 * r[0]);
            let mut w = Vec::with_capacity(k0 * 4 * r[1]);
            for i in 0..k0 {
                let row = &q0[i * c0..(i + 1) * c0];
                vr.extend_from_slice(&row[..2 * r[0]]);
                w.extend_from_slice(&row[2 * r[0]..]);
            }
            site.vr = vr;
            site.w = w;
            site.vl = q1;
        }
        let (ll, _) = self.dims(k - 1);
        let prev = &mut self.sites[k - 1];
        prev.vr = right_mul(&prev.vr, 2 * ll[0], l[0], &l0m, k0);
        prev.w = right_mul(&prev.w, 4 * ll[0], l[1], &l1m, k1);
        prev.vl = right_mul(&prev.vl, 2 * ll[1], l[1], &l1m, k1);
        self.bonds[k] = [k0, k1];
        self.center = k - 1;
    }

    /// Moves the orthogonality center to `site` with QR steps.
    pub fn move_center(&mut self, site: usize) -> Result<()> {
        assert!(site < self.n_sites());
        while self.center < site {
            self.move_right(false)?;
        }
        while self.center > site {
            self.move_left();
        }
        Ok(())
    }

    /// Applies a two-site gate on sites `(bond, bond + 1)`, re-splits by SVD
    /// with truncation, and leaves the center on the side given by `sweep`.
    pub fn apply_bond_gate(&mut self, bond: usize, gate: &BondGate, sweep: Sweep) -> Result<()> {
        let n = self.n_sites();
        if bond + 1 >= n {
            return Err(Error::InvalidParams(alloc::format!("bond {bond} is not inside {n} sites")));
        }
        if self.center != bond && self.center != bond + 1 {
            return Err(Error::CenterMisplaced { bond, center: self.center });
        }
        let (l, x) = self.dims(bond);
        let (_, r) = self.dims(bond + 1);
        let (a, b) = (&self.sites[bond], &self.sites[bond + 1]);

        // Two-site blocks.
        let mut t00 = linalg::matmul(&a.vr, &b.vr, 2 * l[0], x[0], 2 * r[0]);
        let mut t11 = linalg::matmul(&a.vl, &b.vl, 2 * l[1], x[1], 2 * r[1]);
        let t01a = linalg::matmul(&a.w, &b.vl, 4 * l[0], x[1], 2 * r[1]);
        let t01b = linalg::matmul(&a.vr, &b.w, 2 * l[0], x[0], 4 * r[1]);

        if !gate.vacuum_identity {
            apply_middle(&mut t00, &gate.vacuum, r[0]);
            apply_middle(&mut t11, &gate.vacuum, r[1]);
        }
        // One-walker block as (l0, 16, r1): walker on the left site first.
        let blk = 8 * r[1];
        let mut tw = zeros(l[0] * 2 * blk);
        for i in 0..l[0] {
            tw[2 * i * blk..(2 * i + 1) * blk].copy_from_slice(&t01a[i * blk..(i + 1) * blk]);
            tw[(2 * i + 1) * blk..(2 * i + 2) * blk].copy_from_slice(&t01b[i * blk..(i + 1) * blk]);
        }
        let mut tw2 = zeros(tw.len());
        for i in 0..l[0] {
            let base = 2 * i * blk;
            for &(row, col, v) in &gate.walker {
                let (dst, src) = (base + row * r[1], base + col * r[1]);
                for j in 0..r[1] {
                    tw2[dst + j] += v * tw[src + j];
                }
            }
        }
        let tw = tw2;

        // Charge-0 middle bond: rows (l0, s1); columns [s2·r0 | w2·r1].
        let (rows0, cols0) = (2 * l[0], 2 * r[0] + 4 * r[1]);
        let mut m0 = Vec::with_capacity(rows0 * cols0);
        for i in 0..l[0] {
            for s1 in 0..2 {
                let row = i * 2 + s1;
                m0.extend_from_slice(&t00[row * 2 * r[0]..(row + 1) * 2 * r[0]]);
                let off = i * 16 * r[1] + (8 + s1 * 4) * r[1];
                m0.extend_from_slice(&tw[off..off + 4 * r[1]]);
            }
        }
        // Charge-1 middle bond: rows [(l1, s1) ; (l0, w1)]; columns (s2, r1).
        let (rows1, cols1) = (2 * l[1] + 4 * l[0], 2 * r[1]);
        let mut m1 = Vec::with_capacity(rows1 * cols1);
        m1.extend_from_slice(&t11);
        for i in 0..l[0] {
            for w1 in 0..4 {
                let off = i * 16 * r[1] + w1 * 2 * r[1];
                m1.extend_from_slice(&tw[off..off + 2 * r[1]]);
            }
        }

        let gram = self.uses_gram();
        let (s0, f0) = linalg::split(&m0, rows0, cols0, gram)?;
        let (s1, f1) = linalg::split(&m1, rows1, cols1, gram)?;
        let (k0, k1, scale) = self.truncate(bond, &s0, &s1)?;
        let left_center = sweep == Sweep::Left;
        let (u0, vh0) = f0.factors(&m0, rows0, cols0, &s0, k0, !left_center, scale);
        let (u1, vh1) = f1.factors(&m1, rows1, cols1, &s1, k1, !left_center, scale);

        let a = &mut self.sites[bond];
        a.vr = u0;
        a.vl = u1[..2 * l[1] * k1].to_vec();
        a.w = u1[2 * l[1] * k1..].to_vec();
        let b = &mut self.sites[bond + 1];
        let mut bvr = Vec::with_capacity(k0 * 2 * r[0]);
        let mut bw = Vec::with_capacity(k0 * 4 * r[1]);
        for j in 0..k0 {
            let row = &vh0[j * cols0..(j + 1) * cols0];
            bvr.extend_from_slice(&row[..2 * r[0]]);
            bw.extend_from_slice(&row[2 * r[0]..]);
        }
        b.vr = bvr;
        b.w = bw;
        b.vl = vh1;
        self.bonds[bond + 1] = [k0, k1];
        self.center = if left_center { bond } else { bond + 1 };
        Ok(())
    }

    /// Whether bond updates may take singular values from Gram matrices. Only
    /// safe when every value below about `1e-6·σ_max` is discarded anyway.
    fn uses_gram(&self) -> bool {
        self.config.trunc_rule == TruncRule::Weight && self.config.trunc_tol >= GRAM_MIN_TOL
    }

    /// Chooses how many singular values to keep in each charge block and
    /// returns `(k0, k1, rescale)`.
    fn truncate(&mut self, bond: usize, s0: &[f64], s1: &[f64]) -> Result<(usize, usize, f64)> {
        let total: f64 = s0.iter().chain(s1).map(|s| s * s).sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::Linalg("two-site tensor vanished"));
        }
        let tol = self.config.trunc_tol;
        let keep = |s: &[f64]| {
            s.iter()
                .take_while(|x| match self.config.trunc_rule {
                    TruncRule::Weight => *x * *x / total >= tol,
                    TruncRule::SingularValue => *x / total.sqrt() >= tol,
                })
                .count()
        };
        let (mut k0, mut k1) = (keep(s0), keep(s1));
        if k0 + k1 == 0 {
            // Keep the single largest weight.
            if s0.first().copied().unwrap_or(0.0) >= s1.first().copied().unwrap_or(0.0) {
                k0 = 1;
            } else {
                k1 = 1;
            }
        }
        if let Some(cap) = self.config.max_bond {
            if k0 + k1 > cap {
                match self.config.cap_mode {
                    CapMode::Hard => {
                        return Err(Error::BondDimOverflow { bond: bond + 1, needed: k0 + k1, max: cap });
                    }
                    CapMode::Soft => {
                        let (mut a, mut b) = (0, 0);
                        while a + b < cap {
                            let x = if a < k0 { s0[a] } else { -1.0 };
                            let y = if b < k1 { s1[b] } else { -1.0 };
                            if x >= y {
                                a += 1;
                            } else {
                                b += 1;
                            }
                        }
                        k0 = a;
                        k1 = b;
                        self.capped_updates += 1;
                    }
                }
            }
        }
        let kept: f64 = s0[..k0].iter().chain(&s1[..k1]).map(|s| s * s).sum();
        self.discarded_weight += (total - kept) / total;
        Ok((k0, k1, (total / kept).sqrt()))
    }

    /// One step `U = T C M F`: optional field and coin·interaction on every
    /// site, then the two shift sweeps. The center ends at site 0.
    pub fn step(&mut self, onsite: &OnsiteGate) -> Result<()> {
        let n = self.n_sites();
        if self.boundary == Boundary::Open {
            let reach = lattice::origin(n).min(n - 1 - lattice::origin(n));
            if self.steps_taken + 1 > reach {
                let site = if reach == lattice::origin(n) { 0 } else { n - 1 };
                return Err(Error::EdgeOverflow { site });
            }
        }
        self.move_center(0)?;
        for k in 0..n {
            self.apply_onsite(k, onsite);
        }
        let (left, right) = (BondGate::shift_left(), BondGate::shift_right());
        for k in 0..n.saturating_sub(1) {
            self.apply_bond_gate(k, &left, Sweep::Right)?;
        }
        for k in (0..n.saturating_sub(1)).rev() {
            self.apply_bond_gate(k, &right, Sweep::Left)?;
        }
        self.steps_taken += 1;
        Ok(())
    }

    /// Schmidt weights `σ²` of bond `b` (between sites `b - 1` and `b`).
    pub fn schmidt_weights(&mut self, b: usize) -> Result<Vec<f64>> {
        let n = self.n_sites();
        if b == 0 || b >= n {
            return Err(Error::InvalidParams(alloc::format!("bond {b} is not an inner bond of {n} sites")));
        }
        self.move_center(b - 1)?;
        let w = self.move_right(true)?.expect("requested");
        Ok(w)
    }

    /// Entanglement entropy in bits across the cut between sites `k` and
    /// `k + 1`.
    pub fn bond_entropy(&mut self, k: usize) -> Result<f64> {
        Ok(entropy_bits(self.schmidt_weights(k + 1)?))
    }

    fn local_expectation_at_center(&self, axis: Axis) -> f64 {
        let k = self.center;
        let (_, r) = self.dims(k);
        let p = axis.pauli();
        let site = &self.sites[k];
        let mut acc = C64::new(0.0, 0.0);
        let mut spin = |data: &[C64], phys: usize, cols: usize| {
            if cols == 0 {
                return;
            }
            for block in data.chunks(phys * cols) {
                for a in 0..phys {
                    for b in 0..phys {
                        if a / 2 != b / 2 {
                            continue;
                        }
                        let o = p[a % 2][b % 2];
                        if o == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let s: C64 = (0..cols).map(|j| block[a * cols + j].conj() * block[b * cols + j]).sum();
                        acc += o * s;
                    }
                }
            }
        };
        spin(&site.vr, 2, r[0]);
        spin(&site.vl, 2, r[1]);
        spin(&site.w, 4, r[1]);
        acc.re
    }

    /// `⟨σ^axis⟩` on `site`, with identity on the walker.
    pub fn local_expectation(&mut self, site: usize, axis: Axis) -> Result<f64> {
        self.move_center(site)?;
        Ok(self.local_expectation_at_center(axis))
    }

    fn walker_weight_at_center(&self) -> f64 {
        self.sites[self.center].w.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability of finding the walker on each site.
    pub fn walker_distribution(&mut self) -> Result<ProbabilityDistribution> {
        let n = self.n_sites();
        self.move_center(0)?;
        let mut p = Vec::with_capacity(n);
        for k in 0..n {
            p.push(self.walker_weight_at_center());
            if k + 1 < n {
                self.move_right(false)?;
            }
        }
        Ok(ProbabilityDistribution::new(p))
    }

    /// Evaluates `obs` in one sweep and leaves the center at site 0.
    pub fn observe(&mut self, t: usize, obs: Observables) -> Result<Snapshot> {
        let n = self.n_sites();
        self.move_center(0)?;
        let mut walker = Vec::new();
        let (mut sx, mut sy, mut sz) = (Vec::new(), Vec::new(), Vec::new());
        let mut entropies = Vec::new();
        for k in 0..n {
            if obs.walker {
                walker.push(self.walker_weight_at_center());
            }
            if obs.spins {
                sx.push(self.local_expectation_at_center(Axis::X));
                sy.push(self.local_expectation_at_center(Axis::Y));
                sz.push(self.local_expectation_at_center(Axis::Z));
            }
            if k + 1 < n && (obs.walker || obs.spins || obs.entropies) {
                let w = self.move_right(obs.entropies)?;
                if let Some(w) = w {
                    entropies.push(entropy_bits(w));
                }
            }
        }
        self.move_center(0)?;
        Ok(Snapshot {
            t,
            walker: obs.walker.then(|| ProbabilityDistribution::new(walker)),
            spin_x: sx,
            spin_y: sy,
            spin_z: sz,
            entropies,
            max_bond: self.max_bond_dim(),
            discarded_weight: self.discarded_weight,
        })
    }

    /// Contracts the chain into the dense layout of [`crate::exact::ExactState`].
    pub fn to_full_amplitudes(&self) -> Result<Vec<C64>> {
        let n = self.n_sites();
        if n > crate::exact::MAX_SITES {
            return Err(Error::TooManySites { n_sites: n, limit: crate::exact::MAX_SITES });
        }
        let mut out = zeros((2 * n) << n);
        // left[j]: for spin bits of sites < j (bit i = site i), a row vector
        // over charge-0 bond j.
        let mut left: Vec<Vec<C64>> = alloc::vec![alloc::vec![C64::new(1.0, 0.0)]];
        let mut lefts = Vec::with_capacity(n);
        for j in 0..n {
            lefts.push(left.clone());
            let (l, r) = self.dims(j);
            let mut next = Vec::with_capacity(left.len() * 2);
            for s in 0..2 {
                for v in &left {
                    let mut out_v = zeros(r[0]);
                    for a in 0..l[0] {
                        for (b, o) in out_v.iter_mut().enumerate() {
                            *o += v[a] * self.sites[j].vr[(a * 2 + s) * r[0] + b];
                        }
                    }
                    next.push(out_v);
                }
            }
            // Index ordering: bits of earlier sites in lower positions.
            let mut reordered = alloc::vec![Vec::new(); next.len()];
            for s in 0..2 {
                for (bits, v) in next[s * left.len()..(s + 1) * left.len()].iter().enumerate() {
                    reordered[bits | (s << j)] = v.clone();
                }
            }
            left = reordered;
        }
        // right[j]: for spin bits of sites > j, a column vector over charge-1
        // bond j + 1; index = bits >> (j + 1).
        let mut rights: Vec<Vec<Vec<C64>>> = alloc::vec![Vec::new(); n];
        let mut right: Vec<Vec<C64>> = alloc::vec![alloc::vec![C64::new(1.0, 0.0)]];
        for j in (0..n).rev() {
            rights[j] = right.clone();
            let (l, r) = self.dims(j);
            let mut next = alloc::vec![Vec::new(); right.len() * 2];
            for (hi, v) in right.iter().enumerate() {
                for s in 0..2 {
                    let mut o = zeros(l[1]);
                    for (a, oa) in o.iter_mut().enumerate() {
                        for b in 0..r[1] {
                            *oa += self.sites[j].vl[(a * 2 + s) * r[1] + b] * v[b];
                        }
                    }
                    next[(hi << 1) | s] = o;
                }
            }
            right = next;
        }
        for j in 0..n {
            let (l, r) = self.dims(j);
            let w = &self.sites[j].w;
            for (lo_bits, lv) in lefts[j].iter().enumerate() {
                for (hi_bits, rv) in rights[j].iter().enumerate() {
                    for c in 0..2 {
                        for s in 0..2 {
                            let wl = 2 * c + s;
                            let mut amp = C64::new(0.0, 0.0);
                            for a in 0..l[0] {
                                for b in 0..r[1] {
                                    amp += lv[a] * w[(a * 4 + wl) * r[1] + b] * rv[b];
                                }
                            }
                            let bits = lo_bits | (s << j) | (hi_bits << (j + 1));
                            out[((c * n + j) << n) | bits] = amp;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Largest deviation from left (right) orthonormality of the tensors left
    /// (right) of the center.
    pub fn canonical_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..self.n_sites() {
            let (l, r) = self.dims(k);
            let s = &self.sites[k];
            if k < self.center {
                // Σ_rows A^H A per right charge.
                let groups: [(&[&[C64]], usize); 2] = [(&[&s.vr], r[0]), (&[&s.vl, &s.w], r[1])];
                for (parts, cols) in groups {
                    worst = worst.max(gram_deviation(parts, cols, true));
                }
            } else if k > self.center {
                // Σ_cols A A^H per left charge; rows of vr and w concatenate.
                let joined: Vec<C64> = (0..l[0])
                    .flat_map(|a| {
                        s.vr[a * 2 * r[0]..(a + 1) * 2 * r[0]]
                            .iter()
                            .chain(&s.w[a * 4 * r[1]..(a + 1) * 4 * r[1]])
                            .copied()
                    })
                    .collect();
                worst = worst.max(gram_deviation(&[&joined], l[0], false));
                worst = worst.max(gram_deviation(&[&s.vl], l[1], false));
            }
        }
        worst
    }
}

/// `max |G - I|` where `G = Σ_parts X^H X` (`columns`, each part `(·, n)`)
/// or `G = Σ X X^H` (rows, each part `(n, ·)`).
fn gram_deviation(parts: &[&[C64]], n: usize, columns: bool) -> f64 {
    let mut worst = 0.0f64;
    if n == 0 {
        return 0.0;
    }
    for i in 0..n {
        for j in 0..n {
            let mut d = C64::new(0.0, 0.0);
            for data in parts {
                if columns {
                    let rows = data.len() / n;
                    for row in 0..rows {
                        d += data[row * n + i].conj() * data[row * n + j];
                    }
                } else {
                    let cols = data.len() / n;
                    for c in 0..cols {
                        d += data[i * cols + c] * data[j * cols + c].conj();
                    }
                }
            }
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((d - want).norm());
        }
    }
    worst
}

/// On-site gate for one step: field (if any) first, then interaction and coin.
pub fn step_gate(params: &WalkParams, phi_prime: f64) -> OnsiteGate {
    let cm = OnsiteGate::coin_interaction(params.theta, params.phi);
    if phi_prime == 0.0 {
        cm
    } else {
        cm.then(&OnsiteGate::field(phi_prime)).with_tag(GateTag::Custom)
    }
}

/// Evolves from the initial product state and records snapshots at `times`
/// (strictly increasing).
pub fn run(
    params: &WalkParams,
    config: MpsConfig,
    phi_prime: f64,
    times: &[usize],
    obs: Observables,
) -> Result<(Vec<Snapshot>, MpsState)> {
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
    let mut state = MpsState::new(params, config)?;
    let gate = step_gate(params, phi_prime);
    let mut out = Vec::with_capacity(times.len());
    let mut next = times.iter().peekable();
    for t in 0..=times.last().copied().unwrap_or(0) {
        if t > 0 {
            state.step(&gate)?;
        }
        if next.peek() == Some(&&t) {
            next.next();
            out.push(state.observe(t, obs)?);
        }
    }
    Ok((out, state))
}
