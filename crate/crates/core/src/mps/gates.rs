//! On-site (6×6) and two-site (36×36) gates in the local basis `2q + s`.
//!
//! Every gate must map walker-occupied states to walker-occupied states, so it
//! splits into a vacuum block and a walker block; the engine only stores the
//! blocks.

use alloc::vec::Vec;

use super::basis::LocalBasisIndex;
use crate::walk::coin_matrix;
use crate::{Error, Result, C64};

/// Deviation from unitarity (and from walker-number conservation) tolerated
/// when a gate is built from a dense matrix.
pub const GATE_TOL: f64 = 1e-12;

/// What a gate implements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateTag {
    Coin,
    Interaction,
    CoinInteraction,
    ShiftLeft,
    ShiftRight,
    Field,
    Identity,
    Custom,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// `max |(G^H G - I)_{ij}|` for a row-major `n × n` matrix.
fn unitarity_deviation(g: &[C64], n: usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let dot: C64 = (0..n).map(|r| g[r * n + i].conj() * g[r * n + j]).sum();
            let want = if i == j { one() } else { zero() };
            worst = worst.max((dot - want).norm());
        }
    }
    worst
}

/// Gate acting on one site.
#[derive(Clone, Debug, PartialEq)]
pub struct OnsiteGate {
    tag: GateTag,
    /// Acts on the spin when the site is empty.
    pub(crate) vacuum: [[C64; 2]; 2],
    /// Acts on `2c + s` when the walker is present.
    pub(crate) walker: [[C64; 4]; 4],
}

impl OnsiteGate {
    /// Validates a dense 6×6 gate (row-major, basis `2q + s`).
    pub fn new(matrix: &[[C64; 6]; 6], tag: GateTag) -> Result<Self> {
        let flat: Vec<C64> = matrix.iter().flatten().copied().collect();
        let deviation = unitarity_deviation(&flat, 6);
        if deviation > GATE_TOL {
            return Err(Error::NonUnitaryGate { deviation });
        }
        for r in 0..6 {
            for c in 0..6 {
                if (r >= 2) != (c >= 2) && matrix[r][c].norm() > GATE_TOL {
                    return Err(Error::GateBreaksWalkerNumber);
                }
            }
        }
        let mut vacuum = [[zero(); 2]; 2];
        let mut walker = [[zero(); 4]; 4];
        for r in 0..2 {
            for c in 0..2 {
                vacuum[r][c] = matrix[r][c];
            }
        }
        for r in 0..4 {
            for c in 0..4 {
                walker[r][c] = matrix[r + 2][c + 2];
            }
        }
        Ok(Self { tag, vacuum, walker })
    }

    fn from_blocks(vacuum: [[C64; 2]; 2], walker: [[C64; 4]; 4], tag: GateTag) -> Self {
        Self { tag, vacuum, walker }
    }

    pub fn identity() -> Self {
        let mut w = [[zero(); 4]; 4];
        for k in 0..4 {
            w[k][k] = one();
        }
        Self::from_blocks([[one(), zero()], [zero(), one()]], w, GateTag::Identity)
    }

    /// `(1 ⊕ exp(-iθX)) ⊗ I₂`.
    pub fn coin(theta: f64) -> Self {
        let c = coin_matrix(theta);
        let id = [[one(), zero()], [zero(), one()]];
        Self::from_blocks(id, kron(&c, &id), GateTag::Coin)
    }

    /// `[1 ⊕ 0] ⊗ I₂ + [0 ⊕ I₂] ⊗ exp(-iφX)`: rotates the spin only where the
    /// walker is.
    pub fn interaction(phi: f64) -> Self {
        let id = [[one(), zero()], [zero(), one()]];
        Self::from_blocks(id, kron(&id, &coin_matrix(phi)), GateTag::Interaction)
    }

    /// Coin after interaction, as one gate.
    pub fn coin_interaction(theta: f64, phi: f64) -> Self {
        Self::coin(theta).then(&Self::interaction(phi)).with_tag(GateTag::CoinInteraction)
    }

    /// `I₃ ⊗ exp(-iφ′Z)`.
    pub fn field(phi_prime: f64) -> Self {
        let z = [[C64::from_polar(1.0, -phi_prime), zero()], [zero(), C64::from_polar(1.0, phi_prime)]];
        let id = [[one(), zero()], [zero(), one()]];
        Self::from_blocks(z, kron(&id, &z), GateTag::Field)
    }

    /// The product `self · first` (apply `first`, then `self`).
    pub fn then(&self, first: &Self) -> Self {
        let mut v = [[zero(); 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                v[r][c] = (0..2).map(|k| self.vacuum[r][k] * first.vacuum[k][c]).sum();
            }
        }
        let mut w = [[zero(); 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                w[r][c] = (0..4).map(|k| self.walker[r][k] * first.walker[k][c]).sum();
            }
        }
        Self::from_blocks(v, w, GateTag::Custom)
    }

    pub fn with_tag(mut self, tag: GateTag) -> Self {
        self.tag = tag;
        self
    }

    pub fn tag(&self) -> GateTag {
        self.tag
    }

    /// Dense 6×6 form.
    pub fn matrix(&self) -> [[C64; 6]; 6] {
        let mut m = [[zero(); 6]; 6];
        for r in 0..2 {
            for c in 0..2 {
                m[r][c] = self.vacuum[r][c];
            }
        }
        for r in 0..4 {
            for c in 0..4 {
                m[r + 2][c + 2] = self.walker[r][c];
            }
        }
        m
    }
}

fn kron(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> [[C64; 4]; 4] {
    let mut m = [[zero(); 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            m[r][c] = a[r / 2][c / 2] * b[r % 2][c % 2];
        }
    }
    m
}

/// Index into the 16 one-walker states of a bond: `w₁·2 + s₂` for the walker
/// on the left site, `8 + s₁·4 + w₂` for the walker on the right site.
pub(crate) fn walker_pair_to_local(m: usize) -> (usize, usize) {
    if m < 8 {
        (2 + m / 2, m % 2)
    } else {
        let m = m - 8;
        (m / 4, 2 + m % 4)
    }
}

/// Gate acting on two neighbouring sites.
#[derive(Clone, Debug, PartialEq)]
pub struct BondGate {
    tag: GateTag,
    /// On `(s₁, s₂)` when both sites are empty.
    pub(crate) vacuum: [[C64; 4]; 4],
    /// Nonzero entries `(row, col, value)` of the 16×16 one-walker block.
    pub(crate) walker: Vec<(usize, usize, C64)>,
    /// `true` when `vacuum` is the identity.
    pub(crate) vacuum_identity: bool,
}

impl BondGate {
    /// Validates a dense 36×36 gate, row-major over `σ₁ · 6 + σ₂`.
    pub fn new(matrix: &[C64], tag: GateTag) -> Result<Self> {
        if matrix.len() != 36 * 36 {
            return Err(Error::LengthMismatch { expected: 36 * 36, found: matrix.len() });
        }
        let deviation = unitarity_deviation(matrix, 36);
        if deviation > GATE_TOL {
            return Err(Error::NonUnitaryGate { deviation });
        }
        let walkers = |k: usize| (k / 6 >= 2) as u8 + (k % 6 >= 2) as u8;
        for r in 0..36 {
            for c in 0..36 {
                if walkers(r) != walkers(c) && matrix[r * 36 + c].norm() > GATE_TOL {
                    return Err(Error::GateBreaksWalkerNumber);
                }
            }
        }
        let mut vacuum = [[zero(); 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                vacuum[r][c] = matrix[((r / 2) * 6 + r % 2) * 36 + (c / 2) * 6 + c % 2];
            }
        }
        let mut walker = Vec::new();
        for r in 0..16 {
            let (a, b) = walker_pair_to_local(r);
            for c in 0..16 {
                let (x, y) = walker_pair_to_local(c);
                let v = matrix[(a * 6 + b) * 36 + x * 6 + y];
                if v.norm() > 0.0 {
                    walker.push((r, c, v));
                }
            }
        }
        let vacuum_identity = (0..4).all(|r| (0..4).all(|c| vacuum[r][c] == if r == c { one() } else { zero() }));
        Ok(Self { tag, vacuum, walker, vacuum_identity })
    }

    /// Dense permutation gate swapping the walker states `|q, 0⟩ ↔ |0, q⟩`
    /// (spins stay put) and acting as identity elsewhere.
    fn swap_walker(q: usize, tag: GateTag) -> Self {
        let mut m = alloc::vec![zero(); 36 * 36];
        for a in 0..6 {
            for b in 0..6 {
                let (qa, sa) = (a / 2, a % 2);
                let (qb, sb) = (b / 2, b % 2);
                let (na, nb) = if qa == q && qb == 0 {
                    (sa, 2 * q + sb)
                } else if qa == 0 && qb == q {
                    (2 * q + sa, sb)
                } else {
                    (a, b)
                };
                m[(na * 6 + nb) * 36 + a * 6 + b] = one();
            }
        }
        Self::new(&m, tag).expect("permutation gates are valid")
    }

    /// Moves a coin-`1` walker from the right site to the left one.
    ///
    /// Completed to a unitary by also moving a coin-`1` walker from the left
    /// site to the right one; within a left-to-right sweep that branch is what
    /// carries the walker across the periodic seam.
    pub fn shift_left() -> Self {
        Self::swap_walker(2, GateTag::ShiftLeft)
    }

    /// Moves a coin-`0` walker from the left site to the right one; completed
    /// like [`BondGate::shift_left`].
    pub fn shift_right() -> Self {
        Self::swap_walker(1, GateTag::ShiftRight)
    }

    pub fn identity() -> Self {
        let mut m = alloc::vec![zero(); 36 * 36];
        for k in 0..36 {
            m[k * 36 + k] = one();
        }
        Self::new(&m, GateTag::Identity).expect("identity is valid")
    }

    pub fn tag(&self) -> GateTag {
        self.tag
    }
}

/// Applies an on-site gate to a single-site 6-vector.
pub fn apply_onsite_vector(g: &OnsiteGate, v: &[C64; 6]) -> [C64; 6] {
    let m = g.matrix();
    let mut out = [zero(); 6];
    for r in 0..6 {
        out[r] = (0..6).map(|c| m[r][c] * v[c]).sum();
    }
    out
}

/// Combined index `2q + s`.
pub fn local(q: u8, s: u8) -> usize {
    LocalBasisIndex::new(q, s).expect("q < 3 and s < 2").combined()
}
