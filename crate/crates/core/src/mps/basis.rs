/// One of the six local states `|q⟩ ⊗ |s⟩` of a site.
///
/// `q = 0` is the walker vacuum, `q = 1` and `q = 2` are the walker present
/// with coin `0` or `1`; `s` is the `Z`-basis spin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LocalBasisIndex {
    pub q: u8,
    pub s: u8,
}

impl LocalBasisIndex {
    pub const DIM: usize = 6;

    pub fn new(q: u8, s: u8) -> Option<Self> {
        (q < 3 && s < 2).then_some(Self { q, s })
    }

    /// `2q + s`.
    pub fn combined(self) -> usize {
        2 * self.q as usize + self.s as usize
    }

    pub fn from_combined(k: usize) -> Option<Self> {
        (k < Self::DIM).then_some(Self { q: (k / 2) as u8, s: (k % 2) as u8 })
    }

    pub fn has_walker(self) -> bool {
        self.q != 0
    }

    /// Index `2c + s` inside the four walker-occupied states, where `c = q - 1`.
    pub fn walker_index(self) -> Option<usize> {
        self.has_walker().then(|| self.combined() - 2)
    }
}
