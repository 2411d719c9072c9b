use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Nonzero amplitude would leave an open lattice. The lattice is too small
    /// for the requested number of steps.
    #[error("walker amplitude would leave the open lattice at site index {site}")]
    EdgeOverflow { site: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("input is not unitary (max column-norm deviation {deviation:.3e})")]
    NonUnitaryInput { deviation: f64 },

    #[error("{requested} sectors requested, limit is {limit}")]
    BudgetExceeded { requested: u64, limit: u64 },

    #[error("orthogonality center at site {center}, but bond {bond} needs it at {bond} or {}", bond + 1)]
    CenterMisplaced { bond: usize, center: usize },

    #[error("bond {bond} needs dimension {needed}, above the hard cap {max}")]
    BondDimOverflow { bond: usize, needed: usize, max: usize },

    #[error("gate mixes walker-occupied and vacuum states")]
    GateBreaksWalkerNumber,

    #[error("gate is not unitary (deviation {deviation:.3e})")]
    NonUnitaryGate { deviation: f64 },

    #[error("probability at n={n} is not positive inside the fit window")]
    NonPositiveProbability { n: i64 },

    #[error("fit window holds {points} points, need at least 3")]
    DegenerateWindow { points: usize },

    #[error("fitted profile is not decaying (slope {slope:.3e})")]
    NonDecayingProfile { slope: f64 },

    #[error("{n_sites} sites exceeds the limit of {limit} for this engine")]
    TooManySites { n_sites: usize, limit: usize },

    #[error("linear algebra failure: {0}")]
    Linalg(&'static str),
}
