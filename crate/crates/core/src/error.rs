use thiserror::Error;

use crate::sdp::SolveStatus;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry in {0}")]
    NonFinite(String),

    #[error("instance has no constraints (m = 0)")]
    NoConstraints,

    #[error("invalid triplet in {context}: {reason}")]
    InvalidTriplet { context: String, reason: String },

    #[error("asymmetric input in {context} at ({i}, {j}): {a} vs {b}")]
    Asymmetric {
        context: String,
        i: usize,
        j: usize,
        a: f64,
        b: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no y >= 0 with S(y) positive semidefinite exists (dual side empty)")]
    DualSideEmpty,

    #[error("solver finished with status {0:?}")]
    Solver(SolveStatus),

    #[error("rank precondition violated: numerical rank is {0}, expected 1")]
    RankPrecondition(usize),

    #[error("coupling violated: |x + z| = {residual:.3e} exceeds {bound:.3e}")]
    CouplingViolated { residual: f64, bound: f64 },

    #[error("edge ({0}, {1}) has mixed signs; the sign-splitting transformation needs sign-definite edges")]
    NotSignDefinite(usize, usize),

    #[error("graph has a single connected component; nothing to connect")]
    NothingToConnect,

    #[error("no edges to perturb")]
    NoEdges,

    #[error("epsilon sequence must be positive and strictly decreasing")]
    NotDecreasing,
}
