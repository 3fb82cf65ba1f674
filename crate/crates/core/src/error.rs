//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by lattice arithmetic, generator construction, and fiber
/// analysis.
#[derive(Debug, Error)]
pub enum Error {
    /// A basis matrix is singular or otherwise not a lattice basis.
    #[error("not a lattice: {0}")]
    NotLattice(String),

    /// `index`/`coset_reps` were asked about a pair that is not nested.
    #[error("not a sublattice: {0}")]
    NotSublattice(String),

    /// `a_fiber` needs the translation group to contain the shift lattice.
    #[error("not a supergroup of the shift lattice: {0}")]
    NotSuperGroup(String),

    /// Operands live in different ambient dimensions.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Spectral queries on an (all-zero) fiber matrix.
    #[error("zero matrix: {0}")]
    ZeroMatrix(String),

    /// `reduce_generators` found every sampled fiber already at full rank.
    #[error("generator family is already minimal: {0}")]
    AlreadyMinimal(String),

    /// A generator whose declared support is not a bounded union of
    /// intervals cannot be enumerated against a lattice.
    #[error("unbounded support: {0}")]
    UnboundedSupport(String),

    /// Malformed textual input (lattice literals, rationals, presets, JSON).
    #[error("parse error: {0}")]
    Parse(String),

    /// Configuration rejected before any computation ran.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
