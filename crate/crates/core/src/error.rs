//! Crate-wide error type.
//!
//! Validation errors carry enough context to name the offending object (a
//! group element pair, an arrow, a label), because instance files are written
//! by hand and "invalid input" without coordinates is useless. Internal
//! consistency errors are reserved for situations the underlying theory rules
//! out; reaching one means a bug, not bad input.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of the reduction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Division by zero in ℚ(ζ_n).
    #[error("division by zero in cyclotomic arithmetic")]
    DivisionByZero,

    /// `embed` requires the source conductor to divide the target.
    #[error("cannot embed conductor {from} into conductor {to}: {from} does not divide {to}")]
    ConductorEmbed { from: u64, to: u64 },

    /// Matrix shapes incompatible with the requested operation.
    #[error("matrix shape mismatch: {context}")]
    ShapeMismatch { context: String },

    /// A multiplication table failed a group axiom.
    #[error("not a group: {0}")]
    GroupValidation(String),

    /// A vertex or arrow action table failed an action axiom.
    #[error("invalid action: {0}")]
    ActionValidation(String),

    /// An instance document is structurally invalid (bad reference, bad shape,
    /// bad scalar literal).
    #[error("invalid document: {0}")]
    Schema(String),

    /// A supplied representation failed validation (not a homomorphism, not
    /// irreducible, wrong count).
    #[error("invalid representation: {0}")]
    Representation(String),

    /// An element was passed to a projection-sensitive operation without
    /// being a corner element, i.e. θ ≠ ẽ·θ·ẽ.
    #[error("element is not of the form e~·θ·e~; project it first")]
    NotProjected,

    /// A skew term does not start and end at orbit representatives, so it has
    /// no canonical form.
    #[error("term not between orbit representatives: {0}")]
    NotCanonicalizable(String),

    /// The pairing received arguments with incompatible shape data.
    #[error("pairing mismatch: {0}")]
    PairingMismatch(String),

    /// A map claimed to be an intertwiner is not one (the pairing did not
    /// produce a scalar multiple of the identity).
    #[error("input is not an intertwiner: {0}")]
    NotIntertwiner(String),

    /// A condition the theory guarantees failed at runtime; indicates a bug.
    #[error("internal consistency failure: {0}")]
    Internal(String),

    /// I/O failure reading an instance or element file.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Malformed JSON.
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
