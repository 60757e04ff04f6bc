use thiserror::Error;

/// Errors raised by construction, evaluation, and analysis routines.
///
/// The CLI maps these onto its exit codes, so the split between variants is
/// part of the public contract: `Parse`/`Domain` are bad inputs, `Singular`
/// and `Numerical` are evaluation failures on otherwise valid inputs, and
/// `Unsupported`/`NotCommensurate` mean the operation cannot represent the
/// given factor at all.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed serialized input (JSON schema violations included).
    #[error("parse error: {0}")]
    Parse(String),

    /// An argument violates a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation hit a pole or a zero denominator at a concrete frequency.
    #[error("singularity at omega = {omega} rad/s: {what}")]
    Singular { omega: f64, what: String },

    /// A numeric routine failed its own accuracy or convergence guard.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The factor kind is valid but not handled by the requested operation.
    #[error("unsupported factor: {0}")]
    Unsupported(String),

    /// Factors do not share a common commensurate base order.
    #[error("not commensurate: {0}")]
    NotCommensurate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
