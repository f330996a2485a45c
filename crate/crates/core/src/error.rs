//! Crate-wide error type.
//!
//! One enum covers every failure mode so that callers composing several
//! stages (factorize, reduce, integrate) handle a single type. Variants
//! carry enough context to report *where* a numerical check failed, not
//! just that it did.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A symmetric matrix failed the semidefinite factorization: either a
    /// pivot was negative beyond tolerance, or a clamped-to-zero pivot left
    /// a nonzero residual column (which no positive-semidefinite matrix can).
    #[error("matrix is not positive semidefinite: pivot {pivot:.3e} at index {index}")]
    NotPositiveSemidefinite { index: usize, pivot: f64 },

    /// More vectors than ambient coordinates: the Gram image has no
    /// interior and none of the closed-form machinery applies.
    #[error("configuration k={k}, m={m} is out of range: need k <= m")]
    NotCoregular { k: usize, m: usize },

    /// A Gram matrix does not come from any tuple of vectors in the
    /// requested ambient dimension (it is not positive semidefinite).
    #[error("matrix is not a Gram matrix of any vector tuple: pivot {pivot:.3e} at index {index}")]
    NotInImage { index: usize, pivot: f64 },

    /// Cannot assign direction angles to (approximately) the zero vector.
    #[error("vector norm is below 1e-8; direction angles are undefined")]
    ZeroVector,

    /// The input matrix is not special orthogonal within tolerance.
    #[error(
        "matrix is not special orthogonal: orthonormality defect {ortho_defect:.3e}, det {det:.6}"
    )]
    NotSpecialOrthogonal { ortho_defect: f64, det: f64 },

    /// Angle recovery hit a pole: a polar cosine vanished, so the
    /// remaining angles are not determined by the input.
    #[error("degenerate angles: polar cosine at index {index} vanishes within tolerance")]
    DegenerateAngles { index: usize },

    /// The rotation is orthogonal but not generated by any single angle
    /// tuple; the best candidate reconstruction differs by `defect`.
    #[error("rotation is not generated by an angle tuple: reconstruction defect {defect:.3e}")]
    NotAngleGenerated { defect: f64 },

    /// A tuple with more vectors than coordinates cannot be reduced.
    #[error("dimension mismatch: k={k} vectors cannot be reduced in m={m} coordinates")]
    DimensionMismatch { k: usize, m: usize },

    /// An operation that requires an interior point (all diagonal entries
    /// positive) was handed a boundary point.
    #[error("boundary point: diagonal entry {index} is zero within tolerance")]
    BoundaryPoint { index: usize },

    /// `log_gamma` is only defined for positive arguments.
    #[error("log_gamma domain error: argument {x} is not positive")]
    GammaDomain { x: f64 },

    /// A rotation plane index outside `1..=m-1`.
    #[error("plane index {index} out of range 1..={limit}")]
    IndexOutOfRange { index: usize, limit: usize },

    /// Tensor quadrature requested for an integrand class it cannot
    /// handle (only Gaussian-decay integrands have matched weights).
    #[error("tensor quadrature unavailable for integrand '{integrand}': not Gaussian decay")]
    QuadratureUnavailable { integrand: String },

    /// The two views of an integrand disagree: evaluating on vectors and
    /// evaluating on their Gram matrix must give identical values.
    #[error(
        "integrand '{name}' is inconsistent at k={k}, m={m}: ambient and Gram views differ by {defect:.3e}"
    )]
    InconsistentIntegrand {
        name: String,
        k: usize,
        m: usize,
        defect: f64,
    },

    /// Malformed input: wrong shape, bad lengths, unparsable expression.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
