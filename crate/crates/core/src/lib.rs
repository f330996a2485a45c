//! Orthogonally invariant integration on tuples of vectors.
//!
//! A function of k vectors in R^m that depends only on mutual angles and
//! lengths is really a function of the k x k Gram matrix of inner
//! products. This crate makes that reduction computational:
//!
//! - [`linalg`] — vector tuples, packed Gram matrices, a semidefinite
//!   Cholesky factorization that tolerates rank deficiency, leading
//!   principal minors, and lifting a Gram matrix back to a tuple.
//! - [`euler`] — spherical angle coordinates on unit vectors, the
//!   rotations they generate, and recovery of angles from both.
//! - [`reduction`] — rotating a tuple to triangular coordinates by plane
//!   rotations, with the full angle schedule, the accumulated rotation,
//!   and the angular weight and volume swept by the schedules.
//! - [`measure`] — sphere, orthogonal-group, and truncated-frame
//!   volumes, and the pushforward density that converts integrals over
//!   tuples into integrals over Gram matrices.
//! - [`quadrature`] — Gauss-Hermite, generalized Gauss-Laguerre, and
//!   Gauss-Legendre rules used by the deterministic integration routes.
//! - [`integrate`] — invariant integrands evaluated four ways (ambient
//!   Monte Carlo, triangular-coordinate Monte Carlo and quadrature, and
//!   density-weighted Gram integration) with cross-method consistency
//!   checks.
//!
//! Errors are structured ([`Error`]) and distinguish invalid requests
//! from numerical failures; all randomness is seeded and reproducible.

pub mod error;
pub mod euler;
pub mod integrate;
pub mod linalg;
pub mod measure;
pub mod quadrature;
pub mod reduction;
pub mod sampling;

pub use error::{Error, Result};
pub use euler::{
    angles_from_rotation, angles_from_unit_vector, rotation_from_angles, vector_from_angles,
    EulerAngles, RotationMatrix, ANGLE_TOL,
};
pub use integrate::{
    builtin_integrands, compare_methods, diag_from_minors, integrand_by_name,
    integrate_ambient_mc, integrate_domain_w, integrate_orbit_u, jacobian_w_to_u,
    ConsistencyCheck, ConsistencyReport, DecayClass, IntegralEstimate, InvariantIntegrand,
    McConfig, Method, WScheme, WSchemeChoice,
};
pub use linalg::{
    gram, is_in_image, leading_minors, lift, semidefinite_cholesky, GramMatrix, TriangularFactor,
    VectorTuple, DEFAULT_TOL,
};
pub use measure::{
    hilbert_density, log_gamma, orthogonal_group_volume, sphere_volume, stiefel_volume,
    DensityValue,
};
pub use quadrature::{gauss_hermite, gauss_laguerre, gauss_legendre};
pub use reduction::{
    angular_volume, angular_volume_by_quadrature, angular_weight, plane_rotation, reduce,
    AngleSchedule, Reduction,
};
